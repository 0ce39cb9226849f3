import numpy as np


class DivergenceError(RuntimeError):
    """Raised when the value parameters stop being finite or blow past the guard."""

    def __init__(self, step, detail=""):
        self.step = step
        msg = f"value parameters diverged at update {step}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SingularSystemError(np.linalg.LinAlgError):
    """A linear system the caller asked us to solve is singular or numerically so."""


class IllPosedPlanningError(SingularSystemError):
    """``I - gamma F^T`` has no usable inverse, so the model's values are not finite."""


class ConfigError(ValueError):
    pass
