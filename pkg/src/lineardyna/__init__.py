"""Dyna-style planning with linear function approximation and prioritized sweeping."""
from . import analysis, envs, features, harness, model, planners
from .errors import ConfigError, DivergenceError, IllPosedPlanningError, SingularSystemError
from .features import SparseVec, TileCoder, boyan_features, dot, tile_code, unit_basis
from .model import ActionModelSet, LinearModel, TransitionDataset, fit_least_squares

__version__ = "0.1.0"
