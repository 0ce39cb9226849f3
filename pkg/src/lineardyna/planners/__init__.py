from .config import CONTROL_ALGORITHMS, POLICY_EVAL_ALGORITHMS, PlannerConfig, make_planner
from .control import DynaControlMG, LinearSarsa, action_values, dyna_control_step, greedy_action
from .policy_eval import TD0, DynaMG, DynaPWMA, DynaRandom
from .queue import PRIORITY_FLOOR, SweepQueue
from .state import restore_planner, save_planner
from .updates import check_finite, rg_update, td0_update

__all__ = [
    "PlannerConfig",
    "make_planner",
    "POLICY_EVAL_ALGORITHMS",
    "CONTROL_ALGORITHMS",
    "TD0",
    "DynaRandom",
    "DynaPWMA",
    "DynaMG",
    "LinearSarsa",
    "DynaControlMG",
    "greedy_action",
    "action_values",
    "dyna_control_step",
    "SweepQueue",
    "PRIORITY_FLOOR",
    "td0_update",
    "rg_update",
    "check_finite",
    "save_planner",
    "restore_planner",
]
