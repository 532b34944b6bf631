"""Learning dynamics: IESL and the CFR / FP / RD baselines."""

from iesl.solvers.advantage import AdvantageMap, advantage_map, regret_matching, softmax_choice
from iesl.solvers.dynamics import (
    KINDS,
    SolverState,
    average_policy,
    cfr_step,
    current_policy,
    evaluation_policy,
    fp_step,
    iesl_step,
    init_state,
    rd_step,
    rest_residual,
    step,
)

__all__ = [
    "KINDS",
    "AdvantageMap",
    "SolverState",
    "advantage_map",
    "average_policy",
    "cfr_step",
    "current_policy",
    "evaluation_policy",
    "fp_step",
    "iesl_step",
    "init_state",
    "rd_step",
    "regret_matching",
    "rest_residual",
    "softmax_choice",
    "step",
]
