"""Tuned per-game, per-solver hyperparameters and iteration budgets.

The score dynamics are explicit Euler discretizations; with a softmax at
temperature eps their stable step size shrinks roughly like eps squared, so
small temperatures come with small steps and long budgets.
"""

from __future__ import annotations

from pathlib import Path

from iesl.harness.config import ConfigError, parse_config_text

SOLVER_ORDER = ("iesl", "cfr", "fp", "rd")

BUDGETS = {
    "default": {"kuhn-2": 500_000, "kuhn-3": 500_000, "leduc-2": 400_000, "leduc-3": 20_000},
    "extended": {"kuhn-2": 500_000, "kuhn-3": 500_000, "leduc-2": 400_000, "leduc-3": 100_000},
}

_RD = {"eps": 1.0, "step": 0.1}

PARAMS = {
    "kuhn-2": {"iesl": {"eps": 0.003, "step": 4e-5}, "rd": _RD},
    "kuhn-3": {"iesl": {"eps": 0.01, "step": 1e-5}, "rd": _RD},
    "leduc-2": {"iesl": {"eps": 0.025, "step": 1e-4}, "rd": _RD},
    "leduc-3": {"iesl": {"eps": 0.07, "step": 2e-4}, "rd": _RD},
}

FALLBACK_BUDGET = 10_000
FALLBACK_PARAMS = {"iesl": {"eps": 0.05, "step": 1e-3}, "rd": _RD}


def budget_for(game: str, profile: str = "default") -> int:
    if profile not in BUDGETS:
        raise ConfigError(f"unknown profile {profile!r}; choose from {sorted(BUDGETS)}")
    return BUDGETS[profile].get(game, FALLBACK_BUDGET)


def params_for(game: str, solver: str, params_dir: str | Path | None = None) -> dict:
    """Tuned parameters; a ``<game>_<solver>.cfg`` file in ``params_dir`` overrides them."""
    params = dict(PARAMS.get(game, FALLBACK_PARAMS).get(solver, {}))
    if params_dir is not None:
        path = Path(params_dir) / f"{game}_{solver}.cfg"
        if path.exists():
            params.update(parse_config_text(path.read_text()))
    return params
