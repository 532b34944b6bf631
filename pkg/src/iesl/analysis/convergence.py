"""Rest-point convergence detection for score dynamics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_WINDOW = 100
DEFAULT_THRESHOLD_SCALE = 1e-3  # times the game's payoff spread


@dataclass
class ConvergenceVerdict:
    converged: bool
    residual_series: np.ndarray
    window: int
    threshold: float
    policy_drift_series: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def trailing_max(self) -> float:
        return float(np.max(self.residual_series[-self.window :]))


def detect_convergence(residuals, window: int = DEFAULT_WINDOW, threshold: float = 1e-3, drifts=None) -> ConvergenceVerdict:
    """Converged iff every one of the last ``window`` residuals is at most ``threshold``."""
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    series = np.asarray(residuals, dtype=float)
    if len(series) < window:
        raise ValueError(f"need at least {window} residuals, got {len(series)}")
    tail = series[-window:]
    converged = bool(np.all(np.isfinite(tail)) and np.max(tail) <= threshold)
    return ConvergenceVerdict(
        converged=converged,
        residual_series=series,
        window=window,
        threshold=threshold,
        policy_drift_series=np.asarray(drifts if drifts is not None else [], dtype=float),
    )


def iterations_to_threshold(residuals, threshold: float) -> int | None:
    """First index after which the residual stays at or below ``threshold`` for good."""
    series = np.asarray(residuals, dtype=float)
    above = np.flatnonzero(~(series <= threshold))
    if len(above) == 0:
        return 0
    last = int(above[-1]) + 1
    return last if last < len(series) else None
