"""Bisection over the IESL temperature.

Smaller temperatures give less exploitable rest points but make convergence
harder, so the smallest temperature that still converges is searched for by
bisecting an interval ``(lo, hi]`` whose upper end converges and lower end
does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

WIDTH_RTOL = 1e-9


@dataclass
class Probe:
    eps: float
    converged: bool
    endpoint: bool = False
    nashconv: float | None = None


@dataclass
class TuneResult:
    history: list[Probe] = field(default_factory=list)
    interval: tuple[float, float] = (math.nan, math.nan)
    chosen_eps: float | None = None
    final_nashconv: float | None = None
    note: str = ""

    @property
    def probe_count(self) -> int:
        return len(self.history)

    @property
    def bisection_probes(self) -> list[float]:
        return [p.eps for p in self.history if not p.endpoint]


def max_bisection_probes(lo: float, hi: float, precision: float) -> int:
    return max(0, math.ceil(math.log2((hi - lo) / precision) - WIDTH_RTOL))


def bisect_eps(
    predicate: Callable[[float], bool | tuple[bool, float]],
    lo: float,
    hi: float,
    precision: float,
    check_endpoints: bool = True,
) -> TuneResult:
    """Bisect ``(lo, hi]`` on a convergence predicate.

    ``predicate(eps)`` returns ``converged`` or ``(converged, nashconv)``. The
    endpoints are checked first (unless ``check_endpoints`` is false, in which
    case ``hi`` is assumed to converge and ``lo`` to diverge); if ``hi``
    diverges or ``lo`` converges no bisection is done. ``lo = 0`` is allowed
    and never probed, since a zero temperature is not a valid softmax.
    """
    if not (0 <= lo < hi) or not precision > 0:
        raise ValueError(f"invalid interval ({lo}, {hi}] with precision {precision}")
    result = TuneResult()

    def probe(eps: float, endpoint: bool) -> Probe:
        out = predicate(eps)
        conv, nc = (out if isinstance(out, tuple) else (out, None))
        p = Probe(eps=eps, converged=bool(conv), endpoint=endpoint, nashconv=nc)
        result.history.append(p)
        return p

    hi_nc = None
    if check_endpoints:
        top = probe(hi, True)
        if not top.converged:
            result.interval = (lo, hi)
            result.note = "upper end does not converge"
            return result
        hi_nc = top.nashconv
        bottom = probe(lo, True) if lo > 0 else None
        if bottom is not None and bottom.converged:
            result.interval = (lo, min(hi, lo + precision))
            result.chosen_eps = lo
            result.final_nashconv = bottom.nashconv
            result.note = "lower end already converges"
            return result

    chosen_nc = hi_nc
    while hi - lo > precision * (1 + WIDTH_RTOL):
        mid = round((lo + hi) / 2, 12)
        p = probe(mid, False)
        if p.converged:
            hi, chosen_nc = mid, p.nashconv
        else:
            lo = mid
    result.interval = (lo, hi)
    result.chosen_eps = hi
    result.final_nashconv = chosen_nc
    return result
