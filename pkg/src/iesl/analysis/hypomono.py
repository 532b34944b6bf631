"""Sampled estimate of local hypomonotonicity of the advantage operator.

For policies ``pi`` near an anchor ``pi_a`` the probe measures

    ratio = sum_i <pi^i - pi_a^i, w^i(pi) - w^i(pi_a)> / sum_i |pi^i - pi_a^i|^2

and reports the largest sampled ratio as an estimate of ``mu``. The primary
inner product runs over (infoset, action) coordinates; a secondary one weights
each coordinate by the anchor's external reach of its infoset.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from iesl.game.tree import GameTree
from iesl.solvers.advantage import advantage_map

log = logging.getLogger(__name__)

MAX_RESAMPLES = 100


@dataclass
class HypomonotonicityProbe:
    anchor: np.ndarray
    samples: list[np.ndarray]
    ratios: np.ndarray
    weighted_ratios: np.ndarray

    @property
    def mu_estimate(self) -> float:
        return float(np.max(self.ratios))

    @property
    def mu_estimate_weighted(self) -> float:
        return float(np.max(self.weighted_ratios))

    def consistent_with(self, mu: float) -> bool:
        return bool(np.all(self.ratios <= mu))


def monotonicity_ratio(tree: GameTree, policy, anchor, w_policy=None, w_anchor=None, weights=None) -> float:
    if w_policy is None:
        w_policy = advantage_map(tree, policy).w
    if w_anchor is None:
        w_anchor = advantage_map(tree, anchor).w
    diff = np.asarray(policy) - np.asarray(anchor)
    weights = np.ones(tree.num_sa) if weights is None else weights
    den = float(np.sum(weights * diff * diff))
    if den <= 0:
        raise ValueError("ratio undefined for identical policies")
    return float(np.sum(weights * diff * (w_policy - w_anchor))) / den


def sample_near(tree: GameTree, anchor: np.ndarray, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Mix a Dirichlet(1) policy into the anchor with a weight keeping it within L-inf ``radius``."""
    beta = rng.uniform(0.0, min(1.0, radius))
    g = np.maximum(rng.gamma(1.0, size=tree.num_sa), 1e-300)
    sums = np.add.reduceat(g, tree.sa_offset[:-1])[tree.sa_infoset]
    return (1.0 - beta) * anchor + beta * (g / sums)


def probe_hypomonotonicity(
    tree: GameTree,
    anchor,
    n_samples: int,
    radius: float,
    seed: int | None = 0,
) -> HypomonotonicityProbe:
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if not radius > 0:
        raise ValueError("radius must be positive")
    anchor = tree.check_policy(anchor)
    if np.any(anchor <= 0):
        raise ValueError("anchor policy must be strictly positive")
    if radius > 1:
        log.warning("radius %.3g exceeds the simplex diameter; clamped to 1", radius)
    rng = np.random.default_rng(seed)
    base = advantage_map(tree, anchor)
    weights = base.denominator[tree.sa_infoset]
    samples, ratios, weighted = [], [], []
    for _ in range(n_samples):
        for _ in range(MAX_RESAMPLES):
            pi = sample_near(tree, anchor, radius, rng)
            diff = pi - anchor
            if np.sum(diff * diff) > 0 and np.sum(weights * diff * diff) > 0:
                break
        else:
            raise RuntimeError("could not draw a policy distinct from the anchor")
        w = advantage_map(tree, pi).w
        samples.append(pi)
        ratios.append(monotonicity_ratio(tree, pi, anchor, w, base.w))
        weighted.append(monotonicity_ratio(tree, pi, anchor, w, base.w, weights=weights))
    return HypomonotonicityProbe(
        anchor=anchor,
        samples=samples,
        ratios=np.array(ratios),
        weighted_ratios=np.array(weighted),
    )
