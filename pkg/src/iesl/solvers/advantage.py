"""Entropy-regularized choice map and the infoset-averaged advantage map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from iesl.game.tree import GameTree
from iesl.game.values import ReachDecomposition, ValueResult, compute_reach, expected_values


def softmax_choice(tree: GameTree, scores: np.ndarray, eps: float) -> np.ndarray:
    """Per-infoset softmax of ``scores / eps`` (max-subtracted, strictly positive)."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (tree.num_sa,):
        raise ValueError(f"score table has shape {scores.shape}, expected ({tree.num_sa},)")
    starts = tree.sa_offset[:-1]
    if len(starts) == 0:
        return np.zeros(0)
    row_max = np.maximum.reduceat(scores, starts)[tree.sa_infoset]
    z = np.exp((scores - row_max) / eps)
    return z / np.add.reduceat(z, starts)[tree.sa_infoset]


@dataclass
class AdvantageMap:
    w: np.ndarray  # per sequence slot
    numerator: np.ndarray  # per sequence slot: sum_h weight(h) * A(h, a)
    denominator: np.ndarray  # per infoset: sum_h weight(h)
    reach: ReachDecomposition
    values: ValueResult

    @property
    def reached(self) -> np.ndarray:
        return self.denominator > 0


def advantage_map(tree: GameTree, policy: np.ndarray, weighting: str = "external") -> AdvantageMap:
    """Average the acting player's advantages over each infoset's member histories.

    ``weighting="external"`` weights members by chance-and-opponent reach (the
    counterfactual form); ``"full"`` uses the full reach probability. Under
    perfect recall the two agree wherever the owner's reach is positive.
    Infosets with zero total weight get an all-zero row.
    """
    policy = tree.check_policy(policy)
    reach = compute_reach(tree, policy)
    values = expected_values(tree, policy)
    child, par, pl, sa = tree.dec_edges
    if weighting == "external":
        weight_nodes = reach.external
    elif weighting == "full":
        weight_nodes = reach.full[None, :].repeat(tree.num_players, axis=0)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    weight = weight_nodes[pl, par]
    adv = values.Q[pl, child] - values.V[pl, par]
    numerator = np.bincount(sa, weights=weight * adv, minlength=tree.num_sa)
    dec = tree.decision_nodes
    denominator = np.bincount(
        tree.infoset_of[dec],
        weights=weight_nodes[tree.player[dec].astype(np.int64), dec],
        minlength=tree.num_infosets,
    )
    den_sa = denominator[tree.sa_infoset]
    w = np.divide(numerator, den_sa, out=np.zeros(tree.num_sa), where=den_sa > 0)
    return AdvantageMap(w=w, numerator=numerator, denominator=denominator, reach=reach, values=values)


def regret_matching(tree: GameTree, regrets: np.ndarray) -> np.ndarray:
    """Positive-part normalization per infoset; uniform where no regret is positive."""
    pos = np.maximum(regrets, 0.0)
    starts = tree.sa_offset[:-1]
    sums = np.add.reduceat(pos, starts)[tree.sa_infoset] if len(starts) else np.zeros(0)
    out = tree.uniform_policy()
    np.divide(pos, sums, out=out, where=sums > 0)
    return out
