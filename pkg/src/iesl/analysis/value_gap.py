"""Numerical check of the advantage decomposition of a unilateral policy change.

For player ``i`` switching from ``pi^i`` to ``pi_dag^i`` the value gap at the
root equals the expected discounted sum of ``pi``'s advantages along
trajectories generated by ``(pi_dag^i, pi^-i)``. The right-hand side is
computed here by explicit trajectory enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from iesl.game.policy import random_policy
from iesl.game.tree import DECISION, TERMINAL, GameTree
from iesl.game.values import edge_probabilities, expected_values


@dataclass
class ValueGapReport:
    discrepancies: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def max_discrepancy(self) -> float:
        return float(np.max(self.discrepancies, initial=0.0))


def value_gap(tree: GameTree, policy: np.ndarray, deviation: np.ndarray, player: int) -> float:
    """u^i(pi_dag^i, pi^-i) - u^i(pi) from two expected-value passes."""
    mixed = _substitute(tree, policy, deviation, player)
    return float(expected_values(tree, mixed).utilities[player] - expected_values(tree, policy).utilities[player])


def advantage_sum_by_enumeration(tree: GameTree, policy: np.ndarray, deviation: np.ndarray, player: int) -> float:
    """E[sum_k gamma^t(h_k) A_pi(h_k, a_k)] over trajectories of (pi_dag^i, pi^-i)."""
    vals = expected_values(tree, policy)
    prob = edge_probabilities(tree, _substitute(tree, policy, deviation, player))
    total = 0.0
    # (node, trajectory probability, accumulated discounted advantage)
    stack = [(0, 1.0, 0.0)]
    while stack:
        h, p, acc = stack.pop()
        if tree.kind[h] == TERMINAL:
            total += p * acc
            continue
        lo = int(tree.child_start[h])
        for c in range(lo, lo + int(tree.child_count[h])):
            gain = 0.0
            if tree.kind[h] == DECISION and tree.player[h] == player:
                adv = vals.Q[player, c] - vals.V[player, h]
                gain = tree.discount ** int(tree.timestep[h]) * adv
            stack.append((c, p * prob[c], acc + gain))
    return total


def _substitute(tree: GameTree, policy: np.ndarray, deviation: np.ndarray, player: int) -> np.ndarray:
    mixed = np.array(policy, dtype=float)
    mine = tree.sa_player == player
    mixed[mine] = np.asarray(deviation)[mine]
    return mixed


def verify_value_gap(tree: GameTree, trials: int, seed: int | None = 0) -> ValueGapReport:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    lhs, rhs = [], []
    for t in range(trials):
        player = t % tree.num_players
        pi = random_policy(tree, rng)
        dev = random_policy(tree, rng)
        lhs.append(value_gap(tree, pi, dev, player))
        rhs.append(advantage_sum_by_enumeration(tree, pi, dev, player))
    lhs, rhs = np.array(lhs), np.array(rhs)
    return ValueGapReport(discrepancies=np.abs(lhs - rhs), lhs=lhs, rhs=rhs)
