"""Reach probabilities and expected values under a behavioral policy.

A policy is a flat float vector over the tree's sequence slots (see
:attr:`GameTree.sa_offset`). Both passes walk the tree level by level, so the
cost is a handful of vectorized numpy operations per tree level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from iesl.game.tree import GameTree


@dataclass
class ReachDecomposition:
    own: np.ndarray  # (n, num_nodes): product of player i's action probabilities
    chance: np.ndarray  # (num_nodes,)
    external: np.ndarray  # (n, num_nodes): chance times all other players' contributions

    @property
    def full(self) -> np.ndarray:
        return self.chance * np.prod(self.own, axis=0)


@dataclass
class ValueResult:
    utilities: np.ndarray  # (n,) expected utility from the root
    V: np.ndarray  # (n, num_nodes)
    Q: np.ndarray  # (n, num_nodes); Q[:, c] is the action value of the edge entering c

    def advantage(self, tree: GameTree) -> np.ndarray:
        """A(h, a) = Q(h, a) - V(h), indexed like Q by the child node."""
        adv = np.zeros_like(self.Q)
        nonroot = tree.parent >= 0
        adv[:, nonroot] = self.Q[:, nonroot] - self.V[:, tree.parent[nonroot]]
        return adv


def edge_probabilities(tree: GameTree, policy: np.ndarray) -> np.ndarray:
    """Probability of the edge entering every node (1 at the root)."""
    prob = tree.chance_prob.copy()
    child, _, _, sa = tree.dec_edges
    prob[child] = policy[sa]
    return prob


def compute_reach(tree: GameTree, policy: np.ndarray) -> ReachDecomposition:
    policy = tree.check_policy(policy)
    n, N = tree.num_players, tree.num_nodes
    own = np.ones((n, N))
    chance = np.ones(N)
    for plan in tree.plans:
        lo, hi = plan.child_lo, plan.child_hi
        par = tree.parent[lo:hi]
        own[:, lo:hi] = own[:, par]
        chance[lo:hi] = chance[par]
        own[plan.dec_player, plan.dec_child] *= policy[plan.dec_sa]
        chance[plan.ch_child] *= plan.ch_prob
    return ReachDecomposition(own=own, chance=chance, external=external_reach(own, chance))


def external_reach(own: np.ndarray, chance: np.ndarray) -> np.ndarray:
    n = own.shape[0]
    ext = np.empty_like(own)
    for i in range(n):
        others = [j for j in range(n) if j != i]
        ext[i] = chance * np.prod(own[others], axis=0) if others else chance
    return ext


def expected_values(tree: GameTree, policy: np.ndarray) -> ValueResult:
    """Single bottom-up pass computing V at every node and Q on every edge."""
    policy = tree.check_policy(policy)
    prob = edge_probabilities(tree, policy)
    return _values_from_edge_probs(tree, prob)


def _values_from_edge_probs(tree: GameTree, prob: np.ndarray) -> ValueResult:
    payoff_t = tree.payoff_t
    reward_t = tree.reward_t
    disc = tree.edge_discount
    V = payoff_t.copy()
    Q = np.zeros_like(V)
    for plan in reversed(tree.plans):
        lo, hi = plan.child_lo, plan.child_hi
        q = disc[lo:hi] * V[:, lo:hi]
        if reward_t is not None:
            q += reward_t[:, lo:hi]
        Q[:, lo:hi] = q
        V[:, plan.parents] = np.add.reduceat(q * prob[lo:hi], plan.starts, axis=1)
    return ValueResult(utilities=V[:, 0].copy(), V=V, Q=Q)

