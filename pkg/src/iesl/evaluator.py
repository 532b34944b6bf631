"""Exact best responses, NashConv and the entropy deviation bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from iesl.game.policy import pure_policy
from iesl.game.tree import GameTree
from iesl.game.values import compute_reach, edge_probabilities, expected_values

NEGATIVE_TOL = 1e-9


@dataclass
class BestResponseResult:
    player: int
    br_choice: np.ndarray  # chosen action index for each of the player's infosets
    br_policy: np.ndarray  # the input profile with the player's part replaced by the best response
    br_value: float
    baseline_value: float

    @property
    def exploitability(self) -> float:
        return self.br_value - self.baseline_value


@dataclass
class NashConvResult:
    nashconv: float
    exploitability: np.ndarray
    utilities: np.ndarray
    best_responses: list[BestResponseResult] = field(repr=False, default_factory=list)


@dataclass
class DeviationReport:
    eps: float
    action_count: int
    horizon: int
    discount: float
    bound: float
    measured_deviation: float
    exploitability: np.ndarray

    @property
    def satisfied(self) -> bool:
        return self.measured_deviation <= self.bound + NEGATIVE_TOL


def _player_infosets(tree: GameTree, player: int) -> np.ndarray:
    return np.array([s.id for s in tree.infosets if s.player == player], dtype=np.int64)


def best_response(
    tree: GameTree,
    policy: np.ndarray,
    player: int,
    baseline_value: float | None = None,
    external: np.ndarray | None = None,
) -> BestResponseResult:
    """Deterministic best response of ``player`` to the rest of ``policy``.

    Infosets are resolved deepest-first; each picks the action maximizing the
    external-reach-weighted sum of member action values (lowest index on ties,
    and for infosets the opponents never reach).
    """
    if not 0 <= player < tree.num_players:
        raise ValueError(f"invalid player {player} for a {tree.num_players}-player game")
    policy = tree.check_policy(policy)
    if external is None:
        external = compute_reach(tree, policy).external[player]
    if baseline_value is None:
        baseline_value = float(expected_values(tree, policy).utilities[player])
    if tree.infosets_level_aligned:
        choice, value = _br_levelwise(tree, policy, player, external)
    else:
        choice, value = _br_by_own_depth(tree, policy, player, external)
    profile = policy.copy()
    mine = _player_infosets(tree, player)
    chosen = pure_policy(tree, choice)
    mask = tree.sa_player == player
    profile[mask] = chosen[mask]
    return BestResponseResult(
        player=player,
        br_choice=choice[mine],
        br_policy=profile,
        br_value=value,
        baseline_value=float(baseline_value),
    )


def _argmax_rows(tree: GameTree, scores: np.ndarray, infosets: np.ndarray) -> np.ndarray:
    width = tree.max_actions
    padded = np.full((len(infosets), width), -np.inf)
    counts = np.diff(tree.sa_offset)[infosets]
    rows = np.repeat(np.arange(len(infosets)), counts)
    cols = np.concatenate([np.arange(c) for c in counts]) if len(infosets) else np.zeros(0, dtype=np.int64)
    starts = tree.sa_offset[infosets]
    padded[rows, cols] = scores[np.repeat(starts, counts) + cols]
    return np.argmax(padded, axis=1)


def _br_levelwise(tree: GameTree, policy: np.ndarray, player: int, external: np.ndarray):
    prob = edge_probabilities(tree, policy)
    disc = tree.edge_discount
    reward = tree.reward_t[player] if tree.reward_t is not None else None
    V = tree.payoff_t[player].copy()
    choice = np.zeros(tree.num_infosets, dtype=np.int64)
    for plan in reversed(tree.plans):
        lo, hi = plan.child_lo, plan.child_hi
        q = disc[lo:hi] * V[lo:hi]
        if reward is not None:
            q = q + reward[lo:hi]
        mine = plan.dec_player == player
        if mine.any():
            child = plan.dec_child[mine]
            par = plan.dec_parent[mine]
            sa = plan.dec_sa[mine]
            scores = np.bincount(sa, weights=external[par] * q[child - lo], minlength=tree.num_sa)
            isets = np.unique(tree.infoset_of[par])
            choice[isets] = _argmax_rows(tree, scores, isets)
            taken = tree.action_index[child] == choice[tree.infoset_of[par]]
            p = prob[lo:hi].copy()
            p[child - lo] = taken
        else:
            p = prob[lo:hi]
        V[plan.parents] = np.add.reduceat(q * p, plan.starts)
    return choice, float(V[0])


def _br_by_own_depth(tree: GameTree, policy: np.ndarray, player: int, external: np.ndarray):
    mine = _player_infosets(tree, player)
    depth = np.array([tree.infosets[s].depth for s in mine], dtype=np.int64)
    child, par, pl, sa = tree.dec_edges
    edge_mask = pl == player
    child, par, sa = child[edge_mask], par[edge_mask], sa[edge_mask]
    edge_depth = np.array([tree.infosets[s].depth for s in tree.infoset_of[par]], dtype=np.int64)
    choice = np.zeros(tree.num_infosets, dtype=np.int64)
    profile = policy.copy()
    slots = tree.sa_player == player
    for d in range(int(depth.max(initial=-1)), -1, -1):
        vals = expected_values(tree, profile)
        sel = edge_depth == d
        scores = np.bincount(
            sa[sel], weights=external[par[sel]] * vals.Q[player, child[sel]], minlength=tree.num_sa
        )
        isets = mine[depth == d]
        choice[isets] = _argmax_rows(tree, scores, isets)
        profile[slots] = pure_policy(tree, choice)[slots]
    value = float(expected_values(tree, profile).utilities[player])
    return choice, value


def nashconv(tree: GameTree, policy: np.ndarray) -> NashConvResult:
    policy = tree.check_policy(policy)
    reach = compute_reach(tree, policy)
    utilities = expected_values(tree, policy).utilities
    brs = [
        best_response(tree, policy, i, baseline_value=utilities[i], external=reach.external[i])
        for i in range(tree.num_players)
    ]
    expl = np.array([br.exploitability for br in brs])
    if np.any(expl < -NEGATIVE_TOL):
        raise RuntimeError(f"best response worse than the current policy: {expl.tolist()}")
    expl = np.maximum(expl, 0.0)
    return NashConvResult(nashconv=float(expl.sum()), exploitability=expl, utilities=utilities, best_responses=brs)


def deviation_bound(eps: float, action_count: int, horizon: int, discount: float = 1.0) -> float:
    """eps * log|A| * sum_{k<T} gamma^k, with the geometric sum in closed form."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if discount == 1.0:
        geometric = float(horizon)
    else:
        geometric = (1.0 - discount**horizon) / (1.0 - discount)
    return eps * math.log(action_count) * geometric


def deviation_check(tree: GameTree, policy: np.ndarray, eps: float, result: NashConvResult | None = None) -> DeviationReport:
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if result is None:
        result = nashconv(tree, policy)
    horizon = tree.max_depth
    bound = deviation_bound(eps, tree.max_actions, horizon, tree.discount)
    return DeviationReport(
        eps=eps,
        action_count=tree.max_actions,
        horizon=horizon,
        discount=tree.discount,
        bound=bound,
        measured_deviation=float(result.exploitability.max(initial=0.0)),
        exploitability=result.exploitability,
    )


__all__ = [
    "BestResponseResult",
    "DeviationReport",
    "NashConvResult",
    "best_response",
    "deviation_bound",
    "deviation_check",
    "nashconv",
]
