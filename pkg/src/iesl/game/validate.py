"""Structural checks for :class:`~iesl.game.tree.GameTree`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from iesl.game.tree import CHANCE, DECISION, TERMINAL, GameTree

PROB_TOL = 1e-12
ZERO_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    invariant: str
    message: str
    node: int | None = None
    infoset: int | None = None

    def __str__(self) -> str:
        where = []
        if self.node is not None:
            where.append(f"node {self.node}")
        if self.infoset is not None:
            where.append(f"infoset {self.infoset}")
        loc = f" ({', '.join(where)})" if where else ""
        return f"[{self.invariant}]{loc} {self.message}"


def validate_tree(tree: GameTree) -> list[Violation]:
    """Return every invariant violation found in ``tree`` (empty list means valid)."""
    out: list[Violation] = []
    n = tree.num_nodes
    if n == 0:
        return [Violation("single-root", "tree has no nodes")]

    roots = np.flatnonzero(tree.parent < 0)
    if len(roots) != 1 or roots[0] != 0:
        out.append(Violation("single-root", f"expected exactly one root at id 0, found {roots.tolist()}"))

    # tree shape: every non-root node is listed as a child exactly once, by its parent
    seen = np.zeros(n, dtype=np.int64)
    for h in range(n):
        lo, cnt = int(tree.child_start[h]), int(tree.child_count[h])
        if tree.kind[h] == TERMINAL:
            if cnt:
                out.append(Violation("tree", "terminal node has children", node=h))
            continue
        if cnt == 0:
            out.append(Violation("tree", "non-terminal node without children", node=h))
            continue
        if lo < 0 or lo + cnt > n:
            out.append(Violation("tree", "child range out of bounds", node=h))
            continue
        seen[lo : lo + cnt] += 1
        bad = np.flatnonzero(tree.parent[lo : lo + cnt] != h)
        for c in bad:
            out.append(Violation("tree", f"child {lo + c} does not name {h} as parent", node=int(lo + c)))
    for c in np.flatnonzero(seen[1:] != 1) + 1:
        out.append(Violation("tree", f"node reachable from {int(seen[c])} parent slots", node=int(c)))

    # chance distributions
    for h in np.flatnonzero(tree.kind == CHANCE):
        lo, cnt = int(tree.child_start[h]), int(tree.child_count[h])
        probs = tree.chance_prob[lo : lo + cnt]
        if (probs < 0).any():
            out.append(Violation("chance-distribution", "negative outcome probability", node=int(h)))
        if abs(probs.sum() - 1.0) > PROB_TOL:
            out.append(Violation("chance-distribution", f"outcome probabilities sum to {probs.sum()!r}", node=int(h)))

    # terminal payoffs
    if tree.payoff.shape != (n, tree.num_players):
        out.append(Violation("payoffs", f"payoff array has shape {tree.payoff.shape}"))
    elif tree.zero_sum:
        term = tree.terminal_nodes
        sums = tree.payoff[term].sum(axis=1) + tree.edge_reward[term].sum(axis=1)
        for h in term[np.abs(sums) > ZERO_SUM_TOL]:
            out.append(Violation("zero-sum", f"payoffs sum to {float(tree.payoff[h].sum())!r}", node=int(h)))

    out.extend(_check_infosets(tree))
    return out


def _check_infosets(tree: GameTree) -> list[Violation]:
    out: list[Violation] = []
    owner: dict[int, int] = {}
    for s in tree.infosets:
        if not s.members:
            out.append(Violation("infoset-members", "infoset has no members", infoset=s.id))
            continue
        for h in s.members:
            if h in owner:
                out.append(
                    Violation(
                        "one-infoset-per-node",
                        f"node belongs to infosets {owner[h]} and {s.id}",
                        node=h,
                        infoset=s.id,
                    )
                )
                continue
            owner[h] = s.id
            if tree.kind[h] != DECISION:
                out.append(Violation("infoset-members", "member is not a decision node", node=h, infoset=s.id))
            elif tree.player[h] != s.player:
                out.append(
                    Violation(
                        "infoset-members",
                        f"member acted on by player {int(tree.player[h])}, infoset belongs to {s.player}",
                        node=h,
                        infoset=s.id,
                    )
                )
            if tree.child_count[h] != s.num_actions:
                out.append(
                    Violation(
                        "infoset-actions",
                        f"member has {int(tree.child_count[h])} children for {s.num_actions} actions",
                        node=h,
                        infoset=s.id,
                    )
                )
    for h in tree.decision_nodes:
        if int(h) not in owner:
            out.append(Violation("one-infoset-per-node", "decision node belongs to no infoset", node=int(h)))

    # perfect recall and own-depth consistency
    for s in tree.infosets:
        if not s.members:
            continue
        ref = _own_history(tree, s.members[0], s.player, owner)
        for h in s.members[1:]:
            hist = _own_history(tree, h, s.player, owner)
            if hist != ref:
                out.append(
                    Violation(
                        "perfect-recall",
                        f"own history {hist} differs from {ref} at member {s.members[0]}",
                        node=h,
                        infoset=s.id,
                    )
                )
            elif len(hist) != s.depth:
                out.append(Violation("infoset-depth", "member depth differs from infoset depth", node=h, infoset=s.id))
    return out


def _own_history(tree: GameTree, h: int, player: int, owner: dict[int, int]) -> list[tuple[int, int]]:
    seq = []
    child = h
    node = int(tree.parent[h])
    while node >= 0:
        if tree.kind[node] == DECISION and tree.player[node] == player:
            seq.append((owner.get(node, -1), int(tree.action_index[child])))
        child = node
        node = int(tree.parent[node])
    seq.reverse()
    return seq
