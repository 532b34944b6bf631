"""Flat, index-addressed game trees.

Nodes are stored in breadth-first order, so the children of every node occupy a
contiguous id range and every tree level is a contiguous slice. All per-node
quantities live in numpy arrays indexed by node id; per-(infoset, action)
quantities live in flat vectors indexed by a "sequence slot" (``sa``).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Sequence

import numpy as np

CHANCE = 0
DECISION = 1
TERMINAL = 2

KIND_NAMES = {CHANCE: "chance", DECISION: "decision", TERMINAL: "terminal"}


@dataclass(frozen=True)
class InfoSet:
    id: int
    player: int
    actions: tuple[str, ...]
    members: tuple[int, ...]
    depth: int
    key: Hashable = None

    @property
    def num_actions(self) -> int:
        return len(self.actions)


# Expansion results returned by a game's ``expand`` callback.
@dataclass
class Terminal:
    payoffs: Sequence[float]


@dataclass
class Chance:
    outcomes: list[tuple[str, float, Any]]  # (label, prob, child state)
    advance_time: bool = True


@dataclass
class Decision:
    player: int
    infoset_key: Hashable
    actions: list[tuple[str, Any]]  # (label, child state)
    # Optional per-child rewards (one vector per action), and whether the
    # children start a new timestep (discount applies across the edge).
    rewards: list[Sequence[float]] | None = None
    advance_time: bool = True


@dataclass
class _LevelPlan:
    # children of decision nodes in this level
    dec_child: np.ndarray
    dec_parent: np.ndarray
    dec_player: np.ndarray
    dec_sa: np.ndarray
    # children of chance nodes in this level
    ch_child: np.ndarray
    ch_parent: np.ndarray
    ch_prob: np.ndarray
    # reduceat layout for the bottom-up pass: the level's children slice and
    # the start offset (relative to that slice) of each parent's block
    child_lo: int
    child_hi: int
    parents: np.ndarray
    starts: np.ndarray


@dataclass
class GameTree:
    name: str
    num_players: int
    kind: np.ndarray
    player: np.ndarray
    infoset_of: np.ndarray
    parent: np.ndarray
    child_start: np.ndarray
    child_count: np.ndarray
    action_index: np.ndarray
    chance_prob: np.ndarray
    payoff: np.ndarray  # (num_nodes, n); nonzero only at terminals
    edge_reward: np.ndarray  # (num_nodes, n); reward received on entering the node
    timestep: np.ndarray
    level: np.ndarray
    labels: list[str]
    infosets: list[InfoSet]
    discount: float = 1.0
    zero_sum: bool = True
    # number of nodes representing the initial state distribution (the deal)
    initial_chance_nodes: int = 0
    params: dict = field(default_factory=dict)

    # ------------------------------------------------------------------ sizes
    @property
    def num_nodes(self) -> int:
        return len(self.kind)

    @property
    def num_infosets(self) -> int:
        return len(self.infosets)

    @cached_property
    def sa_offset(self) -> np.ndarray:
        counts = np.array([s.num_actions for s in self.infosets], dtype=np.int64)
        off = np.zeros(len(counts) + 1, dtype=np.int64)
        np.cumsum(counts, out=off[1:])
        return off

    @property
    def num_sa(self) -> int:
        return int(self.sa_offset[-1])

    @cached_property
    def sa_infoset(self) -> np.ndarray:
        """Infoset id of every sequence slot."""
        counts = np.diff(self.sa_offset)
        return np.repeat(np.arange(self.num_infosets), counts)

    @cached_property
    def sa_player(self) -> np.ndarray:
        players = np.array([s.player for s in self.infosets], dtype=np.int64)
        return players[self.sa_infoset]

    @cached_property
    def node_sa(self) -> np.ndarray:
        """Sequence slot of the edge entering each node (-1 unless the parent decides)."""
        out = np.full(self.num_nodes, -1, dtype=np.int64)
        nonroot = self.parent >= 0
        par = self.parent[nonroot]
        dec = self.kind[par] == DECISION
        child_ids = np.nonzero(nonroot)[0][dec]
        iset = self.infoset_of[par[dec]]
        out[child_ids] = self.sa_offset[iset] + self.action_index[child_ids]
        return out

    @cached_property
    def edge_discount(self) -> np.ndarray:
        """gamma ** (t(child) - t(parent)) for each non-root node (1 at the root)."""
        out = np.ones(self.num_nodes)
        if self.discount != 1.0:
            nonroot = self.parent >= 0
            dt = self.timestep[nonroot] - self.timestep[self.parent[nonroot]]
            out[nonroot] = self.discount ** dt
        return out

    @cached_property
    def decision_nodes(self) -> np.ndarray:
        return np.nonzero(self.kind == DECISION)[0]

    @cached_property
    def terminal_nodes(self) -> np.ndarray:
        return np.nonzero(self.kind == TERMINAL)[0]

    @cached_property
    def infoset_representative(self) -> np.ndarray:
        return np.array([s.members[0] for s in self.infosets], dtype=np.int64)

    @cached_property
    def infoset_parent_sa(self) -> np.ndarray:
        """Sequence slot of the acting player's previous own action (-1 if none)."""
        out = np.full(self.num_infosets, -1, dtype=np.int64)
        node_sa = self.node_sa
        for s in self.infosets:
            child = s.members[0]
            node = int(self.parent[child])
            while node >= 0:
                if self.kind[node] == DECISION and self.player[node] == s.player:
                    out[s.id] = node_sa[child]
                    break
                child = node
                node = int(self.parent[node])
        return out

    @cached_property
    def sequence_plan(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per own depth: (sequence slots, slot of each one's parent sequence or -1)."""
        depth = np.array([s.depth for s in self.infosets], dtype=np.int64)
        sa_depth = depth[self.sa_infoset]
        parent = self.infoset_parent_sa[self.sa_infoset]
        plan = []
        for d in range(int(depth.max(initial=-1)) + 1):
            idx = np.flatnonzero(sa_depth == d)
            plan.append((idx, parent[idx]))
        return plan

    @cached_property
    def infosets_level_aligned(self) -> bool:
        """True when all members of every infoset sit on the same tree level."""
        dec = self.decision_nodes
        iset = self.infoset_of[dec]
        lvl = self.level[dec]
        lo = np.full(self.num_infosets, np.iinfo(np.int64).max)
        hi = np.full(self.num_infosets, -1)
        np.minimum.at(lo, iset, lvl)
        np.maximum.at(hi, iset, lvl)
        return bool(np.all(lo == hi))

    @cached_property
    def max_actions(self) -> int:
        return max((s.num_actions for s in self.infosets), default=1)

    @cached_property
    def own_decision_horizon(self) -> np.ndarray:
        """Per player: the maximum number of own decisions on any root-to-leaf path."""
        horizon = np.zeros(self.num_players, dtype=np.int64)
        for s in self.infosets:
            horizon[s.player] = max(horizon[s.player], s.depth + 1)
        return horizon

    @property
    def max_depth(self) -> int:
        return int(self.own_decision_horizon.max(initial=0))

    @cached_property
    def payoff_spread(self) -> float:
        term = self.payoff[self.terminal_nodes]
        if term.size == 0:
            return 0.0
        return float(term.max() - term.min())

    @cached_property
    def payoff_t(self) -> np.ndarray:
        return np.ascontiguousarray(self.payoff.T)

    @cached_property
    def reward_t(self) -> np.ndarray | None:
        """Transposed edge rewards, or None when the game only pays at terminals."""
        if not np.any(self.edge_reward):
            return None
        return np.ascontiguousarray(self.edge_reward.T)

    # ------------------------------------------------------------------ plans
    @cached_property
    def level_bounds(self) -> list[tuple[int, int]]:
        bounds = []
        edges = np.flatnonzero(np.diff(self.level)) + 1
        starts = np.concatenate([[0], edges])
        ends = np.concatenate([edges, [self.num_nodes]])
        for lo, hi in zip(starts, ends):
            bounds.append((int(lo), int(hi)))
        return bounds

    @cached_property
    def plans(self) -> list[_LevelPlan]:
        """Per-level index plans; plans[d] describes the edges from level d to d+1."""
        plans = []
        node_sa = self.node_sa
        bounds = self.level_bounds
        for d in range(len(bounds) - 1):
            lo, hi = bounds[d + 1]
            children = np.arange(lo, hi)
            par = self.parent[children]
            pk = self.kind[par]
            dmask = pk == DECISION
            cmask = pk == CHANCE
            plo, phi = bounds[d]
            parents = np.arange(plo, phi)
            parents = parents[self.child_count[parents] > 0]
            starts = self.child_start[parents] - lo
            plans.append(
                _LevelPlan(
                    dec_child=children[dmask],
                    dec_parent=par[dmask],
                    dec_player=self.player[par[dmask]].astype(np.int64),
                    dec_sa=node_sa[children[dmask]],
                    ch_child=children[cmask],
                    ch_parent=par[cmask],
                    ch_prob=self.chance_prob[children[cmask]],
                    child_lo=lo,
                    child_hi=hi,
                    parents=parents,
                    starts=starts,
                )
            )
        return plans

    @cached_property
    def dec_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All decision edges: (child, parent, acting player, sequence slot)."""
        child = np.nonzero(self.node_sa >= 0)[0]
        par = self.parent[child]
        return child, par, self.player[par].astype(np.int64), self.node_sa[child]

    # ------------------------------------------------------------------ policies
    def uniform_policy(self) -> np.ndarray:
        counts = np.diff(self.sa_offset)
        return 1.0 / np.repeat(counts, counts).astype(float)

    def infoset_slice(self, infoset: int) -> slice:
        return slice(int(self.sa_offset[infoset]), int(self.sa_offset[infoset + 1]))

    def check_policy(self, policy: np.ndarray) -> np.ndarray:
        policy = np.asarray(policy, dtype=float)
        if policy.shape != (self.num_sa,):
            raise ValueError(
                f"policy domain mismatch: expected {self.num_sa} entries for "
                f"{self.num_infosets} infosets of {self.name}, got shape {policy.shape}"
            )
        return policy

    # ------------------------------------------------------------------ counts
    def history_counts(self) -> dict[str, int]:
        kinds = np.bincount(self.kind, minlength=3)
        return {
            "all_nodes": int(self.num_nodes),
            "decision_terminal": int(kinds[DECISION] + kinds[TERMINAL]),
            "post_deal": int(self.num_nodes - self.initial_chance_nodes),
        }

    # ------------------------------------------------------------------ export
    def dump(self) -> str:
        """Canonical text dump: one node per line in depth-first, action order."""
        lines = [
            f"# game {self.name} players={self.num_players} nodes={self.num_nodes} "
            f"infosets={self.num_infosets} discount={self.discount!r}"
        ]
        stack = [0]
        while stack:
            h = stack.pop()
            k = int(self.kind[h])
            lo, cnt = int(self.child_start[h]), int(self.child_count[h])
            children = list(range(lo, lo + cnt))
            fields = [
                str(h),
                KIND_NAMES[k],
                str(int(self.player[h])),
                str(int(self.infoset_of[h])),
                "[" + ",".join(map(str, children)) + "]",
            ]
            if k == CHANCE:
                fields.append("[" + ",".join(repr(float(self.chance_prob[c])) for c in children) + "]")
            else:
                fields.append("[]")
            if k == TERMINAL:
                fields.append("[" + ",".join(repr(float(v)) for v in self.payoff[h]) + "]")
            else:
                fields.append("[]")
            if self.labels[h]:
                fields.append(self.labels[h])
            lines.append(" ".join(fields))
            stack.extend(reversed(children))
        return "\n".join(lines) + "\n"


def build_tree(
    name: str,
    num_players: int,
    root_state: Any,
    expand: Callable[[Any], Terminal | Chance | Decision],
    label: Callable[[Any], str] = str,
    discount: float = 1.0,
    zero_sum: bool = True,
    initial_chance_nodes: int = 0,
    params: dict | None = None,
    validate: bool = True,
) -> GameTree:
    """Expand a game breadth-first from ``root_state`` into a :class:`GameTree`.

    ``expand`` maps a state to a :class:`Terminal`, :class:`Chance` or
    :class:`Decision`. Infosets are keyed by ``(player, infoset_key)`` and
    numbered in order of first appearance.
    """
    kind: list[int] = []
    player: list[int] = []
    iset_of: list[int] = []
    parent: list[int] = []
    child_start: list[int] = []
    child_count: list[int] = []
    action_index: list[int] = []
    chance_prob: list[float] = []
    timestep: list[int] = []
    level: list[int] = []
    labels: list[str] = []
    payoffs: dict[int, Sequence[float]] = {}
    rewards: dict[int, Sequence[float]] = {}

    iset_ids: dict[tuple[int, Hashable], int] = {}
    iset_info: list[dict] = []

    def add(state, par, a_idx, prob, t, lvl):
        kind.append(-1)
        player.append(-1)
        iset_of.append(-1)
        parent.append(par)
        child_start.append(0)
        child_count.append(0)
        action_index.append(a_idx)
        chance_prob.append(prob)
        timestep.append(t)
        level.append(lvl)
        labels.append(label(state))
        return len(kind) - 1

    queue: deque = deque()
    queue.append((add(root_state, -1, -1, 1.0, 0, 0), root_state))
    while queue:
        h, state = queue.popleft()
        node = expand(state)
        t, lvl = timestep[h], level[h]
        if isinstance(node, Terminal):
            kind[h] = TERMINAL
            payoffs[h] = tuple(float(v) for v in node.payoffs)
            continue
        child_start[h] = len(kind)
        if isinstance(node, Chance):
            kind[h] = CHANCE
            child_count[h] = len(node.outcomes)
            step = 1 if node.advance_time else 0
            for a, (_, prob, child) in enumerate(node.outcomes):
                c = add(child, h, a, float(prob), t + step, lvl + 1)
                queue.append((c, child))
        elif isinstance(node, Decision):
            kind[h] = DECISION
            player[h] = node.player
            key = (node.player, node.infoset_key)
            labels_a = tuple(lbl for lbl, _ in node.actions)
            if key not in iset_ids:
                iset_ids[key] = len(iset_info)
                iset_info.append({"player": node.player, "actions": labels_a, "members": [], "key": key})
            s = iset_ids[key]
            info = iset_info[s]
            if info["actions"] != labels_a:
                raise ValueError(f"infoset {key!r}: inconsistent action lists {info['actions']} vs {labels_a}")
            info["members"].append(h)
            iset_of[h] = s
            child_count[h] = len(node.actions)
            step = 1 if node.advance_time else 0
            for a, (_, child) in enumerate(node.actions):
                c = add(child, h, a, 1.0, t + step, lvl + 1)
                if node.rewards is not None:
                    rewards[c] = tuple(float(v) for v in node.rewards[a])
                queue.append((c, child))
        else:
            raise TypeError(f"expand() returned {type(node).__name__}")

    n_nodes = len(kind)
    payoff = np.zeros((n_nodes, num_players))
    for h, v in payoffs.items():
        payoff[h] = v
    edge_reward = np.zeros((n_nodes, num_players))
    for h, v in rewards.items():
        edge_reward[h] = v

    tree_arrays = dict(
        kind=np.array(kind, dtype=np.int8),
        player=np.array(player, dtype=np.int16),
        infoset_of=np.array(iset_of, dtype=np.int64),
        parent=np.array(parent, dtype=np.int64),
        child_start=np.array(child_start, dtype=np.int64),
        child_count=np.array(child_count, dtype=np.int64),
        action_index=np.array(action_index, dtype=np.int64),
        chance_prob=np.array(chance_prob),
        payoff=payoff,
        edge_reward=edge_reward,
        timestep=np.array(timestep, dtype=np.int64),
        level=np.array(level, dtype=np.int64),
    )
    depths = _own_depths(tree_arrays, iset_info)
    infosets = [
        InfoSet(
            id=s,
            player=info["player"],
            actions=info["actions"],
            members=tuple(info["members"]),
            depth=depths[s],
            key=info["key"][1],
        )
        for s, info in enumerate(iset_info)
    ]
    tree = GameTree(
        name=name,
        num_players=num_players,
        labels=labels,
        infosets=infosets,
        discount=float(discount),
        zero_sum=zero_sum,
        initial_chance_nodes=initial_chance_nodes,
        params=dict(params or {}),
        **tree_arrays,
    )
    if validate:
        from iesl.game.validate import validate_tree

        violations = validate_tree(tree)
        if violations:
            raise InvalidTreeError(violations)
    return tree


class InvalidTreeError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"game tree failed validation: {head}{more}")


def _own_depths(arrays: dict, iset_info: list[dict]) -> list[int]:
    """Number of prior own decisions, read off the first member of each infoset."""
    kind, player, parent = arrays["kind"], arrays["player"], arrays["parent"]
    depths = []
    for info in iset_info:
        h = info["members"][0]
        p = info["player"]
        count = 0
        node = parent[h]
        while node >= 0:
            if kind[node] == DECISION and player[node] == p:
                count += 1
            node = parent[node]
        depths.append(count)
    return depths
