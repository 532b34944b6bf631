"""Behavioral policies stored as flat vectors over sequence slots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from iesl.game.tree import GameTree

SIMPLEX_TOL = 1e-12


@dataclass
class BehavioralPolicy:
    tree: GameTree
    probs: np.ndarray

    def __post_init__(self):
        self.probs = self.tree.check_policy(self.probs)

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __getitem__(self, infoset: int) -> np.ndarray:
        return self.probs[self.tree.infoset_slice(infoset)]

    @classmethod
    def uniform(cls, tree: GameTree) -> "BehavioralPolicy":
        return cls(tree, tree.uniform_policy())

    @classmethod
    def from_dict(cls, tree: GameTree, table: dict[int, "np.typing.ArrayLike"]) -> "BehavioralPolicy":
        if set(table) != set(range(tree.num_infosets)):
            raise ValueError("policy domain mismatch: infoset ids differ from the game's")
        probs = np.concatenate([np.asarray(table[s], dtype=float) for s in range(tree.num_infosets)])
        return cls(tree, probs)

    def to_dict(self) -> dict[int, np.ndarray]:
        return {s: self[s].copy() for s in range(self.tree.num_infosets)}

    def violations(self) -> list[str]:
        return simplex_violations(self.tree, self.probs)


def simplex_violations(tree: GameTree, probs: np.ndarray, tol: float = SIMPLEX_TOL) -> list[str]:
    out = []
    if probs.shape != (tree.num_sa,):
        return [f"policy has shape {probs.shape}, expected ({tree.num_sa},)"]
    if not np.all(np.isfinite(probs)):
        out.append("policy has non-finite entries")
    neg = np.flatnonzero(probs < 0)
    if len(neg):
        out.append(f"negative probabilities at infosets {sorted(set(tree.sa_infoset[neg].tolist()))[:10]}")
    sums = infoset_sums(tree, probs)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if len(bad):
        out.append(f"rows not summing to 1 at infosets {bad[:10].tolist()}")
    return out


def infoset_sums(tree: GameTree, values: np.ndarray) -> np.ndarray:
    if tree.num_infosets == 0:
        return np.zeros(0)
    return np.add.reduceat(values, tree.sa_offset[:-1])


def normalize(tree: GameTree, weights: np.ndarray) -> np.ndarray:
    """Normalize nonnegative weights per infoset; all-zero rows become uniform."""
    sums = infoset_sums(tree, weights)[tree.sa_infoset]
    out = np.divide(weights, sums, out=np.zeros_like(weights, dtype=float), where=sums > 0)
    empty = sums <= 0
    if empty.any():
        out[empty] = tree.uniform_policy()[empty]
    return out


def random_policy(tree: GameTree, rng: np.random.Generator, concentration: float = 1.0) -> np.ndarray:
    """Draw every infoset's distribution from a symmetric Dirichlet (strictly positive a.s.)."""
    g = rng.gamma(concentration, size=tree.num_sa)
    g = np.maximum(g, 1e-12)
    return normalize(tree, g)


def sequence_form(tree: GameTree, policy: np.ndarray) -> np.ndarray:
    """Realization weight of every sequence: the owner's reach times the action probability."""
    real = np.zeros(tree.num_sa)
    for idx, parent in tree.sequence_plan:
        base = np.where(parent >= 0, real[np.maximum(parent, 0)], 1.0)
        real[idx] = base * policy[idx]
    return real


def own_reach_of_infosets(tree: GameTree, realization: np.ndarray) -> np.ndarray:
    """Owner's reach probability of every infoset, read from its parent sequence."""
    parent = tree.infoset_parent_sa
    return np.where(parent >= 0, realization[np.maximum(parent, 0)], 1.0)


def pure_policy(tree: GameTree, choice: np.ndarray) -> np.ndarray:
    """One-hot policy from one action index per infoset."""
    probs = np.zeros(tree.num_sa)
    probs[tree.sa_offset[:-1] + np.asarray(choice, dtype=np.int64)] = 1.0
    return probs
