"""Explicit game trees, reach probabilities and expected values."""

from iesl.game.build import build_game
from iesl.game.policy import BehavioralPolicy
from iesl.game.tree import CHANCE, DECISION, TERMINAL, GameTree, InfoSet, InvalidTreeError
from iesl.game.validate import Violation, validate_tree
from iesl.game.values import ReachDecomposition, ValueResult, compute_reach, expected_values

__all__ = [
    "CHANCE",
    "DECISION",
    "TERMINAL",
    "BehavioralPolicy",
    "GameTree",
    "InfoSet",
    "InvalidTreeError",
    "ReachDecomposition",
    "ValueResult",
    "Violation",
    "build_game",
    "compute_reach",
    "expected_values",
    "validate_tree",
]
