"""Entry point for constructing the supported games by name."""

from __future__ import annotations

from iesl.game import poker, synthetic
from iesl.game.tree import GameTree

POKER_GAMES = {("kuhn", 2), ("kuhn", 3), ("leduc", 2), ("leduc", 3)}

# published reference sizes: (histories, infosets)
REFERENCE_COUNTS = {
    "kuhn-2": (54, 12),
    "kuhn-3": (600, 48),
    "leduc-2": (9450, 936),
    "leduc-3": (396120, 13878),
}

SYNTHETIC_GAMES = ("matching-pennies", "two-step")


def build_game(family: str, n_players: int = 2, payoffs=None, **options) -> GameTree:
    """Build and validate a game.

    ``family`` is ``kuhn``, ``leduc`` or ``synthetic``. Synthetic games take
    either an explicit ``payoffs`` tensor of shape ``(n, |A_1|, ..., |A_n|)``
    or ``name=`` one of :data:`SYNTHETIC_GAMES`.
    """
    family = family.lower()
    if family == "synthetic":
        if payoffs is not None:
            tree = synthetic.normal_form(payoffs, **options)
            if tree.num_players != n_players:
                raise ValueError(f"payoff tensor describes {tree.num_players} players, not {n_players}")
            return tree
        name = options.pop("name", "matching-pennies")
        if name == "matching-pennies":
            return synthetic.matching_pennies()
        if name == "two-step":
            return synthetic.two_step_game(**options)
        raise ValueError(f"unknown synthetic game {name!r}; choose from {SYNTHETIC_GAMES}")
    if (family, n_players) not in POKER_GAMES:
        raise ValueError(f"unsupported game {family}-{n_players}; supported: {sorted(POKER_GAMES)} and synthetic")
    if family == "kuhn":
        return poker.kuhn(n_players, **options)
    return poker.leduc(n_players, **options)


def parse_game_name(name: str) -> tuple[str, int, dict]:
    """``kuhn-2`` -> ("kuhn", 2, {}); ``matching-pennies`` -> ("synthetic", 2, {"name": ...})."""
    if name in SYNTHETIC_GAMES:
        return "synthetic", 2, {"name": name}
    family, _, players = name.rpartition("-")
    if not family or not players.isdigit():
        raise ValueError(f"cannot parse game name {name!r} (expected e.g. kuhn-2, leduc-3, matching-pennies)")
    return family, int(players), {}


def game_by_name(name: str, **options) -> GameTree:
    family, n, extra = parse_game_name(name)
    return build_game(family, n, **extra, **options)
