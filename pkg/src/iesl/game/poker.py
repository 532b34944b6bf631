"""Kuhn and Leduc poker for 2 or 3 players, expanded exhaustively.

Rules follow the usual OpenSpiel-style variants:

* Kuhn: deck of ``n + 1`` cards, ante 1, a single bet of 1. Before a bet each
  player in turn may pass or bet; once someone bets every other player gets
  exactly one chance to call or fold.
* Leduc: ``ranks`` ranks (3 by default, for any player count) in two suits,
  ante 1, two rounds with bet sizes 2 and 4 and at most ``raise_cap`` bets per
  round. Folding is only legal when facing a bet. One public card is revealed between rounds; a pair with the public
  card beats any high card, ties split the pot.

The private deal is a single chance node at the root (the initial state
distribution); Leduc additionally has a chance node for the public card.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import permutations

from iesl.game.tree import Chance, Decision, GameTree, Terminal, build_tree

KUHN_PASS, KUHN_BET = "p", "b"


# --------------------------------------------------------------------- Kuhn


@dataclass(frozen=True)
class _KuhnState:
    cards: tuple[int, ...] | None
    history: str = ""


def _kuhn_expand(n: int):
    deck = range(n + 1)
    deals = list(permutations(deck, n))

    def expand(state: _KuhnState):
        if state.cards is None:
            p = 1.0 / len(deals)
            return Chance([(",".join(map(str, d)), p, _KuhnState(d)) for d in deals])
        h = state.history
        first_bet = h.find(KUHN_BET)
        if first_bet < 0:
            if len(h) == n:
                return Terminal(_kuhn_showdown(state.cards, range(n), n, bettors=()))
            acting = len(h)
        else:
            responses = len(h) - first_bet - 1
            if responses == n - 1:
                bettor = first_bet
                callers = [
                    (bettor + 1 + j) % n for j in range(n - 1) if h[first_bet + 1 + j] == KUHN_BET
                ]
                contenders = sorted([bettor, *callers])
                return Terminal(_kuhn_showdown(state.cards, contenders, n, bettors=contenders))
            acting = (first_bet + 1 + responses) % n
        key = (state.cards[acting], h)
        return Decision(
            acting,
            key,
            [(a, replace(state, history=h + a)) for a in (KUHN_PASS, KUHN_BET)],
        )

    return expand


def _kuhn_showdown(cards, contenders, n, bettors):
    contrib = [1.0 + (1.0 if i in bettors else 0.0) for i in range(n)]
    pot = sum(contrib)
    winner = max(contenders, key=lambda i: cards[i])
    return [(pot if i == winner else 0.0) - contrib[i] for i in range(n)]


def _kuhn_label(state: _KuhnState) -> str:
    if state.cards is None:
        return "deal"
    return ",".join(map(str, state.cards)) + "|" + state.history


def kuhn(n_players: int = 2, validate: bool = True) -> GameTree:
    if n_players not in (2, 3):
        raise ValueError(f"kuhn poker supports 2 or 3 players, got {n_players}")
    return build_tree(
        f"kuhn-{n_players}",
        n_players,
        _KuhnState(None),
        _kuhn_expand(n_players),
        label=_kuhn_label,
        initial_chance_nodes=1,
        params={"deck": n_players + 1, "ante": 1, "bet": 1},
        validate=validate,
    )


# --------------------------------------------------------------------- Leduc

FOLD, CALL, RAISE = "f", "c", "r"


@dataclass(frozen=True)
class _LeducState:
    private: tuple[int, ...] | None
    public: int | None = None
    round: int = 0
    history: tuple[str, ...] = ("",)  # one action string per round
    contrib: tuple[float, ...] = ()
    folded: tuple[bool, ...] = ()
    to_act: int = 0
    pending: int = 0  # players still to act before the round closes
    stake: float = 1.0  # amount every active player must match
    raises: int = 0


class _LeducRules:
    def __init__(self, n: int, ranks: int, raise_cap: int, bets: tuple[float, float]):
        self.n = n
        self.ranks = ranks
        self.raise_cap = raise_cap
        self.bets = bets
        # cards are numbered rank * 2 + suit
        self.deck = tuple(range(2 * ranks))
        self.deals = list(permutations(self.deck, n))

    def rank(self, card: int) -> int:
        return card // 2

    def start_round(self, state: _LeducState, rnd: int) -> _LeducState:
        active = [i for i in range(self.n) if not state.folded[i]]
        return replace(
            state,
            round=rnd,
            to_act=active[0],
            pending=len(active),
            raises=0,
        )

    def next_active(self, state: _LeducState, i: int) -> int:
        for step in range(1, self.n + 1):
            j = (i + step) % self.n
            if not state.folded[j]:
                return j
        raise AssertionError("no active player")

    def expand(self, state: _LeducState):
        n = self.n
        if state.private is None:
            p = 1.0 / len(self.deals)
            return Chance(
                [
                    (
                        ",".join(map(str, d)),
                        p,
                        self.start_round(
                            _LeducState(private=d, contrib=(1.0,) * n, folded=(False,) * n),
                            0,
                        ),
                    )
                    for d in self.deals
                ]
            )
        active = [i for i in range(n) if not state.folded[i]]
        if len(active) == 1:
            return Terminal(self.payout(state, active))
        if state.pending == 0:
            if state.round == 0:
                remaining = [c for c in self.deck if c not in state.private]
                p = 1.0 / len(remaining)
                return Chance(
                    [
                        (
                            str(c),
                            p,
                            self.start_round(replace(state, public=c, history=state.history + ("",)), 1),
                        )
                        for c in remaining
                    ]
                )
            return Terminal(self.payout(state, self.showdown_winners(state, active)))

        i = state.to_act
        bet = self.bets[state.round]
        actions = []
        facing = state.contrib[i] < state.stake
        if facing:
            actions.append((FOLD, self.act(state, FOLD, bet)))
        actions.append((CALL, self.act(state, CALL, bet)))
        if state.raises < self.raise_cap:
            actions.append((RAISE, self.act(state, RAISE, bet)))
        key = (state.private[i], state.public, state.history)
        return Decision(i, key, actions)

    def act(self, state: _LeducState, action: str, bet: float) -> _LeducState:
        i = state.to_act
        contrib = list(state.contrib)
        folded = list(state.folded)
        stake, raises, pending = state.stake, state.raises, state.pending - 1
        if action == FOLD:
            folded[i] = True
        elif action == CALL:
            contrib[i] = stake
        else:
            stake += bet
            contrib[i] = stake
            raises += 1
            pending = sum(1 for j in range(self.n) if not folded[j]) - 1
        history = state.history[:-1] + (state.history[-1] + action,)
        nxt = replace(
            state,
            contrib=tuple(contrib),
            folded=tuple(folded),
            stake=stake,
            raises=raises,
            pending=pending,
            history=history,
        )
        if sum(1 for f in folded if not f) > 1 and pending > 0:
            nxt = replace(nxt, to_act=self.next_active(nxt, i))
        return nxt

    def showdown_winners(self, state: _LeducState, active: list[int]) -> list[int]:
        pub = self.rank(state.public)

        def strength(i):
            r = self.rank(state.private[i])
            return (1 if r == pub else 0, r)

        best = max(strength(i) for i in active)
        return [i for i in active if strength(i) == best]

    def payout(self, state: _LeducState, winners: list[int]) -> list[float]:
        pot = sum(state.contrib)
        share = pot / len(winners)
        return [(share if i in winners else 0.0) - state.contrib[i] for i in range(self.n)]


def _leduc_label(state: _LeducState) -> str:
    if state.private is None:
        return "deal"
    pub = "" if state.public is None else str(state.public)
    return ",".join(map(str, state.private)) + "|" + pub + "|" + "/".join(state.history)


def leduc(
    n_players: int = 2,
    ranks: int = 3,
    raise_cap: int = 2,
    bets: tuple[float, float] = (2.0, 4.0),
    validate: bool = True,
) -> GameTree:
    if n_players not in (2, 3):
        raise ValueError(f"leduc poker supports 2 or 3 players, got {n_players}")
    rules = _LeducRules(n_players, ranks, raise_cap, bets)
    return build_tree(
        f"leduc-{n_players}",
        n_players,
        _LeducState(private=None),
        rules.expand,
        label=_leduc_label,
        initial_chance_nodes=1,
        params={"ranks": ranks, "suits": 2, "raise_cap": raise_cap, "bets": list(bets), "ante": 1},
        validate=validate,
    )

