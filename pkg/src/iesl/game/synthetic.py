"""Small hand-specified games used as exact test fixtures."""

from __future__ import annotations

import numpy as np

from iesl.game.tree import Chance, Decision, GameTree, Terminal, build_tree

MATCHING_PENNIES = np.array(
    [
        [[1.0, -1.0], [-1.0, 1.0]],  # row player
        [[-1.0, 1.0], [1.0, -1.0]],  # column player
    ]
)


def normal_form(payoffs, name: str = "normal-form", action_labels=None) -> GameTree:
    """Embed a one-shot simultaneous game as a turn-based tree.

    ``payoffs`` has shape ``(n, |A_1|, ..., |A_n|)``. Player ``i`` moves after
    players ``0..i-1`` without observing their choices, so every player has a
    single infoset and all moves share one timestep.
    """
    payoffs = np.asarray(payoffs, dtype=float)
    n = payoffs.shape[0]
    if payoffs.ndim != n + 1:
        raise ValueError(f"payoff tensor of shape {payoffs.shape} does not describe {n} players")
    sizes = payoffs.shape[1:]
    if action_labels is None:
        action_labels = [[str(a) for a in range(k)] for k in sizes]

    def expand(prefix: tuple[int, ...]):
        i = len(prefix)
        if i == n:
            return Terminal(payoffs[(slice(None),) + prefix])
        return Decision(
            i,
            "",
            [(action_labels[i][a], prefix + (a,)) for a in range(sizes[i])],
            advance_time=False,
        )

    zero_sum = bool(np.all(np.abs(payoffs.sum(axis=0)) <= 1e-12))
    return build_tree(
        name,
        n,
        (),
        expand,
        label=lambda prefix: "".join(map(str, prefix)),
        zero_sum=zero_sum,
        params={"payoffs": payoffs.tolist()},
    )


def matching_pennies() -> GameTree:
    return normal_form(MATCHING_PENNIES, name="matching-pennies", action_labels=[["H", "T"], ["H", "T"]])


def two_step_game(discount: float = 0.9, seed: int = 7) -> GameTree:
    """Two-player, two-timestep general-sum game with intermediate rewards.

    A private chance signal (2 outcomes, seen by player 0 only) precedes a
    simultaneous 2x2 stage that pays a reward; both players then observe the
    joint action and play a simultaneous 3x2 stage with terminal payoffs.
    """
    rng = np.random.default_rng(seed)
    signal_prob = (0.3, 0.7)
    stage1_reward = rng.uniform(-1, 1, size=(2, 2, 2, 2))  # signal, a0, a1, player
    stage2_payoff = rng.uniform(-2, 2, size=(2, 2, 2, 3, 2, 2))  # signal, a0, a1, b0, b1, player

    def expand(state):
        if state is None:
            return Chance([(f"s{s}", signal_prob[s], (s,)) for s in range(2)], advance_time=False)
        s, *acts = state
        k = len(acts)
        if k == 0:
            return Decision(0, (s,), [(f"a{a}", (s, a)) for a in range(2)], advance_time=False)
        if k == 1:
            return Decision(
                1,
                (),
                [(f"a{a}", (s, acts[0], a)) for a in range(2)],
                rewards=[stage1_reward[s, acts[0], a] for a in range(2)],
            )
        if k == 2:
            return Decision(0, (s, acts[0], acts[1]), [(f"b{b}", (s, *acts, b)) for b in range(3)], advance_time=False)
        if k == 3:
            return Decision(1, (acts[0], acts[1]), [(f"b{b}", (s, *acts, b)) for b in range(2)])
        return Terminal(stage2_payoff[(s, *acts)])

    return build_tree(
        "two-step",
        2,
        None,
        expand,
        label=lambda st: "root" if st is None else ".".join(map(str, st)),
        discount=discount,
        zero_sum=False,
        params={"seed": seed, "discount": discount},
    )
