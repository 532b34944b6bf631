"""Step functions for the four learning dynamics.

Every dynamic keeps its mutable tables in a :class:`SolverState`; a step takes
the state and the tree and updates the state in place (and returns it).

* ``iesl``: ``y <- (1 - step) * y + step * w(softmax(y / eps))``
* ``rd``:   ``y <- y + step * v(softmax(y / eps))`` with a uniform running average,
  where ``v`` is the reach-weighted counterfactual advantage (default) or the
  normalized advantage map ``w`` (``values="normalized"``, i.e. IESL without decay)
* ``cfr``:  simultaneous vanilla CFR with regret matching
* ``fp``:   extensive-form fictitious play with exact best responses, mixed in
  realization (sequence-form) space at rate ``1 / (k + 2)``
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from iesl.evaluator import best_response
from iesl.game.policy import normalize, sequence_form
from iesl.game.tree import GameTree
from iesl.solvers.advantage import advantage_map, regret_matching, softmax_choice

KINDS = ("iesl", "cfr", "fp", "rd")
RD_VALUES = ("counterfactual", "normalized")

DEFAULT_PARAMS = {
    "iesl": {"eps": 0.05, "step": 0.1},
    "rd": {"eps": 1.0, "step": 0.1, "values": "counterfactual"},
    "cfr": {},
    "fp": {},
}


@dataclass
class SolverState:
    kind: str
    k: int = 0
    params: dict = field(default_factory=dict)
    tables: dict[str, np.ndarray] = field(default_factory=dict)
    # rest-point residual |w(softmax(y)) - y|_inf measured by the last step (score dynamics only)
    last_residual: float = float("nan")
    # largest |w| seen so far (score dynamics only); bounds the IESL scores
    max_abs_w: float = 0.0

    def copy(self) -> "SolverState":
        return SolverState(
            kind=self.kind,
            k=self.k,
            params=dict(self.params),
            tables={name: t.copy() for name, t in self.tables.items()},
            last_residual=self.last_residual,
            max_abs_w=self.max_abs_w,
        )


def init_state(
    tree: GameTree,
    kind: str,
    eps: float | None = None,
    step: float | None = None,
    init: str = "zero",
    seed: int | None = None,
    **extra,
) -> SolverState:
    """Fresh state; score dynamics start at ``y = 0`` (uniform policy) or a seeded U[-0.1, 0.1] draw."""
    kind = kind.lower()
    if kind not in KINDS:
        raise ValueError(f"unknown solver {kind!r}; choose from {KINDS}")
    params = dict(DEFAULT_PARAMS[kind])
    if kind in ("iesl", "rd"):
        if eps is not None:
            params["eps"] = float(eps)
        if step is not None:
            params["step"] = float(step)
        if kind == "rd" and "values" in extra:
            params["values"] = extra.pop("values")
        _check_score_params(kind, params)
        if init == "zero":
            y = np.zeros(tree.num_sa)
        elif init == "random":
            y = np.random.default_rng(seed).uniform(-0.1, 0.1, size=tree.num_sa)
        else:
            raise ValueError(f"unknown score initialization {init!r}")
        tables = {"y": y}
        if kind == "rd":
            tables["policy_sum"] = np.zeros(tree.num_sa)
    elif kind == "cfr":
        tables = {"regret": np.zeros(tree.num_sa), "policy_acc": np.zeros(tree.num_sa)}
    else:
        tables = {"realization": sequence_form(tree, tree.uniform_policy())}
    if extra:
        raise ValueError(f"unexpected parameters for {kind}: {sorted(extra)}")
    return SolverState(kind=kind, params=params, tables=tables)


def _check_score_params(kind: str, params: dict) -> None:
    if not params["eps"] > 0:
        raise ValueError(f"eps must be positive, got {params['eps']}")
    if kind == "iesl" and not 0 < params["step"] <= 1:
        raise ValueError(f"IESL step size must lie in (0, 1], got {params['step']}")
    if kind == "rd":
        if not params["step"] > 0:
            raise ValueError(f"RD step size must be positive, got {params['step']}")
        if params.get("values", "counterfactual") not in RD_VALUES:
            raise ValueError(f"RD values must be one of {RD_VALUES}, got {params['values']!r}")


def _expect(state: SolverState, kind: str) -> None:
    if state.kind != kind:
        raise ValueError(f"expected a {kind} state, got {state.kind}")


def iesl_step(state: SolverState, tree: GameTree) -> SolverState:
    _expect(state, "iesl")
    _check_score_params("iesl", state.params)
    lam, eps = state.params["step"], state.params["eps"]
    y = state.tables["y"]
    w = advantage_map(tree, softmax_choice(tree, y, eps)).w
    state.last_residual = float(np.max(np.abs(w - y), initial=0.0))
    state.max_abs_w = max(state.max_abs_w, float(np.max(np.abs(w), initial=0.0)))
    y *= 1.0 - lam
    y += lam * w
    state.k += 1
    return state


def rd_step(state: SolverState, tree: GameTree) -> SolverState:
    _expect(state, "rd")
    _check_score_params("rd", state.params)
    lam, eps = state.params["step"], state.params["eps"]
    y = state.tables["y"]
    pi = softmax_choice(tree, y, eps)
    adv = advantage_map(tree, pi)
    w = adv.w
    state.last_residual = float(np.max(np.abs(w - y), initial=0.0))
    state.max_abs_w = max(state.max_abs_w, float(np.max(np.abs(w), initial=0.0)))
    state.tables["policy_sum"] += pi
    y += lam * (adv.numerator if state.params.get("values", "counterfactual") == "counterfactual" else w)
    state.k += 1
    return state


def cfr_step(state: SolverState, tree: GameTree) -> SolverState:
    _expect(state, "cfr")
    regret = state.tables["regret"]
    pi = regret_matching(tree, regret)
    adv = advantage_map(tree, pi)
    regret += adv.numerator
    # own reach only: infosets the opponents currently avoid still count
    own = adv.reach.own[tree.sa_player, tree.infoset_representative[tree.sa_infoset]]
    state.tables["policy_acc"] += own * pi
    state.k += 1
    return state


def fp_step(state: SolverState, tree: GameTree) -> SolverState:
    _expect(state, "fp")
    real = state.tables["realization"]
    alpha = 1.0 / (state.k + 2)
    for i in range(tree.num_players):
        avg = normalize(tree, real)
        br = best_response(tree, avg, i)
        br_real = sequence_form(tree, br.br_policy)
        mine = tree.sa_player == i
        real[mine] = (1.0 - alpha) * real[mine] + alpha * br_real[mine]
    state.k += 1
    return state


STEPS = {"iesl": iesl_step, "cfr": cfr_step, "fp": fp_step, "rd": rd_step}


def step(state: SolverState, tree: GameTree) -> SolverState:
    return STEPS[state.kind](state, tree)


def current_policy(state: SolverState, tree: GameTree) -> np.ndarray:
    """The policy the dynamic would play next."""
    if state.kind in ("iesl", "rd"):
        return softmax_choice(tree, state.tables["y"], state.params["eps"])
    if state.kind == "cfr":
        return regret_matching(tree, state.tables["regret"])
    return normalize(tree, state.tables["realization"])


def average_policy(state: SolverState, tree: GameTree) -> np.ndarray:
    if state.kind == "iesl":
        return current_policy(state, tree)
    if state.kind == "rd":
        if state.k == 0:
            return current_policy(state, tree)
        return state.tables["policy_sum"] / state.k
    if state.kind == "cfr":
        return normalize(tree, state.tables["policy_acc"])
    return normalize(tree, state.tables["realization"])


def rest_residual(state: SolverState, tree: GameTree) -> float:
    """``|w(softmax(y / eps)) - y|_inf`` at the current scores; nan for the non-score dynamics."""
    if state.kind not in ("iesl", "rd"):
        return float("nan")
    y = state.tables["y"]
    w = advantage_map(tree, softmax_choice(tree, y, state.params["eps"])).w
    return float(np.max(np.abs(w - y), initial=0.0))


def evaluation_policy(state: SolverState, tree: GameTree) -> np.ndarray:
    """Instantaneous policy for IESL, average policy for the baselines."""
    if state.kind == "iesl":
        return current_policy(state, tree)
    return average_policy(state, tree)
