import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from iesl.game.build import game_by_name
from iesl.game.policy import infoset_sums, random_policy
from iesl.game.synthetic import normal_form
from iesl.solvers import (
    advantage_map,
    average_policy,
    current_policy,
    evaluation_policy,
    init_state,
    regret_matching,
    rest_residual,
    softmax_choice,
    step,
)
from iesl.solvers import checkpoint

# row player strictly prefers action 0 by 2; column player is indifferent
DOMINANT = np.array([[[2.0, 2.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]])


class TestSoftmax:
    def test_example(self, pennies):
        scores = np.array([0.0, math.log(3.0), 1.0, 1.0])
        np.testing.assert_allclose(softmax_choice(pennies, scores, 1.0), [0.25, 0.75, 0.5, 0.5])

    def test_temperature_scaling(self, pennies):
        scores = np.array([0.0, math.log(3.0), 0.0, 0.0])
        np.testing.assert_allclose(softmax_choice(pennies, scores, 0.5)[:2], [0.1, 0.9])

    def test_extreme_scores_stay_finite(self, pennies):
        pi = softmax_choice(pennies, np.array([1e4, 0.0, -1e4, 1e4]), 1e-3)
        assert np.all(np.isfinite(pi))
        np.testing.assert_allclose(pi, [1.0, 0.0, 0.0, 1.0])

    def test_rejects_bad_input(self, pennies):
        with pytest.raises(ValueError):
            softmax_choice(pennies, np.zeros(4), 0.0)
        with pytest.raises(ValueError):
            softmax_choice(pennies, np.zeros(3), 1.0)

    @settings(max_examples=50, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        eps=st.floats(1e-3, 10.0),
        scale=st.floats(0.0, 1e3),
    )
    def test_normalized_and_positive(self, kuhn3, seed, eps, scale):
        y = np.random.default_rng(seed).normal(size=kuhn3.num_sa) * scale
        pi = softmax_choice(kuhn3, y, eps)
        np.testing.assert_allclose(infoset_sums(kuhn3, pi), 1.0, atol=1e-12)
        assert np.all(pi >= 0)
        if scale * 20 < eps:  # moderate logits cannot underflow
            assert np.all(pi > 0)


class TestAdvantageMap:
    @pytest.mark.parametrize("name", ["kuhn-2", "kuhn-3", "two-step"])
    def test_matches_path_oracle(self, name):
        tree = game_by_name(name)
        rng = np.random.default_rng(11)
        for _ in range(4):
            pi = random_policy(tree, rng)
            np.testing.assert_allclose(advantage_map(tree, pi).w, oracles.advantage_by_paths(tree, pi), atol=1e-12)

    def test_dominant_action(self):
        tree = normal_form(DOMINANT)
        np.testing.assert_allclose(advantage_map(tree, tree.uniform_policy()).w, [1.0, -1.0, 0.0, 0.0])

    def test_unreached_infoset_gets_zero_row(self, kuhn2):
        # the first player never passes, so the second player's "p" infosets are unreached
        pi = kuhn2.uniform_policy()
        for s in kuhn2.infosets:
            if s.player == 0 and s.depth == 0:
                pi[kuhn2.infoset_slice(s.id)] = [0.0, 1.0]
        adv = advantage_map(kuhn2, pi)
        for s in kuhn2.infosets:
            if s.player == 1 and s.key[1] == "p":
                assert not adv.reached[s.id]
                assert np.all(adv.w[kuhn2.infoset_slice(s.id)] == 0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(["kuhn-2", "kuhn-3", "leduc-2", "two-step"]))
    def test_zero_mean_under_policy(self, seed, name):
        tree = game_by_name(name)
        pi = random_policy(tree, np.random.default_rng(seed))
        w = advantage_map(tree, pi).w
        np.testing.assert_allclose(infoset_sums(tree, pi * w), 0.0, atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(["kuhn-2", "kuhn-3", "leduc-2", "two-step"]))
    def test_own_reach_cancels(self, seed, name):
        tree = game_by_name(name)
        pi = random_policy(tree, np.random.default_rng(seed))
        ext = advantage_map(tree, pi, weighting="external").w
        full = advantage_map(tree, pi, weighting="full").w
        np.testing.assert_allclose(ext, full, rtol=1e-9, atol=1e-12)


class TestIESL:
    def test_one_step_arithmetic(self):
        tree = normal_form(DOMINANT)
        state = init_state(tree, "iesl", eps=1.0, step=0.5)
        step(state, tree)
        np.testing.assert_allclose(state.tables["y"], [0.5, -0.5, 0.0, 0.0])
        assert state.last_residual == 1.0
        assert state.k == 1

    def test_rest_point_is_fixed(self, pennies):
        state = init_state(pennies, "iesl", eps=0.1, step=0.3)
        for _ in range(5):
            step(state, pennies)
        np.testing.assert_array_equal(state.tables["y"], 0.0)
        assert rest_residual(state, pennies) == 0.0

    def test_converges_from_random_start(self, pennies):
        # linearized at the rest point the flow rotates with gain g = 1 / eps, and
        # forward Euler contracts only for step < 2 / (1 + g^2) ~ 0.0198
        state = init_state(pennies, "iesl", eps=0.1, step=0.005, init="random", seed=4)
        for _ in range(6000):
            step(state, pennies)
        assert state.last_residual < 1e-9
        np.testing.assert_allclose(current_policy(state, pennies), 0.5, atol=1e-9)

    def test_step_size_checked(self, pennies):
        with pytest.raises(ValueError):
            init_state(pennies, "iesl", eps=0.1, step=1.5)
        with pytest.raises(ValueError):
            init_state(pennies, "iesl", eps=-1.0, step=0.5)
        with pytest.raises(ValueError):
            init_state(pennies, "iesl", bogus=1)

    @settings(max_examples=4, deadline=None)
    @given(
        seed=st.integers(0, 1000),
        eps=st.floats(0.01, 1.0),
        lam=st.floats(0.01, 1.0),
    )
    def test_scores_stay_bounded(self, kuhn2, seed, eps, lam):
        state = init_state(kuhn2, "iesl", eps=eps, step=lam, init="random", seed=seed)
        bound = np.abs(state.tables["y"]).max()
        for _ in range(10_000):
            step(state, kuhn2)
            bound = max(bound, state.max_abs_w)
            assert np.abs(state.tables["y"]).max() <= bound + 1e-12


class TestCFR:
    def test_regret_matching_example(self):
        tree = normal_form(np.zeros((2, 3, 2)))
        pi = regret_matching(tree, np.array([3.0, 1.0, 0.0, -1.0, -2.0]))
        np.testing.assert_allclose(pi, [0.75, 0.25, 0.0, 0.5, 0.5])

    def test_average_policy_on_pennies(self, pennies):
        state = init_state(pennies, "cfr")
        for _ in range(50):
            step(state, pennies)
        np.testing.assert_allclose(average_policy(state, pennies), 0.5)

    def test_dominant_action_learned(self):
        tree = normal_form(DOMINANT)
        state = init_state(tree, "cfr")
        step(state, tree)
        np.testing.assert_allclose(state.tables["regret"][:2], [1.0, -1.0])
        np.testing.assert_allclose(current_policy(state, tree)[:2], [1.0, 0.0])

    def test_average_counts_infosets_opponents_avoid(self, kuhn2):
        state = init_state(kuhn2, "cfr")
        slots = {s.key: kuhn2.sa_offset[s.id] for s in kuhn2.infosets}
        for card in range(3):
            state.tables["regret"][slots[(card, "")]] = 1.0  # opener always passes
        step(state, kuhn2)
        for card in range(3):
            # facing a bet is now unreachable, yet the responder's own reach is 1
            lo = slots[(card, "b")]
            np.testing.assert_allclose(state.tables["policy_acc"][lo : lo + 2], [0.5, 0.5])


class TestFP:
    def test_first_step_mixes_best_responses(self, pennies):
        state = init_state(pennies, "fp")
        step(state, pennies)
        # row best-responds to uniform (tie -> first action), column then answers the updated row
        np.testing.assert_allclose(state.tables["realization"], [0.75, 0.25, 0.25, 0.75])

    def test_average_approaches_uniform(self, pennies):
        state = init_state(pennies, "fp")
        for _ in range(2000):
            step(state, pennies)
        np.testing.assert_allclose(evaluation_policy(state, pennies), 0.5, atol=0.02)


class TestRD:
    def test_policy_sum_average(self, pennies):
        state = init_state(pennies, "rd", eps=1.0, step=0.1)
        step(state, pennies)
        step(state, pennies)
        assert state.k == 2
        np.testing.assert_allclose(average_policy(state, pennies), 0.5)

    def test_values_option(self, pennies):
        assert init_state(pennies, "rd", values="normalized").params["values"] == "normalized"
        with pytest.raises(ValueError):
            init_state(pennies, "rd", values="other")

    def test_cycles_where_decay_converges(self, pennies):
        # without the decay term the current policy spirals away from the equilibrium
        rd = init_state(pennies, "rd", eps=0.1, step=0.005, init="random", seed=2, values="normalized")
        ie = init_state(pennies, "iesl", eps=0.1, step=0.005, init="random", seed=2)
        start = np.abs(current_policy(rd, pennies) - 0.5).max()
        for _ in range(6000):
            step(rd, pennies)
            step(ie, pennies)
        assert np.abs(current_policy(rd, pennies) - 0.5).max() > start
        assert np.abs(current_policy(ie, pennies) - 0.5).max() < 1e-9


class TestCheckpoint:
    @pytest.mark.parametrize("kind", ["iesl", "cfr", "fp", "rd"])
    def test_roundtrip(self, kuhn2, kind):
        state = init_state(kuhn2, kind)
        for _ in range(7):
            step(state, kuhn2)
        text = checkpoint.dumps(state, "kuhn-2")
        loaded, game = checkpoint.loads(text)
        assert game == "kuhn-2"
        assert checkpoint.dumps(loaded, game) == text
        for name, table in state.tables.items():
            np.testing.assert_array_equal(loaded.tables[name], table)

    def test_resume_continues_identically(self, kuhn2, tmp_path):
        a = init_state(kuhn2, "iesl", eps=0.1, step=0.05, init="random", seed=9)
        for _ in range(20):
            step(a, kuhn2)
        checkpoint.save(tmp_path / "c.json", a, "kuhn-2")
        b, _ = checkpoint.load(tmp_path / "c.json")
        for _ in range(20):
            step(a, kuhn2)
            step(b, kuhn2)
        np.testing.assert_array_equal(a.tables["y"], b.tables["y"])

    def test_rejects_foreign_documents(self):
        with pytest.raises(ValueError):
            checkpoint.loads('{"format": "other"}')
        with pytest.raises(ValueError):
            checkpoint.loads('{"format": "iesl-solver-state", "version": 99}')


class TestDeterminism:
    @pytest.mark.parametrize("kind", ["iesl", "cfr", "fp", "rd"])
    def test_same_seed_same_tables(self, kuhn3, kind):
        runs = []
        for _ in range(2):
            state = init_state(kuhn3, kind, **({"init": "random", "seed": 5} if kind in ("iesl", "rd") else {}))
            for _ in range(25):
                step(state, kuhn3)
            runs.append(state)
        for name in runs[0].tables:
            np.testing.assert_array_equal(runs[0].tables[name], runs[1].tables[name])
