import hashlib
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import KUHN2_NASH, policy_by_key
from iesl.game import InvalidTreeError, compute_reach, expected_values, validate_tree
from iesl.game.build import REFERENCE_COUNTS, build_game, game_by_name, parse_game_name
from iesl.game.policy import BehavioralPolicy, normalize, random_policy, sequence_form
from iesl.game.poker import kuhn, leduc
from iesl.game.synthetic import normal_form
from iesl.game.tree import Decision, Terminal, build_tree

DUMP_SHA256 = {
    "kuhn-2": "c1dfb7b1f6152aa2492193be238c7f9912eb5d0e6e431584a1403fadf9e633c4",
    "kuhn-3": "6c548153ff7db436d54aa4bc176e5b8b52bb8b2e6885de39472933dca8fb0c7d",
    "leduc-2": "4a3e9e332627e2a083703fb2f949b3377c3abe2011efaa4f93a0c7f48e636390",
    "matching-pennies": "061447b46112513d02705cf7264c4f6a0d80434821cfe79f6a4aa17515d3ef7d",
    "two-step": "d5f60d3fc18c89e11d5515831b3b682734260649f7401b46d3c559d83fb84296",
}

PENNIES_DUMP = """\
# game matching-pennies players=2 nodes=7 infosets=2 discount=1.0
0 decision 0 0 [1,2] [] []
1 decision 1 1 [3,4] [] [] 0
3 terminal -1 -1 [] [] [1.0,-1.0] 00
4 terminal -1 -1 [] [] [-1.0,1.0] 01
2 decision 1 1 [5,6] [] [] 1
5 terminal -1 -1 [] [] [-1.0,1.0] 10
6 terminal -1 -1 [] [] [1.0,-1.0] 11
"""


class TestCounts:
    @pytest.mark.parametrize("name", ["kuhn-2", "kuhn-3", "leduc-2"])
    def test_reference_sizes(self, name):
        tree = game_by_name(name)
        histories, infosets = REFERENCE_COUNTS[name]
        assert tree.history_counts()["post_deal"] == histories
        assert tree.num_infosets == infosets

    def test_kuhn_conventions_agree(self, kuhn2):
        c = kuhn2.history_counts()
        assert c == {"all_nodes": 55, "decision_terminal": 54, "post_deal": 54}

    def test_raise_cap_changes_size(self):
        assert leduc(2, raise_cap=3).num_infosets != 936

    def test_unsupported_game(self):
        with pytest.raises(ValueError):
            build_game("kuhn", 4)
        with pytest.raises(ValueError):
            parse_game_name("poker")

    def test_infosets_per_player(self, kuhn2, kuhn3):
        assert [sum(s.player == i for s in kuhn2.infosets) for i in range(2)] == [6, 6]
        assert [sum(s.player == i for s in kuhn3.infosets) for i in range(3)] == [16, 16, 16]


class TestRules:
    def test_kuhn_nash_value(self, kuhn2):
        pi = policy_by_key(kuhn2, KUHN2_NASH)
        np.testing.assert_allclose(expected_values(kuhn2, pi).utilities, [-1 / 18, 1 / 18], atol=1e-15)

    def test_kuhn_payoff_magnitudes(self, kuhn2, kuhn3):
        assert set(np.abs(kuhn2.payoff[kuhn2.terminal_nodes]).ravel()) == {1.0, 2.0}
        assert np.abs(kuhn3.payoff[kuhn3.terminal_nodes]).max() == 4.0

    def test_leduc_fold_only_facing_bet(self, leduc2):
        for s in leduc2.infosets:
            round_hist = s.key[2][-1]
            facing = round_hist.endswith("r")  # two players: the last action was a raise
            assert ("f" in s.actions) == facing, s.key

    def test_leduc_public_card_is_chance(self, leduc2):
        # one root deal plus one public-card node per first-round history that continues
        from iesl.game.tree import CHANCE

        assert int(np.sum(leduc2.kind == CHANCE)) > 1

    def test_leduc_payoff_range(self, leduc2):
        # at most 1 ante + 2 raises of 2 + 2 raises of 4 per player
        assert np.abs(leduc2.payoff[leduc2.terminal_nodes]).max() == 13.0


class TestValues:
    @pytest.mark.parametrize("name", ["kuhn-2", "kuhn-3", "two-step", "matching-pennies"])
    def test_matches_recursive_oracle(self, name):
        tree = game_by_name(name)
        rng = np.random.default_rng(3)
        for _ in range(5):
            pi = random_policy(tree, rng)
            np.testing.assert_allclose(expected_values(tree, pi).utilities, oracles.utilities(tree, pi), atol=1e-12)
            np.testing.assert_allclose(expected_values(tree, pi).V.T, oracles.node_values(tree, pi), atol=1e-12)

    def test_pennies_biased(self, pennies):
        pi = np.array([0.6, 0.4, 0.5, 0.5])
        np.testing.assert_allclose(expected_values(pennies, pi).utilities, [0.0, 0.0], atol=1e-15)
        pi = np.array([0.6, 0.4, 1.0, 0.0])
        np.testing.assert_allclose(expected_values(pennies, pi).utilities, [0.2, -0.2], atol=1e-15)

    def test_reach_example(self, kuhn2):
        # deal (J, Q), first player bets with 0.3, second calls with 0.8
        pi = policy_by_key(kuhn2, {(0, ""): (0.7, 0.3), (1, "b"): (0.2, 0.8)})
        reach = compute_reach(kuhn2, pi)
        node = kuhn2.labels.index("0,1|bb")
        assert reach.chance[node] == pytest.approx(1 / 6)
        assert reach.own[0, node] == pytest.approx(0.3)
        assert reach.own[1, node] == pytest.approx(0.8)
        assert reach.external[0, node] == pytest.approx(0.8 / 6)
        assert reach.full[node] == pytest.approx(0.24 / 6)

    def test_sequence_form_roundtrip(self, kuhn3):
        pi = random_policy(kuhn3, np.random.default_rng(1))
        np.testing.assert_allclose(normalize(kuhn3, sequence_form(kuhn3, pi)), pi, atol=1e-12)

    def test_discounted_rewards(self, two_step):
        pi = two_step.uniform_policy()
        assert two_step.discount == 0.9
        np.testing.assert_allclose(expected_values(two_step, pi).utilities, oracles.utilities(two_step, pi), atol=1e-12)


class TestValidation:
    def test_valid_games(self, kuhn2, two_step):
        assert validate_tree(kuhn2) == []
        assert validate_tree(two_step) == []

    def test_imperfect_recall_rejected(self):
        # the first player forgets their own first move
        def expand(h):
            if len(h) == 2:
                return Terminal([1.0, -1.0] if h == "ab" else [0.0, 0.0])
            return Decision(0, "x" if h else "root", [("a", h + "a"), ("b", h + "b")])

        with pytest.raises(InvalidTreeError) as info:
            build_tree("forgetful", 2, "", expand)
        assert {v.invariant for v in info.value.violations} == {"perfect-recall"}

    def test_shared_node_rejected(self, pennies):
        parent = pennies.parent.copy()
        parent[5] = 1  # node 5 now claims a parent that does not list it
        broken = replace(pennies, parent=parent)
        kinds = {v.invariant for v in validate_tree(broken)}
        assert "tree" in kinds

    def test_chance_sum_rejected(self, kuhn2):
        probs = kuhn2.chance_prob.copy()
        probs[1] += 1e-6
        assert {v.invariant for v in validate_tree(replace(kuhn2, chance_prob=probs))} == {"chance-distribution"}

    def test_zero_sum_rejected(self, pennies):
        payoff = pennies.payoff.copy()
        payoff[3, 0] += 0.5
        assert {v.invariant for v in validate_tree(replace(pennies, payoff=payoff))} == {"zero-sum"}

    def test_policy_domain_mismatch(self, kuhn2, kuhn3):
        with pytest.raises(ValueError, match="policy domain mismatch"):
            expected_values(kuhn2, kuhn3.uniform_policy())

    def test_policy_simplex_violations(self, kuhn2):
        probs = kuhn2.uniform_policy()
        probs[0] = 0.9
        assert BehavioralPolicy(kuhn2, kuhn2.uniform_policy()).violations() == []
        assert BehavioralPolicy(kuhn2, probs).violations()


class TestDump:
    @pytest.mark.parametrize("name", sorted(DUMP_SHA256))
    def test_golden_hash(self, name):
        assert hashlib.sha256(game_by_name(name).dump().encode()).hexdigest() == DUMP_SHA256[name]

    def test_pennies_text(self, pennies):
        assert pennies.dump() == PENNIES_DUMP

    def test_rebuild_is_stable(self):
        assert kuhn(3).dump() == kuhn(3).dump()


class TestProperties:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(["kuhn-2", "kuhn-3", "leduc-2"]))
    def test_zero_sum_under_any_policy(self, seed, name):
        tree = game_by_name(name)
        pi = random_policy(tree, np.random.default_rng(seed))
        assert abs(expected_values(tree, pi).utilities.sum()) <= 1e-12

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(["kuhn-2", "kuhn-3", "leduc-2", "two-step"]))
    def test_terminal_reach_sums_to_one(self, seed, name):
        tree = game_by_name(name)
        pi = random_policy(tree, np.random.default_rng(seed))
        full = compute_reach(tree, pi).full
        assert abs(full[tree.terminal_nodes].sum() - 1.0) <= 1e-12

    @settings(max_examples=25, deadline=None)
    @given(
        payoffs=st.lists(st.floats(-5, 5, allow_nan=False), min_size=12, max_size=12),
        seed=st.integers(0, 1000),
    )
    def test_normal_form_value_is_bilinear(self, payoffs, seed):
        tensor = np.array(payoffs).reshape(2, 2, 3)
        tree = normal_form(tensor)
        pi = random_policy(tree, np.random.default_rng(seed))
        x, y = pi[:2], pi[2:]
        expect = [x @ tensor[0] @ y, x @ tensor[1] @ y]
        np.testing.assert_allclose(expected_values(tree, pi).utilities, expect, atol=1e-12)
