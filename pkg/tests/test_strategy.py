"""Strategies, compatibility, and expected utility."""

import numpy as np
import pytest

import limidopt as lo
from limidopt.benchmarks import gen_pigfarm
from helpers import random_diagram


class TestCompatibility:
    def test_no_decisions_everything_compatible(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_value("v", info_set=["c"])
        d.set_probabilities("c", [[0.5, 0.5]])
        d.set_utilities("v", [0, 1])
        d.freeze()
        table = lo.enumerate_paths(d)
        strategy = lo.Strategy(d, {})
        assert all(lo.is_compatible(table, strategy, i) for i in range(len(table)))

    def test_single_decision_filters_paths(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        strategy = lo.Strategy(match_diagram, {"D": np.array([0, 0])})
        mask = lo.compatibility_mask(table, strategy)
        # paths (C,D): only D=0 rows compatible
        np.testing.assert_array_equal(mask, [True, False, True, False])

    def test_pigfarm_n1_compatible_count(self):
        d = gen_pigfarm(1)
        table = lo.enumerate_paths(d)
        strategy = lo.random_strategy(d, 3)
        mask = lo.compatibility_mask(table, strategy)
        assert mask.sum() == 8  # |S| / prod |S_d| = 16/2

    def test_indicator_product_matches_vectorized_mask(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            d = random_diagram(rng)
            table = lo.enumerate_paths(d)
            strategy = lo.random_strategy(d, rng)
            mask = lo.compatibility_mask(table, strategy)
            for i in range(len(table)):
                assert mask[i] == lo.is_compatible(table, strategy, i)


class TestExpectedUtility:
    def test_matching_strategy_reaches_one(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        best = lo.Strategy(match_diagram, {"D": np.array([0, 1])})
        worst = lo.Strategy(match_diagram, {"D": np.array([1, 0])})
        assert lo.expected_utility(table, best) == pytest.approx(1.0)
        assert lo.expected_utility(table, worst) == pytest.approx(0.0)

    def test_brute_force_confirms_maximum(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        values = [lo.expected_utility(table, s) for s in lo.iter_strategies(match_diagram)]
        assert max(values) == pytest.approx(1.0)

    def test_constant_utility_gives_constant_eu(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_decision("d", ["x", "y"], info_set=["c"])
        d.add_value("v")
        d.set_probabilities("c", [[0.3, 0.7]])
        d.set_utilities("v", [5.5])
        d.freeze()
        table = lo.enumerate_paths(d)
        for strategy in lo.iter_strategies(d):
            assert lo.expected_utility(table, strategy) == pytest.approx(5.5)

    def test_compatible_probability_sums_to_one(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            d = random_diagram(rng)
            table = lo.enumerate_paths(d)
            for _ in range(5):
                strategy = lo.random_strategy(d, rng)
                total = lo.compatibility_mask(table, strategy) @ table.probs
                assert total == pytest.approx(1.0, abs=1e-9)

    def test_reversed_order_summation_agrees(self):
        rng = np.random.default_rng(13)
        d = random_diagram(rng)
        table = lo.enumerate_paths(d)
        strategy = lo.random_strategy(d, rng)
        mask = lo.compatibility_mask(table, strategy)
        forward = lo.expected_utility(table, strategy)
        reverse = float(np.sum((table.probs * table.utils * mask)[::-1]))
        assert forward == pytest.approx(reverse, abs=1e-9)

    def test_affine_transform_preserves_argmax_set(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        scaled, record = lo.scale_utilities(match_diagram, mode="affine", scale=3.0, offset=2.0)
        scaled_table = lo.enumerate_paths(scaled)
        strategies = list(lo.iter_strategies(match_diagram))
        base = np.array([lo.expected_utility(table, s) for s in strategies])
        transformed = np.array(
            [lo.expected_utility(scaled_table, s) for s in lo.iter_strategies(scaled)]
        )
        assert set(np.flatnonzero(base == base.max())) == set(
            np.flatnonzero(transformed == transformed.max())
        )
        np.testing.assert_allclose(transformed, record.scale * base + record.offset)


class TestRandomStrategy:
    def test_deterministic_given_seed(self, match_diagram):
        a = lo.random_strategy(match_diagram, 42)
        b = lo.random_strategy(match_diagram, 42)
        assert a == b

    def test_single_state_node_forced(self):
        d = lo.InfluenceDiagram()
        d.add_decision("d", ["only"])
        d.add_value("v", info_set=["d"])
        d.set_utilities("v", [1.0])
        d.freeze()
        strategy = lo.random_strategy(d, 0)
        assert strategy.choices["d"][0] == 0

    def test_empirical_uniformity(self, match_diagram):
        rng = np.random.default_rng(123)
        picks = np.array(
            [lo.random_strategy(match_diagram, rng).choices["D"][0] for _ in range(10_000)]
        )
        assert abs(picks.mean() - 0.5) < 0.02


class TestSerialization:
    def test_json_round_trip(self, match_diagram):
        strategy = lo.Strategy(match_diagram, {"D": np.array([1, 0])})
        payload = strategy.to_json_dict()
        assert payload == {"D": {"c0": "d1", "c1": "d0"}}
        restored = lo.Strategy.from_json_dict(match_diagram, payload)
        assert restored == strategy

    def test_empty_info_set_key(self):
        d = lo.InfluenceDiagram()
        d.add_decision("d", ["x", "y"])
        d.add_value("v", info_set=["d"])
        d.set_utilities("v", [0, 1])
        d.freeze()
        strategy = lo.Strategy(d, {"d": np.array([1])})
        payload = strategy.to_json_dict()
        assert payload == {"d": {"": "y"}}
        assert lo.Strategy.from_json_dict(d, payload) == strategy
