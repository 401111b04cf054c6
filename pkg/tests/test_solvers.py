"""Exact enumeration and the single-policy-update heuristic."""

import numpy as np
import pytest

import limidopt as lo
from limidopt.benchmarks import gen_pigfarm
from limidopt.errors import StrategySpaceTooLarge
from helpers import random_diagram


class TestBruteForce:
    def test_matching_diagram_optimum(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        result = lo.brute_force(table)
        assert result.expected_utility == pytest.approx(1.0)
        assert result.n_examined == 4
        np.testing.assert_array_equal(result.strategy.choices["D"], [0, 1])

    def test_no_decisions(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_value("v", info_set=["c"])
        d.set_probabilities("c", [[0.4, 0.6]])
        d.set_utilities("v", [2.0, 5.0])
        d.freeze()
        result = lo.brute_force(lo.enumerate_paths(d))
        assert result.expected_utility == pytest.approx(0.4 * 2 + 0.6 * 5)
        assert result.n_examined == 1

    def test_dominates_random_strategies(self):
        d = gen_pigfarm(2, rng_seed=9, randomize=True)
        table = lo.enumerate_paths(d)
        best = lo.brute_force(table).expected_utility
        rng = np.random.default_rng(4)
        for _ in range(100):
            eu = lo.expected_utility(table, lo.random_strategy(d, rng))
            assert eu <= best + 1e-12

    def test_cap_enforced(self):
        d = gen_pigfarm(2)
        with pytest.raises(StrategySpaceTooLarge):
            lo.brute_force(lo.enumerate_paths(d), cap=3)

    def test_ties_break_to_smallest_encoding(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_decision("d", ["x", "y"], info_set=["c"])
        d.add_value("v", info_set=["c"])
        d.set_probabilities("c", [[0.5, 0.5]])
        d.set_utilities("v", [1.0, 2.0])  # utility ignores the decision
        d.freeze()
        result = lo.brute_force(lo.enumerate_paths(d))
        np.testing.assert_array_equal(result.strategy.choices["d"], [0, 0])

    def test_strategy_count(self, match_diagram):
        assert lo.strategy_count(match_diagram) == 4
        assert lo.strategy_count(gen_pigfarm(3)) == 4 ** 3


class TestSpu:
    def test_fixed_point_at_optimum(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        optimum = lo.brute_force(table).strategy
        result = lo.spu(table, optimum)
        assert result.trace == []
        assert result.strategy == optimum

    def test_all_wrong_start_recovers(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        wrong = lo.Strategy(match_diagram, {"D": np.array([1, 0])})
        result = lo.spu(table, wrong)
        assert result.expected_utility == pytest.approx(1.0)
        # both information states are improved independently in one sweep
        assert len(result.trace) == 2
        assert result.trace[0].eu_before == pytest.approx(0.0)

    def test_trace_strictly_increasing(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            d = random_diagram(rng)
            table = lo.enumerate_paths(d)
            result = lo.spu(table, lo.random_strategy(d, rng))
            values = [m.eu_before for m in result.trace] + [result.expected_utility]
            assert all(b > a for a, b in zip(values, values[1:]))

    def test_trace_consistent_with_scratch_evaluation(self):
        rng = np.random.default_rng(37)
        d = random_diagram(rng)
        table = lo.enumerate_paths(d)
        result = lo.spu(table, lo.random_strategy(d, rng))
        assert result.expected_utility == pytest.approx(
            lo.expected_utility(table, result.strategy), abs=1e-9
        )
        for move in result.trace:
            assert move.eu_after > move.eu_before

    def test_result_locally_optimal_by_exhaustive_perturbation(self):
        rng = np.random.default_rng(41)
        for _ in range(5):
            d = random_diagram(rng, max_strategies=128)
            table = lo.enumerate_paths(d)
            result = lo.spu(table, lo.random_strategy(d, rng))
            base = result.expected_utility
            for node in d.decision_nodes():
                for info in range(d.information_state_count(node)):
                    for state in range(len(d.nodes[node].states)):
                        perturbed = result.strategy.copy()
                        perturbed.choices[node][info] = state
                        assert lo.expected_utility(table, perturbed) <= base + 1e-9

    def test_input_not_mutated(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        wrong = lo.Strategy(match_diagram, {"D": np.array([1, 0])})
        lo.spu(table, wrong)
        np.testing.assert_array_equal(wrong.choices["D"], [1, 0])


class TestLocalOptimalityCheck:
    def test_spu_output_passes(self):
        rng = np.random.default_rng(43)
        for _ in range(10):
            d = random_diagram(rng)
            table = lo.enumerate_paths(d)
            result = lo.spu(table, lo.random_strategy(d, rng))
            ok, pair = lo.local_optimality_check(table, result.strategy)
            assert ok and pair is None

    def test_all_wrong_reports_improving_pair(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        wrong = lo.Strategy(match_diagram, {"D": np.array([1, 0])})
        ok, pair = lo.local_optimality_check(table, wrong)
        assert not ok
        assert pair == ("D", 0, 0)

    def test_single_alternative_everywhere(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_decision("d", ["only"], info_set=["c"])
        d.add_value("v", info_set=["c", "d"])
        d.set_probabilities("c", [[0.5, 0.5]])
        d.set_utilities("v", [1, 2])
        d.freeze()
        table = lo.enumerate_paths(d)
        strategy = lo.Strategy(d, {"d": np.array([0, 0])})
        ok, _ = lo.local_optimality_check(table, strategy)
        assert ok


class TestMultistart:
    def test_restarts_one_equals_single_run(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        multi = lo.spu_multistart(table, restarts=1, rng_seed=5)
        child = np.random.SeedSequence(5).spawn(1)[0]
        start = lo.random_strategy(match_diagram, np.random.default_rng(child))
        single = lo.spu(table, start)
        assert multi.expected_utility == single.expected_utility
        assert multi.strategy == single.strategy

    def test_monotone_in_restarts(self):
        d = gen_pigfarm(2, rng_seed=2, randomize=True)
        table = lo.enumerate_paths(d)
        values = [
            lo.spu_multistart(table, restarts=k, rng_seed=7).expected_utility
            for k in (1, 2, 5, 10)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_deterministic_given_seed(self):
        d = gen_pigfarm(2, rng_seed=2, randomize=True)
        table = lo.enumerate_paths(d)
        a = lo.spu_multistart(table, restarts=5, rng_seed=11)
        b = lo.spu_multistart(table, restarts=5, rng_seed=11)
        assert a.expected_utility == b.expected_utility
        assert a.strategy == b.strategy
        assert [r.expected_utility for r in a.restarts] == [
            r.expected_utility for r in b.restarts
        ]

    def test_ordering_bound_by_brute_force(self):
        rng = np.random.default_rng(19)
        for _ in range(5):
            d = random_diagram(rng)
            table = lo.enumerate_paths(d)
            exact = lo.brute_force(table).expected_utility
            multi = lo.spu_multistart(table, restarts=5, rng_seed=3).expected_utility
            single = lo.spu_multistart(table, restarts=1, rng_seed=3).expected_utility
            assert exact >= multi - 1e-9
            assert multi >= single - 1e-12
