"""MILP builders: structure, counts, assignments, scaling."""

import numpy as np
import pytest

import limidopt as lo
from limidopt.benchmarks import (
    gen_nmonitoring,
    gen_pigfarm,
    nmonitoring_improved_count,
    nmonitoring_original_count,
    pigfarm_improved_count,
    pigfarm_original_count,
)
from limidopt.errors import EmptyPathTable, ModelMismatch, NonPositiveScale
from helpers import assignment_matrix, matching_diagram, max_violation, model_matrices, random_diagram


class TestCounts:
    @pytest.mark.parametrize("n", [1, 2])
    def test_pigfarm_closed_forms(self, n):
        table = lo.enumerate_paths(gen_pigfarm(n))
        original = lo.stats(lo.build_original(table, include_lower_bound=True))
        improved = lo.stats(lo.build_improved(table))
        assert original.total_with_bounds == pigfarm_original_count(n)
        assert improved.total_with_bounds == pigfarm_improved_count(n)

    @pytest.mark.parametrize("n", [1, 2])
    def test_nmonitoring_closed_forms(self, n):
        table = lo.enumerate_paths(gen_nmonitoring(n))
        original = lo.stats(lo.build_original(table, include_lower_bound=True))
        improved = lo.stats(lo.build_improved(table))
        assert original.total_with_bounds == nmonitoring_original_count(n)
        assert improved.total_with_bounds == nmonitoring_improved_count(n)

    def test_binary_variable_count_pigfarm(self):
        for n in (1, 2, 3):
            table = lo.enumerate_paths(gen_pigfarm(n))
            model = lo.build_improved(table)
            assert lo.stats(model).n_binary == 4 * n

    def test_auto_lower_bound_drops_rows_for_nonnegative_utilities(self):
        rng = np.random.default_rng(3)
        diagram = random_diagram(rng, negative_utilities=False)
        table = lo.enumerate_paths(diagram)
        auto = lo.build_original(table)
        forced = lo.build_original(table, include_lower_bound=True)
        assert not any(c.name.startswith("lb_") for c in auto.constraints)
        n_lb = sum(c.name.startswith("lb_") for c in forced.constraints)
        assert n_lb == len(table)
        assert len(forced.constraints) - len(auto.constraints) == len(table)

    def test_auto_lower_bound_kept_for_negative_utilities(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_decision("k", ["x", "y"], info_set=["c"])
        d.add_value("v", info_set=["c", "k"])
        d.set_probabilities("c", [[0.5, 0.5]])
        d.set_utilities("v", [-1.0, 2.0, 3.0, 4.0])
        d.freeze()
        model = lo.build_original(lo.enumerate_paths(d))
        assert any(c.name.startswith("lb_") for c in model.constraints)

    def test_single_decision_single_info_state_row_counts(self):
        d = lo.InfluenceDiagram()
        d.add_decision("d", ["x", "y", "z"])
        d.add_chance("c", ["a", "b"])
        d.add_value("v", info_set=["c", "d"])
        d.set_probabilities("c", [[0.5, 0.5]])
        d.set_utilities("v", [0, 1, 2, 3, 4, 5])
        d.freeze()
        model = lo.build_improved(lo.enumerate_paths(d), include_probability_cut=False)
        onehot = [c for c in model.constraints if c.name.startswith("onehot_")]
        lcp = [c for c in model.constraints if c.name.startswith("lcp_")]
        assert len(onehot) == 1
        assert len(lcp) == 3

    def test_stats_fields(self):
        table = lo.enumerate_paths(gen_pigfarm(1))
        report = lo.stats(lo.build_improved(table))
        assert report.n_continuous == 16
        assert report.n_bounds == 32
        assert report.has_probability_cut
        no_cut = lo.stats(lo.build_improved(table, include_probability_cut=False))
        assert not no_cut.has_probability_cut
        assert no_cut.total_with_bounds == report.total_with_bounds

    def test_empty_table_rejected(self):
        d = lo.InfluenceDiagram()
        d.add_decision("d", ["x", "y"])
        d.add_value("v", info_set=["d"])
        d.set_utilities("v", [0, 1])
        d.freeze()
        with pytest.warns(Warning):
            table = lo.enumerate_paths(
                d, forbidden=[lo.ForbiddenPattern.of({"d": ["x", "y"]})]
            )
        with pytest.raises(EmptyPathTable):
            lo.build_improved(table)
        with pytest.raises(EmptyPathTable):
            lo.build_original(table)


class TestGammaCoefficients:
    def test_improved_rows_carry_gamma(self):
        table = lo.enumerate_paths(gen_pigfarm(2))
        model = lo.build_improved(table)
        for constraint in model.constraints:
            if constraint.name.startswith("lcp_"):
                z_terms = [c for name, c in constraint.terms if name.startswith("z_")]
                assert z_terms == [-16.0]

    def test_gamma_bound_never_cuts_integer_points(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            diagram = random_diagram(rng, max_strategies=64)
            table = lo.enumerate_paths(diagram)
            for strategy in lo.iter_strategies(diagram):
                mask = lo.compatibility_mask(table, strategy)
                for node in diagram.decision_nodes():
                    info = table.info_state_indices(node)
                    states = table.column(node)
                    for i in range(diagram.information_state_count(node)):
                        for s in range(len(diagram.nodes[node].states)):
                            active = int(np.sum(mask & (info == i) & (states == s)))
                            assert active <= table.gamma(node, s, i)


class TestAssignments:
    def test_all_strategies_feasible_and_objective_matches(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        improved = lo.build_improved(table)
        original = lo.build_original(table, include_probability_cut=True)
        for strategy in lo.iter_strategies(match_diagram):
            eu = lo.expected_utility(table, strategy)
            for model in (improved, original):
                assignment = lo.strategy_to_assignment(model, table, strategy)
                matrix, senses, rhs, objective, lower, upper, index = model_matrices(model)
                x = np.array([assignment[name] for name in model.variable_names()])
                assert max_violation(matrix, senses, rhs, x) <= 1e-9
                assert np.all(x >= lower - 1e-12) and np.all(x <= upper + 1e-12)
                assert float(objective @ x) == pytest.approx(eu, abs=1e-9)

    def test_mismatched_table_rejected(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        other = lo.enumerate_paths(gen_pigfarm(1))
        model = lo.build_improved(table)
        strategy = lo.random_strategy(gen_pigfarm(1), 0)
        with pytest.raises(ModelMismatch):
            lo.strategy_to_assignment(model, other, strategy)

    def test_chance_only_diagram_assignment(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_value("v", info_set=["c"])
        d.set_probabilities("c", [[0.4, 0.6]])
        d.set_utilities("v", [2.0, 5.0])
        d.freeze()
        table = lo.enumerate_paths(d)
        model = lo.build_improved(table)
        strategy = lo.Strategy(d, {})
        assignment = lo.strategy_to_assignment(model, table, strategy)
        assert assignment == {"x_p0": 1.0, "x_p1": 1.0}
        assert model.objective_value(assignment) == pytest.approx(0.4 * 2 + 0.6 * 5)


class TestScaleUtilities:
    def test_shift_nonnegative(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_value("v", info_set=["c"])
        d.set_probabilities("c", [[0.5, 0.5]])
        d.set_utilities("v", [-5.0, 3.0])
        d.freeze()
        shifted, record = lo.scale_utilities(d)
        np.testing.assert_allclose(shifted.utilities("v"), [0.0, 8.0])
        assert record.scale == 1.0
        assert record.offset == 5.0

    def test_shift_identity_when_nonnegative(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_value("v", info_set=["c"])
        d.set_probabilities("c", [[0.5, 0.5]])
        d.set_utilities("v", [1.0, 3.0])
        d.freeze()
        shifted, record = lo.scale_utilities(d)
        np.testing.assert_allclose(shifted.utilities("v"), [1.0, 3.0])
        assert record.offset == 0.0

    def test_affine_doubles_optimum(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        doubled, record = lo.scale_utilities(match_diagram, mode="affine", scale=2.0)
        table2 = lo.enumerate_paths(doubled)
        best = lo.brute_force(table).expected_utility
        best2 = lo.brute_force(table2).expected_utility
        assert best2 == pytest.approx(2.0 * best)
        assert record.invert(best2) == pytest.approx(best)

    def test_nonpositive_scale_rejected(self, match_diagram):
        with pytest.raises(NonPositiveScale):
            lo.scale_utilities(match_diagram, mode="affine", scale=0.0)

    def test_offset_counts_value_nodes(self):
        d = lo.InfluenceDiagram()
        d.add_chance("c", ["a", "b"])
        d.add_value("v1", info_set=["c"])
        d.add_value("v2", info_set=["c"])
        d.set_probabilities("c", [[0.5, 0.5]])
        d.set_utilities("v1", [1.0, 2.0])
        d.set_utilities("v2", [3.0, 4.0])
        d.freeze()
        scaled, record = lo.scale_utilities(d, mode="affine", scale=1.0, offset=10.0)
        assert record.offset == 20.0  # one offset per value-node table
        table = lo.enumerate_paths(d)
        scaled_table = lo.enumerate_paths(scaled)
        strategy = lo.Strategy(d, {})
        assert lo.expected_utility(scaled_table, strategy) == pytest.approx(
            record.apply(lo.expected_utility(table, strategy))
        )


class TestAssignmentMatrixHelper:
    def test_matrix_agrees_with_single_assignments(self, match_diagram):
        table = lo.enumerate_paths(match_diagram)
        model = lo.build_improved(table)
        strategies = list(lo.iter_strategies(match_diagram))
        stacked = assignment_matrix(model, table, strategies)
        for column, strategy in enumerate(strategies):
            assignment = lo.strategy_to_assignment(model, table, strategy)
            expected = np.array([assignment[name] for name in model.variable_names()])
            np.testing.assert_array_equal(stacked[:, column], expected)
