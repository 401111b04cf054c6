"""Shared test utilities: random diagram generation and model matrices."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.sparse as sp

import limidopt as lo
from limidopt.formulation import _z_layout


def random_diagram(
    rng: np.random.Generator,
    max_paths: int = 1024,
    max_strategies: int = 256,
    negative_utilities: bool | None = None,
) -> lo.InfluenceDiagram:
    """Seeded random diagram within path/strategy caps (rejection sampling)."""
    while True:
        n_nodes = int(rng.integers(3, 7))
        names = [f"n{i}" for i in range(n_nodes)]
        diagram = lo.InfluenceDiagram("random")
        n_paths = 1
        n_strategies = 1
        for i, name in enumerate(names):
            n_states = int(rng.integers(2, 4))
            n_parents = int(rng.integers(0, min(i, 2) + 1))
            parents = (
                [str(p) for p in rng.choice(names[:i], size=n_parents, replace=False)]
                if n_parents
                else []
            )
            states = [f"s{k}" for k in range(n_states)]
            if rng.random() < 0.4:
                info_states = 1
                for parent in parents:
                    info_states *= len(diagram.nodes[parent].states)
                n_strategies *= n_states ** info_states
                diagram.add_decision(name, states, info_set=parents)
            else:
                diagram.add_chance(name, states, info_set=parents)
            n_paths *= n_states
        if n_paths > max_paths or n_strategies > max_strategies:
            continue

        negative = (
            bool(rng.random() < 0.5) if negative_utilities is None else negative_utilities
        )
        n_values = int(rng.integers(1, 3))
        for v in range(n_values):
            size = int(rng.integers(1, min(3, len(names)) + 1))
            parents = [str(p) for p in rng.choice(names, size=size, replace=False)]
            diagram.add_value(f"v{v}", info_set=parents)
        for name in names:
            node = diagram.nodes[name]
            if node.kind is lo.NodeKind.CHANCE:
                rows = diagram.information_state_count(name)
                diagram.set_probabilities(
                    name, rng.dirichlet(np.ones(len(node.states)), size=rows)
                )
        for v in range(n_values):
            rows = diagram.information_state_count(f"v{v}")
            low = -1.0 if negative else 0.0
            diagram.set_utilities(f"v{v}", rng.uniform(low, 1.0, size=rows))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            diagram.freeze()
        return diagram


def matching_diagram() -> lo.InfluenceDiagram:
    """Two-state chance, one decision observing it, reward for matching."""
    diagram = lo.InfluenceDiagram("match")
    diagram.add_chance("C", ["c0", "c1"])
    diagram.add_decision("D", ["d0", "d1"], info_set=["C"])
    diagram.add_value("V", info_set=["C", "D"])
    diagram.set_probabilities("C", [[0.4, 0.6]])
    diagram.set_utilities("V", [1.0, 0.0, 0.0, 1.0])
    return diagram.freeze()


def model_matrices(model: lo.ModelIR):
    """Sparse constraint system (A, senses, rhs, objective, bounds, index)."""
    var_index = {name: i for i, name in enumerate(model.variable_names())}
    rows, cols, data = [], [], []
    senses, rhs = [], []
    for r, constraint in enumerate(model.constraints):
        for name, coef in constraint.terms:
            rows.append(r)
            cols.append(var_index[name])
            data.append(coef)
        senses.append(constraint.sense)
        rhs.append(constraint.rhs)
    matrix = sp.csr_matrix(
        (data, (rows, cols)), shape=(len(model.constraints), len(var_index))
    )
    objective = np.array([v.objective for v in model.variables])
    lower = np.array([v.lower for v in model.variables])
    upper = np.array([v.upper for v in model.variables])
    return matrix, np.array(senses), np.array(rhs), objective, lower, upper, var_index


def assignment_matrix(model, table, strategies) -> np.ndarray:
    """Stack strategy_to_assignment vectors column-wise for many strategies."""
    z_names, z_keys = _z_layout(table)
    n_vars = len(model.variables)
    n_z = len(z_names)
    out = np.zeros((n_vars, len(strategies)))
    for column, strategy in enumerate(strategies):
        for row, (node, info, state) in enumerate(z_keys):
            if int(strategy.choices[node][info]) == state:
                out[row, column] = 1.0
        mask = lo.compatibility_mask(table, strategy)
        if model.kind == "improved":
            out[n_z:, column] = mask.astype(float)
        else:
            out[n_z:, column] = table.probs * mask
    return out


def max_violation(matrix, senses, rhs, x) -> float:
    """Largest constraint violation of assignment x (0 when feasible)."""
    lhs = matrix @ x
    slack = np.zeros(len(rhs))
    le = senses == "<="
    ge = senses == ">="
    eq = senses == "="
    slack[le] = lhs[le] - rhs[le]
    slack[ge] = rhs[ge] - lhs[ge]
    slack[eq] = np.abs(lhs[eq] - rhs[eq])
    return float(slack.max(initial=0.0))
