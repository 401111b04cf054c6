"""Deterministic-equivalent MILP builders.

Two formulations are produced as a solver-agnostic model IR:

* the original form, with continuous path variables ``pi_p<i>`` bounded
  by the path probability, per-path upper-link rows against each
  decision's indicator, and optional lower-link rows (needed only when
  some path utility is negative);
* the improved form, with path variables ``x_p<i>`` in [0,1], aggregated
  locally-compatible rows with safeguarded right-hand-side coefficients,
  and a total-probability row included by default.

Both share binary indicator variables ``z_<node>__<infostate>__<state>``,
one per (decision node, information state, alternative). Variable and
row ordering is canonical so emitted files are byte-reproducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .diagram import InfluenceDiagram, NodeKind
from .errors import (
    EmptyPathTable,
    ModelMismatch,
    NameCollision,
    NonPositiveScale,
    ValidationError,
)
from .paths import PathTable
from .strategy import Strategy, compatibility_mask

_SANITIZE = re.compile(r"[^A-Za-z0-9_]")


def sanitize(name: str) -> str:
    return _SANITIZE.sub("_", name)


@dataclass(frozen=True)
class VariableDef:
    name: str
    kind: str                 # "binary" | "continuous"
    lower: float
    upper: float
    objective: float


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: tuple[tuple[str, float], ...]   # (variable, coefficient), zeros omitted
    sense: str                              # "<=" | "=" | ">="
    rhs: float


@dataclass
class ModelIR:
    """Solver-agnostic MILP: maximize objective over variables/constraints."""

    name: str
    kind: str                               # "original" | "improved"
    variables: list[VariableDef]
    constraints: list[LinearConstraint]
    options: dict = field(default_factory=dict)
    sense: str = "maximize"

    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def binaries(self) -> list[VariableDef]:
        return [v for v in self.variables if v.kind == "binary"]

    def continuous(self) -> list[VariableDef]:
        return [v for v in self.variables if v.kind == "continuous"]

    def objective_value(self, assignment: dict[str, float]) -> float:
        return float(sum(v.objective * assignment[v.name] for v in self.variables))


@dataclass(frozen=True)
class FormulationStats:
    """Size accounting for a built model.

    ``n_constraints`` counts actual rows in the IR. ``total_with_bounds``
    follows the benchmark accounting convention: the two bounds of every
    path variable count as constraints and the optional total-probability
    cut row is excluded.
    """

    n_binary: int
    n_continuous: int
    n_constraints: int
    n_bounds: int
    has_probability_cut: bool

    @property
    def total_with_bounds(self) -> int:
        return self.n_constraints - int(self.has_probability_cut) + self.n_bounds


@dataclass(frozen=True)
class UtilityScaling:
    """Affine map applied to total path utility: scaled = scale*u + offset."""

    scale: float
    offset: float

    def apply(self, value: float) -> float:
        return self.scale * value + self.offset

    def invert(self, value: float) -> float:
        return (value - self.offset) / self.scale


def _z_layout(table: PathTable):
    """Canonical z-variable names and index maps for a table's diagram."""
    diagram = table.diagram
    names: list[str] = []
    keys: list[tuple[str, int, int]] = []
    for node in diagram.decision_nodes():
        n_states = len(diagram.nodes[node].states)
        for info in range(diagram.information_state_count(node)):
            info_label = "_".join(
                sanitize(s) for s in diagram.information_state_tuple(node, info)
            )
            for state in range(n_states):
                names.append(
                    f"z_{sanitize(node)}__{info_label}__{sanitize(diagram.nodes[node].states[state])}"
                )
                keys.append((node, info, state))
    return names, keys


def _info_label(diagram: InfluenceDiagram, node: str, info: int) -> str:
    return "_".join(sanitize(s) for s in diagram.information_state_tuple(node, info))


def _check_unique(names) -> None:
    seen = set()
    for name in names:
        if name in seen:
            raise NameCollision(f"duplicate name after sanitization: {name!r}")
        seen.add(name)


def _base_variables(table: PathTable, path_prefix: str, path_upper, objective) -> list[VariableDef]:
    z_names, z_keys = _z_layout(table)
    variables = [VariableDef(name, "binary", 0.0, 1.0, 0.0) for name in z_names]
    for i in range(len(table)):
        variables.append(
            VariableDef(f"{path_prefix}{i}", "continuous", 0.0, float(path_upper[i]), float(objective[i]))
        )
    _check_unique(v.name for v in variables)
    return variables


def _onehot_rows(table: PathTable) -> list[LinearConstraint]:
    diagram = table.diagram
    rows = []
    for node in diagram.decision_nodes():
        states = diagram.nodes[node].states
        for info in range(diagram.information_state_count(node)):
            label = _info_label(diagram, node, info)
            terms = tuple(
                (f"z_{sanitize(node)}__{label}__{sanitize(s)}", 1.0) for s in states
            )
            rows.append(LinearConstraint(f"onehot_{sanitize(node)}__{label}", terms, "=", 1.0))
    return rows


def build_original(
    table: PathTable,
    include_lower_bound="auto",
    include_probability_cut: bool = False,
    name: str | None = None,
) -> ModelIR:
    """Original deterministic equivalent with pi variables in [0, p(s)].

    ``include_lower_bound`` controls the per-path lower-link rows; the
    default ``"auto"`` includes them exactly when some path utility is
    negative, where the maximization alone would not pin pi to p(s).
    """
    if len(table) == 0:
        raise EmptyPathTable("no effective paths to formulate over")
    diagram = table.diagram
    if include_lower_bound == "auto":
        lower = bool(np.any(table.utils < 0.0))
    else:
        lower = bool(include_lower_bound)

    variables = _base_variables(table, "pi_p", table.probs, table.utils)
    rows = _onehot_rows(table)

    decisions = diagram.decision_nodes()
    z_of: dict[str, list[list[str]]] = {}
    suffix_of: dict[str, list[list[str]]] = {}
    for node in decisions:
        labels = [
            _info_label(diagram, node, i)
            for i in range(diagram.information_state_count(node))
        ]
        state_names = [sanitize(s) for s in diagram.nodes[node].states]
        z_of[node] = [
            [f"z_{sanitize(node)}__{label}__{s}" for s in state_names] for label in labels
        ]
        suffix_of[node] = [[f"{label}__{s}" for s in state_names] for label in labels]

    for node in decisions:
        info_per_path = table.info_state_indices(node)
        state_per_path = table.column(node)
        node_z = z_of[node]
        node_suffix = suffix_of[node]
        prefix = f"lcp_{sanitize(node)}__"
        for i in range(len(table)):
            info, state = int(info_per_path[i]), int(state_per_path[i])
            rows.append(
                LinearConstraint(
                    f"{prefix}{node_suffix[info][state]}__p{i}",
                    ((f"pi_p{i}", 1.0), (node_z[info][state], -1.0)),
                    "<=",
                    0.0,
                )
            )

    if lower:
        n_decisions = len(decisions)
        per_node = [
            (table.info_state_indices(node), table.column(node), z_of[node])
            for node in decisions
        ]
        for i in range(len(table)):
            terms: list[tuple[str, float]] = [(f"pi_p{i}", 1.0)]
            for info_per_path, state_per_path, node_z in per_node:
                terms.append((node_z[int(info_per_path[i])][int(state_per_path[i])], -1.0))
            rows.append(
                LinearConstraint(
                    f"lb_p{i}", tuple(terms), ">=", float(table.probs[i]) - n_decisions
                )
            )

    if include_probability_cut:
        rows.append(
            LinearConstraint(
                "probcut", tuple((f"pi_p{i}", 1.0) for i in range(len(table))), "=", 1.0
            )
        )

    _check_unique(c.name for c in rows)
    return ModelIR(
        name=name or f"{diagram.name}_original",
        kind="original",
        variables=variables,
        constraints=rows,
        options={
            "include_lower_bound": include_lower_bound,
            "lower_bound_rows": lower,
            "include_probability_cut": include_probability_cut,
            "n_paths": len(table),
        },
    )


def build_improved(
    table: PathTable,
    include_probability_cut: bool = True,
    name: str | None = None,
) -> ModelIR:
    """Improved deterministic equivalent with x variables in [0,1].

    Objective coefficients are U(s)p(s); each (decision, information
    state, alternative) gets one aggregated row bounding the sum of its
    locally compatible path variables by the safeguarded coefficient
    times the indicator. Rows whose locally compatible set is empty
    (possible only after path filtering) are dropped.
    """
    if len(table) == 0:
        raise EmptyPathTable("no effective paths to formulate over")
    diagram = table.diagram

    variables = _base_variables(table, "x_p", np.ones(len(table)), table.weights())
    rows = _onehot_rows(table)

    for node in diagram.decision_nodes():
        info_per_path = table.info_state_indices(node)
        state_per_path = table.column(node)
        node_states = diagram.nodes[node].states
        for info in range(diagram.information_state_count(node)):
            label = _info_label(diagram, node, info)
            in_info = info_per_path == info
            for state in range(len(node_states)):
                members = np.nonzero(in_info & (state_per_path == state))[0]
                if members.size == 0:
                    continue
                gamma = table.gamma(node, state, info)
                state_name = sanitize(node_states[state])
                terms = tuple((f"x_p{i}", 1.0) for i in members) + (
                    (f"z_{sanitize(node)}__{label}__{state_name}", -float(gamma)),
                )
                rows.append(
                    LinearConstraint(
                        f"lcp_{sanitize(node)}__{label}__{state_name}", terms, "<=", 0.0
                    )
                )

    if include_probability_cut:
        rows.append(
            LinearConstraint(
                "probcut",
                tuple(
                    (f"x_p{i}", float(table.probs[i]))
                    for i in range(len(table))
                    if table.probs[i] != 0.0
                ),
                "=",
                1.0,
            )
        )

    _check_unique(c.name for c in rows)
    return ModelIR(
        name=name or f"{diagram.name}_improved",
        kind="improved",
        variables=variables,
        constraints=rows,
        options={
            "include_probability_cut": include_probability_cut,
            "n_paths": len(table),
        },
    )


def strategy_to_assignment(model: ModelIR, table: PathTable, strategy: Strategy) -> dict[str, float]:
    """Variable assignment a strategy induces in either formulation.

    Indicators take value one exactly on the chosen alternatives; path
    variables are 1 (x form) or p(s) (pi form) on compatible paths and 0
    elsewhere.
    """
    z_names, z_keys = _z_layout(table)
    expected_paths = model.options.get("n_paths")
    model_names = set(model.variable_names())
    prefix = "x_p" if model.kind == "improved" else "pi_p"
    if expected_paths != len(table) or not all(n in model_names for n in z_names):
        raise ModelMismatch("model was not built from this diagram/path table")
    if len(model.variables) != len(z_names) + len(table):
        raise ModelMismatch("model variable count does not match the path table")

    assignment: dict[str, float] = {}
    for name, (node, info, state) in zip(z_names, z_keys):
        assignment[name] = 1.0 if int(strategy.choices[node][info]) == state else 0.0
    mask = compatibility_mask(table, strategy)
    if model.kind == "improved":
        for i in range(len(table)):
            assignment[f"{prefix}{i}"] = 1.0 if mask[i] else 0.0
    else:
        for i in range(len(table)):
            assignment[f"{prefix}{i}"] = float(table.probs[i]) if mask[i] else 0.0
    return assignment


def stats(model: ModelIR) -> FormulationStats:
    """Count variables, rows, and path-variable bounds for a built model."""
    n_binary = sum(1 for v in model.variables if v.kind == "binary")
    n_continuous = len(model.variables) - n_binary
    has_cut = any(c.name == "probcut" for c in model.constraints)
    return FormulationStats(
        n_binary=n_binary,
        n_continuous=n_continuous,
        n_constraints=len(model.constraints),
        n_bounds=2 * n_continuous,
        has_probability_cut=has_cut,
    )


def scale_utilities(
    diagram: InfluenceDiagram,
    mode: str = "shift_nonnegative",
    scale: float = 1.0,
    offset: float = 0.0,
) -> tuple[InfluenceDiagram, UtilityScaling]:
    """Transform every utility table; returns the new diagram and the record.

    ``shift_nonnegative`` shifts each table by its own negative minimum so
    all utilities become nonnegative. ``affine`` applies u -> scale*u +
    offset per table (scale must be positive). The returned record maps a
    total expected utility of the original diagram to the transformed one
    (assuming compatible-path probabilities sum to one).
    """
    if mode not in ("shift_nonnegative", "affine"):
        raise ValidationError(f"unknown scaling mode {mode!r}")
    if mode == "affine" and scale <= 0:
        raise NonPositiveScale(f"scale must be positive, got {scale!r}")

    clone = InfluenceDiagram(name=diagram.name)
    for node in diagram.nodes.values():
        clone.add_node(node)
    total_offset = 0.0
    total_scale = 1.0 if mode == "shift_nonnegative" else scale
    for name, node in diagram.nodes.items():
        if node.kind is NodeKind.CHANCE:
            clone.set_probabilities(name, diagram.probabilities(name).copy())
        elif node.kind is NodeKind.VALUE:
            values = diagram.utilities(name)
            if mode == "shift_nonnegative":
                shift = max(0.0, -float(values.min()))
                clone.set_utilities(name, values + shift)
                total_offset += shift
            else:
                clone.set_utilities(name, scale * values + offset)
                total_offset += offset
    if diagram.frozen:
        clone.freeze()
    return clone, UtilityScaling(scale=total_scale, offset=total_offset)
