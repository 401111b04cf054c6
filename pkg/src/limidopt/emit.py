"""Serialization of model IR to LP and MPS text, and solution import.

Both writers are pure functions of the IR: identical models produce
byte-identical files (UTF-8, LF endings). Numbers are rendered with
Python's shortest round-trip ``repr`` so coefficients survive a
write/parse cycle exactly.

The solution format accepted by :func:`read_solution` is the lowest
common denominator: whitespace-separated ``name value`` lines, ``#``
comments, and an optional ``=obj= <value>`` line.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    FractionalSolutionWarning,
    NameCollision,
    NameTooLong,
    NotOneHot,
    ParseError,
    UnknownVariable,
)
from .formulation import ModelIR, _z_layout
from .paths import PathTable
from .strategy import Strategy, expected_utility

MAX_LINE = 255
MAX_NAME = 255


def _num(value: float) -> str:
    return repr(float(value))


def _check_names(model: ModelIR) -> None:
    seen: set[str] = set()
    for name in model.variable_names():
        if len(name) > MAX_NAME:
            raise NameTooLong(f"variable name exceeds {MAX_NAME} characters: {name[:40]}...")
        if name in seen:
            raise NameCollision(f"duplicate variable name {name!r}")
        seen.add(name)
    rows: set[str] = set()
    for constraint in model.constraints:
        if len(constraint.name) > MAX_NAME:
            raise NameTooLong(f"row name exceeds {MAX_NAME} characters: {constraint.name[:40]}...")
        if constraint.name in rows:
            raise NameCollision(f"duplicate row name {constraint.name!r}")
        rows.add(constraint.name)


def _wrap_terms(lead: str, tokens: list[str], indent: str = "      ") -> list[str]:
    """Pack tokens onto lines of at most MAX_LINE characters."""
    lines = []
    current = lead
    for token in tokens:
        candidate = f"{current} {token}" if current else token
        if len(candidate) > MAX_LINE and current:
            lines.append(current)
            current = indent + token
        else:
            current = candidate
    lines.append(current)
    return lines


def _term_tokens(terms) -> list[str]:
    tokens = []
    for index, (name, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        magnitude = _num(abs(coef))
        if index == 0 and sign == "+":
            tokens.append(f"{magnitude} {name}")
        else:
            tokens.append(f"{sign} {magnitude} {name}")
    return tokens


def write_lp(model: ModelIR) -> str:
    """Render the model as CPLEX-dialect LP text."""
    _check_names(model)
    lines: list[str] = [f"\\ {model.name}"]
    lines.append("Maximize")
    objective = [(v.name, v.objective) for v in model.variables if v.objective != 0.0]
    if not objective and model.variables:
        objective = [(model.variables[0].name, 0.0)]
    lines.extend(_wrap_terms(" obj:", _term_tokens(objective)))
    lines.append("Subject To")
    for constraint in model.constraints:
        tokens = _term_tokens(constraint.terms)
        tokens.append(constraint.sense)
        tokens.append(_num(constraint.rhs))
        lines.extend(_wrap_terms(f" {constraint.name}:", tokens))
    lines.append("Bounds")
    for variable in model.continuous():
        lines.append(f" {_num(variable.lower)} <= {variable.name} <= {_num(variable.upper)}")
    binaries = model.binaries()
    if binaries:
        lines.append("Binary")
        for variable in binaries:
            lines.append(f" {variable.name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


_MPS_STARTS = (1, 4, 14, 24, 39, 49)   # 0-based field start columns


def _mps_line(*fields: str) -> str:
    line = ""
    for start, text in zip(_MPS_STARTS, fields):
        if not text:
            continue
        pad = start - len(line)
        line += " " * max(pad, 1 if line else 0) + text
    return line


def write_mps(model: ModelIR) -> str:
    """Render the model as fixed-layout MPS text.

    The layout uses the classic field columns but allows long names
    (free-MPS length rules). Binary variables are declared through BV
    bound rows; an OBJSENSE section marks maximization since bare MPS
    has no objective-direction record.
    """
    _check_names(model)
    sense_code = {"<=": "L", "=": "E", ">=": "G"}
    lines = ["NAME" + " " * 10 + model.name.replace(" ", "_")]
    lines.append("OBJSENSE")
    lines.append(_mps_line("", "MAX"))
    lines.append("ROWS")
    lines.append(_mps_line("N", "obj"))
    for constraint in model.constraints:
        lines.append(_mps_line(sense_code[constraint.sense], constraint.name))

    entries: dict[str, list[tuple[str, float]]] = {v.name: [] for v in model.variables}
    for constraint in model.constraints:
        for name, coef in constraint.terms:
            if name not in entries:
                raise UnknownVariable(f"row {constraint.name!r} references unknown {name!r}")
            entries[name].append((constraint.name, coef))

    lines.append("COLUMNS")
    for variable in model.variables:
        column = []
        if variable.objective != 0.0 or not entries[variable.name]:
            column.append(("obj", variable.objective))
        column.extend(entries[variable.name])
        for i in range(0, len(column), 2):
            pair = column[i:i + 2]
            fields = ["", variable.name]
            for row, coef in pair:
                fields.extend([row, _num(coef)])
            lines.append(_mps_line(*fields))

    lines.append("RHS")
    rhs_entries = [(c.name, c.rhs) for c in model.constraints if c.rhs != 0.0]
    for i in range(0, len(rhs_entries), 2):
        pair = rhs_entries[i:i + 2]
        fields = ["", "RHS"]
        for row, value in pair:
            fields.extend([row, _num(value)])
        lines.append(_mps_line(*fields))

    lines.append("BOUNDS")
    for variable in model.variables:
        if variable.kind == "binary":
            lines.append(_mps_line("BV", "BND", variable.name))
        else:
            lines.append(_mps_line("UP", "BND", variable.name, _num(variable.upper)))
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def write_solution(assignment: dict[str, float], objective: float | None = None) -> str:
    """Dump an assignment in the ``name value`` solution format."""
    lines = []
    if objective is not None:
        lines.append(f"=obj= {_num(objective)}")
    for name, value in assignment.items():
        lines.append(f"{name} {_num(value)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SolutionReadResult:
    strategy: Strategy
    expected_utility: float
    file_objective: float | None


def read_solution(model: ModelIR, table: PathTable, text: str) -> SolutionReadResult:
    """Map a solver solution file back to a strategy.

    Indicator values are rounded at 0.5; missing indicators count as
    zero. After rounding, every information state must select exactly
    one alternative. The expected utility is recomputed from the
    reconstructed strategy regardless of any objective in the file.
    """
    known = set(model.variable_names())
    values: dict[str, float] = {}
    file_objective = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ParseError(f"line {lineno}: expected 'name value', got {raw!r}")
        name = parts[0]
        try:
            value = float(parts[1])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad number {parts[1]!r}") from exc
        if name == "=obj=":
            file_objective = value
            continue
        if name not in known:
            raise UnknownVariable(f"line {lineno}: unknown variable {name!r}")
        values[name] = value

    z_names, z_keys = _z_layout(table)
    fractional = [
        name for name in z_names
        if abs(values.get(name, 0.0) - round(values.get(name, 0.0))) > 1e-6
    ]
    if fractional:
        warnings.warn(
            f"{len(fractional)} indicator value(s) are fractional beyond 1e-6 "
            f"(first: {fractional[0]}); rounding at 0.5",
            FractionalSolutionWarning,
            stacklevel=2,
        )

    diagram = table.diagram
    choices = {
        node: [[] for _ in range(diagram.information_state_count(node))]
        for node in diagram.decision_nodes()
    }
    for name, (node, info, state) in zip(z_names, z_keys):
        if values.get(name, 0.0) >= 0.5:
            choices[node][info].append(state)
    final = {}
    for node, per_info in choices.items():
        arr = np.zeros(len(per_info), dtype=np.int64)
        for info, picked in enumerate(per_info):
            if len(picked) != 1:
                raise NotOneHot(
                    f"decision {node!r}, information state "
                    f"{diagram.information_state_label(node, info)}: "
                    f"{len(picked)} alternatives selected after rounding"
                )
            arr[info] = picked[0]
        final[node] = arr
    strategy = Strategy(diagram, final)
    return SolutionReadResult(
        strategy=strategy,
        expected_utility=expected_utility(table, strategy),
        file_objective=file_objective,
    )
