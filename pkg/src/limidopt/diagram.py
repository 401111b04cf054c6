"""Influence diagram construction and validation.

A diagram is built incrementally: nodes first (parents before children),
then a conditional probability table for every chance node and a utility
table for every value node, then :meth:`InfluenceDiagram.freeze`, which
fixes a deterministic topological order over the chance and decision
nodes and runs the cross-node checks (cycles, missing tables, redundant
nodes).

Indexing conventions, fixed so that file emission is bit-reproducible:

* states are indexed 0-based in their declared order;
* an information state of node ``j`` is the tuple of parent states in
  the declared ``info_set`` order, flattened row-major (first parent is
  the most significant digit);
* probability tables are stored as ``(n_information_states, n_states)``
  row-stochastic matrices, utility tables as flat vectors indexed by the
  information-state index.
"""

from __future__ import annotations

import enum
import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CycleDetected,
    DimensionMismatch,
    DuplicateName,
    FrozenDiagramError,
    IncompleteUtilities,
    MissingTensor,
    NegativeProbability,
    NotNormalized,
    ParseError,
    RedundantNodeWarning,
    SelfReference,
    UnknownParent,
    ValidationError,
    ValueNodeInInfoSet,
)

PROBABILITY_TOL = 1e-9


class NodeKind(str, enum.Enum):
    CHANCE = "chance"
    DECISION = "decision"
    VALUE = "value"


@dataclass(frozen=True)
class Node:
    """A single diagram node.

    ``states`` is empty exactly for value nodes; ``info_set`` lists the
    immediate predecessors in the order used for table indexing.
    """

    name: str
    kind: NodeKind
    states: tuple[str, ...] = ()
    info_set: tuple[str, ...] = ()


class InfluenceDiagram:
    """Mutable builder that becomes immutable after :meth:`freeze`."""

    def __init__(self, name: str = "diagram"):
        self.name = name
        self.nodes: dict[str, Node] = {}
        self._probabilities: dict[str, np.ndarray] = {}
        self._utilities: dict[str, np.ndarray] = {}
        self.frozen = False
        self.topo_order: tuple[str, ...] = ()

    # --- construction -------------------------------------------------------

    def add_node(self, node: Node) -> "InfluenceDiagram":
        if self.frozen:
            raise FrozenDiagramError("diagram is frozen; no further edits allowed")
        if node.name in self.nodes:
            raise DuplicateName(f"node {node.name!r} already declared")
        if node.name in node.info_set:
            raise SelfReference(f"node {node.name!r} lists itself in its information set")
        if len(set(node.info_set)) != len(node.info_set):
            raise DuplicateName(f"node {node.name!r} repeats a parent in its information set")
        for parent in node.info_set:
            if parent not in self.nodes:
                raise UnknownParent(
                    f"node {node.name!r} references undeclared parent {parent!r} "
                    "(parents must be declared first)"
                )
            if self.nodes[parent].kind is NodeKind.VALUE:
                raise ValueNodeInInfoSet(
                    f"value node {parent!r} cannot appear in an information set"
                )
        if node.kind is NodeKind.VALUE:
            if node.states:
                raise ValidationError(f"value node {node.name!r} must not declare states")
        else:
            if not node.states:
                raise ValidationError(f"node {node.name!r} needs a non-empty state list")
            if len(set(node.states)) != len(node.states):
                raise DuplicateName(f"node {node.name!r} has duplicate state names")
        self.nodes[node.name] = node
        return self

    def add_chance(self, name: str, states, info_set=()) -> "InfluenceDiagram":
        return self.add_node(Node(name, NodeKind.CHANCE, tuple(states), tuple(info_set)))

    def add_decision(self, name: str, states, info_set=()) -> "InfluenceDiagram":
        return self.add_node(Node(name, NodeKind.DECISION, tuple(states), tuple(info_set)))

    def add_value(self, name: str, info_set=()) -> "InfluenceDiagram":
        return self.add_node(Node(name, NodeKind.VALUE, (), tuple(info_set)))

    def set_probabilities(self, owner: str, table) -> "InfluenceDiagram":
        if self.frozen:
            raise FrozenDiagramError("diagram is frozen; no further edits allowed")
        node = self._require(owner, NodeKind.CHANCE)
        rows = self.information_state_count(owner)
        cols = len(node.states)
        arr = np.asarray(table, dtype=float)
        if arr.size != rows * cols:
            raise DimensionMismatch(
                f"probability table for {owner!r} has {arr.size} entries, "
                f"expected {rows}x{cols}"
            )
        expected_nested = self._parent_shape(owner) + (cols,)
        if arr.shape not in ((rows, cols), (rows * cols,), expected_nested):
            raise DimensionMismatch(
                f"probability table for {owner!r} has shape {arr.shape}, "
                f"expected {(rows, cols)} or nested {expected_nested}"
            )
        arr = arr.reshape(rows, cols)
        if np.any(arr < 0):
            bad = np.argwhere(arr < 0)[0]
            raise NegativeProbability(
                f"negative probability for {owner!r} at row {bad[0]}, column {bad[1]}"
            )
        sums = arr.sum(axis=1)
        off = np.abs(sums - 1.0) > PROBABILITY_TOL
        if np.any(off):
            row = int(np.argmax(off))
            raise NotNormalized(
                f"NotNormalized at {owner},{self.information_state_label(owner, row)}: "
                f"row sums to {sums[row]!r}"
            )
        self._probabilities[owner] = arr
        return self

    def set_utilities(self, owner: str, values) -> "InfluenceDiagram":
        if self.frozen:
            raise FrozenDiagramError("diagram is frozen; no further edits allowed")
        self._require(owner, NodeKind.VALUE)
        rows = self.information_state_count(owner)
        arr = np.asarray(values, dtype=float)
        if arr.size < rows:
            raise IncompleteUtilities(
                f"utility table for {owner!r} has {arr.size} entries, expected {rows}"
            )
        if arr.size != rows:
            raise DimensionMismatch(
                f"utility table for {owner!r} has {arr.size} entries, expected {rows}"
            )
        self._utilities[owner] = arr.reshape(-1)
        return self

    def freeze(self) -> "InfluenceDiagram":
        """Validate cross-node invariants and fix the topological order.

        Idempotent: freezing a frozen diagram returns the same object.
        """
        if self.frozen:
            return self
        for name, node in self.nodes.items():
            if node.kind is NodeKind.CHANCE and name not in self._probabilities:
                raise MissingTensor(f"chance node {name!r} has no probability table")
            if node.kind is NodeKind.VALUE and name not in self._utilities:
                raise MissingTensor(f"value node {name!r} has no utility table")
        self.topo_order = self._topological_order()
        redundant = self._redundant_nodes()
        if redundant:
            warnings.warn(
                "nodes with no directed path to a value node: " + ", ".join(redundant),
                RedundantNodeWarning,
                stacklevel=2,
            )
        self.frozen = True
        return self

    # --- queries -------------------------------------------------------------

    def _require(self, name: str, kind: NodeKind) -> Node:
        if name not in self.nodes:
            raise UnknownParent(f"unknown node {name!r}")
        node = self.nodes[name]
        if node.kind is not kind:
            raise ValidationError(f"node {name!r} is a {node.kind.value} node, expected {kind.value}")
        return node

    def node(self, name: str) -> Node:
        return self.nodes[name]

    def probabilities(self, name: str) -> np.ndarray:
        return self._probabilities[name]

    def utilities(self, name: str) -> np.ndarray:
        return self._utilities[name]

    def _parent_shape(self, name: str) -> tuple[int, ...]:
        return tuple(len(self.nodes[p].states) for p in self.nodes[name].info_set)

    def information_state_count(self, name: str) -> int:
        count = 1
        for size in self._parent_shape(name):
            count *= size
        return count

    def information_state_tuple(self, name: str, index: int) -> tuple[str, ...]:
        """Decode a row-major information-state index to parent state names."""
        names = []
        shape = self._parent_shape(name)
        rem = index
        for parent, size in zip(reversed(self.nodes[name].info_set), reversed(shape)):
            names.append(self.nodes[parent].states[rem % size])
            rem //= size
        return tuple(reversed(names))

    def information_state_label(self, name: str, index: int) -> str:
        return "(" + ",".join(self.information_state_tuple(name, index)) + ")"

    def information_state_index(self, name: str, parent_states: tuple[str, ...]) -> int:
        node = self.nodes[name]
        if len(parent_states) != len(node.info_set):
            raise ValidationError(
                f"information state for {name!r} needs {len(node.info_set)} entries"
            )
        index = 0
        for parent, state in zip(node.info_set, parent_states):
            index = index * len(self.nodes[parent].states) + self.state_index(parent, state)
        return index

    def state_index(self, name: str, state: str) -> int:
        try:
            return self.nodes[name].states.index(state)
        except ValueError:
            raise ValidationError(f"node {name!r} has no state {state!r}") from None

    def path_nodes(self) -> tuple[str, ...]:
        """Chance and decision nodes in topological order (requires freeze)."""
        if not self.frozen:
            raise ValidationError("diagram must be frozen first")
        return self.topo_order

    def chance_nodes(self) -> list[str]:
        return [n for n, d in self.nodes.items() if d.kind is NodeKind.CHANCE]

    def decision_nodes(self) -> list[str]:
        order = self.topo_order if self.frozen else self.nodes
        return [n for n in order if self.nodes[n].kind is NodeKind.DECISION]

    def value_nodes(self) -> list[str]:
        return [n for n, d in self.nodes.items() if d.kind is NodeKind.VALUE]

    def num_paths(self) -> int:
        total = 1
        for name, node in self.nodes.items():
            if node.kind is not NodeKind.VALUE:
                total *= len(node.states)
        return total

    # --- internals -------------------------------------------------------------

    def _topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm over chance+decision nodes, ties by insertion order."""
        path_nodes = [n for n, d in self.nodes.items() if d.kind is not NodeKind.VALUE]
        position = {n: i for i, n in enumerate(path_nodes)}
        children: dict[str, list[str]] = {n: [] for n in path_nodes}
        indegree = {n: 0 for n in path_nodes}
        for name in path_nodes:
            for parent in self.nodes[name].info_set:
                children[parent].append(name)
                indegree[name] += 1
        ready = sorted((n for n in path_nodes if indegree[n] == 0), key=position.get)
        order: list[str] = []
        while ready:
            current = ready.pop(0)
            order.append(current)
            fresh = []
            for child in children[current]:
                indegree[child] -= 1
                if indegree[child] == 0:
                    fresh.append(child)
            if fresh:
                ready = sorted(ready + fresh, key=position.get)
        if len(order) != len(path_nodes):
            stuck = [n for n in path_nodes if indegree[n] > 0]
            raise CycleDetected("directed cycle through nodes: " + ", ".join(stuck))
        return tuple(order)

    def _redundant_nodes(self) -> list[str]:
        """Chance/decision nodes from which no value node is reachable."""
        parents_of: dict[str, tuple[str, ...]] = {
            n: self.nodes[n].info_set for n in self.nodes
        }
        useful: set[str] = set()
        stack = list(self.value_nodes())
        while stack:
            current = stack.pop()
            for parent in parents_of[current]:
                if parent not in useful:
                    useful.add(parent)
                    stack.append(parent)
        return [
            n for n, d in self.nodes.items()
            if d.kind is not NodeKind.VALUE and n not in useful
        ]

    # --- JSON interchange --------------------------------------------------------

    def to_json_dict(self) -> dict:
        nodes = [
            {
                "name": d.name,
                "kind": d.kind.value,
                "states": list(d.states),
                "info_set": list(d.info_set),
            }
            for d in self.nodes.values()
        ]
        probabilities = {
            name: arr.reshape(self._parent_shape(name) + (len(self.nodes[name].states),)).tolist()
            for name, arr in self._probabilities.items()
        }
        utilities = {}
        for name, arr in self._utilities.items():
            shape = self._parent_shape(name)
            utilities[name] = arr.reshape(shape).tolist() if shape else arr.tolist()
        return {
            "nodes": nodes,
            "probabilities": probabilities,
            "utilities": utilities,
            "forbidden": [],
        }

    @classmethod
    def from_json_dict(cls, payload: dict, name: str = "diagram") -> "InfluenceDiagram":
        if not isinstance(payload, dict) or "nodes" not in payload:
            raise ParseError("diagram JSON must be an object with a 'nodes' array")
        known = {"nodes", "probabilities", "utilities", "forbidden", "toolkit_version", "flags"}
        extra = set(payload) - known
        if extra:
            warnings.warn(f"ignoring unknown diagram keys: {sorted(extra)}", stacklevel=2)
        diagram = cls(name=name)
        kinds = {k.value: k for k in NodeKind}
        for entry in payload["nodes"]:
            try:
                kind = kinds[entry["kind"]]
                node = Node(
                    entry["name"],
                    kind,
                    tuple(entry.get("states", ())),
                    tuple(entry.get("info_set", ())),
                )
            except (KeyError, TypeError) as exc:
                raise ParseError(f"malformed node entry {entry!r}") from exc
            diagram.add_node(node)
        for owner, table in (payload.get("probabilities") or {}).items():
            diagram.set_probabilities(owner, table)
        for owner, values in (payload.get("utilities") or {}).items():
            diagram.set_utilities(owner, values)
        return diagram


def load_diagram(path: str) -> tuple[InfluenceDiagram, list]:
    """Read a diagram JSON file; returns the unfrozen diagram and raw forbidden groups."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path!r}: {exc}") from exc
    stem = os.path.splitext(os.path.basename(path))[0] or "diagram"
    diagram = InfluenceDiagram.from_json_dict(payload, name=stem)
    return diagram, payload.get("forbidden") or []


def dump_diagram(diagram: InfluenceDiagram, forbidden=(), extra: dict | None = None) -> str:
    """Serialize a diagram (plus forbidden patterns) to the JSON interchange format."""
    payload = diagram.to_json_dict()
    payload["forbidden"] = [
        [{"node": node, "states": list(states)} for node, states in pattern]
        for pattern in forbidden
    ]
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2)
