"""Path enumeration over frozen diagrams.

A path assigns one state index to every chance and decision node, listed
in topological order. Enumeration is lexicographic with the first node
in the order as the most significant digit, processed in fixed-size
chunks so large state spaces stream through bounded memory while still
producing the exact sequential result.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .diagram import InfluenceDiagram, NodeKind
from .errors import ForbiddenProbabilityWarning, ParseError, PathExplosion, ValidationError

DEFAULT_PATH_CAP = 1 << 24
PROBABILITY_WARN_TOL = 1e-9
_CHUNK = 1 << 16


@dataclass(frozen=True)
class ForbiddenPattern:
    """Partial assignment matched conjunctively.

    A path matches when, for every listed node, its state name is in the
    node's allowed set. Matching paths are removed from the table.
    """

    constraints: tuple[tuple[str, tuple[str, ...]], ...]

    @classmethod
    def of(cls, mapping: dict) -> "ForbiddenPattern":
        items = []
        for node, states in mapping.items():
            if isinstance(states, str):
                states = (states,)
            items.append((node, tuple(states)))
        return cls(tuple(items))

    def __iter__(self):
        return iter(self.constraints)

    def validate(self, diagram: InfluenceDiagram) -> None:
        if not self.constraints:
            raise ValidationError("forbidden pattern must constrain at least one node")
        for node, states in self.constraints:
            if node not in diagram.nodes:
                raise ValidationError(f"forbidden pattern references unknown node {node!r}")
            if diagram.nodes[node].kind is NodeKind.VALUE:
                raise ValidationError(f"forbidden pattern references value node {node!r}")
            if not states:
                raise ValidationError(f"forbidden pattern for {node!r} lists no states")
            for state in states:
                diagram.state_index(node, state)


def patterns_from_json(groups: list) -> list[ForbiddenPattern]:
    """Build patterns from the diagram JSON ``forbidden`` array."""
    patterns = []
    for group in groups:
        try:
            entries = tuple((entry["node"], tuple(entry["states"])) for entry in group)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed forbidden group {group!r}") from exc
        patterns.append(ForbiddenPattern(entries))
    return patterns


class PathTable:
    """Effective paths with per-path probability and utility.

    Row ``i`` is the path with effective-path index ``i``; the ordering
    is the lexicographic order inherited from enumeration.
    """

    def __init__(self, diagram, order, states, probs, utils, removed_probability=0.0):
        self.diagram = diagram
        self.order: tuple[str, ...] = order
        self.states: np.ndarray = states          # (n_paths, n_nodes) small ints
        self.probs: np.ndarray = probs            # (n_paths,)
        self.utils: np.ndarray = utils            # (n_paths,)
        self.removed_probability = removed_probability
        self._column = {name: i for i, name in enumerate(order)}
        self._info_index_cache: dict[str, np.ndarray] = {}
        self._weights = self.probs * self.utils   # p(s)U(s), reused by every evaluator

    def __len__(self) -> int:
        return self.states.shape[0]

    def column(self, name: str) -> np.ndarray:
        """State index of ``name`` along every path."""
        return self.states[:, self._column[name]]

    def path(self, index: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.states[index])

    def weights(self) -> np.ndarray:
        return self._weights

    def info_state_indices(self, name: str) -> np.ndarray:
        """Row-major information-state index of ``name`` along every path."""
        cached = self._info_index_cache.get(name)
        if cached is None:
            cached = _info_indices(self.diagram, name, self.states, self._column)
            self._info_index_cache[name] = cached
        return cached

    def locally_compatible(self, name: str, info_index: int, state: int) -> np.ndarray:
        """Effective-path indices containing the (information state, state) pair."""
        mask = (self.info_state_indices(name) == info_index) & (self.column(name) == state)
        return np.nonzero(mask)[0]

    def gamma(self, name: str, state: int, info_index: int) -> int:
        """Safeguarded bound on active locally compatible paths.

        Minimum of the effective locally-compatible count and the
        unfiltered count divided by the free decision alternatives,
        which reduces to the product of state-space sizes of chance
        nodes outside the information set.
        """
        effective = int(self.locally_compatible(name, info_index, state).size)
        info_set = set(self.diagram.nodes[name].info_set)
        unfiltered_active = 1
        for other in self.order:
            node = self.diagram.nodes[other]
            if node.kind is NodeKind.CHANCE and other not in info_set:
                unfiltered_active *= len(node.states)
        return min(effective, unfiltered_active)

    def groups(self, name: str) -> list[np.ndarray]:
        """Path indices grouped by information state of decision node ``name``."""
        info = self.info_state_indices(name)
        count = self.diagram.information_state_count(name)
        return [np.nonzero(info == i)[0] for i in range(count)]


def _info_indices(diagram, name, states, column) -> np.ndarray:
    node = diagram.nodes[name]
    index = np.zeros(states.shape[0], dtype=np.int64)
    for parent in node.info_set:
        index = index * len(diagram.nodes[parent].states) + states[:, column[parent]].astype(np.int64)
    return index


def enumerate_paths(
    diagram: InfluenceDiagram,
    forbidden=(),
    fixed: dict | None = None,
    cap: int = DEFAULT_PATH_CAP,
) -> PathTable:
    """Enumerate effective paths with probabilities and utilities.

    ``forbidden`` is a sequence of :class:`ForbiddenPattern`; ``fixed``
    pins nodes to single states (by name) and is applied as an extra
    filter. Raises :class:`PathExplosion` when the unfiltered path count
    exceeds ``cap``.
    """
    if not diagram.frozen:
        raise ValidationError("diagram must be frozen before enumeration")
    order = diagram.path_nodes()
    sizes = [len(diagram.nodes[n].states) for n in order]
    total = 1
    for size in sizes:
        total *= size
    if total > cap:
        raise PathExplosion(f"{total} paths exceed the cap of {cap}")

    column = {name: i for i, name in enumerate(order)}
    for pattern in forbidden:
        pattern.validate(diagram)
    pins = {}
    for node, state in (fixed or {}).items():
        if node not in column:
            raise ValidationError(f"cannot pin {node!r}: not a chance/decision node")
        pins[column[node]] = diagram.state_index(node, state) if isinstance(state, str) else int(state)

    strides = np.ones(len(sizes), dtype=np.int64)
    for i in range(len(sizes) - 2, -1, -1):
        strides[i] = strides[i + 1] * sizes[i + 1]
    sizes_arr = np.asarray(sizes, dtype=np.int64)
    dtype = np.int8 if max(sizes, default=2) <= 127 else np.int16

    chance = [n for n in order if diagram.nodes[n].kind is NodeKind.CHANCE]
    values = diagram.value_nodes()

    kept_states, kept_probs, kept_utils = [], [], []
    removed_probability = 0.0
    for start in range(0, total, _CHUNK):
        ranks = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        states = ((ranks[:, None] // strides[None, :]) % sizes_arr[None, :]).astype(dtype)

        if pins:
            pin_mask = np.ones(states.shape[0], dtype=bool)
            for col, state in pins.items():
                pin_mask &= states[:, col] == state
            states = states[pin_mask]
        if states.shape[0] == 0:
            continue

        probs = np.ones(states.shape[0], dtype=float)
        for name in chance:
            info = _info_indices(diagram, name, states, column)
            probs *= diagram.probabilities(name)[info, states[:, column[name]].astype(np.int64)]

        if forbidden:
            matched = np.zeros(states.shape[0], dtype=bool)
            for pattern in forbidden:
                pattern_mask = np.ones(states.shape[0], dtype=bool)
                for node, state_names in pattern:
                    allowed = np.asarray(
                        [diagram.state_index(node, s) for s in state_names], dtype=states.dtype
                    )
                    pattern_mask &= np.isin(states[:, column[node]], allowed)
                matched |= pattern_mask
            removed_probability += float(probs[matched].sum())
            states = states[~matched]
            probs = probs[~matched]
        if states.shape[0] == 0:
            continue

        utils = np.zeros(states.shape[0], dtype=float)
        for name in values:
            info = _info_indices(diagram, name, states, column)
            utils += diagram.utilities(name)[info]

        kept_states.append(states)
        kept_probs.append(probs)
        kept_utils.append(utils)

    if kept_states:
        all_states = np.concatenate(kept_states)
        all_probs = np.concatenate(kept_probs)
        all_utils = np.concatenate(kept_utils)
    else:
        all_states = np.zeros((0, len(order)), dtype=dtype)
        all_probs = np.zeros(0, dtype=float)
        all_utils = np.zeros(0, dtype=float)

    if removed_probability > PROBABILITY_WARN_TOL:
        warnings.warn(
            f"forbidden patterns removed paths carrying probability {removed_probability:.6g}; "
            "remaining probabilities are not renormalized",
            ForbiddenProbabilityWarning,
            stacklevel=2,
        )
    return PathTable(diagram, order, all_states, all_probs, all_utils, removed_probability)


def path_probability(diagram: InfluenceDiagram, path) -> float:
    """Probability of one path: product of chance-node conditionals."""
    if not diagram.frozen:
        raise ValidationError("diagram must be frozen")
    order = diagram.path_nodes()
    column = {name: i for i, name in enumerate(order)}
    states = np.asarray(path, dtype=np.int64).reshape(1, -1)
    if states.shape[1] != len(order):
        raise ValidationError(f"path needs {len(order)} entries, got {states.shape[1]}")
    prob = 1.0
    for name in order:
        if diagram.nodes[name].kind is NodeKind.CHANCE:
            info = int(_info_indices(diagram, name, states, column)[0])
            prob *= float(diagram.probabilities(name)[info, int(states[0, column[name]])])
    return prob


def path_utility(diagram: InfluenceDiagram, path) -> float:
    """Utility of one path: sum over value nodes at the path's restriction."""
    if not diagram.frozen:
        raise ValidationError("diagram must be frozen")
    order = diagram.path_nodes()
    column = {name: i for i, name in enumerate(order)}
    states = np.asarray(path, dtype=np.int64).reshape(1, -1)
    total = 0.0
    for name in diagram.value_nodes():
        info = int(_info_indices(diagram, name, states, column)[0])
        total += float(diagram.utilities(name)[info])
    return total
