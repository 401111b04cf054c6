"""Decision strategies and expected-utility evaluation.

A strategy stores, for every decision node, one chosen alternative per
information state (dense arrays indexed by the row-major information
state index). A path is compatible with a strategy when every decision
node's entry matches the path's state at that node.
"""

from __future__ import annotations

import numpy as np

from .diagram import InfluenceDiagram
from .errors import ValidationError
from .paths import PathTable


class Strategy:
    """One chosen alternative per (decision node, information state)."""

    def __init__(self, diagram: InfluenceDiagram, choices: dict[str, np.ndarray]):
        self.diagram = diagram
        self.choices: dict[str, np.ndarray] = {}
        for name in diagram.decision_nodes():
            if name not in choices:
                raise ValidationError(f"strategy missing decision node {name!r}")
            arr = np.asarray(choices[name], dtype=np.int64)
            expected = diagram.information_state_count(name)
            if arr.shape != (expected,):
                raise ValidationError(
                    f"strategy for {name!r} needs {expected} entries, got {arr.shape}"
                )
            n_states = len(diagram.nodes[name].states)
            if np.any(arr < 0) or np.any(arr >= n_states):
                raise ValidationError(f"strategy for {name!r} picks an out-of-range state")
            self.choices[name] = arr

    def copy(self) -> "Strategy":
        return Strategy(self.diagram, {k: v.copy() for k, v in self.choices.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, Strategy):
            return NotImplemented
        return self.choices.keys() == other.choices.keys() and all(
            np.array_equal(self.choices[k], other.choices[k]) for k in self.choices
        )

    def __hash__(self):
        return hash(tuple((k, tuple(v)) for k, v in sorted(self.choices.items())))

    def encoding(self) -> tuple[int, ...]:
        """Flat choice tuple in topological node order (used for tie-breaking)."""
        flat: list[int] = []
        for name in self.diagram.decision_nodes():
            flat.extend(int(v) for v in self.choices[name])
        return tuple(flat)

    def to_json_dict(self) -> dict:
        """Map node -> {comma-joined parent state names -> chosen state name}."""
        out: dict[str, dict[str, str]] = {}
        for name, arr in self.choices.items():
            node = self.diagram.nodes[name]
            entry = {}
            for index, choice in enumerate(arr):
                key = ",".join(self.diagram.information_state_tuple(name, index))
                entry[key] = node.states[int(choice)]
            out[name] = entry
        return out

    @classmethod
    def from_json_dict(cls, diagram: InfluenceDiagram, payload: dict) -> "Strategy":
        choices = {}
        for name in diagram.decision_nodes():
            if name not in payload:
                raise ValidationError(f"strategy JSON missing node {name!r}")
            count = diagram.information_state_count(name)
            arr = np.zeros(count, dtype=np.int64)
            seen = set()
            for key, state in payload[name].items():
                parents = tuple(key.split(",")) if key else ()
                index = diagram.information_state_index(name, parents)
                arr[index] = diagram.state_index(name, state)
                seen.add(index)
            if len(seen) != count:
                raise ValidationError(f"strategy JSON for {name!r} misses information states")
            choices[name] = arr
        return cls(diagram, choices)


def random_strategy(diagram: InfluenceDiagram, rng_seed) -> Strategy:
    """Uniform independent choice per (decision node, information state)."""
    if not diagram.frozen:
        raise ValidationError("diagram must be frozen")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    choices = {}
    for name in diagram.decision_nodes():
        count = diagram.information_state_count(name)
        n_states = len(diagram.nodes[name].states)
        choices[name] = rng.integers(0, n_states, size=count, dtype=np.int64)
    return Strategy(diagram, choices)


def compatibility_mask(table: PathTable, strategy: Strategy) -> np.ndarray:
    """Boolean mask over effective paths compatible with the strategy."""
    mask = np.ones(len(table), dtype=bool)
    for name, picks in strategy.choices.items():
        mask &= picks[table.info_state_indices(name)] == table.column(name)
    return mask


def is_compatible(table: PathTable, strategy: Strategy, path_index: int) -> bool:
    """True when every decision along the path agrees with the strategy."""
    for name, picks in strategy.choices.items():
        info = int(table.info_state_indices(name)[path_index])
        if picks[info] != int(table.column(name)[path_index]):
            return False
    return True


def expected_utility(table: PathTable, strategy: Strategy) -> float:
    """Sum of p(s)*U(s) over compatible effective paths, in path order."""
    mask = compatibility_mask(table, strategy)
    return float(table.weights()[mask].sum())


def compatible_probability(table: PathTable, strategy: Strategy) -> float:
    """Total probability of the strategy's compatible paths."""
    mask = compatibility_mask(table, strategy)
    return float(table.probs[mask].sum())
