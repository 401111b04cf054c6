"""Native solution methods: exact enumeration and single-policy-update.

Brute force walks every strategy in lexicographic encoding order and is
the exactness oracle for everything else. The single-policy-update
heuristic sweeps (decision node, information state) pairs in a fixed
order, adopting the best alternative at each pair when it strictly
improves expected utility, until a full sweep makes no change; the
result cannot be improved by changing any single local entry.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .diagram import InfluenceDiagram
from .errors import StrategySpaceTooLarge, ValidationError
from .paths import PathTable
from .strategy import Strategy, expected_utility, random_strategy

DEFAULT_STRATEGY_CAP = 1 << 22
IMPROVEMENT_TOL = 1e-12


def strategy_count(diagram: InfluenceDiagram) -> int:
    """Number of distinct strategies: prod over decisions of |S_j|^(info states)."""
    total = 1
    for node in diagram.decision_nodes():
        total *= len(diagram.nodes[node].states) ** diagram.information_state_count(node)
    return total


def iter_strategies(diagram: InfluenceDiagram):
    """Yield all strategies in lexicographic order of their encoding."""
    slots: list[tuple[str, int]] = []
    for node in diagram.decision_nodes():
        for info in range(diagram.information_state_count(node)):
            slots.append((node, info))
    ranges = [range(len(diagram.nodes[node].states)) for node, _ in slots]
    for combo in itertools.product(*ranges):
        choices = {
            node: np.zeros(diagram.information_state_count(node), dtype=np.int64)
            for node in diagram.decision_nodes()
        }
        for (node, info), state in zip(slots, combo):
            choices[node][info] = state
        yield Strategy(diagram, choices)


@dataclass(frozen=True)
class BruteForceResult:
    strategy: Strategy
    expected_utility: float
    n_examined: int


def brute_force(table: PathTable, cap: int = DEFAULT_STRATEGY_CAP) -> BruteForceResult:
    """Exact maximizer of expected utility over all strategies.

    Only information states that actually occur in the path table are
    enumerated; entries for unreachable information states cannot affect
    expected utility and are fixed to alternative 0, which is exactly
    the lexicographically smallest member of the optimal tie class.
    """
    diagram = table.diagram
    slots: list[tuple[str, int, np.ndarray]] = []
    effective = 1
    for node in diagram.decision_nodes():
        for info, members in enumerate(table.groups(node)):
            if members.size:
                slots.append((node, info, members))
                effective *= len(diagram.nodes[node].states)
    if effective > cap:
        raise StrategySpaceTooLarge(
            f"{effective} reachable strategies exceed the cap of {cap}"
        )

    choices = {
        node: np.zeros(diagram.information_state_count(node), dtype=np.int64)
        for node in diagram.decision_nodes()
    }
    weights = table.weights()
    info_of = {node: table.info_state_indices(node) for node in choices}
    state_of = {node: table.column(node) for node in choices}

    best_eu = -np.inf
    best: dict[str, np.ndarray] | None = None
    examined = 0
    ranges = [range(len(diagram.nodes[node].states)) for node, _, _ in slots]
    for combo in itertools.product(*ranges):
        for (node, info, _), state in zip(slots, combo):
            choices[node][info] = state
        mask = np.ones(len(table), dtype=bool)
        for node in choices:
            mask &= choices[node][info_of[node]] == state_of[node]
        eu = float(weights[mask].sum())
        examined += 1
        if eu > best_eu:
            best_eu = eu
            best = {k: v.copy() for k, v in choices.items()}
    assert best is not None   # itertools.product always yields at least one combo
    return BruteForceResult(Strategy(diagram, best), best_eu, examined)


@dataclass(frozen=True)
class SpuMove:
    node: str
    info_state: int
    eu_before: float
    eu_after: float


@dataclass
class SpuResult:
    strategy: Strategy
    expected_utility: float
    trace: list[SpuMove]
    sweeps: int


def _alternative_values(table, choices, node, members, weights):
    """Expected-utility contribution of each alternative at one slot.

    Restricted to the slot's path group, with all other local entries
    held fixed; entry c is the compatible weight when the slot picks c.
    """
    others = np.ones(members.size, dtype=bool)
    for other, picks in choices.items():
        if other == node:
            continue
        others &= picks[table.info_state_indices(other)[members]] == table.column(other)[members]
    state_here = table.column(node)[members]
    values = np.zeros(len(table.diagram.nodes[node].states))
    np.add.at(values, state_here[others].astype(np.int64), weights[members][others])
    return values


def spu(table: PathTable, initial: Strategy) -> SpuResult:
    """Single-policy-update local search from a given strategy.

    Sweeps decision nodes in topological order and information states in
    ascending index order; a change is adopted only when it improves
    expected utility by more than IMPROVEMENT_TOL (ties keep the
    incumbent). Terminates when a full sweep adopts nothing.
    """
    diagram = table.diagram
    current = initial.copy()
    choices = current.choices
    weights = table.weights()
    groups = {node: table.groups(node) for node in diagram.decision_nodes()}
    eu = expected_utility(table, current)
    trace: list[SpuMove] = []
    sweeps = 0
    improved = True
    while improved:
        improved = False
        sweeps += 1
        for node in diagram.decision_nodes():
            for info, members in enumerate(groups[node]):
                if members.size == 0:
                    continue
                values = _alternative_values(table, choices, node, members, weights)
                incumbent = int(choices[node][info])
                candidate = int(np.argmax(values))
                if values[candidate] > values[incumbent] + IMPROVEMENT_TOL:
                    choices[node][info] = candidate
                    new_eu = expected_utility(table, current)
                    trace.append(SpuMove(node, info, eu, new_eu))
                    eu = new_eu
                    improved = True
    return SpuResult(current, eu, trace, sweeps)


@dataclass(frozen=True)
class RestartOutcome:
    index: int
    expected_utility: float
    moves: int


@dataclass
class MultistartResult:
    strategy: Strategy
    expected_utility: float
    best_restart: int
    restarts: list[RestartOutcome]
    trace: list[SpuMove]            # improving moves of the best restart


def spu_multistart(table: PathTable, restarts: int, rng_seed: int) -> MultistartResult:
    """Best single-policy-update result over independent random starts.

    Start seeds are spawned from the given seed, so run k of a larger
    budget draws the same start as run k of a smaller one (best value is
    non-decreasing in the number of restarts). Ties keep the lowest
    restart index.
    """
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    children = np.random.SeedSequence(rng_seed).spawn(restarts)
    best: SpuResult | None = None
    best_index = -1
    outcomes: list[RestartOutcome] = []
    for index, child in enumerate(children):
        start = random_strategy(table.diagram, np.random.default_rng(child))
        result = spu(table, start)
        outcomes.append(RestartOutcome(index, result.expected_utility, len(result.trace)))
        if best is None or result.expected_utility > best.expected_utility:
            best = result
            best_index = index
    assert best is not None
    return MultistartResult(
        best.strategy, best.expected_utility, best_index, outcomes, best.trace
    )


def local_optimality_check(table: PathTable, strategy: Strategy):
    """Whether no single local change improves expected utility.

    Returns ``(True, None)`` at a local optimum, otherwise ``(False,
    (node, info_state, better_state))`` for the first improving pair in
    sweep order. Uses the same improvement threshold as the heuristic.
    """
    choices = strategy.choices
    weights = table.weights()
    for node in table.diagram.decision_nodes():
        for info, members in enumerate(table.groups(node)):
            if members.size == 0:
                continue
            values = _alternative_values(table, choices, node, members, weights)
            incumbent = int(choices[node][info])
            candidate = int(np.argmax(values))
            if values[candidate] > values[incumbent] + IMPROVEMENT_TOL:
                return False, (node, info, candidate)
    return True, None
