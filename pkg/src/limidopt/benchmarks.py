"""Benchmark families and the staged-testing case study.

Two scalable families with all-binary state spaces:

* ``gen_pigfarm(n)`` - a livestock treatment chain: health states
  h1..h(n+1), per-stage test results t1..tn, treat decisions d1..dn that
  observe only their own stage's test, per-stage treatment-cost value
  nodes, and a salvage value on the final health state. 3n+1 chance and
  decision nodes.
* ``gen_nmonitoring(n)`` - independent monitoring agents: load L, sensor
  readings R1..Rn, countermeasure decisions A1..An (each sees only its
  own reading), failure F driven by the load and all countermeasures,
  and a single value node over (F, A1..An). 2n+2 chance and decision
  nodes.

Default (non-random) parameters are documented repository constants;
randomized instances draw each conditional distribution uniformly from
the probability simplex and utilities uniformly from [0,1] (or [-1,1]
with ``negative_utilities=True``).

The staged-testing generator ``gen_chd`` reproduces a two-round
diagnostic structure with risk levels discretized on a uniform grid,
posterior updates by Bayes' rule rounded to the nearest level, repeated
tests forbidden, and testing after an initial "none" forbidden. Its
default parameters are synthetic placeholders, not clinical data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .diagram import InfluenceDiagram, NodeKind
from .errors import (
    DegenerateTest,
    ForbiddenProbabilityWarning,
    InvalidParams,
    ValidationError,
)
from .paths import DEFAULT_PATH_CAP, ForbiddenPattern, enumerate_paths
from .solvers import brute_force, spu_multistart
from .strategy import Strategy

# Default pig-farm constants (repository-defined, all probabilities of
# the *first* listed state; states are ("healthy", "ill") etc.).
PIGFARM_P_HEALTHY_START = 0.9
PIGFARM_TEST = {"healthy": (0.9, 0.1), "ill": (0.2, 0.8)}       # P(neg),P(pos) by health
PIGFARM_TRANSITION = {
    # (health, treat) -> P(healthy next), P(ill next)
    ("healthy", "skip"): (0.8, 0.2),
    ("healthy", "treat"): (0.9, 0.1),
    ("ill", "skip"): (0.1, 0.9),
    ("ill", "treat"): (0.5, 0.5),
}
PIGFARM_TREAT_COST = -100.0
PIGFARM_SALVAGE = (1000.0, 300.0)                                # healthy, ill

# Default monitoring constants.
NMON_P_LOW = 0.5
NMON_SENSOR = {"low": (0.8, 0.2), "high": (0.2, 0.8)}            # P(reads low),P(reads high)
NMON_ACTION_COST = 120.0
NMON_SUCCESS_REWARD = 1000.0
NMON_FAIL_PENALTY = -300.0
NMON_BASE_FAIL = {"low": 0.1, "high": 0.7}
NMON_FAIL_REDUCTION = 0.6                                        # multiplier per countermeasure


def _simplex_rows(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.dirichlet(np.ones(cols), size=rows)


def _randomize(diagram: InfluenceDiagram, rng: np.random.Generator, negative_utilities: bool):
    for name in list(diagram.nodes):
        node = diagram.nodes[name]
        if node.kind is NodeKind.CHANCE:
            rows = diagram.information_state_count(name)
            diagram.set_probabilities(name, _simplex_rows(rng, rows, len(node.states)))
        elif node.kind is NodeKind.VALUE:
            rows = diagram.information_state_count(name)
            low = -1.0 if negative_utilities else 0.0
            diagram.set_utilities(name, rng.uniform(low, 1.0, size=rows))


def gen_pigfarm(
    n: int,
    rng_seed: int = 0,
    randomize: bool = False,
    negative_utilities: bool = False,
) -> InfluenceDiagram:
    """Treatment-chain benchmark with n decision stages (3n+1 path nodes)."""
    if n < 1:
        raise InvalidParams("n must be >= 1")
    diagram = InfluenceDiagram(name=f"pigfarm_n{n}")
    health = ("healthy", "ill")
    test = ("neg", "pos")
    treat = ("skip", "treat")
    for stage in range(1, n + 1):
        prev = f"h{stage}"
        if stage == 1:
            diagram.add_chance(prev, health)
        diagram.add_chance(f"t{stage}", test, info_set=(prev,))
        diagram.add_decision(f"d{stage}", treat, info_set=(f"t{stage}",))
        diagram.add_chance(f"h{stage + 1}", health, info_set=(prev, f"d{stage}"))
    for stage in range(1, n + 1):
        diagram.add_value(f"c{stage}", info_set=(f"d{stage}",))
    diagram.add_value("v", info_set=(f"h{n + 1}",))

    if randomize:
        _randomize(diagram, np.random.default_rng(rng_seed), negative_utilities)
    else:
        p0 = PIGFARM_P_HEALTHY_START
        diagram.set_probabilities("h1", [[p0, 1.0 - p0]])
        test_rows = [PIGFARM_TEST["healthy"], PIGFARM_TEST["ill"]]
        transition_rows = [
            PIGFARM_TRANSITION[("healthy", "skip")],
            PIGFARM_TRANSITION[("healthy", "treat")],
            PIGFARM_TRANSITION[("ill", "skip")],
            PIGFARM_TRANSITION[("ill", "treat")],
        ]
        for stage in range(1, n + 1):
            diagram.set_probabilities(f"t{stage}", test_rows)
            diagram.set_probabilities(f"h{stage + 1}", transition_rows)
        for stage in range(1, n + 1):
            diagram.set_utilities(f"c{stage}", [0.0, PIGFARM_TREAT_COST])
        diagram.set_utilities("v", list(PIGFARM_SALVAGE))
    return diagram.freeze()


def gen_nmonitoring(
    n: int,
    rng_seed: int = 0,
    randomize: bool = False,
    negative_utilities: bool = False,
) -> InfluenceDiagram:
    """Monitoring benchmark with n report-action pairs (2n+2 path nodes)."""
    if n < 1:
        raise InvalidParams("n must be >= 1")
    diagram = InfluenceDiagram(name=f"nmonitoring_n{n}")
    load = ("low", "high")
    reading = ("low", "high")
    act = ("pass", "act")
    diagram.add_chance("L", load)
    for i in range(1, n + 1):
        diagram.add_chance(f"R{i}", reading, info_set=("L",))
    for i in range(1, n + 1):
        diagram.add_decision(f"A{i}", act, info_set=(f"R{i}",))
    diagram.add_chance("F", ("ok", "fail"), info_set=("L",) + tuple(f"A{i}" for i in range(1, n + 1)))
    diagram.add_value("T", info_set=("F",) + tuple(f"A{i}" for i in range(1, n + 1)))

    if randomize:
        _randomize(diagram, np.random.default_rng(rng_seed), negative_utilities)
    else:
        diagram.set_probabilities("L", [[NMON_P_LOW, 1.0 - NMON_P_LOW]])
        sensor_rows = [NMON_SENSOR["low"], NMON_SENSOR["high"]]
        for i in range(1, n + 1):
            diagram.set_probabilities(f"R{i}", sensor_rows)
        fail_rows = []
        for load_state in ("low", "high"):
            for acts in range(1 << n):
                n_acting = bin(acts).count("1")
                p_fail = NMON_BASE_FAIL[load_state] * NMON_FAIL_REDUCTION ** n_acting
                fail_rows.append((1.0 - p_fail, p_fail))
        diagram.set_probabilities("F", fail_rows)
        utilities = []
        for outcome in ("ok", "fail"):
            base = NMON_SUCCESS_REWARD if outcome == "ok" else NMON_FAIL_PENALTY
            for acts in range(1 << n):
                n_acting = bin(acts).count("1")
                utilities.append(base - NMON_ACTION_COST * n_acting)
        diagram.set_utilities("T", utilities)
    return diagram.freeze()


def pigfarm_original_count(n: int) -> int:
    """Closed-form constraint count of the original form (bounds convention)."""
    return (3 + n) * (1 << (3 * n + 1)) + 2 * n


def pigfarm_improved_count(n: int) -> int:
    return (1 << (3 * n + 2)) + 6 * n


def nmonitoring_original_count(n: int) -> int:
    return (3 + n) * (1 << (2 * n + 2)) + 2 * n


def nmonitoring_improved_count(n: int) -> int:
    return (1 << (2 * n + 3)) + 6 * n


def recognize_family(diagram: InfluenceDiagram):
    """Identify a diagram as a generated benchmark instance.

    Returns ("pigfarm", n) or ("nmonitoring", n) when the node names,
    kinds, state-space sizes, and information sets match a generator
    skeleton, else None. Probability/utility values are not compared.
    """
    def skeleton(d: InfluenceDiagram):
        return [
            (v.name, v.kind, len(v.states), v.info_set) for v in d.nodes.values()
        ]

    names = set(diagram.nodes)
    for family, generator in (("pigfarm", gen_pigfarm), ("nmonitoring", gen_nmonitoring)):
        if family == "pigfarm":
            stages = [int(n[1:]) for n in names if n.startswith("d") and n[1:].isdigit()]
        else:
            stages = [int(n[1:]) for n in names if n.startswith("A") and n[1:].isdigit()]
        if not stages:
            continue
        n = max(stages)
        try:
            reference = generator(n)
        except InvalidParams:
            continue
        if skeleton(reference) == skeleton(diagram):
            return family, n
    return None


# --- Bayes update -------------------------------------------------------------


def bayes_update(prior: float, sensitivity: float, specificity: float, result: str) -> float:
    """Posterior event probability after one binary test result.

    A positive result weighs sensitivity against the false-positive rate;
    a negative result weighs the miss rate against specificity. A zero
    denominator with a nonzero prior means the observed result is
    impossible under the test model and raises :class:`DegenerateTest`;
    with a zero prior the posterior is zero regardless.
    """
    for label, value in (("prior", prior), ("sensitivity", sensitivity), ("specificity", specificity)):
        if not 0.0 <= value <= 1.0:
            raise InvalidParams(f"{label} must be in [0,1], got {value!r}")
    if result not in ("positive", "negative"):
        raise InvalidParams(f"result must be 'positive' or 'negative', got {result!r}")
    if result == "positive":
        numerator = sensitivity * prior
        complement = (1.0 - specificity) * (1.0 - prior)
    else:
        numerator = (1.0 - sensitivity) * prior
        complement = specificity * (1.0 - prior)
    denominator = numerator + complement
    if denominator == 0.0:
        if prior == 0.0:
            return 0.0
        raise DegenerateTest(
            f"result {result!r} has probability zero under prior={prior!r}, "
            f"sensitivity={sensitivity!r}, specificity={specificity!r}"
        )
    return numerator / denominator


# --- staged diagnostic case ---------------------------------------------------


@dataclass(frozen=True)
class DiagnosticTest:
    sensitivity: float
    specificity: float
    cost: float


@dataclass(frozen=True)
class ChdParams:
    """Parameters of the staged-testing model. Defaults are synthetic."""

    trs: DiagnosticTest = DiagnosticTest(0.8, 0.85, 5.0)
    grs: DiagnosticTest = DiagnosticTest(0.75, 0.8, 20.0)
    benefit_event_treated: float = 550.0
    benefit_event_untreated: float = 200.0
    benefit_healthy_treated: float = 900.0
    benefit_healthy_untreated: float = 1000.0
    r0_distribution: tuple[float, ...] | None = None      # default: uniform

    def validate(self, risk_levels: int) -> None:
        for test in (self.trs, self.grs):
            for value in (test.sensitivity, test.specificity):
                if not 0.0 <= value <= 1.0:
                    raise InvalidParams(f"test characteristic {value!r} outside [0,1]")
            if not math.isfinite(test.cost) or test.cost < 0:
                raise InvalidParams(f"test cost must be finite and nonnegative, got {test.cost!r}")
        for value in (
            self.benefit_event_treated,
            self.benefit_event_untreated,
            self.benefit_healthy_treated,
            self.benefit_healthy_untreated,
        ):
            if not math.isfinite(value):
                raise InvalidParams("benefits must be finite")
        if self.r0_distribution is not None:
            if len(self.r0_distribution) != risk_levels:
                raise InvalidParams("r0_distribution length must equal risk_levels")
            if any(p < 0 for p in self.r0_distribution):
                raise InvalidParams("r0_distribution entries must be nonnegative")
            if abs(sum(self.r0_distribution) - 1.0) > 1e-9:
                raise InvalidParams("r0_distribution must sum to one")


@dataclass
class ChdProblem:
    diagram: InfluenceDiagram
    forbidden: list[ForbiddenPattern]
    pins: dict[str, str]
    grid: np.ndarray
    params: ChdParams


TEST_STATES = ("trs", "grs", "none")
TREAT_STATES = ("treat", "pass")
HEALTH_STATES = ("event", "healthy")


def _nearest_level(grid: np.ndarray, value: float) -> int:
    return int(np.argmin(np.abs(grid - value)))


def _posterior_rows(grid, params, prior_level_count):
    """Risk-update table rows over (previous level, test decision, health).

    With no test the level carries forward unchanged. Otherwise the row
    mixes the two test results with their probabilities given the health
    state, each result mapping to the grid level nearest its posterior.
    Degenerate (conditionally unreachable) combinations also carry the
    level forward.
    """
    levels = len(grid)
    rows = np.zeros((prior_level_count * len(TEST_STATES) * 2, levels))
    row = 0
    for level in range(prior_level_count):
        prior = float(grid[level])
        for test_name in TEST_STATES:
            for health in HEALTH_STATES:
                if test_name == "none":
                    rows[row, level] = 1.0
                else:
                    test = getattr(params, test_name)
                    p_pos = test.sensitivity if health == "event" else 1.0 - test.specificity
                    for result, weight in (("positive", p_pos), ("negative", 1.0 - p_pos)):
                        if weight == 0.0:
                            continue
                        try:
                            posterior = bayes_update(
                                prior, test.sensitivity, test.specificity, result
                            )
                        except DegenerateTest:
                            posterior = prior
                        rows[row, _nearest_level(grid, posterior)] += weight
                row += 1
    return rows


def gen_chd(
    risk_levels: int,
    params: ChdParams | None = None,
    prior_level: int | None = None,
) -> ChdProblem:
    """Two-round diagnostic model over a uniform risk grid.

    Nodes: prior risk R0, first test decision T1, health H (event
    probability equals the R0 grid value), updated risks R1 and R2,
    second test decision T2, treatment decision TD, value nodes TC
    (testing costs) and HB (health benefit). Forbidden patterns remove
    repeated tests and testing after an initial "none". With
    ``prior_level`` set, R0 gets a point-mass distribution at that level
    and is pinned during enumeration.
    """
    if risk_levels < 2:
        raise InvalidParams("risk_levels must be >= 2")
    params = params or ChdParams()
    params.validate(risk_levels)
    if prior_level is not None and not 0 <= prior_level < risk_levels:
        raise InvalidParams(f"prior_level must be in [0, {risk_levels})")

    grid = np.linspace(0.0, 1.0, risk_levels)
    level_names = tuple(f"r{i}" for i in range(risk_levels))
    diagram = InfluenceDiagram(name=f"chd_l{risk_levels}")
    diagram.add_chance("R0", level_names)
    diagram.add_decision("T1", TEST_STATES, info_set=("R0",))
    diagram.add_chance("H", HEALTH_STATES, info_set=("R0",))
    diagram.add_chance("R1", level_names, info_set=("R0", "T1", "H"))
    diagram.add_decision("T2", TEST_STATES, info_set=("R1",))
    diagram.add_chance("R2", level_names, info_set=("R1", "T2", "H"))
    diagram.add_decision("TD", TREAT_STATES, info_set=("R2",))
    diagram.add_value("TC", info_set=("T1", "T2"))
    diagram.add_value("HB", info_set=("H", "TD"))

    if prior_level is not None:
        r0 = np.zeros(risk_levels)
        r0[prior_level] = 1.0
    elif params.r0_distribution is not None:
        r0 = np.asarray(params.r0_distribution, dtype=float)
    else:
        r0 = np.full(risk_levels, 1.0 / risk_levels)
    diagram.set_probabilities("R0", r0.reshape(1, -1))
    diagram.set_probabilities("H", np.column_stack([grid, 1.0 - grid]))
    diagram.set_probabilities("R1", _posterior_rows(grid, params, risk_levels))
    diagram.set_probabilities("R2", _posterior_rows(grid, params, risk_levels))

    costs = {"trs": params.trs.cost, "grs": params.grs.cost, "none": 0.0}
    diagram.set_utilities(
        "TC", [-(costs[t1] + costs[t2]) for t1 in TEST_STATES for t2 in TEST_STATES]
    )
    diagram.set_utilities(
        "HB",
        [
            params.benefit_event_treated,
            params.benefit_event_untreated,
            params.benefit_healthy_treated,
            params.benefit_healthy_untreated,
        ],
    )
    diagram.freeze()

    forbidden = [
        ForbiddenPattern.of({"T1": "trs", "T2": "trs"}),
        ForbiddenPattern.of({"T1": "grs", "T2": "grs"}),
        ForbiddenPattern.of({"T1": "none", "T2": "trs"}),
        ForbiddenPattern.of({"T1": "none", "T2": "grs"}),
    ]
    pins = {"R0": level_names[prior_level]} if prior_level is not None else {}
    return ChdProblem(diagram, forbidden, pins, grid, params)


@dataclass(frozen=True)
class PerPriorRow:
    level: int
    risk: float
    first_action: str
    treat_at_top_level: str
    expected_utility: float


@dataclass
class PerPriorReport:
    risk_levels: int
    method: str
    rows: list[PerPriorRow]
    strategies: list[Strategy] = field(default_factory=list)


def solve_per_prior(
    risk_levels: int,
    params: ChdParams | None = None,
    method: str = "brute",
    restarts: int = 10,
    rng_seed: int = 0,
    path_cap: int = DEFAULT_PATH_CAP,
) -> PerPriorReport:
    """Solve the staged-testing model separately for each prior level.

    Each level pins the prior risk node (with a matching point-mass
    distribution) and solves the pinned model exactly or with the
    multistart heuristic. Rows report the chosen first action at that
    level plus the treatment choice when the final estimate equals the
    pinned level.
    """
    if method not in ("brute", "spu"):
        raise ValidationError(f"unknown method {method!r}")
    rows: list[PerPriorRow] = []
    strategies: list[Strategy] = []
    for level in range(risk_levels):
        problem = gen_chd(risk_levels, params, prior_level=level)
        # The generator's own forbidden patterns intentionally remove
        # decision combinations whose raw path product is positive;
        # the removed-mass warning is expected here, not actionable.
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ForbiddenProbabilityWarning)
            table = enumerate_paths(
                problem.diagram, forbidden=problem.forbidden, fixed=problem.pins, cap=path_cap
            )
        if method == "brute":
            result = brute_force(table)
            strategy, eu = result.strategy, result.expected_utility
        else:
            result = spu_multistart(table, restarts=restarts, rng_seed=rng_seed + level)
            strategy, eu = result.strategy, result.expected_utility
        first = problem.diagram.nodes["T1"].states[int(strategy.choices["T1"][level])]
        treat = problem.diagram.nodes["TD"].states[int(strategy.choices["TD"][level])]
        rows.append(PerPriorRow(level, float(problem.grid[level]), first, treat, eu))
        strategies.append(strategy)
    return PerPriorReport(risk_levels, method, rows, strategies)
