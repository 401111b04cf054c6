"""Limited-memory influence diagrams as deterministic-equivalent MILPs.

Build and validate a diagram, enumerate its effective paths, compile
either MILP formulation to LP/MPS files for any external solver, or
solve natively by exact strategy enumeration or the single-policy-update
heuristic.
"""

__version__ = "0.1.0"

from .benchmarks import (
    ChdParams,
    bayes_update,
    gen_chd,
    gen_nmonitoring,
    gen_pigfarm,
    solve_per_prior,
)
from .diagram import InfluenceDiagram, Node, NodeKind, dump_diagram, load_diagram
from .emit import read_solution, write_lp, write_mps, write_solution
from .formulation import (
    FormulationStats,
    LinearConstraint,
    ModelIR,
    VariableDef,
    build_improved,
    build_original,
    scale_utilities,
    stats,
    strategy_to_assignment,
)
from .paths import (
    DEFAULT_PATH_CAP,
    ForbiddenPattern,
    PathTable,
    enumerate_paths,
    path_probability,
    path_utility,
)
from .solvers import (
    DEFAULT_STRATEGY_CAP,
    brute_force,
    iter_strategies,
    local_optimality_check,
    spu,
    spu_multistart,
    strategy_count,
)
from .strategy import (
    Strategy,
    compatibility_mask,
    expected_utility,
    is_compatible,
    random_strategy,
)

__all__ = [
    "ChdParams",
    "DEFAULT_PATH_CAP",
    "DEFAULT_STRATEGY_CAP",
    "ForbiddenPattern",
    "FormulationStats",
    "InfluenceDiagram",
    "LinearConstraint",
    "ModelIR",
    "Node",
    "NodeKind",
    "PathTable",
    "Strategy",
    "VariableDef",
    "bayes_update",
    "brute_force",
    "build_improved",
    "build_original",
    "compatibility_mask",
    "dump_diagram",
    "enumerate_paths",
    "expected_utility",
    "gen_chd",
    "gen_nmonitoring",
    "gen_pigfarm",
    "is_compatible",
    "iter_strategies",
    "load_diagram",
    "local_optimality_check",
    "path_probability",
    "path_utility",
    "random_strategy",
    "read_solution",
    "scale_utilities",
    "solve_per_prior",
    "spu",
    "spu_multistart",
    "stats",
    "strategy_count",
    "strategy_to_assignment",
    "write_lp",
    "write_mps",
    "write_solution",
]
