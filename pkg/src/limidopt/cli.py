"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 capacity exceeded,
4 I/O or parse failure. All commands are deterministic given their
flags and seeds; JSON and CSV outputs carry the toolkit version and the
flag set that produced them.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import time

import click

from . import __version__
from .benchmarks import (
    gen_chd,
    gen_nmonitoring,
    gen_pigfarm,
    nmonitoring_improved_count,
    nmonitoring_original_count,
    pigfarm_improved_count,
    pigfarm_original_count,
    recognize_family,
    solve_per_prior,
)
from .diagram import dump_diagram, load_diagram
from .emit import read_solution, write_lp, write_mps
from .errors import LimidError
from .formulation import build_improved, build_original, stats, strategy_to_assignment
from .paths import DEFAULT_PATH_CAP, enumerate_paths, patterns_from_json
from .solvers import (
    DEFAULT_STRATEGY_CAP,
    brute_force,
    local_optimality_check,
    spu_multistart,
)


@click.group()
@click.version_option(version=__version__)
def main():
    """Model, validate, compile, and solve limited-memory influence diagrams."""


def _fail(error: LimidError):
    click.echo(f"{type(error).__name__}: {error}", err=True)
    sys.exit(getattr(error, "exit_code", 2))


def _load(path: str, pins: tuple[str, ...]):
    diagram, forbidden_json = load_diagram(path)
    diagram.freeze()
    forbidden = patterns_from_json(forbidden_json)
    fixed = {}
    for pin in pins:
        if "=" not in pin:
            raise click.UsageError(f"--pin expects NODE=STATE, got {pin!r}")
        node, state = pin.split("=", 1)
        fixed[node] = state
    return diagram, forbidden, fixed


def _provenance(flags: dict) -> dict:
    return {"toolkit_version": __version__, "flags": flags}


@main.command()
@click.argument("diagram_file", type=click.Path(exists=True, dir_okay=False))
def validate(diagram_file):
    """Check a diagram file and print a structural summary."""
    try:
        import warnings

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            diagram, forbidden_json = load_diagram(diagram_file)
            diagram.freeze()
            patterns_from_json(forbidden_json)
        n_path = len(diagram.path_nodes())
        n_value = len(diagram.value_nodes())
        click.echo(
            f"{n_path} path nodes, {n_value} value node{'s' if n_value != 1 else ''}, "
            f"|S|={diagram.num_paths()}"
        )
        for warning in caught:
            click.echo(f"warning: {warning.message}")
    except LimidError as error:
        _fail(error)


def _closed_form(diagram):
    family = recognize_family(diagram)
    if family is None:
        return None
    name, n = family
    if name == "pigfarm":
        return name, n, pigfarm_original_count(n), pigfarm_improved_count(n)
    return name, n, nmonitoring_original_count(n), nmonitoring_improved_count(n)


@main.command(name="stats")
@click.argument("diagram_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--formulation", type=click.Choice(["original", "improved", "both"]), default="both")
@click.option("--lower-bound", type=click.Choice(["auto", "on", "off"]), default="auto")
@click.option("--probcut/--no-probcut", default=None, help="Override the probability-cut default.")
@click.option("--pin", multiple=True, metavar="NODE=STATE")
@click.option("--path-cap", type=int, default=DEFAULT_PATH_CAP, show_default=True)
def stats_command(diagram_file, formulation, lower_bound, probcut, pin, path_cap):
    """Report formulation sizes (bounds counted in the usual convention)."""
    try:
        diagram, forbidden, fixed = _load(diagram_file, pin)
        table = enumerate_paths(diagram, forbidden, fixed, cap=path_cap)
        totals = {}
        for kind in ("original", "improved") if formulation == "both" else (formulation,):
            if kind == "original":
                model = build_original(
                    table,
                    include_lower_bound={"auto": "auto", "on": True, "off": False}[lower_bound],
                    include_probability_cut=bool(probcut) if probcut is not None else False,
                )
            else:
                model = build_improved(
                    table,
                    include_probability_cut=probcut if probcut is not None else True,
                )
            report = stats(model)
            totals[kind] = report.total_with_bounds
            click.echo(
                f"{kind}: binaries={report.n_binary} continuous={report.n_continuous} "
                f"rows={report.n_constraints} bounds={report.n_bounds} "
                f"total={report.total_with_bounds}"
            )
        closed = _closed_form(diagram)
        if closed is not None:
            name, n, original, improved = closed
            click.echo(f"recognized {name} n={n}: predicted original={original} improved={improved}")
        if len(totals) == 2:
            smaller = min(totals, key=totals.get)
            click.echo(
                f"comparison: {smaller} is smaller "
                f"({totals[smaller]} vs {totals[max(totals, key=totals.get)]})"
            )
    except LimidError as error:
        _fail(error)


@main.command()
@click.argument("diagram_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--formulation", type=click.Choice(["original", "improved"]), default="improved")
@click.option("--format", "file_format", type=click.Choice(["lp", "mps"]), default="lp")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--lower-bound", type=click.Choice(["auto", "on", "off"]), default="auto")
@click.option("--probcut/--no-probcut", default=None)
@click.option("--pin", multiple=True, metavar="NODE=STATE")
@click.option("--path-cap", type=int, default=DEFAULT_PATH_CAP, show_default=True)
def emit(diagram_file, formulation, file_format, out, lower_bound, probcut, pin, path_cap):
    """Write the chosen formulation as an LP or MPS file."""
    try:
        diagram, forbidden, fixed = _load(diagram_file, pin)
        table = enumerate_paths(diagram, forbidden, fixed, cap=path_cap)
        if formulation == "original":
            model = build_original(
                table,
                include_lower_bound={"auto": "auto", "on": True, "off": False}[lower_bound],
                include_probability_cut=bool(probcut) if probcut is not None else False,
            )
        else:
            model = build_improved(
                table, include_probability_cut=probcut if probcut is not None else True
            )
        text = write_lp(model) if file_format == "lp" else write_mps(model)
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
        except OSError as exc:
            click.echo(f"IOError: {exc}", err=True)
            sys.exit(4)
        report = stats(model)
        click.echo(
            f"wrote {out}: {formulation} {file_format}, binaries={report.n_binary} "
            f"continuous={report.n_continuous} rows={report.n_constraints} "
            f"total={report.total_with_bounds}"
        )
    except LimidError as error:
        _fail(error)


@main.command()
@click.argument("diagram_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["brute", "spu"]), default="brute")
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--import-solution", "solution_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--formulation", type=click.Choice(["original", "improved"]), default="improved",
              help="Variable naming expected in --import-solution files.")
@click.option("--pin", multiple=True, metavar="NODE=STATE")
@click.option("--path-cap", type=int, default=DEFAULT_PATH_CAP, show_default=True)
@click.option("--strategy-cap", type=int, default=DEFAULT_STRATEGY_CAP, show_default=True)
def solve(diagram_file, method, restarts, seed, solution_file, formulation, pin,
          path_cap, strategy_cap):
    """Solve natively, or map an external solver's solution file back."""
    try:
        diagram, forbidden, fixed = _load(diagram_file, pin)
        table = enumerate_paths(diagram, forbidden, fixed, cap=path_cap)
        flags = {
            "method": method,
            "restarts": restarts,
            "seed": seed,
            "pin": list(pin),
            "path_cap": path_cap,
            "strategy_cap": strategy_cap,
        }
        payload = _provenance(flags)
        if solution_file:
            if formulation == "original":
                model = build_original(table)
            else:
                model = build_improved(table)
            with open(solution_file, "r", encoding="utf-8") as handle:
                result = read_solution(model, table, handle.read())
            payload["expected_utility"] = result.expected_utility
            payload["file_objective"] = result.file_objective
            payload["strategy"] = result.strategy.to_json_dict()
        elif method == "brute":
            result = brute_force(table, cap=strategy_cap)
            payload["expected_utility"] = result.expected_utility
            payload["strategies_examined"] = result.n_examined
            payload["strategy"] = result.strategy.to_json_dict()
        else:
            result = spu_multistart(table, restarts=restarts, rng_seed=seed)
            payload["expected_utility"] = result.expected_utility
            payload["best_restart"] = result.best_restart
            payload["strategy"] = result.strategy.to_json_dict()
            payload["trace"] = [
                {
                    "node": move.node,
                    "information_state": diagram.information_state_label(
                        move.node, move.info_state
                    ),
                    "eu_before": move.eu_before,
                    "eu_after": move.eu_after,
                }
                for move in result.trace
            ]
            payload["restarts_summary"] = [
                {"index": r.index, "expected_utility": r.expected_utility, "moves": r.moves}
                for r in result.restarts
            ]
            locally_optimal, _ = local_optimality_check(table, result.strategy)
            payload["locally_optimal"] = locally_optimal
        click.echo(json.dumps(payload, indent=2))
    except LimidError as error:
        _fail(error)


@main.command()
@click.option("--family", type=click.Choice(["pigfarm", "nmonitoring"]), required=True)
@click.option("--n", type=int, required=True)
@click.option("--instances", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--method", type=click.Choice(["spu", "both"]), default="both",
              help="'both' also runs exact enumeration when feasible.")
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV destination (default stdout).")
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False),
              help="Render a summary figure to this file.")
@click.option("--strategy-cap", type=int, default=DEFAULT_STRATEGY_CAP, show_default=True)
def bench(family, n, instances, seed, method, restarts, out, plot_path, strategy_cap):
    """Run a seeded batch of random instances; emit per-instance CSV."""
    try:
        generator = gen_pigfarm if family == "pigfarm" else gen_nmonitoring
        flags = {
            "family": family,
            "n": n,
            "instances": instances,
            "seed": seed,
            "method": method,
            "restarts": restarts,
        }
        rows = []
        for index in range(instances):
            instance_seed = seed + index
            diagram = generator(n, rng_seed=instance_seed, randomize=True)
            table = enumerate_paths(diagram)
            started = time.perf_counter()
            heuristic = spu_multistart(table, restarts=restarts, rng_seed=instance_seed)
            elapsed = time.perf_counter() - started
            exact = None
            if method == "both":
                try:
                    exact = brute_force(table, cap=strategy_cap)
                except LimidError:
                    exact = None
            rows.append(
                {
                    "instance": index,
                    "seed": instance_seed,
                    "n_paths": len(table),
                    "brute_eu": exact.expected_utility if exact else None,
                    "spu_eu": heuristic.expected_utility,
                    "spu_moves": sum(r.moves for r in heuristic.restarts),
                    "spu_seconds": elapsed,
                    "match": (
                        int(abs(exact.expected_utility - heuristic.expected_utility) <= 1e-9)
                        if exact
                        else None
                    ),
                }
            )
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            [
                "instance", "seed", "n_paths", "brute_eu", "spu_eu",
                "spu_moves", "spu_seconds", "match", "toolkit_version", "flags",
            ]
        )
        for row in rows:
            writer.writerow(
                [
                    row["instance"], row["seed"], row["n_paths"],
                    "" if row["brute_eu"] is None else repr(row["brute_eu"]),
                    repr(row["spu_eu"]), row["spu_moves"], f"{row['spu_seconds']:.6f}",
                    "" if row["match"] is None else row["match"],
                    __version__, json.dumps(flags, sort_keys=True),
                ]
            )
        text = buffer.getvalue()
        if out:
            with open(out, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            click.echo(f"wrote {out} ({instances} instances)")
        else:
            click.echo(text, nl=False)
        if plot_path:
            from .plotting import render_bench_figure

            render_bench_figure(rows, plot_path)
            click.echo(f"wrote {plot_path}")
    except LimidError as error:
        _fail(error)


@main.command()
@click.option("--family", type=click.Choice(["pigfarm", "nmonitoring", "chd"]), required=True)
@click.option("--n", type=int, help="Stages (pigfarm/nmonitoring).")
@click.option("--risk-levels", type=int, default=11, show_default=True, help="Grid size (chd).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--randomize", is_flag=True, help="Draw probabilities/utilities randomly.")
@click.option("--negative-utilities", is_flag=True,
              help="Randomized utilities on [-1,1] instead of [0,1].")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def generate(family, n, risk_levels, seed, randomize, negative_utilities, out):
    """Write a benchmark diagram as a JSON file."""
    try:
        forbidden = []
        if family == "chd":
            problem = gen_chd(risk_levels)
            diagram = problem.diagram
            forbidden = problem.forbidden
        else:
            if n is None:
                raise click.UsageError("--n is required for pigfarm/nmonitoring")
            generator = gen_pigfarm if family == "pigfarm" else gen_nmonitoring
            diagram = generator(
                n, rng_seed=seed, randomize=randomize, negative_utilities=negative_utilities
            )
        flags = {
            "family": family, "n": n, "risk_levels": risk_levels,
            "seed": seed, "randomize": randomize,
        }
        text = dump_diagram(diagram, forbidden, extra=_provenance(flags))
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text + "\n")
        click.echo(f"wrote {out}")
    except LimidError as error:
        _fail(error)


@main.command(name="chd-sweep")
@click.option("--risk-levels", type=int, default=11, show_default=True)
@click.option("--method", type=click.Choice(["brute", "spu"]), default="brute")
@click.option("--restarts", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV destination (default stdout).")
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False),
              help="Render the threshold figure to this file.")
def chd_sweep(risk_levels, method, restarts, seed, out, plot_path):
    """Solve the staged-testing model per prior risk level."""
    try:
        report = solve_per_prior(
            risk_levels, method=method, restarts=restarts, rng_seed=seed
        )
        flags = {
            "risk_levels": risk_levels, "method": method,
            "restarts": restarts, "seed": seed,
        }
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            ["level", "risk", "first_action", "treat_at_level", "expected_utility",
             "toolkit_version", "flags"]
        )
        for row in report.rows:
            writer.writerow(
                [row.level, repr(row.risk), row.first_action, row.treat_at_top_level,
                 repr(row.expected_utility), __version__, json.dumps(flags, sort_keys=True)]
            )
        text = buffer.getvalue()
        if out:
            with open(out, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            click.echo(f"wrote {out} ({risk_levels} levels)")
        else:
            click.echo(text, nl=False)
        if plot_path:
            from .plotting import render_per_prior_figure

            render_per_prior_figure(report, plot_path)
            click.echo(f"wrote {plot_path}")
    except LimidError as error:
        _fail(error)


if __name__ == "__main__":
    main()
