"""Command-line interface.

Subcommands: parse, graph, assign, oracle, advise, refine, split, stats.
Exit codes: 0 ok, 1 usage, 2 parse error, 3 invalid placement, 4 search
failure.
"""

from __future__ import annotations

import csv
import io
import statistics
import sys

import click

from . import advisor as advisor_mod
from . import depgraph, frontend
from .errors import (
    AllInvalidError,
    InvalidPlacementError,
    TierSlicerError,
    TooManySlicesError,
)
from .fitness import evaluate, offline_percent
from .model import SHARED, Tier
from .placement import Placement, classify_calls, is_valid
from .search import GaConfig, exhaustive_oracle, run, run_many
from .syntax import (
    COMMUNICATION_KINDS,
    FAILURE_KINDS,
    PLACEMENT_KINDS,
    SHARING_KINDS,
)

EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_INVALID_PLACEMENT = 3
EXIT_SEARCH_FAILURE = 4

click.UsageError.exit_code = EXIT_USAGE


def load_program(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        program = frontend.resolve_calls(frontend.parse(text, path))
    except OSError as exc:
        click.echo(f"{path}: {exc.strerror}", err=True)
        sys.exit(EXIT_PARSE)
    except TierSlicerError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_PARSE)
    for warning in program.warnings:
        click.echo(warning, err=True)
    return program


def load_placement(path: str) -> Placement:
    try:
        with open(path, encoding="utf-8") as fh:
            return Placement.from_json(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        click.echo(f"{path}: cannot read placement: {exc}", err=True)
        sys.exit(EXIT_USAGE)


def ga_options(fn):
    fn = click.option("--pop", "population", default=30, show_default=True,
                      help="Population size.")(fn)
    fn = click.option("--gens", "generations", default=300, show_default=True,
                      help="Maximum number of generations.")(fn)
    fn = click.option("--pc", "crossover_prob", default=0.6, show_default=True,
                      help="Crossover probability.")(fn)
    fn = click.option("--pm", "mutation_prob", default=0.6, show_default=True,
                      help="Mutation probability.")(fn)
    fn = click.option("--tournament", "tournament_size", default=4, show_default=True,
                      help="Tournament size.")(fn)
    fn = click.option("--seed", default=0, show_default=True, help="RNG seed.")(fn)
    return fn


def make_config(population, generations, crossover_prob, mutation_prob,
                tournament_size, seed) -> GaConfig:
    try:
        return GaConfig(
            population_size=population,
            max_generations=generations,
            crossover_prob=crossover_prob,
            mutation_prob=mutation_prob,
            tournament_size=tournament_size,
            rng_seed=seed,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))


@click.group()
@click.version_option()
def main():
    """Analyze slice-structured TierJS programs and assign slices to tiers."""


@main.command("parse")
@click.argument("path", type=click.Path())
def cmd_parse(path):
    """Parse PATH and print a slice/annotation summary."""
    program = load_program(path)
    fixed = sum(1 for s in program.slices if s.fixed_tier)
    click.echo(f"slices: {len(program.slices)} ({fixed} fixed)")
    for s in program.slices:
        tier = s.fixed_tier or "unplaced"
        click.echo(f"  {s.name}: {tier}")
    counts = {"placement": 0, "communication": 0, "sharing": 0, "failure": 0}
    for _, anns in frontend.iter_annotated_nodes(program):
        for a in anns:
            if a.kind in PLACEMENT_KINDS:
                counts["placement"] += 1
            elif a.kind in COMMUNICATION_KINDS:
                counts["communication"] += 1
            elif a.kind in SHARING_KINDS:
                counts["sharing"] += 1
            elif a.kind in FAILURE_KINDS:
                counts["failure"] += 1
    click.echo(
        "annotations: placement=%d communication=%d sharing=%d failure=%d"
        % (counts["placement"], counts["communication"], counts["sharing"], counts["failure"])
    )
    if program.warnings:
        click.echo(f"unresolved calls: {len(program.warnings)}")


@main.command("graph")
@click.argument("path", type=click.Path())
@click.option("--dot", "fmt", flag_value="dot", default=True, help="DOT slice graph (default).")
@click.option("--json", "fmt", flag_value="json", help="Full dependence graph as JSON.")
@click.option("-o", "--output", type=click.Path(), default=None, help="Write to file instead of stdout.")
def cmd_graph(path, fmt, output):
    """Export the dependence graph of PATH."""
    program = load_program(path)
    graph = depgraph.build_pdg(program)
    if fmt == "dot":
        text = depgraph.to_dot(depgraph.collapse_to_slice_graph(graph))
    else:
        text = depgraph.to_json(graph)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _print_fitness(report):
    click.echo(f"Application level of offline availability: {offline_percent(report.program)} %")
    click.echo(f"valid: {'yes' if report.valid else 'no'}")
    for name, sf in report.per_slice.items():
        click.echo(f"  {name}: {sf.local_calls}/{sf.total_calls} local "
                   f"({offline_percent(sf.offline_fraction)} %)")


@main.command("assign")
@click.argument("path", type=click.Path())
@ga_options
@click.option("--runs", default=1, show_default=True, help="Number of independent searches.")
@click.option("--jobs", default=1, show_default=True, help="Worker processes for --runs.")
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="Also write stats as CSV.")
@click.option("-o", "--output", type=click.Path(), default=None, help="Write placement JSON to file.")
def cmd_assign(path, population, generations, crossover_prob, mutation_prob,
               tournament_size, seed, runs, jobs, csv_path, output):
    """Search a tier placement for PATH and report its fitness."""
    program = load_program(path)
    problem = depgraph.placement_problem(depgraph.build_pdg(program))
    config = make_config(population, generations, crossover_prob, mutation_prob,
                         tournament_size, seed)
    if runs > 1:
        _stats_mode(program, problem, config, runs, jobs, csv_path)
        return
    try:
        result = run(problem, config)
    except AllInvalidError as exc:
        click.echo(f"search failed: {exc}", err=True)
        sys.exit(EXIT_SEARCH_FAILURE)
    placement_json = result.best_placement.to_json()
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(placement_json)
    else:
        click.echo(placement_json, nl=False)
    report = evaluate(problem, result.best_placement)
    _print_fitness(report)
    click.echo(f"generations: {result.generations_used}")


@main.command("stats")
@click.argument("path", type=click.Path())
@ga_options
@click.option("--runs", default=100, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--csv", "csv_path", type=click.Path(), default=None)
def cmd_stats(path, population, generations, crossover_prob, mutation_prob,
              tournament_size, seed, runs, jobs, csv_path):
    """Run the search many times and summarize the tier distribution."""
    program = load_program(path)
    problem = depgraph.placement_problem(depgraph.build_pdg(program))
    config = make_config(population, generations, crossover_prob, mutation_prob,
                         tournament_size, seed)
    _stats_mode(program, problem, config, runs, jobs, csv_path)


def _stats_mode(program, problem, config, runs, jobs, csv_path):
    try:
        results = run_many(problem, config, runs, jobs)
    except AllInvalidError as exc:
        click.echo(f"search failed: {exc}", err=True)
        sys.exit(EXIT_SEARCH_FAILURE)

    per_tier = {Tier.CLIENT: [], Tier.SERVER: [], Tier.BOTH: []}
    for r in results:
        for tier in per_tier:
            per_tier[tier].append(
                sum(1 for t in r.best_placement.searched.values() if t is tier)
            )
    gens = [r.generations_used for r in results]
    fits = [r.best_fitness for r in results]

    graph = depgraph.build_pdg(program)
    advices = advisor_mod.advise(graph, results[0].best_placement, program)
    data_adv = sum(1 for a in advices if a.kind is advisor_mod.AdviceKind.REPLICATE_DECLARATION)
    slice_adv = sum(1 for a in advices if a.kind is advisor_mod.AdviceKind.MOVE_FUNCTION)

    def mmm(values):
        return int(statistics.median(values)), min(values), max(values)

    row = {
        "runs": runs,
        "gen": int(statistics.median(gens)),
    }
    for label, tier in (("C", Tier.CLIENT), ("S", Tier.SERVER), ("B", Tier.BOTH)):
        med, lo, hi = mmm(per_tier[tier])
        row[f"med{label}"], row[f"min{label}"], row[f"max{label}"] = med, lo, hi
    row["offline%"] = f"{100 * statistics.median(fits):.2f}"
    row["data adv"] = data_adv
    row["slice adv"] = slice_adv

    headers = list(row)
    widths = [max(len(h), len(str(row[h]))) for h in headers]
    click.echo("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    click.echo("  ".join(str(row[h]).ljust(w) for h, w in zip(headers, widths)))
    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=headers)
            writer.writeheader()
            writer.writerow(row)


@main.command("oracle")
@click.argument("path", type=click.Path())
@click.option("--oracle-cap", default=12, show_default=True,
              help="Maximum number of unplaced slices to enumerate.")
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_oracle(path, oracle_cap, output):
    """Exhaustively enumerate all placements of PATH's unplaced slices."""
    program = load_program(path)
    problem = depgraph.placement_problem(depgraph.build_pdg(program))
    try:
        placement, fitness_value = exhaustive_oracle(problem, cap=oracle_cap)
    except TooManySlicesError as exc:
        raise click.UsageError(str(exc))
    except AllInvalidError as exc:
        click.echo(f"search failed: {exc}", err=True)
        sys.exit(EXIT_SEARCH_FAILURE)
    placement_json = placement.to_json()
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(placement_json)
    else:
        click.echo(placement_json, nl=False)
    _print_fitness(evaluate(problem, placement))


@main.command("advise")
@click.argument("path", type=click.Path())
@click.option("--placement", "placement_path", type=click.Path(), default=None,
              help="Placement JSON to analyze (default: run the search).")
@click.option("--search/--no-search", "do_search", default=True,
              help="Search a placement when none is given.")
@click.option("--threshold", default=0.2, show_default=True,
              help="Relative-difference threshold for function moves.")
@click.option("--json", "as_json", is_flag=True, help="Emit the advice as JSON.")
@ga_options
def cmd_advise(path, placement_path, do_search, threshold, as_json, population,
               generations, crossover_prob, mutation_prob, tournament_size, seed):
    """Print refinement advice for PATH under a placement."""
    program = load_program(path)
    graph = depgraph.build_pdg(program)
    problem = depgraph.placement_problem(graph)
    if placement_path:
        placement = load_placement(placement_path)
    elif do_search:
        config = make_config(population, generations, crossover_prob, mutation_prob,
                             tournament_size, seed)
        try:
            placement = run(problem, config).best_placement
        except AllInvalidError as exc:
            click.echo(f"search failed: {exc}", err=True)
            sys.exit(EXIT_SEARCH_FAILURE)
    else:
        raise click.UsageError("either --placement or --search is required")
    try:
        cfg = advisor_mod.AdvisorConfig(move_threshold=threshold)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    fitness_value = evaluate(problem, placement).program
    advices = advisor_mod.advise(graph, placement, program, cfg)
    if as_json:
        import json as json_mod

        click.echo(json_mod.dumps(advisor_mod.report_json(fitness_value, advices),
                                  indent=2, sort_keys=True))
    else:
        click.echo(advisor_mod.render_report(fitness_value, advices), nl=False)


@main.command("refine")
@click.argument("path", type=click.Path())
@click.option("--apply", "do_apply", is_flag=True,
              help="Automatically integrate the advice between runs.")
@click.option("--max-iters", default=10, show_default=True)
@click.option("--threshold", default=0.2, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Write the refined source to a file.")
@ga_options
def cmd_refine(path, do_apply, max_iters, threshold, output, population,
               generations, crossover_prob, mutation_prob, tournament_size, seed):
    """Iterate search + advice; with --apply, advice is integrated automatically."""
    program = load_program(path)
    config = make_config(population, generations, crossover_prob, mutation_prob,
                         tournament_size, seed)
    try:
        adv_cfg = advisor_mod.AdvisorConfig(move_threshold=threshold)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if not do_apply:
        # report-only mode: one search, one advice report
        graph = depgraph.build_pdg(program)
        problem = depgraph.placement_problem(graph)
        try:
            result = run(problem, config)
        except AllInvalidError as exc:
            click.echo(f"search failed: {exc}", err=True)
            sys.exit(EXIT_SEARCH_FAILURE)
        advices = advisor_mod.advise(graph, result.best_placement, program, adv_cfg)
        click.echo(advisor_mod.render_report(result.best_fitness, advices), nl=False)
        return
    try:
        result = advisor_mod.refine_loop(program, config, adv_cfg, max_iterations=max_iters)
    except AllInvalidError as exc:
        click.echo(f"search failed: {exc}", err=True)
        sys.exit(EXIT_SEARCH_FAILURE)
    refined = frontend.emit(result.program)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(refined)
    else:
        click.echo(refined, nl=False)
    click.echo(f"Application level of offline availability: {offline_percent(result.fitness)} %")
    click.echo(f"iterations: {result.iterations}")
    click.echo(f"slices: {len(result.program.slices)}")


@main.command("split")
@click.argument("path", type=click.Path())
@click.option("--placement", "placement_path", type=click.Path(), required=True)
def cmd_split(path, placement_path):
    """Structural per-tier listing for PATH under a placement."""
    program = load_program(path)
    problem = depgraph.placement_problem(depgraph.build_pdg(program))
    placement = load_placement(placement_path)
    try:
        valid, bad = is_valid(problem, placement)
    except TierSlicerError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_INVALID_PLACEMENT)
    if not valid:
        click.echo("invalid placement:", err=True)
        for c in bad:
            click.echo(f"  {path}:{c.record.label}: unannotated {c.direction.value} call "
                       f"to '{c.record.callee_name}'", err=True)
        sys.exit(EXIT_INVALID_PLACEMENT)
    classified = classify_calls(problem, placement)
    shared_count = len(program.shared_top_level)
    for tier_name, bit in (("client", 1), ("server", 2)):
        click.echo(f"[{tier_name}]")
        for name in problem.slices:
            if placement.mask(name) & bit:
                click.echo(f"  slice {name}")
        if shared_count:
            click.echo(f"  shared statements: {shared_count}")
    remote = [c for c in classified if not c.local]
    click.echo(f"[remote calls: {len(remote)}]")
    for c in remote:
        click.echo(f"  {path}:{c.record.label}: {c.record.caller} -> {c.record.callee} "
                   f"('{c.record.callee_name}', {c.direction.value})")


if __name__ == "__main__":
    main()
