"""
Batch front-end for the simulator.

Usage:
    python -m src.scripts.cli gen --kind uniform_square --n 64 --out s.json
    python -m src.scripts.cli run --scenario s.json --variant alg1 --seed 7
    python -m src.scripts.cli sweep --kind clustered --n 256 --trials 50
    python -m src.scripts.cli verify --suite lemma-a1 --trials 50 --n 128
    python -m src.scripts.cli lowerbound --n 256 --policy fixed:auto --tmax 4096
    python -m src.scripts.cli fit --summary summary.csv --form NlogN_plus_log2

Exit codes: 0 success, 1 acceptance-check failure, 2 configuration error.
"""

import sys
from pathlib import Path
from typing import List, Optional

import click

from src.localcast.core.config import logger
from src.localcast.core.exceptions import LocalcastError
from src.localcast.models.node_state import Variant
from src.localcast.schemas.experiment import (
    GeneratorSpec,
    LowerBoundConfig,
    ShutdownModel,
    SweepConfig,
    WakeModel,
)
from src.localcast.schemas.scenario import load_scenario
from src.localcast.services.analysis import (
    BoundForm,
    doubling_ratios,
    fallback_stats,
    fit_bound,
)
from src.localcast.services.lowerbound import (
    bound_table,
    build_two_region_instance,
    parse_policy,
    run_nt_experiment,
)
from src.localcast.services.scenario_service import generate_scenario
from src.localcast.services.sim import run as run_trial
from src.localcast.services.sim import summarize
from src.localcast.services.sweep_service import run_sweep, summary_rows
from src.localcast.services.trace_service import (
    read_summary,
    write_bound_csv,
    write_bound_jsonl,
    write_jsonl,
    write_summary_csv,
    write_summary_jsonl,
    write_trace_jsonl,
)
from src.localcast.services.verify_service import SUITES, VerifyOptions, run_suites

VARIANTS = click.Choice([v.value for v in Variant])
FORMATS = click.Choice(["csv", "jsonl"])


class ConfigError(click.ClickException):
    exit_code = 2


class LocalcastGroup(click.Group):
    """Reports domain and validation errors as configuration errors."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except (LocalcastError, ValueError, OSError) as e:
            logger.error(str(e))
            raise ConfigError(str(e))


def resolve_seed(seed: Optional[int]) -> int:
    if seed is None:
        logger.warning("No --seed given, using seed 0")
        click.echo("notice: no --seed given, using seed 0", err=True)
        return 0
    return seed


def seed_option(f):
    return click.option("--seed", type=int, default=None, help="Trial seed (default 0 with a notice)")(f)


def out_option(default: Optional[str]):
    return click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=default)


def fail_if(ctx: click.Context, failed: bool) -> None:
    if failed:
        ctx.exit(1)


@click.group(cls=LocalcastGroup)
def cli():
    """Local broadcast simulator: scenarios, trials, sweeps and checks."""


@cli.command()
@click.option("--kind", type=click.Choice(["uniform_square", "clustered", "two_region", "line"]), default="uniform_square")
@click.option("--n", "n", type=int, default=64, help="Node count (dense count for two_region)")
@click.option("--n-bound", type=int, default=None)
@click.option("--side", type=float, default=None)
@click.option("--density", type=float, default=None)
@click.option("--clusters", type=int, default=1)
@click.option("--cluster-radius", type=float, default=None)
@click.option("--spacing", type=float, default=None)
@click.option("--sparse", type=int, default=3)
@click.option("--wake", default="all_zero", help="all_zero, staggered:<rate> or random_window:<w>")
@click.option("--shutdown", default="never", help="never or after:<slots>")
@click.option("--delta", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@seed_option
@out_option(None)
def gen(kind, n, n_bound, side, density, clusters, cluster_radius, spacing, sparse, wake, shutdown, delta, gamma, seed, out):
    """Generate a scenario file."""
    fields = dict(
        kind=kind,
        n=n,
        n_bound=n_bound,
        side=side,
        density=density,
        clusters=clusters,
        cluster_radius=cluster_radius,
        spacing=spacing,
        sparse=sparse,
        wake=WakeModel.parse(wake),
        shutdown=ShutdownModel.parse(shutdown),
        seed=resolve_seed(seed),
    )
    if delta is not None:
        fields["delta"] = delta
    if gamma is not None:
        fields["gamma"] = gamma
    scenario = generate_scenario(GeneratorSpec(**fields))
    if out is None:
        click.echo(scenario.to_json())
    else:
        scenario.save(out)
        logger.info(f"Scenario written to {out}")


@cli.command()
@click.option("--scenario", "scenario_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--variant", type=VARIANTS, default=Variant.ALG1.value)
@click.option("--max-slots", type=int, default=None)
@click.option("--format", "fmt", type=FORMATS, default="jsonl")
@seed_option
@out_option("trace.jsonl")
@click.pass_context
def run(ctx, scenario_path, variant, max_slots, fmt, seed, out):
    """Run one trial and write its trace (jsonl) or summary (csv)."""
    scenario = load_scenario(scenario_path)
    trace = run_trial(scenario, Variant(variant), resolve_seed(seed), max_slots)
    if fmt == "jsonl":
        write_trace_jsonl(trace, out)
    else:
        write_summary_csv(summarize(trace, scenario).nodes, out)
    if trace.timed_out:
        click.echo(f"trial timed out after {trace.slots_run} slots", err=True)


@cli.command()
@click.option("--kind", type=click.Choice(["uniform_square", "clustered"]), default="clustered")
@click.option("--variant", "variants", type=VARIANTS, multiple=True)
@click.option("--n", "n_values", type=int, multiple=True, help="n_bound grid (node count for uniform_square)")
@click.option("--cluster-size", "cluster_sizes", type=int, multiple=True)
@click.option("--trials", type=int, default=50)
@click.option("--max-slots", type=int, default=None)
@click.option("--wake", default="all_zero")
@click.option("--delta", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--format", "fmt", type=FORMATS, default="csv")
@seed_option
@out_option("summary.csv")
def sweep(kind, variants, n_values, cluster_sizes, trials, max_slots, wake, delta, gamma, fmt, seed, out):
    """Run a grid of trials and write one summary row per node and trial."""
    fields = dict(kind=kind, trials=trials, max_slots=max_slots, wake=WakeModel.parse(wake), seed=resolve_seed(seed))
    for name, value in (
        ("variants", list(variants)),
        ("n_values", list(n_values)),
        ("cluster_sizes", list(cluster_sizes)),
    ):
        if value:
            fields[name] = value
    if delta is not None:
        fields["delta"] = delta
    if gamma is not None:
        fields["gamma"] = gamma
    rows = summary_rows(run_sweep(SweepConfig(**fields)))
    if fmt == "csv":
        write_summary_csv(rows, out)
    else:
        write_summary_jsonl(rows, out)


@cli.command()
@click.option("--suite", "suites", type=click.Choice([*SUITES, "all"]), multiple=True, required=True)
@click.option("--n", "n", type=int, default=128, help="Network size for the slot scans")
@click.option("--trials", type=int, default=50)
@click.option("--mc-trials", type=int, default=10**5, help="Monte Carlo trials for the chain suite")
@click.option("--max-slots", type=int, default=None)
@seed_option
@out_option(None)
@click.pass_context
def verify(ctx, suites, n, trials, mc_trials, max_slots, seed, out):
    """Run verification suites; exit 1 if any fails."""
    options = VerifyOptions(n=n, trials=trials, seed=resolve_seed(seed), mc_trials=mc_trials, max_slots=max_slots)
    results = run_suites(list(suites), options)
    for result in results:
        status = "ok" if result.passed else "FAIL"
        click.echo(f"{result.name}: {status} ({result.checked} checked, {result.violations} violations)")
    if out is not None:
        write_jsonl((result.to_record() for result in results), out)
    fail_if(ctx, not all(result.passed for result in results))


@cli.command()
@click.option("--n", "n", type=int, default=256)
@click.option("--policy", default="fixed:auto", help="fixed:auto, fixed:<p> or alg1[:delta:gamma]")
@click.option("--tmax", "t_max", type=int, default=4096)
@click.option("--trials", type=int, default=0, help="Monte Carlo trials alongside the exact values")
@click.option("--sparse", type=int, default=3)
@click.option("--j-cap", type=int, default=None)
@click.option("--instance-out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--format", "fmt", type=FORMATS, default="csv")
@seed_option
@out_option("lowerbound.csv")
@click.pass_context
def lowerbound(ctx, n, policy, t_max, trials, sparse, j_cap, instance_out, fmt, seed, out):
    """Per-slot lower-bound table on the two-region instance."""
    config = LowerBoundConfig(
        n=n, policy=policy, t_max=t_max, trials=trials, seed=resolve_seed(seed), sparse=sparse, j_cap=j_cap
    )
    chosen = parse_policy(config.policy, config.n, config.sparse)
    report = bound_table(config.n, chosen, config.t_max, config.sparse, config.j_cap)
    if fmt == "csv":
        write_bound_csv(report.rows, out)
    else:
        write_bound_jsonl(report.rows, out)

    instance = build_two_region_instance(report.delta, config.sparse)
    if instance_out is not None:
        instance.to_scenario(max(config.n, instance.m)).save(instance_out)
    click.echo(f"n={report.n} j={report.j} (unconstrained {report.j_unconstrained}) Delta={report.delta}")
    if config.trials:
        records = run_nt_experiment(instance, chosen, config.t_max, config.trials, config.seed, n_bound=config.n)
        last = records[-1]
        click.echo(f"P(N_t) at t={last.t}: exact={last.exact:.6g} empirical={last.empirical:.6g}")
    fail_if(ctx, not report.all_hold)


@cli.command()
@click.option("--summary", "summary_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--form", type=click.Choice([f.value for f in BoundForm]), default=BoundForm.NLOGN_PLUS_LOG2.value)
@click.option("--variant", type=VARIANTS, default=None, help="Only fit rows of this variant")
@click.option("--check-fallbacks", is_flag=True, help="Exit 1 if a FallBack ratio exceeds its limit")
@out_option("fit.json")
@click.pass_context
def fit(ctx, summary_path, form, variant, check_fallbacks, out):
    """Fit median active time against a running-time form."""
    rows = read_summary(summary_path)
    if variant is not None:
        rows = [row for row in rows if row.variant is Variant(variant)]
    report = fit_bound(rows, BoundForm(form))
    out.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    click.echo(f"{report.form}: a={report.a:.6g} b={report.b:.6g} residual={report.residual:.6g}")
    for n_x, ratio in doubling_ratios(report.cells):
        click.echo(f"T({2 * n_x})/T({n_x}) = {ratio:.3f}")

    stats = fallback_stats(rows)
    for variant_stats in stats.values():
        click.echo(
            f"{variant_stats.variant.value}: max FallBack ratio {variant_stats.max_ratio:.3f} "
            f"(limit {variant_stats.limit})"
        )
    fail_if(ctx, check_fallbacks and not all(s.holds for s in stats.values()))


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        result = cli.main(args=argv, prog_name="localcast", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
