"""
Command-line front end.

Commands:
    solve          approximant parameters (c, A_i, n_i, factor kinds) and constraint residuals
    table          reproducible accuracy tables (table1..table5) or an explicit sweep
    curve          per-point defect or error columns for external plotting
    list-problems  catalog with domains, parameters and exact-solution availability

Exit codes: 0 success, 2 usage, 3 solver failure. Failures print a JSON
error record {error, error_type, message, details} on stderr.
"""

import json
import sys
from functools import wraps
from pathlib import Path

import click
import logfire
import pandas as pd
from pydantic import ValidationError

from config import get_settings
from constants import CurveMetric, ExitCode, OutputFormat, TableDefinition
from exceptions import USAGE_ERROR_TYPES, ApproximantError
from models.api_models import RunConfig
from services.solver_service import SolverService, Sweep, solution_record
from utils import render_frame, render_record, write_output

TABLE_COLUMNS_HELP = """
\b
CSV columns:
  k                      approximant order
  D, Delta, delta        maximal defect, maximal error, Delta / D
  <col>_eps<value>       the same per epsilon when a table sweeps several
  D_factor, D_root       factor and root approximant defects (table3)
  <col>_printed          published value (--compare)
  <col>_rel_dev          (computed - printed) / printed (--compare)
Failed orders are emitted as empty (null) cells.
"""

CURVE_COLUMNS_HELP = """
\b
CSV columns:
  t | x | r              native variable of the problem
  <metric>_k<order>      pointwise |E[y*]| (defect) or |y* - y| (error)
"""


def _number_list(cast):
    def parse(ctx, param, value):
        if value is None:
            return None
        try:
            return tuple(cast(v) for v in value.split(",") if v.strip())
        except ValueError as e:
            raise click.BadParameter(f"expected a comma-separated list: {e}") from e

    return parse


def _single(ctx, param, value):
    return None if value is None else (value,)


def _fail(error: ApproximantError) -> None:
    click.echo(json.dumps(error.to_record(), default=str), err=True)
    code = ExitCode.USAGE if error.error_type in USAGE_ERROR_TYPES else ExitCode.SOLVER_FAILURE
    sys.exit(code)


def run_options(command):
    """Options shared by every command that produces output."""

    @click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="RunConfig JSON file; flags override its values.")
    @click.option("--format", "output_format", type=click.Choice(OutputFormat.ALL), default=None, help="Output format (default csv; solve defaults to json).")
    @click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")
    @click.option("--grid-points", type=int, default=None, help="Diagnostic grid size.")
    @click.option("--seed", type=int, default=None, help="Seed for multistart jitter.")
    @click.option("--tol", "tolerance", type=float, default=None, help="Acceptance tolerance override.")
    @wraps(command)
    def wrapper(*args, config_path, output_format, out, grid_points, seed, tolerance, **kwargs):
        try:
            base = RunConfig()
            if config_path is not None:
                base = RunConfig.model_validate_json(Path(config_path).read_text())
            # unset flags arrive as False and must not override --config values
            kwargs = {k: None if v is False else v for k, v in kwargs.items()}
            config = base.merged(
                format=output_format, out=out, grid_points=grid_points, seed=seed, tolerance=tolerance, **kwargs
            )
        except ValidationError as e:
            raise click.UsageError(f"invalid run configuration: {e.errors(include_url=False)}") from e
        service = SolverService(settings=get_settings().model_copy(update=config.settings_overrides()))
        try:
            return command(config, service)
        except ApproximantError as e:
            _fail(e)
        finally:
            service.close()

    return wrapper


@click.group()
@click.option("--verbose", is_flag=True, help="Print pipeline logs on stderr.")
def cli(verbose: bool) -> None:
    """Factor approximants for singular-perturbation and soliton ODE problems."""
    console = logfire.ConsoleOptions(min_log_level="debug", output=sys.stderr) if verbose else False
    logfire.configure(send_to_logfire=False, console=console)


@cli.command()
@click.option("--problem", default=None, help="Catalog problem name (see list-problems).")
@click.option("--order", "orders", type=int, callback=_single, default=None, help="Approximant order k.")
@click.option("--eps", "epsilons", callback=_number_list(float), default=None, help="Small parameter eps.")
@click.option("--p0", type=float, default=None, help="Logistic initial value.")
@run_options
def solve(config: RunConfig, service: SolverService) -> None:
    """Solve one problem and dump the approximant parameters."""
    if config.problem is None or not config.orders:
        raise click.UsageError("solve needs --problem and --order")
    solution = service.solve(config.problem, config.orders[0], config.epsilon, config.p0)
    record = solution_record(solution)
    output_format = OutputFormat.JSON if config.format == OutputFormat.CSV else config.format
    title = f"{config.problem}, k = {solution.order}"
    write_output(render_record(record, output_format, title=title), config.out)


@cli.command(epilog=TABLE_COLUMNS_HELP)
@click.option("--name", type=click.Choice(TableDefinition.NAMES), default=None, help="Reproducible table.")
@click.option("--problem", default=None, help="Problem for an explicit sweep.")
@click.option("--orders", callback=_number_list(int), default=None, help="Comma-separated orders, e.g. 4,5,6,7.")
@click.option("--eps", "epsilons", callback=_number_list(float), default=None, help="Comma-separated eps values.")
@click.option("--p0", type=float, default=None, help="Logistic initial value.")
@click.option("--with-error", is_flag=True, help="Explicit sweeps: add Delta and delta.")
@click.option("--compare", is_flag=True, help="Append printed values and deviations.")
@run_options
def table(config: RunConfig, service: SolverService) -> None:
    """Accuracy table: one row per order with D (and Delta, delta)."""
    if config.name is not None:
        sweep = Sweep.named(config.name)
    elif config.problem is not None and config.orders:
        sweep = Sweep(
            problem=config.problem,
            orders=config.orders,
            epsilons=config.epsilons or (1.0,),
            p0=config.p0,
            with_error=config.with_error,
        )
    else:
        raise click.UsageError("table needs --name, or --problem with a non-empty --orders list")
    frame = service.run_table(sweep, compare=config.compare)
    write_output(render_frame(frame, config.format, title=sweep.name or sweep.problem), config.out)


@cli.command(epilog=CURVE_COLUMNS_HELP)
@click.option("--problem", default=None, help="Catalog problem name.")
@click.option("--orders", callback=_number_list(int), default=None, help="Comma-separated orders.")
@click.option("--eps", "epsilons", callback=_number_list(float), default=None, help="Small parameter eps.")
@click.option("--p0", type=float, default=None, help="Logistic initial value.")
@click.option("--metric", type=click.Choice(CurveMetric.ALL), default=None, help="Pointwise defect or error.")
@run_options
def curve(config: RunConfig, service: SolverService) -> None:
    """Pointwise defect or error of several orders on the diagnostic grid."""
    if config.problem is None:
        raise click.UsageError("curve needs --problem")
    if not config.orders:
        raise click.UsageError("curve needs a non-empty --orders list")
    frame = service.run_curve(
        config.problem, config.orders, epsilon=config.epsilon, p0=config.p0, metric=config.metric
    )
    write_output(render_frame(frame, config.format, title=config.problem), config.out)


@cli.command("list-problems")
@click.option("--format", "output_format", type=click.Choice(OutputFormat.ALL), default=OutputFormat.TEXT)
def list_problems(output_format: str) -> None:
    """Catalog of built-in problems."""
    infos = SolverService().problems()
    frame = pd.DataFrame(
        [
            {
                "name": info.name,
                "domain": info.domain,
                "parameters": ", ".join(info.parameters) or "-",
                "exact": info.has_exact,
                "reference": info.has_reference,
                "min_order": info.min_order,
                "description": info.description,
            }
            for info in infos
        ]
    )
    click.echo(render_frame(frame, output_format, title="Problems"), nl=False)


if __name__ == "__main__":
    cli()
