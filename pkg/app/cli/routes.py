from __future__ import annotations

import logging
from dataclasses import replace

import click
from flask import Blueprint, current_app

from app.dyadic import Dyadic, parse_dyadic
from app.exceptions import BitCanvasError
from app.renderer import (
    COST_FOCUS,
    RenderJob,
    RenderSettings,
    ShapeParams,
    escape_params_from_config,
    fit_cost,
    measure_cost,
    run_render,
    write_render,
)
from app.selfcheck import SUITES, run_selfcheck
from app.utils.costs import metered
from app.utils.expressions import compile_expression

cli_bp = Blueprint("cli", __name__, cli_group=None)

logger = logging.getLogger(__name__)


class DyadicParamType(click.ParamType):
    name = "dyadic"

    def convert(self, value, param, ctx):
        if isinstance(value, Dyadic):
            return value
        try:
            return parse_dyadic(value)
        except BitCanvasError as exc:
            self.fail(str(exc), param, ctx)


DYADIC = DyadicParamType()


def _settings() -> RenderSettings:
    return RenderSettings.from_config(current_app.config)


@cli_bp.cli.command("eval")
@click.argument("expr")
@click.argument("n", type=click.IntRange(min=0))
def eval_command(expr: str, n: int) -> None:
    """Print a dyadic within 2^-N of EXPR, with query and bit-operation counts."""
    try:
        oracle = compile_expression(expr, current_app.config["DIVISION_MAX_PROBE"])
        with metered() as meter:
            value = oracle.query(n)
    except BitCanvasError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(value.to_decimal())
    click.echo(f"dyadic={value} queries={meter.queries} bit_ops={meter.bit_ops}")


@cli_bp.cli.command("render")
@click.argument("set_id", metavar="SET")
@click.option("--center", nargs=2, type=DYADIC, default=("0", "0"), show_default=True)
@click.option("--n", "n", type=click.IntRange(min=0), required=True, help="Resolution: pixels decide at 2^-n.")
@click.option("--k", "k", type=click.IntRange(min=0), default=0, show_default=True, help="Grid offset: spacing 2^-(n+k).")
@click.option("--half-width", type=DYADIC, required=True)
@click.option("--T-max", "t_max", type=click.IntRange(min=1), default=None, help="Mandelbrot iteration cap.")
@click.option("--A", "a", type=click.IntRange(min=0), default=None, help="Julia budget slope.")
@click.option("--B", "b", type=click.IntRange(min=0), default=None, help="Julia budget offset.")
@click.option("--filled", is_flag=True, help="Filled Julia set instead of the Julia set.")
@click.option("--naive", is_flag=True, help="Uncertified grid-point Mandelbrot algorithm.")
@click.option("--radius", type=DYADIC, default="1", show_default=True)
@click.option("--origin", nargs=2, type=DYADIC, default=("0", "0"), show_default=True, help="Disk or circle centre.")
@click.option("--c", "c", nargs=2, type=DYADIC, default=("0", "0"), show_default=True, help="Julia parameter.")
@click.option("--from", "seg_from", nargs=2, type=DYADIC, default=("-1", "0"), show_default=True)
@click.option("--to", "seg_to", nargs=2, type=DYADIC, default=("1", "0"), show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=None)
@click.option("--p5", is_flag=True, help="Binary PGM instead of plain text.")
@click.option("--out", "out", required=True, type=click.Path(dir_okay=False), help="Output prefix.")
def render_command(
    set_id, center, n, k, half_width, t_max, a, b, filled, naive, radius, origin, c, seg_from, seg_to, workers, p5, out
):
    """Render SET to OUT.pgm, OUT.csv and OUT.stats."""
    config = current_app.config
    settings = _settings()
    if workers is not None:
        settings = replace(settings, workers=workers)
    try:
        job = RenderJob(
            set_id=set_id,
            center=tuple(center),
            n=n,
            k=k,
            half_width=half_width,
            escape=escape_params_from_config(config, t_max=t_max, a=a, b=b),
            shape=ShapeParams(
                radius=radius,
                origin=tuple(origin),
                c=tuple(c),
                start=tuple(seg_from),
                end=tuple(seg_to),
                filled=filled,
                naive=naive,
            ),
        )
        result = run_render(job, settings)
        paths = write_render(result, out, binary=p5)
    except (BitCanvasError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    except OSError as exc:
        raise click.ClickException(f"cannot write output: {exc}") from exc

    logger.info("Render of %s written to %s", set_id, out)
    stats = result.stats()
    for key in ("pixels", "certified_out", "certified_in", "undetermined", "wall_time_s", "bit_ops_mean"):
        click.echo(f"{key}={stats[key]}")
    if result.audit is not None and not result.audit.passed:
        click.secho(f"audit: {len(result.audit.failures)} certified pixels failed sampling", fg="yellow", err=True)
    for path in paths.values():
        click.echo(f"wrote {path}")


@cli_bp.cli.command("selfcheck")
@click.option("--full", is_flag=True, help="Acceptance-sized suites, including the cost fit.")
@click.option("--suite", "suites", multiple=True, type=click.Choice(list(SUITES)), help="Run only the named suite(s).")
def selfcheck_command(full: bool, suites: tuple[str, ...]) -> None:
    """Run the cross-module equivalence suites; exit 1 on any violation."""
    config = current_app.config
    results = run_selfcheck(
        "full" if full else "quick",
        _settings(),
        escape_params_from_config(config),
        only=suites,
    )
    failed = 0
    for result in results:
        mark = click.style("PASS", fg="green") if result.passed else click.style("FAIL", fg="red")
        click.echo(f"{mark} {result.name} ({result.elapsed:.1f}s): {result.detail}")
        failed += not result.passed
    if failed:
        click.echo(f"{failed} of {len(results)} suites failed", err=True)
        raise SystemExit(1)
    click.echo(f"all {len(results)} suites passed")


@cli_bp.cli.command("cost")
@click.argument("set_id", metavar="SET", type=click.Choice(sorted(COST_FOCUS)))
@click.option("--ns", default="4,6,8,10", show_default=True, help="Comma-separated resolutions.")
@click.option("--window-bits", type=click.IntRange(min=0, max=6), default=3, show_default=True)
def cost_command(set_id: str, ns: str, window_bits: int) -> None:
    """Per-pixel bit-operation means of SET over zoom levels, with a polynomial fit."""
    try:
        levels = [int(part) for part in ns.split(",") if part.strip()]
    except ValueError as exc:
        raise click.BadParameter("expected integers such as 4,6,8,10", param_hint="--ns") from exc
    if len(levels) < 2 or min(levels) < 1:
        raise click.BadParameter("give at least two positive resolutions", param_hint="--ns")
    try:
        means = measure_cost(set_id, levels, window_bits, _settings(), escape_params_from_config(current_app.config))
    except BitCanvasError as exc:
        raise click.ClickException(str(exc)) from exc
    for n, mean in zip(levels, means):
        click.echo(f"n={n} bit_ops_mean={mean:.1f}")
    fit = fit_cost(levels, means)
    verdict = "polynomial" if fit.polynomial() else "not polynomial"
    click.echo(
        f"degree={fit.degree} residual={fit.max_relative_residual:.1%} slope={fit.loglog_slope:.2f} ({verdict})"
    )
