import json
import sys
from pathlib import Path
from typing import Optional

import numpy
import pydantic
import typer
import yaml
from rich.pretty import Pretty
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from evconvex.checks import Status
from evconvex.config import RunConfig, load_config, paper_config
from evconvex.console import console, fail, good, info, status_panel, warn
from evconvex.copula import build_kappa
from evconvex.decreasing import certify_alpha_decreasing, revealed_alpha, t_star_alpha
from evconvex.errors import (
    EvconvexError,
    Infeasible,
    MissingTheta,
    NotCertified,
    NotDecreasing,
    OriginNotMember,
    SamplingExhausted,
)
from evconvex.feasibility import (
    grid_export,
    is_member,
    joint_probability,
    minimize_linear,
    verify_segment_convexity,
    write_grid_csv,
)
from evconvex.thresholds import assemble_pstar, best_theta

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_NO_THRESHOLD = 2
EXIT_SAMPLING = 3
EXIT_CONFIG = 4

LAMBDA_MODES = {
    "lmin": "lMin",
    "closed": "closedForm",
    "numeric": "definitionNumeric",
}
METHODS = {
    "analytic": "analytic",
    "radial": "radial",
    "radial-printed": "radialPrinted",
    "mc": "monteCarlo",
}

app = typer.Typer()

config_option = typer.Option(None, "--config", "-c", dir_okay=False, exists=True)
json_option = typer.Option(False, "--json", help="Machine-readable output on stdout")
seed_option = typer.Option(None, "--seed")
lambda_option = typer.Option(None, "--lambda-mode", help="lmin, closed or numeric")
method_option = typer.Option(None, "--method", help="analytic, radial or mc")
out_option = typer.Option(None, "--out", "-o", dir_okay=False)


def _load(
    config_path: Optional[Path],
    seed: Optional[int] = None,
    lambda_mode: Optional[str] = None,
    method: Optional[str] = None,
    out: Optional[Path] = None,
    show: bool = True,
) -> RunConfig:
    try:
        config = paper_config() if config_path is None else load_config(config_path)
        if seed is not None:
            config.seed = seed
        if lambda_mode is not None:
            if lambda_mode not in LAMBDA_MODES:
                raise ValueError(f"Unknown lambda mode {lambda_mode}, expected one of {list(LAMBDA_MODES)}")
            config.options.lambda_mode = LAMBDA_MODES[lambda_mode]
        if method is not None:
            if method not in METHODS:
                raise ValueError(f"Unknown method {method}, expected one of {list(METHODS)}")
            config.options.method = METHODS[method]
        if out is not None:
            config.output = str(out)
    except (pydantic.ValidationError, yaml.YAMLError, TypeError, ValueError) as e:
        fail(f"Invalid configuration: {e}")
        raise typer.Exit(EXIT_CONFIG)

    if show:
        console.print(Panel(Pretty(config), title="Configuration"))
    return config


def _problem(config: RunConfig):
    try:
        return config.problem()
    except (EvconvexError, ValueError) as e:
        fail(f"Invalid problem: {e}")
        raise typer.Exit(EXIT_CONFIG)


def _emit(data) -> None:
    print(json.dumps(data, indent=2, allow_nan=True))


def _finish(status: Status, *messages) -> None:
    console.print(status_panel(status, [Text.from_markup(m, justify="center") for m in messages]))


@app.command("threshold")
def threshold(
    config_path: Optional[Path] = config_option,
    json_out: bool = json_option,
    lambda_mode: Optional[str] = lambda_option,
):
    """Best r-concavity thresholds per row and the assembled p*."""
    config = _load(config_path, lambda_mode=lambda_mode, show=not json_out)
    rows = config.row_models()
    mode = config.options.lambda_mode
    eps0 = config.options.eps0
    thetas = [best_theta(row, row.r if row.r != 0 else -eps0, mode) for row in rows]

    table = Table("row", "case", "theta*", "sqrt(theta*)", "best", "lambda", title=f"Thresholds ({mode})")
    for i, t in enumerate(thetas):
        table.add_row(
            str(i),
            str(t.case_id),
            "-" if t.theta is None else f"{t.theta:.6g}",
            "-" if t.sqrt_theta is None else f"{t.sqrt_theta:.6g}",
            "yes" if t.is_best else "no",
            "-" if t.lambda_mu_min is None else f"{t.lambda_mu_min:.6g}",
        )
    console.print(table)

    try:
        pstar = assemble_pstar(rows, mode, eps0, thetas)
    except (MissingTheta, NotDecreasing) as e:
        if json_out:
            _emit({"thetas": [t.to_dict() for t in thetas], "pstar": None, "error": str(e)})
        fail(str(e))
        raise typer.Exit(EXIT_NO_THRESHOLD)

    if json_out:
        _emit({"thetas": [t.to_dict() for t in thetas], "pstar": pstar.to_dict()})
    good(f"p* = {pstar.pstar:.6g} (binding: {pstar.binding['term']}, row {pstar.binding['row']})")


@app.command("pstar")
def pstar(
    config_path: Optional[Path] = config_option,
    json_out: bool = json_option,
    lambda_mode: Optional[str] = lambda_option,
):
    """Only the probability level above which S(p) is convex."""
    config = _load(config_path, lambda_mode=lambda_mode, show=not json_out)
    try:
        result = assemble_pstar(config.row_models(), config.options.lambda_mode, config.options.eps0)
    except (MissingTheta, NotDecreasing) as e:
        fail(str(e))
        raise typer.Exit(EXIT_NO_THRESHOLD)
    if json_out:
        _emit(result.to_dict())
    good(f"p* = {result.pstar:.6g}")


@app.command("alpha-tstar")
def alpha_tstar(
    config_path: Optional[Path] = config_option,
    json_out: bool = json_option,
    alpha: Optional[float] = typer.Option(None, "--alpha"),
):
    """t*(alpha) for every row marginal; alpha defaults to -r + 1."""
    config = _load(config_path, show=not json_out)
    out = []
    for i, row in enumerate(config.row_models()):
        a = alpha if alpha is not None else config.options.alpha
        if a is None:
            a = revealed_alpha(row.r, config.options.eps0)
        try:
            if row.marginal.family == "gh1":
                cert = certify_alpha_decreasing(row.marginal, a)
                record = cert.to_dict()
            else:
                record = {"alpha": a, "admissible": True, "tstar": t_star_alpha(row.marginal, a), "branch": None}
        except NotDecreasing as e:
            fail(f"row {i}: {e}")
            raise typer.Exit(EXIT_NO_THRESHOLD)
        record["row"] = i
        out.append(record)
        if record["admissible"]:
            info(f"row {i}: t*({a:g}) = {record['tstar']:.10g}")
        else:
            warn(f"row {i}: not {a:g}-decreasing ({record['branch']})")

    if json_out:
        _emit(out)
    if not all(r["admissible"] for r in out):
        raise typer.Exit(EXIT_NO_THRESHOLD)


@app.command("build-kappa")
def build_kappa_cmd(
    config_path: Optional[Path] = config_option,
    json_out: bool = json_option,
):
    """Validate the separable kappa(x) and print its record."""
    config = _load(config_path, show=not json_out)
    spec = config.copula
    if spec.kind != "builtSeparable":
        fail(f"build-kappa needs a builtSeparable copula, got {spec.kind}")
        raise typer.Exit(EXIT_CONFIG)
    domain = spec.domain.build() if spec.domain is not None else config.domain.build()
    try:
        model = build_kappa(spec.d, spec.c1, spec.c2, domain)
    except EvconvexError as e:
        fail(str(e))
        raise typer.Exit(EXIT_CONFIG)
    if json_out:
        _emit(model.to_dict())
    good(f"kappa validated on the {domain.kind} (d = {model.d:g})")


@app.command("evaluate")
def evaluate(
    config_path: Optional[Path] = config_option,
    json_out: bool = json_option,
    method: Optional[str] = method_option,
    seed: Optional[int] = seed_option,
):
    """Joint probability at options.x and membership in S(p)."""
    config = _load(config_path, seed=seed, method=method, show=not json_out)
    problem = _problem(config)
    x = numpy.zeros(problem.dim) if config.options.x is None else numpy.asarray(config.options.x)
    p = config.options.p
    try:
        estimate = joint_probability(
            problem, x, config.options.method, n=config.options.mc_samples, seed=config.seed
        )
        member = is_member(problem, x, p)
    except EvconvexError as e:
        fail(str(e))
        raise typer.Exit(EXIT_CONFIG)

    if json_out:
        _emit({"x": x.tolist(), "p": p, "probability": estimate.to_dict(), "member": member})
    info(f"P(x) = {estimate.value:.10g} +- {estimate.error:.2g} ({estimate.method})")
    (good if member else warn)(f"x {'is' if member else 'is not'} in S({p})")


@app.command("grid")
def grid(
    config_path: Optional[Path] = config_option,
    method: Optional[str] = method_option,
    out: Optional[Path] = out_option,
):
    """Probability on a regular grid as CSV (x1,x2,prob)."""
    config = _load(config_path, method=method, out=out)
    problem = _problem(config)
    box = config.options.grid_box
    if box is None:
        lo, hi = problem.domain.bounds
        box = list(zip(lo.tolist(), hi.tolist()))
    try:
        table = grid_export(problem, box, config.options.resolution, config.options.method)
    except EvconvexError as e:
        fail(str(e))
        raise typer.Exit(EXIT_CONFIG)

    if config.output is None:
        write_grid_csv(table, sys.stdout)
    else:
        write_grid_csv(table, config.output)
        good(f"Wrote {len(table)} cells to {config.output}")


@app.command("verify-convexity")
def verify_convexity(
    config_path: Optional[Path] = config_option,
    json_out: bool = json_option,
    seed: Optional[int] = seed_option,
):
    """Segment test for convexity of S(p) and star-shapedness w.r.t. the origin."""
    config = _load(config_path, seed=seed, show=not json_out)
    problem = _problem(config)
    opts = config.options
    try:
        report = verify_segment_convexity(
            problem, opts.p, opts.n_segments, config.seed, rays=opts.rays
        )
    except (SamplingExhausted, OriginNotMember) as e:
        fail(str(e))
        raise typer.Exit(EXIT_SAMPLING)
    except EvconvexError as e:
        fail(str(e))
        raise typer.Exit(EXIT_CONFIG)

    if json_out:
        _emit(report.to_dict())

    ok = len(report.violations) == 0 and report.star_shaped_ok is not False
    messages = [
        f"[cyan]{report.segments_tested}[/cyan] segments tested, "
        f"[cyan]{len(report.violations)}[/cyan] violations"
    ]
    if report.star_shaped_ok is not None:
        messages.append(f"star-shaped: {report.star_shaped_ok}")
    _finish(Status.SUCCESS if ok else Status.FAILURE, *messages)
    if not ok:
        raise typer.Exit(EXIT_VIOLATIONS)


@app.command("minimize")
def minimize(
    config_path: Optional[Path] = config_option,
    json_out: bool = json_option,
    lambda_mode: Optional[str] = lambda_option,
    seed: Optional[int] = seed_option,
):
    """min c'x over S(p) by supporting hyperplanes."""
    config = _load(config_path, seed=seed, lambda_mode=lambda_mode, show=not json_out)
    problem = _problem(config)
    opts = config.options
    c = opts.c if opts.c is not None else [0.0] * problem.dim
    try:
        result = minimize_linear(
            problem,
            c,
            opts.p,
            opts.max_iter,
            override=opts.override,
            lambda_mode=opts.lambda_mode,
            seed=config.seed,
        )
    except NotCertified as e:
        fail(str(e))
        raise typer.Exit(EXIT_VIOLATIONS)
    except (Infeasible, SamplingExhausted) as e:
        fail(str(e))
        raise typer.Exit(EXIT_SAMPLING)
    except EvconvexError as e:
        fail(str(e))
        raise typer.Exit(EXIT_CONFIG)

    if json_out:
        _emit(result.to_dict())
    status = Status.SUCCESS if result.converged else Status.INCONCLUSIVE
    _finish(
        status,
        f"c'x* = [cyan]{result.value:.8g}[/cyan] at {numpy.round(result.x, 6).tolist()}",
        f"{result.iterations} iterations, lower bound {result.lower_bound:.8g}",
    )


@app.command("reproduce-paper")
def reproduce_paper_cmd(
    json_out: bool = json_option,
    lambda_mode: Optional[str] = lambda_option,
    seed: Optional[int] = seed_option,
    out: Optional[Path] = out_option,
):
    """Recompute the worked examples and check them against the published numbers."""
    from evconvex.report import make_report
    from evconvex.reproduce import reproduce_paper

    config = _load(None, seed=seed, lambda_mode=lambda_mode, show=False)
    result = reproduce_paper(config.options.lambda_mode, config.seed)

    if json_out:
        _emit(result.to_dict())
    if out is not None:
        make_report(result, out)
        info(f"Report written to {out}")

    failures = [c for c in result.checks if c.status == Status.FAILURE]
    _finish(
        result.status,
        f"[cyan]{len(result.checks) - len(failures)}[/cyan] of [cyan]{len(result.checks)}[/cyan] checks passed",
    )
    if result.status == Status.FAILURE:
        raise typer.Exit(EXIT_VIOLATIONS)
