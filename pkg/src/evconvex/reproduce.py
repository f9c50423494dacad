from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy
from rich.emoji import Emoji
from rich.progress import track
from rich.text import Text

from evconvex.checks import PaperCheck, PredicateCheck, Status, ToleranceCheck
from evconvex.config import paper_config
from evconvex.console import console
from evconvex.copula import delta_det, m_matrix_psd
from evconvex.decreasing import t_star_alpha
from evconvex.dist import Marginal1D, cdf
from evconvex.feasibility import is_member
from evconvex.thresholds import (
    PStarResult,
    RegionTable,
    RowModel,
    ThetaResult,
    assemble_pstar,
    best_theta,
    region_table,
)

EXPECTED_THETA = (2.4343, 0.1965, 1.4433)
THETA_TOL = 5e-4
EXPECTED_MAX_F = 0.9031
EXPECTED_PSTAR = 0.9648
PROB_TOL = 1e-3
SAMPLE_POINTS = 100

REGION_ROW = RowModel(
    mu=numpy.array([0.0, 28.0, -1.0]),
    sigma=numpy.array([[32.0, 20.0, 3.0], [20.0, 26.0, 23.0], [3.0, 23.0, 38.0]]),
    d=4.0,
)
REGION_C0 = 20.0
CURVE_R = numpy.linspace(-6.0, -1.05, 100)


@dataclass
class Reproduction:
    title: str = "Eventual convexity: worked examples"
    checks: List[PaperCheck] = field(default_factory=list)
    thetas: List[ThetaResult] = field(default_factory=list)
    pstar: Optional[PStarResult] = None
    tables: List[RegionTable] = field(default_factory=list)
    curve: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def status(self) -> Status:
        statuses = [c.status for c in self.checks]
        if Status.FAILURE in statuses:
            return Status.FAILURE
        if Status.INCONCLUSIVE in statuses:
            return Status.INCONCLUSIVE
        return Status.SUCCESS

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "status": self.status.name,
            "checks": [c.to_dict() for c in self.checks],
            "thetas": [t.to_dict() for t in self.thetas],
            "pstar": self.pstar.to_dict() if self.pstar is not None else None,
            "tables": [t.to_dict() for t in self.tables],
            "curve": [list(p) for p in self.curve],
        }


def _thresholds(result: Reproduction, lambda_mode: str, seed: int) -> List[PaperCheck]:
    config = paper_config()
    rows = config.row_models()
    result.thetas = [best_theta(row, row.r, lambda_mode) for row in rows]
    result.pstar = assemble_pstar(rows, lambda_mode, config.options.eps0, result.thetas)

    checks = [
        ToleranceCheck(
            "theta*", t.theta, expected, THETA_TOL, group="thresholds", suffix=f"row {i}"
        )
        for i, (t, expected) in enumerate(zip(result.thetas, EXPECTED_THETA))
    ]
    max_f = max(theta_term for theta_term, _ in result.pstar.contributions)
    checks.append(ToleranceCheck("max F(sqrt(theta*))", max_f, EXPECTED_MAX_F, PROB_TOL, group="thresholds"))
    tstar = t_star_alpha(Marginal1D.student(4), 3.0)
    checks.append(
        ToleranceCheck("F(t*(3))", cdf(Marginal1D.student(4), tstar), EXPECTED_PSTAR, PROB_TOL, group="thresholds")
    )
    checks.append(ToleranceCheck("p*", result.pstar.pstar, EXPECTED_PSTAR, PROB_TOL, group="thresholds"))
    return checks


def _copula(result: Reproduction, lambda_mode: str, seed: int) -> List[PaperCheck]:
    config = paper_config()
    problem = config.problem()
    model = problem.copula
    p = config.options.p
    y = 1 / problem.size
    rng = numpy.random.default_rng(seed)
    points = problem.domain.sample(rng, SAMPLE_POINTS)

    deltas = [delta_det(model, x, model.d) for x in points]
    diags = [m_matrix_psd(model, x, y, p, d=model.d) for x in points]
    return [
        PredicateCheck(
            "determinant",
            all(v > 0 for v in deltas),
            f"|Delta| > 0 at {len(points)} points (min {min(deltas):.3g})",
            group="copula",
        ),
        PredicateCheck(
            "kappa matrix",
            all(d.a4_psd for d in diags),
            f"d kappa H - grad grad' PSD at {len(points)} points",
            group="copula",
        ),
        PredicateCheck(
            "M(x, 1/K)",
            all(d.psd for d in diags),
            f"M(x, y) PSD at {len(points)} points",
            group="copula",
        ),
        PredicateCheck(
            "origin",
            is_member(problem, numpy.zeros(problem.dim), p),
            f"origin in S({p})",
            group="copula",
        ),
    ]


def _regions(result: Reproduction, lambda_mode: str, seed: int) -> List[PaperCheck]:
    # the worked example is stated with lambda_min
    mode = "lMin"
    checks = []
    for r in (-1.0, 1.0):
        table = region_table(REGION_ROW, r, REGION_C0, mode)
        result.tables.append(table)
        checks.append(
            PredicateCheck(
                "region",
                not table.contained,
                f"G({REGION_C0:g}) leaves Q for r = {r:g}",
                group="regions",
                suffix=f"r={r:g}",
            )
        )

    theta = best_theta(REGION_ROW, -3.0, mode)
    c0 = theta.sqrt_theta * (1 + 1e-3)
    table = region_table(REGION_ROW, -3.0, c0, mode)
    result.tables.append(table)
    checks.append(
        PredicateCheck(
            "region",
            table.contained,
            f"G({c0:.4g}) inside Q for r = -3",
            group="regions",
            suffix="r=-3",
        )
    )

    values = [best_theta(REGION_ROW, float(r), mode).sqrt_theta for r in CURVE_R]
    result.curve = [(float(r), float(v)) for r, v in zip(CURVE_R, values)]
    near = best_theta(REGION_ROW, -1.001, mode).sqrt_theta
    at_two = best_theta(REGION_ROW, -2.0, mode).sqrt_theta
    checks += [
        PredicateCheck(
            "sqrt(theta*)(r)",
            bool(numpy.all(numpy.isfinite(values)) and numpy.all(numpy.diff(values) > 0)),
            f"finite and strictly decreasing as r decreases over [{CURVE_R[0]:g}, {CURVE_R[-1]:g}]",
            group="regions",
        ),
        PredicateCheck(
            "divergence",
            near > 100 * at_two,
            f"sqrt(theta*)(-1.001) = {near:.4g} >> sqrt(theta*)(-2) = {at_two:.4g}",
            group="regions",
        ),
    ]
    return checks


SECTIONS: List[Tuple[str, Callable]] = [
    ("Thresholds in the plane", _thresholds),
    ("Copula construction", _copula),
    ("Threshold regions in three dimensions", _regions),
]


def reproduce_paper(lambda_mode: str = "lMin", seed: int = 0) -> Reproduction:
    result = Reproduction()

    for title, section in track(SECTIONS, console=console, description="Reproducing..."):
        console.rule(title)
        for inst in section(result, lambda_mode, seed):
            result.checks.append(inst)
            if inst.is_applicable:
                style = "bold green" if inst.is_valid else "bold red"
                console.print(Emoji.replace(inst.status.icon), Text(str(inst), style=style), inst.label)
            else:
                console.print(Emoji.replace(inst.status.icon), inst, style="yellow")

    return result
