import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy
import scipy.integrate
import scipy.optimize
import scipy.special
from rich.progress import track

from evconvex.console import console, warn
from evconvex.copula import KappaModel, copula_value, m_matrix_psd, P_MIN
from evconvex.decreasing import DEFAULT_EPS0
from evconvex.dist import (
    Marginal1D,
    NmvmModel,
    DiscreteMixing,
    cdf,
    density,
    nmvm_sample,
    tail_bounds,
)
from evconvex.domain import Domain
from evconvex.errors import (
    DimError,
    DomainError,
    EvconvexError,
    Infeasible,
    MethodUnavailable,
    NotCertified,
    OriginNotMember,
    OutsideX,
    SamplingExhausted,
)
from evconvex.linalg import quad_form
from evconvex.thresholds import (
    PStarResult,
    RowModel,
    ThetaResult,
    assemble_pstar,
    best_theta,
)

METHODS = ("analytic", "radial", "monteCarlo")
MEMBER_TOL = 1e-9
SEGMENT_SLACK = 1e-4
SEGMENT_LAMBDAS = numpy.linspace(0.1, 0.9, 9)
STAR_LAMBDAS = numpy.linspace(0.05, 1.0, 20)
SAMPLING_BUDGET = 1_000_000
SAMPLING_BATCH = 4096
SEGMENT_TASKS = 16
BOX_DIRECTIONS = 64
BOX_BISECTIONS = 40
GL_NODES = 256
RADIAL_TOL = 1e-7
MINIMIZE_TOL = 1e-5


def worker_count() -> int:
    value = os.environ.get("EVCONVEX_THREADS")
    if value is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(value))
    except ValueError:
        raise DomainError(f"EVCONVEX_THREADS must be an integer, got {value!r}")


@dataclass(frozen=True)
class GhRow:
    """Skewness block of a generalized hyperbolic row."""

    lam: float
    chi: float
    psi: float
    gamma: Tuple[float, ...]

    @property
    def mixing(self) -> Marginal1D:
        return Marginal1D.gig(self.lam, self.chi, self.psi)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "chi": self.chi, "psi": self.psi, "gamma": list(self.gamma)}

    @classmethod
    def from_dict(cls, d: dict) -> "GhRow":
        return cls(d["lambda"], d["chi"], d["psi"], tuple(d["gamma"]))


@dataclass
class Problem:
    rows: List[RowModel]
    domain: Domain
    copula: Optional[KappaModel] = None
    gh: Optional[List[Optional[GhRow]]] = None

    def __post_init__(self):
        if len(self.rows) == 0:
            raise DimError("A problem needs at least one row")
        dims = {row.dim for row in self.rows}
        if len(dims) != 1:
            raise DimError(f"Rows have different decision dimensions {sorted(dims)}")
        if self.domain.dim != self.dim:
            raise DimError(f"Domain dimension {self.domain.dim} != decision dimension {self.dim}")
        if self.gh is None:
            self.gh = [None] * len(self.rows)
        if len(self.gh) != len(self.rows):
            raise DimError("One gh entry per row is required")
        for block in self.gh:
            if block is not None and len(block.gamma) != self.dim:
                raise DimError("gamma does not match the decision dimension")
        if self.copula is not None:
            if self.copula.dim != self.dim:
                raise DimError("Copula dimension does not match the decision dimension")
            points = self.domain.validation_points(per_axis=8)
            if not all(self.copula.domain.contains(x, tol=1e-9) for x in points):
                raise DomainError("The copula domain does not cover X")

    @property
    def dim(self) -> int:
        return self.rows[0].dim

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def origin_member(self) -> bool:
        return min(row.d for row in self.rows) >= 0

    def in_e(self, x) -> bool:
        x = numpy.asarray(x, dtype=float)
        return bool(numpy.any(x != 0)) and all(row.d - row.mu @ x > 0 for row in self.rows)

    def to_dict(self) -> dict:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "domain": self.domain.to_dict(),
            "copula": self.copula.to_dict() if self.copula is not None else None,
            "gh": [g.to_dict() if g is not None else None for g in self.gh],
        }


@dataclass
class ProbabilityEstimate:
    value: float
    error: float
    method: str

    def to_dict(self) -> dict:
        return asdict(self)


def _row_marginal(prob: Problem, i: int, x: numpy.ndarray) -> Marginal1D:
    block = prob.gh[i]
    if block is None:
        return prob.rows[i].marginal
    q = quad_form(prob.rows[i].sigma, x)
    phi = float(numpy.asarray(block.gamma) @ x / numpy.sqrt(q))
    return Marginal1D.gh1(block.lam, block.chi, block.psi, phi)


def _radial_row(
    row: RowModel, block: GhRow, x: numpy.ndarray, include_tail: bool
) -> float:
    gx = float(numpy.asarray(block.gamma) @ x)
    if gx < 0:
        raise MethodUnavailable(f"Radial decomposition needs gamma'x >= 0, got {gx:.6g}")
    s = numpy.sqrt(quad_form(row.sigma, x))
    u = row.d - float(row.mu @ x)
    mixing = block.mixing
    lo, hi = tail_bounds(mixing)

    def a(w):
        return (u - w * gx) / (numpy.sqrt(w) * s)

    def radial_cdf(t):
        # the radial part of a standard normal is |Z|
        return scipy.special.erf(t / numpy.sqrt(2))

    if gx == 0:
        w_bar = numpy.inf if u > 0 else 0.0
    else:
        w_bar = max(u / gx, 0.0)

    upper = min(w_bar, hi)
    bounded = 0.0
    if upper > lo:
        nodes, weights = numpy.polynomial.legendre.leggauss(GL_NODES)
        w = 0.5 * (upper - lo) * nodes + 0.5 * (upper + lo)
        f = numpy.array([radial_cdf(a(wi)) * density(mixing, wi) for wi in w])
        bounded = 0.5 * (upper - lo) * float(weights @ f)

    tail = 0.0
    if include_tail and w_bar < hi:
        start = max(w_bar, lo)
        tail, _ = scipy.integrate.quad(
            lambda w: radial_cdf(-a(w)) * density(mixing, w),
            start,
            hi,
            epsabs=RADIAL_TOL / 10,
            limit=200,
        )
    return float(min(max(0.5 + 0.5 * bounded - 0.5 * tail, 0.0), 1.0))


def _row_probabilities(prob: Problem, x: numpy.ndarray, method: str) -> List[float]:
    values = []
    for i, row in enumerate(prob.rows):
        block = prob.gh[i]
        if method in ("radial", "radialPrinted") and block is not None:
            values.append(_radial_row(row, block, x, include_tail=method == "radial"))
        else:
            values.append(cdf(_row_marginal(prob, i, x), row.g(x)))
    return values


def _combine(prob: Problem, x: numpy.ndarray, u: Sequence[float]) -> float:
    if min(u) <= 0:
        return 0.0
    if prob.copula is None:
        return float(numpy.prod(u))
    return copula_value(prob.copula(x), u)


def _row_model_for_sampling(prob: Problem, i: int) -> NmvmModel:
    row = prob.rows[i]
    block = prob.gh[i]
    zero = numpy.zeros(row.dim)
    if block is not None:
        return NmvmModel.gh(block.lam, block.chi, block.psi, row.mu, block.gamma, row.sigma)
    m = row.marginal
    if m.family == "gaussian":
        return NmvmModel(row.mu, zero, row.sigma, DiscreteMixing.point_mass())
    if m.family == "student":
        return NmvmModel(row.mu, zero, row.sigma, Marginal1D.gig(-m.nu / 2, m.nu, 0.0))
    if m.family == "gh1" and m.phi == 0:
        return NmvmModel(row.mu, zero, row.sigma, Marginal1D.gig(m.lam, m.chi, m.psi))
    raise MethodUnavailable(f"Cannot sample a {m.family} row")


def _monte_carlo(prob: Problem, x: numpy.ndarray, n: int, seed: int) -> ProbabilityEstimate:
    if prob.copula is not None:
        raise MethodUnavailable(
            "Monte Carlo sampling of the decision-dependent copula is not supported"
        )
    seeds = numpy.random.SeedSequence(seed).spawn(prob.size)
    hits = numpy.ones(n, dtype=bool)
    for i, row in enumerate(prob.rows):
        v = nmvm_sample(_row_model_for_sampling(prob, i), n, seeds[i])
        hits &= v @ x <= row.d
    value = float(hits.mean())
    return ProbabilityEstimate(value, float(numpy.sqrt(value * (1 - value) / n)), "monteCarlo")


def _check_point(prob: Problem, x) -> numpy.ndarray:
    x = numpy.asarray(x, dtype=float)
    if x.shape != (prob.dim,):
        raise DimError(f"Point of shape {x.shape} in a {prob.dim}-dim problem")
    return x


def joint_probability(
    prob: Problem,
    x,
    method: str = "analytic",
    n: int = 100_000,
    seed: int = 0,
) -> ProbabilityEstimate:
    """
    P(v_i'x <= D_i for all rows). ``radialPrinted`` keeps only the bounded
    integral of the radial decomposition, ``radial`` adds the tail beyond it.
    """
    x = _check_point(prob, x)
    if method not in METHODS + ("radialPrinted",):
        raise DomainError(f"Unknown method {method}, expected one of {METHODS}")

    if not numpy.any(x != 0):
        if not prob.domain.origin_allowed:
            raise DomainError("The origin is excluded from this problem")
        return ProbabilityEstimate(1.0 if prob.origin_member else 0.0, 0.0, method)

    if method == "monteCarlo":
        return _monte_carlo(prob, x, n, seed)

    u = _row_probabilities(prob, x, method)
    error = 0.0 if method == "analytic" else RADIAL_TOL
    return ProbabilityEstimate(_combine(prob, x, u), error, method)


def _probability(prob: Problem, x: numpy.ndarray) -> float:
    return joint_probability(prob, x).value


def _check_p(p: float):
    if not 0 < p <= 1:
        raise DomainError(f"Probability level must lie in (0, 1], got {p}")


def is_member(prob: Problem, x, p: float, method: str = "analytic") -> bool:
    _check_p(p)
    x = _check_point(prob, x)
    if not prob.domain.contains(x):
        raise OutsideX(f"{x.tolist()} is not in X")
    return joint_probability(prob, x, method).value >= p - MEMBER_TOL


@dataclass
class Violation:
    x1: List[float]
    x2: List[float]
    lam: float
    deficit: float


@dataclass
class ConvexityReport:
    p: float
    segments_tested: int
    violations: List[Violation] = field(default_factory=list)
    star_shaped_ok: Optional[bool] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ConvexityReport":
        d = dict(d)
        d["violations"] = [Violation(**v) for v in d["violations"]]
        return cls(**d)


Box = Tuple[numpy.ndarray, numpy.ndarray]


def sampling_box(prob: Problem, p: float, seed: int = 0) -> Optional[Box]:
    """
    Bounding box of S(p) traced by bisection along rays from the origin,
    padded by a quarter of its span and clipped to X. None when the origin
    is not a member.
    """
    zero = numpy.zeros(prob.dim)
    if not (prob.domain.origin_allowed and prob.origin_member and prob.domain.contains(zero)):
        return None
    lo, hi = prob.domain.bounds
    reach = float(numpy.linalg.norm(hi - lo))
    rng = numpy.random.default_rng(seed)
    z = rng.standard_normal((BOX_DIRECTIONS, prob.dim))
    z /= numpy.linalg.norm(z, axis=1)[:, None]
    directions = numpy.concatenate([numpy.eye(prob.dim), -numpy.eye(prob.dim), z])

    ends = []
    for u in directions:
        a, b = 0.0, reach
        for _ in range(BOX_BISECTIONS):
            mid = 0.5 * (a + b)
            if prob.domain.contains(mid * u) and _probability(prob, mid * u) >= p:
                a = mid
            else:
                b = mid
        ends.append(b * u)
    ends = numpy.array(ends)
    span = ends.max(axis=0) - ends.min(axis=0)
    return (
        numpy.maximum(ends.min(axis=0) - 0.25 * span, lo),
        numpy.minimum(ends.max(axis=0) + 0.25 * span, hi),
    )


def _sample_members(
    prob: Problem,
    p: float,
    count: int,
    rng: numpy.random.Generator,
    budget: int,
    box: Optional[Box] = None,
) -> List[numpy.ndarray]:
    """Rejection sampling of members of S(p) inside X and E, optionally within ``box``."""
    members = []
    drawn = 0
    while len(members) < count:
        if drawn >= budget:
            raise SamplingExhausted(
                f"Found {len(members)} of {count} members of S({p}) in {drawn} draws"
            )
        n = min(SAMPLING_BATCH, budget - drawn)
        if box is None:
            batch = prob.domain.sample(rng, n)
        else:
            batch = rng.uniform(box[0], box[1], size=(n, prob.dim))
            batch = [x for x in batch if prob.domain.contains(x)]
        drawn += n
        for x in batch:
            if prob.in_e(x) and _probability(prob, x) >= p:
                members.append(x)
                if len(members) == count:
                    break
    return members


def _segment_task(
    prob: Problem,
    p: float,
    n_pairs: int,
    seed: numpy.random.SeedSequence,
    budget: int,
    box: Optional[Box],
) -> List[Violation]:
    rng = numpy.random.default_rng(seed)
    points = _sample_members(prob, p, 2 * n_pairs, rng, budget, box)
    violations = []
    for x1, x2 in zip(points[::2], points[1::2]):
        for lam in SEGMENT_LAMBDAS:
            z = lam * x1 + (1 - lam) * x2
            value = _probability(prob, z)
            if value < p - SEGMENT_SLACK:
                violations.append(Violation(x1.tolist(), x2.tolist(), float(lam), float(p - value)))
    return violations


def _split(total: int, parts: int) -> List[int]:
    parts = max(1, min(parts, total))
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _run_tasks(fn, args: Sequence[tuple], description: str) -> list:
    results = [None] * len(args)
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(args))) as pool:
        futures = {pool.submit(fn, *a): i for i, a in enumerate(args)}
        for future in track(
            as_completed(futures),
            total=len(futures),
            console=console,
            description=description,
            transient=True,
        ):
            results[futures[future]] = future.result()
    return results


def verify_segment_convexity(
    prob: Problem,
    p: float,
    n_segments: int = 500,
    seed: int = 0,
    rays: int = 0,
) -> ConvexityReport:
    """
    Test midpoint membership on random segments between members of S(p).
    With ``rays > 0`` and the origin in S(p), star-shapedness is checked too.
    """
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    shares = _split(n_segments, SEGMENT_TASKS)
    seeds = numpy.random.SeedSequence(seed).spawn(len(shares))
    budgets = _split(SAMPLING_BUDGET, len(shares))
    box = sampling_box(prob, p, seed)
    args = [(prob, p, n, s, b, box) for n, s, b in zip(shares, seeds, budgets)]

    violations = []
    for chunk in _run_tasks(_segment_task, args, "Testing segments"):
        violations.extend(chunk)

    report = ConvexityReport(p=p, segments_tested=n_segments, violations=violations)
    if rays > 0 and prob.origin_member:
        report.star_shaped_ok = star_shaped_check(prob, p, rays, seed)
    return report


def star_shaped_check(prob: Problem, p: float, rays: int = 100, seed: int = 0) -> bool:
    if not prob.origin_member:
        raise OriginNotMember(
            f"min D_i = {min(row.d for row in prob.rows)} < 0, the origin is not in S(p)"
        )
    _check_p(p)
    rng = numpy.random.default_rng(numpy.random.SeedSequence(seed).spawn(SEGMENT_TASKS + 1)[-1])
    box = sampling_box(prob, p, seed)
    for x in _sample_members(prob, p, rays, rng, SAMPLING_BUDGET, box):
        for lam in STAR_LAMBDAS:
            z = lam * x
            if _probability(prob, z) < p - SEGMENT_SLACK:
                return False
    return True


def _grid_row(prob: Problem, x1: numpy.ndarray, x2: float, method: str) -> List[float]:
    out = []
    for a in x1:
        x = numpy.array([a, x2])
        if prob.copula is not None and not prob.copula.domain.contains(x, tol=1e-9):
            out.append(numpy.nan)
            continue
        try:
            out.append(joint_probability(prob, x, method).value)
        except DomainError:
            out.append(numpy.nan)
    return out


def grid_export(
    prob: Problem,
    box: Tuple[Tuple[float, float], Tuple[float, float]],
    resolution: int,
    method: str = "analytic",
) -> numpy.ndarray:
    """
    Probability on a regular grid as rows (x1, x2, prob), x2 outer and x1
    inner. Cells where the probability is undefined are NaN.
    """
    if prob.dim != 2:
        raise DimError(f"Grid export needs a 2-dim problem, got {prob.dim}")
    if resolution < 1:
        raise DomainError(f"Resolution must be positive, got {resolution}")
    (lo1, hi1), (lo2, hi2) = box
    if resolution == 1:
        x1 = numpy.array([0.5 * (lo1 + hi1)])
        x2 = numpy.array([0.5 * (lo2 + hi2)])
    else:
        x1 = numpy.linspace(lo1, hi1, resolution)
        x2 = numpy.linspace(lo2, hi2, resolution)

    values = _run_tasks(_grid_row, [(prob, x1, b, method) for b in x2], "Evaluating grid")
    X1, X2 = numpy.meshgrid(x1, x2)
    return numpy.column_stack([X1.ravel(), X2.ravel(), numpy.asarray(values).ravel()])


def write_grid_csv(table: numpy.ndarray, path) -> None:
    numpy.savetxt(path, table, fmt="%.17g", delimiter=",", header="x1,x2,prob", comments="")


@dataclass
class MinimizeResult:
    x: List[float]
    value: float
    iterations: int
    converged: bool
    slack: float
    lower_bound: float

    def to_dict(self) -> dict:
        return asdict(self)


def _certified(prob: Problem, p: float, lambda_mode: str) -> bool:
    try:
        pstar = assemble_pstar(prob.rows, lambda_mode)
    except EvconvexError:
        return False
    return pstar.pstar <= p


def _interior_member(prob: Problem, p: float, seed: int) -> numpy.ndarray:
    if prob.domain.origin_allowed and prob.origin_member:
        return numpy.zeros(prob.dim)
    rng = numpy.random.default_rng(seed)
    try:
        candidates = _sample_members(prob, p, 16, rng, SAMPLING_BUDGET)
    except SamplingExhausted as e:
        raise Infeasible(f"S({p}) appears empty: {e}")
    return max(candidates, key=lambda x: _probability(prob, x))


def _fd_gradient(prob: Problem, x: numpy.ndarray) -> numpy.ndarray:
    h = 1e-6 * max(1.0, float(numpy.linalg.norm(x)))
    g = numpy.empty(prob.dim)
    center = _probability(prob, x)
    for i in range(prob.dim):
        e = numpy.zeros(prob.dim)
        e[i] = h
        try:
            plus = _probability(prob, x + e)
        except DomainError:
            g[i] = (center - _probability(prob, x - e)) / h
            continue
        try:
            g[i] = (plus - _probability(prob, x - e)) / (2 * h)
        except DomainError:
            g[i] = (plus - center) / h
    return g


def _boundary_point(prob: Problem, p: float, inner: numpy.ndarray, outer: numpy.ndarray):
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _probability(prob, inner + mid * (outer - inner)) >= p:
            lo = mid
        else:
            hi = mid
    return inner + lo * (outer - inner)


def minimize_linear(
    prob: Problem,
    c,
    p: float,
    max_iter: int = 200,
    override: bool = False,
    lambda_mode: str = "lMin",
    seed: int = 0,
) -> MinimizeResult:
    """
    min c'x over S(p) by supporting hyperplanes: linear programs over X and
    the accumulated cuts, with cuts from the probability gradient at the
    boundary point between an interior member and the LP iterate.
    """
    _check_p(p)
    if max_iter < 1:
        raise DomainError(f"max_iter must be positive, got {max_iter}")
    c = numpy.asarray(c, dtype=float)
    if c.shape != (prob.dim,):
        raise DimError(f"Objective of shape {c.shape} in a {prob.dim}-dim problem")
    if not override and not _certified(prob, p, lambda_mode):
        raise NotCertified(f"Convexity of S({p}) is not certified, pass override to proceed")

    x0 = _interior_member(prob, p, seed)
    if not numpy.any(c != 0):
        return MinimizeResult(x0.tolist(), 0.0, 0, True, 0.0, 0.0)

    lo, hi = prob.domain.bounds
    bounds = list(zip(lo.tolist(), hi.tolist()))
    A: List[numpy.ndarray] = []
    b: List[float] = []
    best = x0
    x_k = x0
    lower = -numpy.inf
    slack = numpy.inf

    for it in track(
        range(1, max_iter + 1), console=console, description="Cutting planes", transient=True
    ):
        res = scipy.optimize.linprog(
            c,
            A_ub=numpy.array(A) if A else None,
            b_ub=numpy.array(b) if b else None,
            bounds=bounds,
            method="highs",
        )
        if not res.success:
            raise Infeasible(f"Outer approximation became infeasible: {res.message}")
        x_k = res.x
        lower = float(res.fun)

        if prob.domain.kind == "ball":
            center = numpy.asarray(prob.domain.center)
            dist = numpy.linalg.norm(x_k - center)
            if dist > prob.domain.radius * (1 + 1e-12):
                n = (x_k - center) / dist
                A.append(n)
                b.append(float(n @ center + prob.domain.radius))
                continue

        slack = p - _probability(prob, x_k)
        if slack < MINIMIZE_TOL:
            return MinimizeResult(x_k.tolist(), float(c @ x_k), it, True, float(max(slack, 0.0)), lower)

        x_b = _boundary_point(prob, p, x0, x_k)
        if c @ x_b < c @ best:
            best = x_b
        grad = _fd_gradient(prob, x_b)
        if not numpy.any(grad != 0):
            break
        A.append(-grad)
        b.append(float(-grad @ x_b))

    warn(f"Cutting planes stopped after {it} iterations, slack {slack:.3g}")
    return MinimizeResult(best.tolist(), float(c @ best), it, False, float(slack), lower)


@dataclass
class Certificate:
    p: float
    pstar: Optional[PStarResult]
    thetas: List[ThetaResult]
    holds: List[str]
    fails: List[str]

    @property
    def convex(self) -> bool:
        return len(self.fails) == 0

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "pstar": self.pstar.to_dict() if self.pstar is not None else None,
            "thetas": [t.to_dict() for t in self.thetas],
            "holds": list(self.holds),
            "fails": list(self.fails),
            "convex": self.convex,
        }


def certify_problem(
    prob: Problem,
    p: float,
    lambda_mode: str = "lMin",
    eps0: float = DEFAULT_EPS0,
    n_points: int = 100,
    seed: int = 0,
) -> Certificate:
    """Collect the assumptions under which S(p) is convex and check each."""
    _check_p(p)
    holds, fails = [], []

    def record(name, ok):
        (holds if ok else fails).append(name)

    thetas = [
        best_theta(row, row.r if row.r != 0 else -eps0, lambda_mode) for row in prob.rows
    ]
    record("thresholds", all(t.exists for t in thetas))

    pstar = None
    try:
        pstar = assemble_pstar(prob.rows, lambda_mode, eps0, thetas)
    except EvconvexError as e:
        warn(str(e))
    record("p >= p*", pstar is not None and p >= pstar.pstar)

    if prob.copula is not None:
        record("p >= exp(-1)", p >= P_MIN)
        rng = numpy.random.default_rng(seed)
        y = 1 / prob.size
        m_ok, a4_ok = True, True
        if p >= P_MIN and p < 1:
            for x in prob.domain.sample(rng, n_points):
                diag = m_matrix_psd(prob.copula, x, y, p, d=prob.copula.d)
                m_ok &= diag.psd
                a4_ok &= diag.a4_psd
        record("M(x, y) positive semi-definite", m_ok and p >= P_MIN)
        record("kappa assumption matrix positive semi-definite", a4_ok)

    return Certificate(p=p, pstar=pstar, thetas=thetas, holds=holds, fails=fails)
