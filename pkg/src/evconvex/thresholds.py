from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy
import scipy.optimize

from evconvex.decreasing import (
    DEFAULT_EPS0,
    certify_alpha_decreasing,
    revealed_alpha,
    t_star_alpha,
)
from evconvex.dist import Marginal1D, cdf
from evconvex.errors import (
    DomainError,
    MissingTheta,
    NotDecreasing,
    OutsideDomain,
    WrongMarginal,
)
from evconvex.linalg import SpdMatrix, inv_quad_form, quad_form

LAMBDA_MODES = ("lMin", "closedForm", "definitionNumeric")
NUMERIC_RESTARTS = 32
GRID_RESOLUTION = 1024
BISECT_TOL = 1e-6
# r_circle within rounding of one counts as one
R_CIRCLE_TOL = 1e-12


@dataclass
class RowModel:
    mu: numpy.ndarray
    sigma: SpdMatrix
    d: float
    marginal: Marginal1D = field(default_factory=Marginal1D.gaussian)
    r: float = -2.0

    def __post_init__(self):
        self.mu = numpy.asarray(self.mu, dtype=float)
        if not isinstance(self.sigma, SpdMatrix):
            self.sigma = SpdMatrix(self.sigma)
        if self.mu.shape != (self.sigma.dim,):
            raise DomainError(
                f"mu has shape {self.mu.shape}, Sigma has dimension {self.sigma.dim}"
            )

    @property
    def dim(self) -> int:
        return self.sigma.dim

    @property
    def b(self) -> float:
        return self.d

    @property
    def mu_norm(self) -> float:
        return float(numpy.linalg.norm(self.mu))

    @property
    def mahalanobis(self) -> float:
        """mu' Sigma^-1 mu"""
        return inv_quad_form(self.sigma, self.mu)

    def g(self, x) -> float:
        x = numpy.asarray(x, dtype=float)
        return float((self.d - self.mu @ x) / numpy.sqrt(quad_form(self.sigma, x)))

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "sigma": self.sigma.entries.tolist(),
            "d": self.d,
            "marginal": self.marginal.to_dict(),
            "r": self.r,
        }


@dataclass
class ThetaResult:
    exists: bool
    theta: Optional[float]
    sqrt_theta: Optional[float]
    case_id: int
    is_best: bool
    lambda_mu_min: Optional[float]
    r_circle: Optional[float]
    r_star: Optional[float]
    lambda_mode: str

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ThetaResult":
        return cls(**d)


@dataclass
class PStarResult:
    pstar: float
    contributions: List[Tuple[float, float]]
    binding: Dict[str, object]

    def to_dict(self) -> dict:
        return {
            "pstar": self.pstar,
            "contributions": [list(c) for c in self.contributions],
            "binding": dict(self.binding),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PStarResult":
        return cls(
            pstar=d["pstar"],
            contributions=[tuple(c) for c in d["contributions"]],
            binding=dict(d["binding"]),
        )


def r_concavity_holds(row: RowModel, x, r: float) -> bool:
    """
    Local r-concavity of g(x) = (b - mu'x) / sqrt(x' Sigma x) at ``x``: convexity
    of sign(-r) g^r for r != 0, concavity of ln g for r = 0.
    """
    x = numpy.asarray(x, dtype=float)
    u = row.d - float(row.mu @ x)
    if not numpy.any(x != 0) or not u > 0:
        raise OutsideDomain(f"{x.tolist()} is not in E for this row")

    q = quad_form(row.sigma, x)
    m = float(row.mu @ x)
    theta = u * u / q
    lhs = row.mahalanobis

    if r == 0:
        rhs = 2 * m * m / q - theta
    else:
        rhs = (
            (2 - r) * m * m / q
            - 2 * r * numpy.sqrt(theta) * m / numpy.sqrt(q)
            - (r + 1) * theta
        )
    return bool(lhs <= rhs)


def _check_mode(mode: str):
    if mode not in LAMBDA_MODES:
        raise DomainError(f"Unknown lambda mode {mode}, expected one of {LAMBDA_MODES}")


def lambda_mu_min(mu, sigma: SpdMatrix, mode: str = "lMin", seed: int = 0) -> float:
    _check_mode(mode)
    mu = numpy.asarray(mu, dtype=float)
    norm2 = float(mu @ mu)
    if norm2 == 0:
        raise DomainError("lambda_mu_min is undefined for mu = 0")

    lmin, lmax = sigma.eig.lmin, sigma.eig.lmax

    if mode == "lMin":
        return lmin
    elif mode == "closedForm":
        value = norm2 / inv_quad_form(sigma, mu)
    else:
        value = _lambda_mu_min_numeric(mu, sigma, seed)

    return float(min(max(value, lmin), lmax))


def _lambda_mu_min_numeric(mu: numpy.ndarray, sigma: SpdMatrix, seed: int) -> float:
    norm = numpy.linalg.norm(mu)
    S = sigma.entries

    def objective(x):
        q = x @ S @ x
        return -(mu @ x) / norm / numpy.sqrt(q)

    def gradient(x):
        q = x @ S @ x
        sq = numpy.sqrt(q)
        return -(mu / sq - (mu @ x) * (S @ x) / sq ** 3) / norm

    rng = numpy.random.default_rng(seed)
    best = -numpy.inf
    starts = rng.standard_normal((NUMERIC_RESTARTS, sigma.dim))
    starts[0] = mu
    for x0 in starts:
        res = scipy.optimize.minimize(objective, x0, jac=gradient, method="BFGS")
        x = res.x / numpy.linalg.norm(res.x)
        best = max(best, -objective(x))

    return float(1.0 / best ** 2)


def tangency_constants(
    mu, sigma: SpdMatrix, lambda_mode: str = "lMin"
) -> Tuple[float, Optional[float]]:
    mu = numpy.asarray(mu, dtype=float)
    lam = lambda_mu_min(mu, sigma, lambda_mode)
    r_circle = float(mu @ mu) / (inv_quad_form(sigma, mu) * lam)
    if r_circle > 1 + R_CIRCLE_TOL:
        r_star = -2 * numpy.sqrt(1 / (r_circle - 1) + 1)
        return r_circle, float(r_star)
    return r_circle, None


def item7_sqrt_theta(
    mu_norm2: float,
    mahalanobis: float,
    lam: float,
    r: float,
    r_circle: float,
    r_star: Optional[float],
) -> float:
    """Best threshold for b > 0, r < -1."""
    k = -1 - r
    if r_star is not None and r_circle > 1 and r <= r_star:
        return float(numpy.sqrt((-r + 2) / (-r - 2)) * numpy.sqrt(mahalanobis))
    radicand = (2 + r) * mu_norm2 / lam + k * mahalanobis
    return float(
        ((-r) * numpy.sqrt(mu_norm2 / lam) + numpy.sqrt(max(radicand, 0.0))) / k
    )


def isotropic_sqrt_theta(mu_norm: float, lam0: float, r: float) -> float:
    return float(mu_norm / numpy.sqrt(lam0) * (-r + 1) / (-r - 1))


def legacy_sqrt_theta(mu, sigma: SpdMatrix, r: float) -> float:
    """Earlier threshold for r < -1, dominated by the best thresholds."""
    if not r < -1:
        raise DomainError(f"Legacy threshold requires r < -1, got {r}")
    mu = numpy.asarray(mu, dtype=float)
    return isotropic_sqrt_theta(float(numpy.linalg.norm(mu)), sigma.eig.lmin, r)


def best_theta(
    row: RowModel,
    r: Optional[float] = None,
    lambda_mode: str = "lMin",
    conservative: bool = False,
) -> ThetaResult:
    """
    Best r-concavity threshold theta* for one row, dispatching on
    (|mu|, sign b, r). ``conservative`` selects the simpler, larger bound
    (3 + r) |mu|^2 / lambda_min for b < 0, r >= -1.
    """
    _check_mode(lambda_mode)
    if r is None:
        r = row.r
    b = row.d

    def result(case_id, theta, is_best, lam=None, rc=None, rs=None):
        exists = theta is not None
        return ThetaResult(
            exists=exists,
            theta=float(theta) if exists else None,
            sqrt_theta=float(numpy.sqrt(theta)) if exists else None,
            case_id=case_id,
            is_best=is_best and exists,
            lambda_mu_min=lam,
            r_circle=rc,
            r_star=rs,
            lambda_mode=lambda_mode,
        )

    if row.mu_norm == 0:
        return result(1, 0.0 if r < -1 else None, True)

    lam = lambda_mu_min(row.mu, row.sigma, lambda_mode)
    rc, rs = tangency_constants(row.mu, row.sigma, lambda_mode)
    M = row.mahalanobis
    norm2 = row.mu_norm ** 2
    lmin = row.sigma.eig.lmin
    ctx = dict(lam=lam, rc=rc, rs=rs)

    if r == 0:
        if b == 0:
            return result(9, M, True, **ctx)
        elif b < 0:
            return result(10, M + 2 * norm2 / lmin, False, **ctx)
        return result(11, None, False, **ctx)

    if b == 0:
        return result(2, M, True, **ctx)

    if b < 0:
        if r <= -2:
            return result(3, (M - (2 + r) * norm2 / lmin) / (-1 - r), False, **ctx)
        elif r < -1:
            return result(4, M / (-1 - r), False, **ctx)
        if conservative:
            return result(5, (3 + r) * norm2 / lmin, False, **ctx)
        return result(5, M + (2 + r) * norm2 / lmin, False, **ctx)

    if r >= -1:
        return result(6, None, False, **ctx)

    if row.sigma.is_isotropic:
        lam0 = float(row.sigma.entries[0, 0])
        return result(8, isotropic_sqrt_theta(row.mu_norm, lam0, r) ** 2, True, **ctx)

    s = item7_sqrt_theta(norm2, M, lam, r, rc, rs)
    # with lambda_min in place of lambda_mu_min the bound is valid but not sharp
    return result(7, s * s, lambda_mode != "lMin", **ctx)


def _s_bound(mu, sigma: SpdMatrix, lambda_mode: str) -> float:
    return 1.0 / numpy.sqrt(lambda_mu_min(mu, sigma, lambda_mode))


def h_quadratic(mu_norm: float, b: float, r: float) -> Callable:
    """The r-concavity condition mapped onto (t_bar, s_bar)."""

    def h(t, s):
        return mu_norm ** 2 * s ** 2 + 2 * b * mu_norm * t * s + (-1 - r) * b ** 2 * t ** 2

    return h


def h_gaussian(mu_norm: float, b: float) -> Callable:
    """Concavity condition of Phi(g) mapped onto (t_bar, s_bar)."""

    def h(t, s):
        g = b * t - mu_norm * s
        return mu_norm ** 2 * s ** 2 + 2 * b * mu_norm * t * s - 2 * b ** 2 * t ** 2 + b ** 2 * t ** 2 * g ** 2

    return h


def _sup_g_violation(
    h: Callable,
    target: float,
    mu_norm: float,
    b: float,
    s_bound: float,
    resolution: int = GRID_RESOLUTION,
) -> float:
    """
    sup of g = b t - |mu| s over {(t, s) : h(t, s) < target} within
    (0, inf) x [-s_bound, s_bound], for b > 0 and a bounded violation region.
    """
    s = numpy.linspace(-s_bound, s_bound, resolution)
    t_max = max(4.0 * (mu_norm * s_bound + numpy.sqrt(max(target, 0.0)) + 1.0) / b, 1.0)

    for _ in range(64):
        t = numpy.linspace(t_max / resolution, t_max, resolution)
        T, S = numpy.meshgrid(t, s)
        violated = h(T, S) < target
        if not numpy.any(violated[:, -1]):
            break
        t_max *= 2
    else:
        raise DomainError("Violation region is unbounded")

    best = -numpy.inf
    for i in range(resolution):
        idx = numpy.flatnonzero(violated[i])
        if len(idx) == 0:
            continue
        j = idx[-1]
        lo, hi = t[j], t[j + 1]
        si = s[i]
        while hi - lo > BISECT_TOL * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if h(mid, si) < target:
                lo = mid
            else:
                hi = mid
        best = max(best, b * lo - mu_norm * si)
    return best


def numeric_sqrt_theta(row: RowModel, r: float, lambda_mode: str = "lMin") -> float:
    """
    sqrt(theta*) = inf{c0 >= 0 : G(c0) in Q} evaluated on a (t_bar, s_bar) grid.
    Only defined for b > 0 and r < -1.
    """
    if not (row.d > 0 and r < -1 and row.mu_norm > 0):
        raise DomainError("Numeric threshold requires b > 0, r < -1 and mu != 0")
    sup = _sup_g_violation(
        h_quadratic(row.mu_norm, row.d, r),
        row.mahalanobis,
        row.mu_norm,
        row.d,
        _s_bound(row.mu, row.sigma, lambda_mode),
    )
    return float(max(sup, 0.0))


@dataclass
class RegionTable:
    r: float
    c0: float
    t: numpy.ndarray
    s: numpy.ndarray
    in_q: numpy.ndarray
    in_g: numpy.ndarray

    @property
    def contained(self) -> bool:
        """G(c0) inside Q on every grid cell"""
        return bool(numpy.all(self.in_q[self.in_g]))

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "c0": self.c0,
            "contained": self.contained,
            "t": self.t.tolist(),
            "s": self.s.tolist(),
            "in_q": self.in_q.astype(int).tolist(),
            "in_g": self.in_g.astype(int).tolist(),
        }


def region_table(
    row: RowModel,
    r: float,
    c0: float,
    lambda_mode: str = "lMin",
    resolution: int = 64,
    t_max: Optional[float] = None,
) -> RegionTable:
    """Membership of a (t_bar, s_bar) grid in Q and in G(c0)."""
    if row.mu_norm == 0 or row.d == 0:
        raise DomainError("Region tables require mu != 0 and b != 0")
    s_bound = _s_bound(row.mu, row.sigma, lambda_mode)
    if t_max is None:
        t_max = 4.0 * (abs(c0) + row.mu_norm * s_bound) / abs(row.d)
    t = numpy.linspace(t_max / resolution, t_max, resolution)
    s = numpy.linspace(-s_bound, s_bound, resolution)
    T, S = numpy.meshgrid(t, s)
    h = h_quadratic(row.mu_norm, row.d, r)
    in_q = h(T, S) >= row.mahalanobis
    in_g = row.d * T - row.mu_norm * S >= c0
    return RegionTable(r=r, c0=c0, t=t, s=s, in_q=in_q, in_g=in_g)


@dataclass
class GaussianBestP:
    exists: bool
    pstar: Optional[float]
    theta: Optional[float]
    best: bool

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianBestP":
        return cls(**d)


def gaussian_best_p(row: RowModel, lambda_mode: str = "closedForm") -> GaussianBestP:
    """
    Best probability threshold F(sqrt(theta*)) for a Gaussian row. ``exists``
    is False when no threshold exists (b < 0); ``best`` marks the b = 0 closed form.
    """
    if row.marginal.family != "gaussian":
        raise WrongMarginal(f"Expected a Gaussian row, got {row.marginal.family}")
    b = row.d
    if b < 0:
        return GaussianBestP(exists=False, pstar=None, theta=None, best=False)
    M = row.mahalanobis
    if b == 0:
        return GaussianBestP(
            exists=True, pstar=cdf(row.marginal, float(numpy.sqrt(M))), theta=float(M), best=True
        )

    if row.mu_norm == 0:
        # h = b^4 t^4 - 2 b^2 t^2 < 0 exactly when g = b t < sqrt(2)
        sup = float(numpy.sqrt(2.0))
    else:
        sup = _sup_g_violation(
            h_gaussian(row.mu_norm, b),
            M,
            row.mu_norm,
            b,
            _s_bound(row.mu, row.sigma, lambda_mode),
        )
    sup = float(max(sup, 0.0))
    return GaussianBestP(exists=True, pstar=cdf(row.marginal, sup), theta=sup ** 2, best=False)


def _tstar_term(row: RowModel, eps0: float) -> float:
    alpha = revealed_alpha(row.r, eps0)
    if row.marginal.family == "gh1":
        cert = certify_alpha_decreasing(row.marginal, alpha)
        if not cert.admissible:
            raise NotDecreasing(
                f"{row.marginal} is not {alpha}-decreasing ({cert.branch})"
            )
        return cert.tstar
    return t_star_alpha(row.marginal, alpha)


def assemble_pstar(
    rows: Sequence[RowModel],
    lambda_mode: str = "lMin",
    eps0: float = DEFAULT_EPS0,
    thetas: Optional[Sequence[ThetaResult]] = None,
) -> PStarResult:
    """
    p* = max(1/2, max_i F_i(sqrt(theta*_i)), max_i F_i(t*_i(-r_i + 1))).
    Rows with r = 0 use the thresholds of r = -eps0.
    """
    contributions = []
    pstar = 0.5
    binding = {"row": None, "term": "half"}

    for i, row in enumerate(rows):
        r = row.r if row.r != 0 else -eps0
        theta = thetas[i] if thetas is not None else best_theta(row, r, lambda_mode)
        if not theta.exists:
            raise MissingTheta(
                f"no threshold (Theorem item {theta.case_id}) for row {i}", row=i
            )
        theta_term = cdf(row.marginal, theta.sqrt_theta)
        tstar_term = cdf(row.marginal, _tstar_term(row, eps0))
        contributions.append((theta_term, tstar_term))

        for term, value in (("theta", theta_term), ("tstar", tstar_term)):
            if value > pstar:
                pstar = value
                binding = {"row": i, "term": term}

    return PStarResult(pstar=float(pstar), contributions=contributions, binding=binding)
