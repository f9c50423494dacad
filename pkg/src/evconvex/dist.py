import functools
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy
import scipy.integrate
import scipy.optimize
import scipy.special
import scipy.stats

from evconvex.console import warn
from evconvex.errors import DomainError, ParamError
from evconvex.linalg import SpdMatrix, quad_form
from evconvex import specfun

QUAD_EPSABS = 1e-10
TAIL_RTOL = 1e-16
NORMALIZATION_TOL = 1e-6

FAMILIES = ("gaussian", "student", "gh1", "gig")


def _check_gig_params(lam: float, chi: float, psi: float):
    values = (lam, chi, psi)
    if not all(numpy.isfinite(v) for v in values):
        raise ParamError(f"Parameters must be finite, got {values}")
    if lam < 0:
        ok = chi > 0 and psi >= 0
    elif lam == 0:
        ok = chi > 0 and psi > 0
    else:
        ok = chi >= 0 and psi > 0
    if not ok:
        raise ParamError(
            f"Inadmissible parameters lambda={lam}, chi={chi}, psi={psi}"
        )


@dataclass(frozen=True)
class Marginal1D:
    """
    Tagged one-dimensional distribution.

    ``gh1`` is the univariate generalized hyperbolic law with location 0,
    scale 1 and skewness ``phi``. ``gig`` is the generalized inverse Gaussian
    law on the positive half-line.
    """

    family: str
    nu: Optional[float] = None
    lam: Optional[float] = None
    chi: Optional[float] = None
    psi: Optional[float] = None
    phi: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParamError(f"Unknown family {self.family}")
        if self.family == "student":
            if self.nu is None or not self.nu > 0:
                raise ParamError(f"Student requires nu > 0, got {self.nu}")
        elif self.family in ("gh1", "gig"):
            if None in (self.lam, self.chi, self.psi):
                raise ParamError(f"{self.family} requires lambda, chi and psi")
            _check_gig_params(self.lam, self.chi, self.psi)
            if not numpy.isfinite(self.phi):
                raise ParamError(f"Skewness must be finite, got {self.phi}")

    @classmethod
    def gaussian(cls) -> "Marginal1D":
        return cls("gaussian")

    @classmethod
    def student(cls, nu: float) -> "Marginal1D":
        return cls("student", nu=nu)

    @classmethod
    def gh1(cls, lam: float, chi: float, psi: float, phi: float = 0.0) -> "Marginal1D":
        return cls("gh1", lam=lam, chi=chi, psi=psi, phi=phi)

    @classmethod
    def gig(cls, lam: float, chi: float, psi: float) -> "Marginal1D":
        return cls("gig", lam=lam, chi=chi, psi=psi)

    @property
    def big_lambda(self) -> float:
        return float(numpy.sqrt(self.psi + self.phi ** 2))

    @property
    def is_symmetric(self) -> bool:
        return self.family in ("gaussian", "student") or (
            self.family == "gh1" and self.phi == 0
        )

    def to_dict(self) -> dict:
        d = {"family": self.family}
        if self.family == "student":
            d["nu"] = self.nu
        elif self.family in ("gh1", "gig"):
            d.update({"lambda": self.lam, "chi": self.chi, "psi": self.psi})
            if self.family == "gh1":
                d["phi"] = self.phi
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Marginal1D":
        d = dict(d)
        family = d.pop("family")
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        return cls(family, **d)


# special cases of the generalized hyperbolic family


def gh_student(nu: float) -> Marginal1D:
    return Marginal1D.gh1(-nu / 2, nu, 0.0)


def gh_nig(chi: float, psi: float, phi: float = 0.0) -> Marginal1D:
    return Marginal1D.gh1(-0.5, chi, psi, phi)


def gh_hyperbolic(chi: float, psi: float, phi: float = 0.0) -> Marginal1D:
    return Marginal1D.gh1(1.0, chi, psi, phi)


def gh_variance_gamma(lam: float, psi: float, phi: float = 0.0) -> Marginal1D:
    return Marginal1D.gh1(lam, 0.0, psi, phi)


def _gig_log_norm(lam: float, chi: float, psi: float) -> float:
    """
    Log of the mixing constant a(lam, chi, psi) with GIG density
    a / 2 * w^(lam-1) exp(-(chi/w + psi w)/2).
    """
    if chi > 0 and psi > 0:
        s = numpy.sqrt(chi * psi)
        return lam / 2 * numpy.log(psi / chi) - specfun.log_bessel_k(lam, s)
    elif psi == 0:
        # inverse gamma limit, lam < 0
        return (
            -lam * numpy.log(chi)
            + (lam + 1) * numpy.log(2)
            - scipy.special.gammaln(-lam)
        )
    else:
        # gamma limit, lam > 0
        return (
            lam * numpy.log(psi)
            + (1 - lam) * numpy.log(2)
            - scipy.special.gammaln(lam)
        )


def _gh1_log_const(m: Marginal1D) -> float:
    return float(_gig_log_norm(m.lam, m.chi, m.psi) - 0.5 * numpy.log(2 * numpy.pi))


def _gh1_log_density(m: Marginal1D, t: float) -> float:
    lam, chi = m.lam, m.chi
    L = m.big_lambda
    eta2 = chi + t * t
    if L == 0:
        # psi = 0 and phi = 0: closed form chat * (chi + t^2)^(lam - 1/2)
        log_chat = (
            scipy.special.gammaln(0.5 - lam)
            - scipy.special.gammaln(-lam)
            - 0.5 * numpy.log(numpy.pi)
            - lam * numpy.log(chi)
        )
        return float(log_chat + (lam - 0.5) * numpy.log(eta2))

    nu = lam - 0.5
    if eta2 == 0:
        # chi = 0 at t = 0
        if nu <= 0:
            return numpy.inf
        log_core = (
            numpy.log(0.5) + scipy.special.gammaln(nu) + nu * numpy.log(2 / L)
        ) + (0.5 - lam) * numpy.log(L)
        return float(_gh1_log_const(m) + log_core)

    eta = numpy.sqrt(eta2)
    z = L * eta
    return float(
        _gh1_log_const(m)
        + (0.5 - lam) * numpy.log(L)
        + nu * numpy.log(eta)
        + specfun.log_bessel_k(nu, z)
        + t * m.phi
    )


def _gig_log_density(m: Marginal1D, w: float) -> float:
    if w <= 0:
        return -numpy.inf
    return float(
        _gig_log_norm(m.lam, m.chi, m.psi)
        - numpy.log(2)
        + (m.lam - 1) * numpy.log(w)
        - 0.5 * (m.chi / w + m.psi * w)
    )


def log_density(m: Marginal1D, t: float) -> float:
    if m.family == "gaussian":
        return float(-0.5 * t * t - 0.5 * numpy.log(2 * numpy.pi))
    elif m.family == "student":
        return float(numpy.log(specfun.student_pdf(m.nu, t)))
    elif m.family == "gh1":
        return _gh1_log_density(m, t)
    else:
        return _gig_log_density(m, t)


def density(m: Marginal1D, t: float) -> float:
    if m.family == "gaussian":
        return specfun.gaussian_pdf(t)
    elif m.family == "student":
        return specfun.student_pdf(m.nu, t)
    return float(numpy.exp(log_density(m, t)))


def log_density_derivative(m: Marginal1D, t: float) -> float:
    """d/dt log f(t), analytic for every family. ``t`` must be nonzero for gh1 with chi = 0."""
    if m.family == "gaussian":
        return -t
    elif m.family == "student":
        return -(m.nu + 1) * t / (m.nu + t * t)
    elif m.family == "gig":
        if t <= 0:
            raise DomainError(f"GIG support is t > 0, got {t}")
        return (m.lam - 1) / t + m.chi / (2 * t * t) - m.psi / 2

    lam = m.lam
    L = m.big_lambda
    eta2 = m.chi + t * t
    if L == 0:
        return (2 * lam - 1) * t / eta2
    eta = numpy.sqrt(eta2)
    # K'_nu(z) = nu/z K_nu(z) - K_{nu+1}(z) with nu = lam - 1/2
    J = specfun.bessel_k_ratio(lam, L * eta)
    return float((2 * lam - 1) * t / eta2 - L * t / (eta * J) + m.phi)


def support(m: Marginal1D) -> Tuple[float, float]:
    if m.family == "gig":
        return 0.0, numpy.inf
    return -numpy.inf, numpy.inf


@functools.lru_cache(maxsize=256)
def tail_bounds(m: Marginal1D) -> Tuple[float, float]:
    """
    Interval outside of which the density is below ``1e-16`` of its value
    at the reference point (0 for real-line families, the mode for gig).
    """
    if m.family == "gaussian":
        return -specfun.GAUSSIAN_CLAMP, specfun.GAUSSIAN_CLAMP

    if m.family == "gig":
        ref = gig_mode(m)
        peak = density(m, ref)
        lo = ref
        while lo > 1e-300 and density(m, lo) > TAIL_RTOL * peak:
            lo /= 2
        hi = ref
        while hi < 1e300 and density(m, hi) > TAIL_RTOL * peak:
            hi *= 2
        return lo, hi

    peak = density(m, 0.0) if numpy.isfinite(log_density(m, 0.0)) else density(m, 1.0)
    bounds = []
    for sign in (-1, 1):
        T = 1.0
        while T < 1e300 and density(m, sign * T) > TAIL_RTOL * peak:
            T *= 2
        bounds.append(sign * T)
    return bounds[0], bounds[1]


def gig_mode(m: Marginal1D) -> float:
    lam, chi, psi = m.lam, m.chi, m.psi
    if psi == 0:
        return chi / (2 * (1 - lam))
    mode = ((lam - 1) + numpy.sqrt((lam - 1) ** 2 + chi * psi)) / psi
    if mode <= 0:
        # gamma limit with shape <= 1 peaks at the origin, use the mean instead
        return 2 * lam / psi
    return float(mode)


def _quad(f, a: float, b: float) -> float:
    value, _ = scipy.integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=1e-10, limit=200)
    return value


def cdf(m: Marginal1D, t: float) -> float:
    if m.family == "gaussian":
        return specfun.gaussian_cdf(t)
    elif m.family == "student":
        return specfun.student_cdf(m.nu, t)

    lo, hi = tail_bounds(m)
    if t <= lo:
        return 0.0
    if t >= hi:
        return 1.0

    f = functools.partial(density, m)
    if m.family == "gig":
        mode = gig_mode(m)
        if t <= mode:
            return float(min(max(_quad(f, lo, t), 0.0), 1.0))
        return float(min(max(1.0 - _quad(f, t, hi), 0.0), 1.0))

    if t <= 0:
        value = _quad(f, -numpy.inf, t)
    else:
        value = 1.0 - _quad(f, t, numpy.inf)
    return float(min(max(value, 0.0), 1.0))


def quantile(m: Marginal1D, p: float) -> float:
    if not 0 < p < 1:
        raise DomainError(f"Probability must be in (0, 1), got {p}")
    if m.family == "gaussian":
        return float(scipy.special.ndtri(p))
    elif m.family == "student":
        return float(scipy.special.stdtrit(m.nu, p))

    lo, hi = tail_bounds(m)
    return float(
        scipy.optimize.brentq(lambda t: cdf(m, t) - p, lo, hi, xtol=1e-12, rtol=1e-14)
    )


def normalization(m: Marginal1D) -> float:
    lo, hi = support(m)
    f = functools.partial(density, m)
    if m.family == "gig":
        mode = gig_mode(m)
        return _quad(f, 0, mode) + _quad(f, mode, numpy.inf)
    return _quad(f, -numpy.inf, 0) + _quad(f, 0, numpy.inf)


def check_normalization(m: Marginal1D, tol: float = NORMALIZATION_TOL) -> float:
    """
    Integrate the density numerically and warn when the closed-form constant
    disagrees with the numerical one by more than ``tol``.
    """
    total = normalization(m)
    if abs(total - 1.0) > tol:
        warn(
            f"Normalization of {m} differs from one by {abs(total - 1.0):.3g}; "
            "density constant may be inaccurate"
        )
    return total


def project_gh(
    lam: float, chi: float, psi: float, gamma, sigma: SpdMatrix, x
) -> Marginal1D:
    """
    Law of (v'x - mu'x) / sqrt(x' Sigma x) for v ~ GH(lam, chi, psi, mu, Sigma, gamma).
    """
    x = numpy.asarray(x, dtype=float)
    gamma = numpy.asarray(gamma, dtype=float)
    q = quad_form(sigma, x)
    if q <= 0:
        raise DomainError("Projection direction must be nonzero")
    return Marginal1D.gh1(lam, chi, psi, float(gamma @ x / numpy.sqrt(q)))


def gig_sample(m: Marginal1D, n: int, seed: int) -> numpy.ndarray:
    if m.family != "gig":
        raise ParamError(f"Expected a gig mixing law, got {m.family}")
    if n < 1:
        raise ParamError(f"Sample size must be positive, got {n}")
    rng = numpy.random.default_rng(seed)
    return _gig_draw(m, n, rng)


def _gig_draw(m: Marginal1D, n: int, rng: numpy.random.Generator) -> numpy.ndarray:
    lam, chi, psi = m.lam, m.chi, m.psi
    if psi == 0:
        # inverse gamma with shape -lam and scale chi/2
        return 1.0 / rng.gamma(-lam, scale=2.0 / chi, size=n)
    if chi == 0:
        return rng.gamma(lam, scale=2.0 / psi, size=n)
    b = numpy.sqrt(chi * psi)
    draws = scipy.stats.geninvgauss.rvs(lam, b, size=n, random_state=rng)
    return numpy.sqrt(chi / psi) * draws


@dataclass(frozen=True)
class DiscreteMixing:
    """
    Bounded discrete mixing law: atoms ``omega`` with probabilities
    ``weights`` and optional tabulated means ``m_values`` (one row per atom).
    """

    omega: Tuple[float, ...]
    weights: Tuple[float, ...]
    m_values: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        omega = numpy.asarray(self.omega, dtype=float)
        weights = numpy.asarray(self.weights, dtype=float)
        if omega.shape != weights.shape or omega.ndim != 1 or len(omega) == 0:
            raise ParamError("omega and weights must be equal-length sequences")
        if numpy.any(omega <= 0):
            raise ParamError("Mixing atoms must be strictly positive")
        if numpy.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ParamError(f"Weights must be nonnegative and sum to one, got {weights.sum()}")
        if self.m_values is not None and len(self.m_values) != len(omega):
            raise ParamError("One tabulated mean per mixing atom is required")

    @classmethod
    def point_mass(cls, omega: float = 1.0) -> "DiscreteMixing":
        return cls((omega,), (1.0,))


@dataclass(frozen=True)
class NmvmModel:
    mu: numpy.ndarray
    gamma: numpy.ndarray
    sigma: SpdMatrix
    mixing: Union[Marginal1D, DiscreteMixing] = field(default_factory=DiscreteMixing.point_mass)

    def __post_init__(self):
        mu = numpy.asarray(self.mu, dtype=float)
        gamma = numpy.asarray(self.gamma, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "gamma", gamma)
        if mu.shape != (self.sigma.dim,) or gamma.shape != (self.sigma.dim,):
            raise ParamError("mu, gamma and Sigma dimensions do not match")
        if isinstance(self.mixing, Marginal1D) and self.mixing.family != "gig":
            raise ParamError("Continuous mixing must be a gig law")
        if isinstance(self.mixing, DiscreteMixing) and self.mixing.m_values is not None:
            if numpy.asarray(self.mixing.m_values).shape[1:] != mu.shape:
                raise ParamError("Tabulated means do not match the dimension")

    @classmethod
    def gh(cls, lam: float, chi: float, psi: float, mu, gamma, sigma: SpdMatrix) -> "NmvmModel":
        return cls(mu, gamma, sigma, Marginal1D.gig(lam, chi, psi))


def nmvm_sample(model: NmvmModel, n: int, seed: int) -> numpy.ndarray:
    """Draws of m(W) + sqrt(W) A Z, one per row."""
    if n < 1:
        raise ParamError(f"Sample size must be positive, got {n}")
    rng = numpy.random.default_rng(seed)
    dim = model.sigma.dim

    if isinstance(model.mixing, Marginal1D):
        w = _gig_draw(model.mixing, n, rng)
        means = model.mu[None, :] + w[:, None] * model.gamma[None, :]
    else:
        mix = model.mixing
        idx = rng.choice(len(mix.omega), size=n, p=numpy.asarray(mix.weights))
        w = numpy.asarray(mix.omega)[idx]
        if mix.m_values is not None:
            means = numpy.asarray(mix.m_values, dtype=float)[idx]
        else:
            means = model.mu[None, :] + w[:, None] * model.gamma[None, :]

    z = rng.standard_normal((n, dim))
    return means + numpy.sqrt(w)[:, None] * (z @ model.sigma.chol.T)
