from dataclasses import dataclass

import numpy
import scipy.special

from evconvex.errors import DomainError

GAUSSIAN_CLAMP = 40.0
# beyond this argument K_nu(x) underflows double precision
UNDERFLOW_X = 700.0
EULER_GAMMA = numpy.euler_gamma


@dataclass(frozen=True)
class BesselEval:
    order: float
    argument: float
    value: float
    method: str  # "direct" or "scaled"


def log_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return float(scipy.special.gammaln(x))


def gaussian_cdf(t: float) -> float:
    if numpy.isnan(t):
        raise DomainError("t is NaN")
    t = min(max(t, -GAUSSIAN_CLAMP), GAUSSIAN_CLAMP)
    return float(scipy.special.ndtr(t))


def gaussian_pdf(t: float) -> float:
    return float(numpy.exp(-0.5 * t * t) / numpy.sqrt(2 * numpy.pi))


def student_cdf(nu: float, t: float) -> float:
    if not nu > 0:
        raise DomainError(f"Student degrees of freedom must be positive, got {nu}")
    return float(scipy.special.stdtr(nu, t))


def student_pdf(nu: float, t: float) -> float:
    if not nu > 0:
        raise DomainError(f"Student degrees of freedom must be positive, got {nu}")
    logc = (
        scipy.special.gammaln((nu + 1) / 2)
        - scipy.special.gammaln(nu / 2)
        - 0.5 * numpy.log(nu * numpy.pi)
    )
    return float(numpy.exp(logc - (nu + 1) / 2 * numpy.log1p(t * t / nu)))


def bessel_k_eval(nu: float, x: float) -> BesselEval:
    if not x > 0:
        raise DomainError(f"Bessel K requires x > 0, got {x}")
    if not numpy.isfinite(nu):
        raise DomainError(f"Bessel order must be finite, got {nu}")
    if x > UNDERFLOW_X:
        return BesselEval(nu, x, float(scipy.special.kve(nu, x)), "scaled")
    return BesselEval(nu, x, float(scipy.special.kv(nu, x)), "direct")


def bessel_k(nu: float, x: float) -> float:
    """
    Modified Bessel function of the third kind :math:`K_\\nu(x)`.
    Returns 0.0 once the value underflows; use :func:`bessel_k_scaled` there.
    """
    ev = bessel_k_eval(nu, x)
    if ev.method == "scaled":
        return 0.0
    return ev.value


def bessel_k_scaled(nu: float, x: float) -> float:
    """:math:`e^x K_\\nu(x)`"""
    if not x > 0:
        raise DomainError(f"Bessel K requires x > 0, got {x}")
    return float(scipy.special.kve(nu, x))


def log_bessel_k(nu: float, x: float) -> float:
    return float(numpy.log(bessel_k_scaled(nu, x)) - x)


def bessel_k_ratio(lam: float, s: float) -> float:
    """
    ``J = K_{lam-1/2}(s) / K_{lam+1/2}(s)``. Exactly one for ``lam = 0``.
    """
    if not s > 0:
        raise DomainError(f"Bessel ratio requires s > 0, got {s}")
    if lam == 0:
        return 1.0
    return float(scipy.special.kve(lam - 0.5, s) / scipy.special.kve(lam + 0.5, s))


def bessel_k_small(nu: float, x: float) -> float:
    """Leading small-argument behaviour of K_nu."""
    if not x > 0:
        raise DomainError(f"Bessel K requires x > 0, got {x}")
    if nu == 0:
        return float(-numpy.log(x) + numpy.log(2) - EULER_GAMMA)
    a = abs(nu)
    return float(0.5 * scipy.special.gamma(a) * (2 / x) ** a)


def bessel_k_large(nu: float, x: float) -> float:
    """Large-argument approximation of K_nu."""
    if not x > 0:
        raise DomainError(f"Bessel K requires x > 0, got {x}")
    return float(
        numpy.sqrt(numpy.pi / (2 * x))
        * numpy.exp(-x)
        * (1 + 1 / x) ** (nu * nu / 2 - 1 / 8)
    )
