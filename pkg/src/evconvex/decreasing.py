from dataclasses import dataclass, asdict
from typing import Optional, Tuple

import numpy
import scipy.optimize

from evconvex.dist import Marginal1D, log_density_derivative
from evconvex.errors import DomainError, NotDecreasing, ParamError

SCAN_START = 1e-6
SCAN_STOP = 1e6
POINTS_PER_DECADE = 512
BISECT_XTOL = 1e-9
DEFAULT_EPS0 = 0.1

BRANCHES = ("psiPositive", "psiZeroPhiNeg", "psiZeroPhiPos", "psiZeroPhiZero")


@dataclass
class DecreasingCert:
    alpha: float
    admissible: bool
    tstar: Optional[float]
    branch: str

    def to_dict(self) -> dict:
        return asdict(self)


def _scan_grid() -> numpy.ndarray:
    decades = numpy.log10(SCAN_STOP) - numpy.log10(SCAN_START)
    return numpy.logspace(
        numpy.log10(SCAN_START),
        numpy.log10(SCAN_STOP),
        int(round(decades * POINTS_PER_DECADE)) + 1,
    )


def decrease_indicator(m: Marginal1D, alpha: float, t: float) -> float:
    """
    Sign of d/dt [t^alpha f(t)] for t > 0, up to the positive factor
    t^(alpha-1) f(t).
    """
    return alpha + t * log_density_derivative(m, t)


def t_star_alpha(m: Marginal1D, alpha: float) -> float:
    """
    Smallest scanned ``t0`` such that ``t^alpha f(t)`` is strictly decreasing
    for every sampled ``t > t0``.
    """
    grid = _scan_grid()
    h = numpy.array([decrease_indicator(m, alpha, t) for t in grid])
    if not numpy.all(numpy.isfinite(h)):
        raise NotDecreasing(f"Non-finite derivative while scanning {m}")

    nonneg = numpy.flatnonzero(h >= 0)
    if len(nonneg) == 0:
        return float(grid[0])
    last = nonneg[-1]
    if last == len(grid) - 1:
        raise NotDecreasing(
            f"t^{alpha} f(t) is not decreasing up to t = {SCAN_STOP:g} for {m}"
        )

    a, b = grid[last], grid[last + 1]
    if h[last] == 0:
        return float(a)
    return float(
        scipy.optimize.brentq(
            lambda t: decrease_indicator(m, alpha, t), a, b, xtol=BISECT_XTOL
        )
    )


def certify_alpha_decreasing(g: Marginal1D, alpha: float) -> DecreasingCert:
    if g.family != "gh1":
        raise ParamError(f"Expected a gh1 marginal, got {g.family}")

    if g.psi > 0:
        branch, admissible = "psiPositive", True
    elif g.phi < 0:
        branch, admissible = "psiZeroPhiNeg", True
    elif g.phi > 0:
        branch, admissible = "psiZeroPhiPos", alpha < 1 - g.lam
    else:
        branch, admissible = "psiZeroPhiZero", g.lam < 0 and alpha < 1 - 2 * g.lam

    tstar = t_star_alpha(g, alpha) if admissible else None
    return DecreasingCert(alpha=alpha, admissible=admissible, tstar=tstar, branch=branch)


def t_double_star(r: float, tstar: float) -> float:
    if r == 0:
        raise DomainError("r = 0 has no revealed-concavity threshold, use -eps0")
    if not tstar > 0:
        raise DomainError(f"t* must be positive, got {tstar}")
    return float(tstar ** r)


def concavity_interval(r: float, tstar: float) -> Tuple[float, float]:
    """Interval on which z -> F(z^(1/r)) is concave."""
    tss = t_double_star(r, tstar)
    if r < 0:
        return 0.0, tss
    return tss, numpy.inf


def revealed_alpha(r: float, eps0: float = DEFAULT_EPS0) -> float:
    """Decrease order -r + 1, with r = 0 replaced by -eps0."""
    if r == 0:
        if not 0 < eps0 < 1:
            raise DomainError(f"eps0 must lie in (0, 1), got {eps0}")
        r = -eps0
    return -r + 1
