from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy
import scipy.interpolate

from evconvex.console import warn
from evconvex.domain import Domain
from evconvex.errors import (
    AssumptionViolated,
    DimError,
    DomainError,
    InfeasibleBuild,
    ParamError,
)

KAPPA_KINDS = ("builtSeparable", "userGrid")
P_MIN = float(numpy.exp(-1))
PSD_RTOL = 1e-10
FD_STEP = 1e-5


class Generator(NamedTuple):
    psi: Callable[[float, float], float]
    inverse: Callable[[float, float], float]
    admissible: Callable[[float], bool]


# Archimedean generators keyed by family; only gumbel is used by the pipeline
GENERATORS: Dict[str, Generator] = {
    "clayton": Generator(
        lambda theta, t: (t ** -theta - 1) / theta,
        lambda theta, s: (1 + theta * s) ** (-1 / theta),
        lambda theta: theta > 0,
    ),
    "frank": Generator(
        lambda theta, t: -numpy.log(numpy.expm1(-theta * t) / numpy.expm1(-theta)),
        lambda theta, s: -numpy.log1p(numpy.exp(-s) * numpy.expm1(-theta)) / theta,
        lambda theta: theta != 0,
    ),
    "joe": Generator(
        lambda theta, t: -numpy.log1p(-((1 - t) ** theta)),
        lambda theta, s: 1 - (-numpy.expm1(-s)) ** (1 / theta),
        lambda theta: theta >= 1,
    ),
    "independent": Generator(
        lambda theta, t: -numpy.log(t),
        lambda theta, s: numpy.exp(-s),
        lambda theta: True,
    ),
    "gumbel": Generator(
        lambda theta, t: (-numpy.log(t)) ** theta,
        lambda theta, s: numpy.exp(-(s ** (1 / theta))),
        lambda theta: theta >= 1,
    ),
}


def _check_kappa(kappa: float):
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa must lie in (0, 1], got {kappa}")


def psi(kappa: float, t: float) -> float:
    """Gumbel-Hougaard generator (-ln t)^(1/kappa)."""
    _check_kappa(kappa)
    if not 0 < t <= 1:
        raise DomainError(f"Generator argument must lie in (0, 1], got {t}")
    return float((-numpy.log(t)) ** (1 / kappa))


def psi_inv(kappa: float, s: float) -> float:
    _check_kappa(kappa)
    if not s >= 0:
        raise DomainError(f"Inverse generator needs s >= 0, got {s}")
    return float(numpy.exp(-(s ** kappa)))


def copula_value(kappa: float, u: Sequence[float]) -> float:
    _check_kappa(kappa)
    u = numpy.asarray(u, dtype=float)
    if u.ndim != 1 or len(u) == 0:
        raise DomainError("Copula arguments must be a nonempty vector")
    if numpy.any(~(u > 0)) or numpy.any(u > 1):
        raise DomainError(f"Copula arguments must lie in (0, 1], got {u.tolist()}")
    s = numpy.sum((-numpy.log(u)) ** (1 / kappa))
    return float(numpy.exp(-(s ** kappa)))


def _separable_f(d: float, c1: float, c2: float):
    """f, f' and f'' of the separable kappa construction."""
    if d >= 1:

        def f(x):
            return 1 / (c2 + c1 * x)

        def df(x):
            return -c1 / (c2 + c1 * x) ** 2

        def d2f(x):
            return 2 * c1 ** 2 / (c2 + c1 * x) ** 3

    else:
        a = 2 / d - 1
        e = d / (d - 2)

        def f(x):
            return (a * (c2 + c1 * x)) ** e

        def df(x):
            return e * a * c1 * (a * (c2 + c1 * x)) ** (e - 1)

        def d2f(x):
            return e * (e - 1) * (a * c1) ** 2 * (a * (c2 + c1 * x)) ** (e - 2)

    return f, df, d2f


@dataclass(frozen=True)
class KappaModel:
    """
    Decision-dependent Gumbel-Hougaard parameter kappa(x) on a domain.

    ``builtSeparable`` is kappa(x) = sum_i f(x_i); ``userGrid`` interpolates
    tabulated values on a regular grid (cubic) and differentiates numerically.
    """

    kind: str
    domain: Domain
    d: Optional[float] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    axes: Optional[Tuple[Tuple[float, ...], ...]] = None
    values: Optional[numpy.ndarray] = None

    def __post_init__(self):
        if self.kind not in KAPPA_KINDS:
            raise ParamError(f"Unknown kappa kind {self.kind}")
        if self.kind == "builtSeparable":
            if self.d is None or not self.d > 0:
                raise ParamError(f"d must be positive, got {self.d}")
            if self.c1 is None or self.c2 is None:
                raise ParamError("Separable kappa needs c1 and c2")
        else:
            if self.axes is None or self.values is None:
                raise ParamError("Grid kappa needs axes and values")
            values = numpy.asarray(self.values, dtype=float)
            if values.shape != tuple(len(a) for a in self.axes):
                raise DimError(f"Grid values of shape {values.shape} do not match the axes")
            if len(self.axes) != self.domain.dim:
                raise DimError("Grid dimension does not match the domain")
            values.setflags(write=False)
            object.__setattr__(self, "values", values)
            object.__setattr__(self, "axes", tuple(tuple(float(v) for v in a) for a in self.axes))

    @property
    def dim(self) -> int:
        return self.domain.dim

    @cached_property
    def _f(self):
        return _separable_f(self.d, self.c1, self.c2)

    @cached_property
    def _interpolator(self):
        return scipy.interpolate.RegularGridInterpolator(
            [numpy.asarray(a) for a in self.axes],
            self.values,
            method="cubic",
            bounds_error=False,
            fill_value=None,
        )

    @property
    def is_constant(self) -> bool:
        return self.kind == "userGrid" and bool(numpy.all(self.values == self.values.flat[0]))

    def _point(self, x) -> numpy.ndarray:
        x = numpy.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimError(f"Point of shape {x.shape}, kappa has dimension {self.dim}")
        if not self.domain.contains(x, tol=1e-9):
            raise DomainError(f"{x.tolist()} is outside the kappa domain")
        return x

    def __call__(self, x) -> float:
        x = self._point(x)
        if self.kind == "builtSeparable":
            return float(numpy.sum(self._f[0](x)))
        if self.is_constant:
            return float(self.values.flat[0])
        return float(self._interpolator(x[None, :])[0])

    def gradient(self, x) -> numpy.ndarray:
        x = self._point(x)
        if self.kind == "builtSeparable":
            return self._f[1](x)
        if self.is_constant:
            return numpy.zeros(self.dim)
        return self._fd_gradient(x)

    def hessian(self, x) -> numpy.ndarray:
        x = self._point(x)
        if self.kind == "builtSeparable":
            return numpy.diag(self._f[2](x))
        if self.is_constant:
            return numpy.zeros((self.dim, self.dim))
        return self._fd_hessian(x)

    def _raw(self, x) -> float:
        return float(self._interpolator(x[None, :])[0])

    def _fd_gradient(self, x) -> numpy.ndarray:
        h = FD_STEP
        out = numpy.empty(self.dim)
        for i in range(self.dim):
            e = numpy.zeros(self.dim)
            e[i] = h
            out[i] = (self._raw(x + e) - self._raw(x - e)) / (2 * h)
        return out

    def _fd_hessian(self, x) -> numpy.ndarray:
        h = 1e-3
        n = self.dim
        H = numpy.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                ei = numpy.zeros(n)
                ej = numpy.zeros(n)
                ei[i] = h
                ej[j] = h
                H[i, j] = H[j, i] = (
                    self._raw(x + ei + ej)
                    - self._raw(x + ei - ej)
                    - self._raw(x - ei + ej)
                    + self._raw(x - ei - ej)
                ) / (4 * h * h)
        return H

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dim": self.dim, "domain": self.domain.to_dict()}
        if self.kind == "builtSeparable":
            d.update({"d": self.d, "c1": self.c1, "c2": self.c2})
        else:
            d.update({"axes": [list(a) for a in self.axes], "values": self.values.tolist()})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "KappaModel":
        d = dict(d)
        d.pop("dim", None)
        domain = Domain.from_dict(d.pop("domain"))
        if "values" in d:
            d["values"] = numpy.asarray(d["values"], dtype=float)
            d["axes"] = tuple(tuple(a) for a in d["axes"])
        return cls(domain=domain, **d)


def _validate(model: KappaModel):
    points = model.domain.validation_points()
    if model.kind == "builtSeparable":
        inner = model.c2 + model.c1 * points
        bad = numpy.flatnonzero(numpy.any(inner <= 0, axis=1))
        if len(bad):
            corner = points[bad[0]].tolist()
            raise InfeasibleBuild(f"f has a pole or is undefined at {corner}", corner=corner)
        f, _, d2f = model._f
        kappa = numpy.sum(f(points), axis=1)
        convex = numpy.all(d2f(points) > 0, axis=1)
    else:
        kappa = numpy.array([model(x) for x in points])
        convex = numpy.ones(len(points), dtype=bool)

    bad = numpy.flatnonzero(~((kappa > 0) & (kappa <= 1) & convex))
    if len(bad):
        corner = points[bad[0]].tolist()
        raise InfeasibleBuild(
            f"kappa = {kappa[bad[0]]:.6g} violates 0 < kappa <= 1 (or f'' <= 0) at {corner}",
            corner=corner,
        )


def build_kappa(d: float, c1: float, c2: float, domain: Domain) -> KappaModel:
    """
    Separable kappa(x) = sum_i f(x_i) with f = (c2 + c1 x)^-1 for d >= 1 and
    f = ((2/d - 1)(c2 + c1 x))^(d/(d-2)) for d in (0, 1).
    """
    model = KappaModel("builtSeparable", domain, d=float(d), c1=float(c1), c2=float(c2))
    _validate(model)
    return model


def grid_kappa(axes, values, domain: Domain) -> KappaModel:
    model = KappaModel("userGrid", domain, axes=tuple(tuple(a) for a in axes), values=values)
    _validate(model)
    return model


def _check_p(p: float, strict: bool = True):
    if not 0 < p < 1:
        raise DomainError(f"Probability must be in (0, 1), got {p}")
    if p < P_MIN:
        message = f"p = {p} is below exp(-1); U(x, y) need not be convex"
        if strict:
            raise DomainError(message)
        warn(message)


def big_u_value(kappa: float, y: float, p: float, strict: bool = True) -> float:
    _check_kappa(kappa)
    _check_p(p, strict)
    if not 0 < y <= 1:
        raise DomainError(f"y must lie in (0, 1], got {y}")
    return float(p ** (y ** kappa))


def big_u(model: KappaModel, x, y: float, p: float, strict: bool = True) -> float:
    """U(x, y) = psi_x^-1(y psi_x(p)) = p^(y^kappa(x))."""
    return big_u_value(model(x), y, p, strict)


def phi_omega(kappa: float, y: float, p: float) -> Tuple[float, float, float]:
    if not 0 < kappa <= 1 or not p >= P_MIN or not 0 < y < 1 or not p < 1:
        raise AssumptionViolated(
            f"Need kappa in (0, 1], y in (0, 1), p in [exp(-1), 1); got {kappa}, {y}, {p}"
        )
    ly = numpy.log(y)
    v = numpy.log(p) * y ** kappa
    phi1 = kappa * ly * (kappa - 1 + kappa * v)
    phi2 = kappa * ly ** 2 * (1 + v) * (1 - kappa - kappa * v) + (
        1 + kappa * ly + v * ly * kappa
    ) ** 2
    if not (phi1 > 0 and phi2 > 0):
        raise AssumptionViolated(f"phi1 = {phi1}, phi2 = {phi2} are not both positive")
    return float(phi1), float(phi2), float(phi2 / phi1)


def d_bound(y: float, p: float) -> float:
    """d with 1/omega(x, y) >= d kappa(x) for every kappa in (0, 1]."""
    if not 0 < y < 1:
        raise DomainError(f"y must lie in (0, 1), got {y}")
    if not P_MIN <= p < 1:
        raise DomainError(f"p must lie in [exp(-1), 1), got {p}")
    ly = -numpy.log(y)
    lpy = -numpy.log(p) * y
    a1 = ly * (1 - lpy) ** 2 / lpy
    a2 = ly * (1 - lpy)
    a3 = 1 / ly / lpy
    return float(1 / (a1 + a2 + a3))


def _min_eig(A: numpy.ndarray) -> float:
    return float(numpy.linalg.eigvalsh(A)[0])


def _psd(A: numpy.ndarray, eig_min: float) -> bool:
    return eig_min >= -PSD_RTOL * abs(numpy.trace(A))


@dataclass
class CopulaDiagnostics:
    phi1: float
    phi2: float
    omega: float
    d_bound: float
    m_eig_min: float
    delta_det: float
    a4_eig_min: float
    psd: bool
    a4_psd: bool
    strict: bool

    def to_dict(self) -> dict:
        return asdict(self)


def delta_det(model: KappaModel, x, d: float) -> float:
    """det [[H kappa, grad kappa], [grad kappa', d kappa]]"""
    H = model.hessian(x)
    g = model.gradient(x)
    n = model.dim
    D = numpy.empty((n + 1, n + 1))
    D[:n, :n] = H
    D[:n, n] = g
    D[n, :n] = g
    D[n, n] = d * model(x)
    return float(numpy.linalg.det(D))


def m_matrix_psd(
    model: KappaModel, x, y: float, p: float, d: Optional[float] = None
) -> CopulaDiagnostics:
    """
    Smallest eigenvalues of M(x, y) = phi1 H kappa - phi2 grad kappa grad kappa'
    and of d kappa H kappa - grad kappa grad kappa'. ``strict`` is set when the
    latter is positive definite. ``d`` defaults to ``d_bound(y, p)``; pass
    ``model.d`` to check a separable build against its own constant.
    """
    kappa = model(x)
    phi1, phi2, omega = phi_omega(kappa, y, p)
    H = model.hessian(x)
    g = model.gradient(x)
    G = numpy.outer(g, g)
    if d is None:
        d = d_bound(y, p)

    M = phi1 * H - phi2 * G
    A4 = d * kappa * H - G
    m_eig = _min_eig(M)
    a4_eig = _min_eig(A4)
    return CopulaDiagnostics(
        phi1=phi1,
        phi2=phi2,
        omega=omega,
        d_bound=d_bound(y, p),
        m_eig_min=m_eig,
        delta_det=delta_det(model, x, d),
        a4_eig_min=a4_eig,
        psd=_psd(M, m_eig),
        a4_psd=_psd(A4, a4_eig),
        strict=a4_eig > PSD_RTOL * abs(numpy.trace(A4)),
    )


def u_hessian(model: KappaModel, x, y: float, p: float) -> numpy.ndarray:
    """Analytic Hessian of U over (x, y), y last."""
    kappa = model(x)
    g = model.gradient(x)
    H = model.hessian(x)
    ly = numpy.log(y)
    v = numpy.log(p) * y ** kappa
    c = p ** (y ** kappa) * v

    n = model.dim
    out = numpy.empty((n + 1, n + 1))
    out[:n, :n] = c * ly ** 2 * (v + 1) * numpy.outer(g, g) + c * ly * H
    cross = c / y * (ly * kappa * (v + 1) + 1) * g
    out[:n, n] = cross
    out[n, :n] = cross
    out[n, n] = c * kappa / y ** 2 * (kappa * (v + 1) - 1)
    return out
