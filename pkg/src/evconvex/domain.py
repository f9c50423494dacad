from dataclasses import dataclass
from typing import Optional, Tuple

import numpy

from evconvex.errors import DimError, DomainError


@dataclass(frozen=True)
class Domain:
    """Decision domain X: a Euclidean ball or an axis-aligned box."""

    kind: str
    center: Optional[Tuple[float, ...]] = None
    radius: Optional[float] = None
    lo: Optional[Tuple[float, ...]] = None
    hi: Optional[Tuple[float, ...]] = None
    origin_allowed: bool = True

    def __post_init__(self):
        if self.kind == "ball":
            if self.center is None or self.radius is None or not self.radius > 0:
                raise DomainError("A ball needs a center and a positive radius")
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        elif self.kind == "box":
            if self.lo is None or self.hi is None or len(self.lo) != len(self.hi):
                raise DomainError("A box needs lo and hi of equal length")
            object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
            object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
            if any(a >= b for a, b in zip(self.lo, self.hi)):
                raise DomainError("Box bounds must satisfy lo < hi")
        else:
            raise DomainError(f"Unknown domain kind {self.kind}")

    @classmethod
    def ball(cls, radius: float, dim: int = 2, center=None, origin_allowed: bool = True):
        if center is None:
            center = (0.0,) * dim
        return cls("ball", center=tuple(center), radius=radius, origin_allowed=origin_allowed)

    @classmethod
    def box(cls, lo, hi, origin_allowed: bool = True):
        return cls("box", lo=tuple(lo), hi=tuple(hi), origin_allowed=origin_allowed)

    @property
    def dim(self) -> int:
        return len(self.center) if self.kind == "ball" else len(self.lo)

    @property
    def bounds(self) -> Tuple[numpy.ndarray, numpy.ndarray]:
        """Bounding box"""
        if self.kind == "ball":
            c = numpy.asarray(self.center)
            return c - self.radius, c + self.radius
        return numpy.asarray(self.lo), numpy.asarray(self.hi)

    @property
    def x_min(self) -> float:
        """Smallest coordinate value attained in X."""
        return float(numpy.min(self.bounds[0]))

    def contains(self, x, tol: float = 1e-12) -> bool:
        x = numpy.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimError(f"Point of shape {x.shape} in a {self.dim}-dim domain")
        if self.kind == "ball":
            return bool(numpy.linalg.norm(x - numpy.asarray(self.center)) <= self.radius * (1 + tol))
        lo, hi = self.bounds
        return bool(numpy.all(x >= lo - tol) and numpy.all(x <= hi + tol))

    def sample(self, rng: numpy.random.Generator, n: int) -> numpy.ndarray:
        """Uniform samples from X."""
        if self.kind == "box":
            lo, hi = self.bounds
            return rng.uniform(lo, hi, size=(n, self.dim))
        z = rng.standard_normal((n, self.dim))
        z /= numpy.linalg.norm(z, axis=1)[:, None]
        radii = self.radius * rng.uniform(0, 1, size=n) ** (1.0 / self.dim)
        return numpy.asarray(self.center) + z * radii[:, None]

    def validation_points(self, per_axis: int = 32) -> numpy.ndarray:
        """
        Regular grid of the bounding box restricted to X, plus its corners
        (box) or boundary points (ball).
        """
        lo, hi = self.bounds
        per_axis = max(2, int(round(min(per_axis, 4096 ** (1.0 / self.dim)))))
        axes = [numpy.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
        grid = numpy.stack(numpy.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        if self.kind == "box":
            return grid
        c = numpy.asarray(self.center)
        inside = numpy.linalg.norm(grid - c, axis=1) <= self.radius
        rng = numpy.random.default_rng(0)
        z = rng.standard_normal((256, self.dim))
        if self.dim == 2:
            angles = numpy.linspace(0, 2 * numpy.pi, 256, endpoint=False)
            z = numpy.stack([numpy.cos(angles), numpy.sin(angles)], axis=1)
        z /= numpy.linalg.norm(z, axis=1)[:, None]
        # coordinate extremes of the sphere
        axes_pts = numpy.concatenate([numpy.eye(self.dim), -numpy.eye(self.dim)])
        boundary = c + self.radius * numpy.concatenate([z, axes_pts])
        return numpy.concatenate([grid[inside], boundary])

    def to_dict(self) -> dict:
        if self.kind == "ball":
            d = {"kind": "ball", "center": list(self.center), "radius": self.radius}
        else:
            d = {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}
        d["origin_allowed"] = self.origin_allowed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        return cls(**d)
