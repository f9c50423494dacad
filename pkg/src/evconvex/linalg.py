import functools
from dataclasses import dataclass
from typing import Tuple

import numpy
import scipy.linalg

from evconvex.errors import DegenerateInput, DimError, InvalidMatrix

SPD_RTOL = 1e-12
RECONSTRUCTION_RTOL = 1e-10


@dataclass(frozen=True)
class EigenPairs:
    values: numpy.ndarray
    vectors: numpy.ndarray

    @property
    def lmin(self) -> float:
        return float(self.values[0])

    @property
    def lmax(self) -> float:
        return float(self.values[-1])


class SpdMatrix:
    """
    Symmetric positive definite scale matrix with lazily cached
    eigen-decomposition and Cholesky factor. Immutable after construction.
    """

    def __init__(self, entries):
        a = numpy.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimError(f"Expected a square matrix, got shape {a.shape}")
        if not numpy.all(numpy.isfinite(a)):
            raise InvalidMatrix("Matrix has non-finite entries")
        if not numpy.array_equal(a, a.T):
            raise InvalidMatrix("Matrix is not symmetric")
        a.setflags(write=False)
        self._entries = a

        values = self.eig.values
        if values[0] <= SPD_RTOL * max(values[-1], 0.0) or values[0] <= 0:
            raise InvalidMatrix(
                f"Matrix is not positive definite (smallest eigenvalue {values[0]})"
            )

    @classmethod
    def isotropic(cls, scale: float, dim: int) -> "SpdMatrix":
        return cls(scale * numpy.eye(dim))

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> numpy.ndarray:
        return self._entries

    @functools.cached_property
    def eig(self) -> EigenPairs:
        values, vectors = numpy.linalg.eigh(self._entries)
        return EigenPairs(values=values, vectors=vectors)

    @functools.cached_property
    def chol(self) -> numpy.ndarray:
        return numpy.linalg.cholesky(self._entries)

    @property
    def is_isotropic(self) -> bool:
        d = self._entries[0, 0]
        return bool(numpy.array_equal(self._entries, d * numpy.eye(self.dim)))

    def solve(self, v) -> numpy.ndarray:
        v = _check_vector(self, v)
        return scipy.linalg.cho_solve((self.chol, True), v)

    def __matmul__(self, other):
        return self._entries @ numpy.asarray(other, dtype=float)

    def __repr__(self) -> str:
        return f"SpdMatrix({self._entries.tolist()})"


def _check_vector(S: SpdMatrix, v) -> numpy.ndarray:
    v = numpy.asarray(v, dtype=float)
    if v.shape != (S.dim,):
        raise DimError(f"Vector of shape {v.shape} does not match matrix of dim {S.dim}")
    return v


def eig_decompose(S: SpdMatrix) -> EigenPairs:
    pairs = S.eig
    if not numpy.all(numpy.isfinite(pairs.values)):
        raise InvalidMatrix("Eigenvalues are not finite")
    Q, L = pairs.vectors, pairs.values
    scale = numpy.max(numpy.abs(S.entries))
    residual = numpy.max(numpy.abs(Q @ numpy.diag(L) @ Q.T - S.entries))
    if residual > RECONSTRUCTION_RTOL * scale:
        raise InvalidMatrix(f"Eigen-decomposition residual {residual} too large")
    return pairs


def inv_quad_form(S: SpdMatrix, v) -> float:
    v = _check_vector(S, v)
    # v' S^-1 v = |L^-1 v|^2 with S = L L'
    w = scipy.linalg.solve_triangular(S.chol, v, lower=True)
    return float(w @ w)


def quad_form(S: SpdMatrix, x) -> float:
    x = _check_vector(S, x)
    return float(x @ S.entries @ x)


def rank_one_spectrum(z, y, mode: str) -> Tuple[float, float]:
    """
    Nonzero eigenvalues of ``zz' + yy'`` (``sum``), ``zz'`` (``single``) or
    ``zz' - yy'`` (``diff``), larger first.
    """
    z = numpy.asarray(z, dtype=float)
    y = numpy.asarray(y, dtype=float)
    if z.shape != y.shape or z.ndim != 1:
        raise DimError(f"Shapes {z.shape} and {y.shape} do not match")

    nz = float(z @ z)
    ny = float(y @ y)
    zy = float(z @ y)

    if mode == "single":
        if nz == 0.0:
            raise DegenerateInput("z must be nonzero")
        return nz, 0.0
    elif mode == "sum":
        root = numpy.sqrt((ny - nz) ** 2 + 4 * zy ** 2)
        return (ny + nz + root) / 2, (ny + nz - root) / 2
    elif mode == "diff":
        # Cauchy-Schwarz keeps the radicand nonnegative up to rounding
        root = numpy.sqrt(max((nz + ny) ** 2 - 4 * zy ** 2, 0.0))
        return (nz - ny + root) / 2, (nz - ny - root) / 2
    raise ValueError(f"Unknown mode {mode}")
