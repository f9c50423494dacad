from pathlib import Path
from typing import Any, List, Literal, Optional

import numpy
import pydantic
import yaml

from evconvex.copula import KappaModel, build_kappa, grid_kappa
from evconvex.dist import Marginal1D
from evconvex.domain import Domain
from evconvex.errors import DimError
from evconvex.feasibility import GhRow, Problem
from evconvex.thresholds import RowModel

CONFIG_VERSION = 1


class BaseModel(pydantic.BaseModel):
    class Config:
        extra = "forbid"
        allow_population_by_field_name = True


class MarginalConfig(BaseModel):
    family: Literal["gaussian", "student", "gh1", "gig"] = "gaussian"
    nu: Optional[float] = None
    lam: Optional[float] = pydantic.Field(None, alias="lambda")
    chi: Optional[float] = None
    psi: Optional[float] = None
    phi: float = 0.0

    def build(self) -> Marginal1D:
        return Marginal1D(self.family, self.nu, self.lam, self.chi, self.psi, self.phi)


class GhConfig(BaseModel):
    lam: float = pydantic.Field(..., alias="lambda")
    chi: float
    psi: float
    gamma: List[float]

    def build(self) -> GhRow:
        return GhRow(self.lam, self.chi, self.psi, tuple(self.gamma))


class RowConfig(BaseModel):
    mu: List[float]
    sigma: List[List[float]]
    d: float
    r: float = -2.0
    marginal: MarginalConfig = MarginalConfig()
    gh: Optional[GhConfig] = None

    def build(self) -> RowModel:
        return RowModel(
            mu=numpy.array(self.mu),
            sigma=numpy.array(self.sigma),
            d=self.d,
            marginal=self.marginal.build(),
            r=self.r,
        )


class DomainConfig(BaseModel):
    kind: Literal["ball", "box"]
    center: Optional[List[float]] = None
    radius: Optional[float] = None
    lo: Optional[List[float]] = None
    hi: Optional[List[float]] = None
    origin_allowed: bool = True

    def build(self) -> Domain:
        return Domain(
            self.kind,
            center=tuple(self.center) if self.center is not None else None,
            radius=self.radius,
            lo=tuple(self.lo) if self.lo is not None else None,
            hi=tuple(self.hi) if self.hi is not None else None,
            origin_allowed=self.origin_allowed,
        )


class CopulaConfig(BaseModel):
    """Same record as ``KappaModel.to_dict`` so build-kappa output can be pasted back."""

    kind: Literal["independent", "builtSeparable", "userGrid"] = "independent"
    d: Optional[float] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    dim: Optional[int] = None
    domain: Optional[DomainConfig] = None
    axes: Optional[List[List[float]]] = None
    values: Optional[Any] = None

    def build(self, default_domain: Domain) -> Optional[KappaModel]:
        if self.kind == "independent":
            return None
        domain = self.domain.build() if self.domain is not None else default_domain
        if self.dim is not None and self.dim != domain.dim:
            raise DimError(f"Copula record has dim {self.dim}, the domain has {domain.dim}")
        if self.kind == "builtSeparable":
            return build_kappa(self.d, self.c1, self.c2, domain)
        return grid_kappa(self.axes, numpy.asarray(self.values, dtype=float), domain)


class OptionsConfig(BaseModel):
    p: float = 0.97
    lambda_mode: Literal["lMin", "closedForm", "definitionNumeric"] = "lMin"
    method: Literal["analytic", "radial", "radialPrinted", "monteCarlo"] = "analytic"
    alpha: Optional[float] = None
    eps0: float = 0.1
    n_segments: int = 500
    rays: int = 100
    resolution: int = 200
    grid_box: Optional[List[List[float]]] = None
    c: Optional[List[float]] = None
    max_iter: int = 200
    x: Optional[List[float]] = None
    mc_samples: int = 100_000
    override: bool = False


class RunConfig(BaseModel):
    version: Literal[1]
    rows: List[RowConfig]
    domain: DomainConfig
    copula: CopulaConfig = CopulaConfig()
    options: OptionsConfig = OptionsConfig()
    seed: int = 0
    output: Optional[str] = None

    def row_models(self) -> List[RowModel]:
        return [row.build() for row in self.rows]

    def problem(self) -> Problem:
        domain = self.domain.build()
        gh = [row.gh.build() if row.gh is not None else None for row in self.rows]
        return Problem(
            rows=self.row_models(),
            domain=domain,
            copula=self.copula.build(domain),
            gh=gh if any(g is not None for g in gh) else None,
        )


def load_config(path: Path) -> RunConfig:
    with path.open() as fh:
        return RunConfig(**yaml.safe_load(fh))


def paper_config() -> RunConfig:
    """Three Student-t rows in the plane, kappa(x) = sum 1/(x_i + 10) on a ball of radius 7."""
    student = {"family": "student", "nu": 4}
    return RunConfig(
        version=CONFIG_VERSION,
        rows=[
            {"mu": [3, -4], "sigma": [[96, -11], [-11, 98]], "d": 22, "marginal": student},
            {"mu": [0, 1], "sigma": [[44, 21], [21, 92]], "d": 27, "marginal": student},
            {"mu": [2, -1], "sigma": [[90, -2], [-2, 24]], "d": 2, "marginal": student},
        ],
        domain={"kind": "ball", "center": [0, 0], "radius": 7},
        copula={"kind": "builtSeparable", "d": 1, "c1": 1, "c2": 10},
        options={
            "p": 0.97,
            "grid_box": [[-7, 7], [-7, 7]],
            "c": [1, 1],
        },
    )
