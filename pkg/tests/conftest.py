import numpy
import pytest

from evconvex.config import paper_config
from evconvex.dist import Marginal1D
from evconvex.domain import Domain
from evconvex.feasibility import Problem
from evconvex.thresholds import RowModel


@pytest.fixture(autouse=True)
def serial_workers(monkeypatch):
    monkeypatch.setenv("EVCONVEX_THREADS", "2")


@pytest.fixture
def config():
    return paper_config()


@pytest.fixture
def rows(config):
    return config.row_models()


@pytest.fixture
def problem(config):
    return config.problem()


@pytest.fixture
def independent_problem(rows):
    return Problem(rows=rows, domain=Domain.ball(7.0))


@pytest.fixture
def gaussian_ball_problem():
    """One centred Gaussian row with identity scale: S(p) is a ball."""
    row = RowModel(mu=numpy.zeros(2), sigma=numpy.eye(2), d=2.0)
    return Problem(rows=[row], domain=Domain.ball(5.0))


@pytest.fixture
def region_row():
    return RowModel(
        mu=numpy.array([0.0, 28.0, -1.0]),
        sigma=numpy.array([[32.0, 20.0, 3.0], [20.0, 26.0, 23.0], [3.0, 23.0, 38.0]]),
        d=4.0,
    )


@pytest.fixture
def student4():
    return Marginal1D.student(4)
