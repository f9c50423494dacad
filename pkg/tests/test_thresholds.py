import numpy
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from evconvex.dist import Marginal1D
from evconvex.errors import DomainError, MissingTheta, NotDecreasing, OutsideDomain, WrongMarginal
from evconvex.linalg import SpdMatrix
from evconvex.thresholds import (
    GaussianBestP,
    PStarResult,
    RowModel,
    ThetaResult,
    assemble_pstar,
    best_theta,
    gaussian_best_p,
    isotropic_sqrt_theta,
    item7_sqrt_theta,
    lambda_mu_min,
    legacy_sqrt_theta,
    numeric_sqrt_theta,
    r_concavity_holds,
    region_table,
    tangency_constants,
)

SIGMA1 = SpdMatrix([[96.0, -11.0], [-11.0, 98.0]])
MU1 = numpy.array([3.0, -4.0])


def random_row(rng, dim=2, b=None) -> RowModel:
    a = rng.standard_normal((dim, dim))
    s = a @ a.T + 0.5 * numpy.eye(dim)
    return RowModel(
        mu=rng.standard_normal(dim),
        sigma=0.5 * (s + s.T),
        d=rng.uniform(-2, 2) if b is None else b,
    )


def g_derivatives(row: RowModel, x):
    """g, its gradient and Hessian."""
    S = row.sigma.entries
    u = row.d - row.mu @ x
    w = S @ x
    q = x @ w
    g = u / numpy.sqrt(q)
    grad = -row.mu / numpy.sqrt(q) - u * w / q ** 1.5
    hess = (
        (numpy.outer(row.mu, w) + numpy.outer(w, row.mu)) / q ** 1.5
        - u * S / q ** 1.5
        + 3 * u * numpy.outer(w, w) / q ** 2.5
    )
    return g, grad, hess


def test_g_hessian_matches_finite_differences():
    rng = numpy.random.default_rng(11)
    row = random_row(rng, dim=3, b=1.5)
    x = numpy.array([0.3, -0.2, 0.5])
    _, grad, hess = g_derivatives(row, x)
    h = 1e-5
    for i in range(3):
        e = numpy.zeros(3)
        e[i] = h
        fd = (g_derivatives(row, x + e)[1] - g_derivatives(row, x - e)[1]) / (2 * h)
        numpy.testing.assert_allclose(fd, hess[i], rtol=1e-5, atol=1e-8)
        assert (row.g(x + e) - row.g(x - e)) / (2 * h) == pytest.approx(grad[i], rel=1e-6)


def test_r_concavity_agrees_with_hessian():
    rng = numpy.random.default_rng(2024)
    rs = [-3.0, -2.0, -0.5, 0.0, 1.0, 2.5]
    disagreements = []
    for k in range(200):
        row = random_row(rng, dim=int(rng.integers(2, 4)))
        while True:
            x = rng.standard_normal(row.dim)
            if row.d - row.mu @ x > 0:
                break
        r = rs[k % len(rs)]
        g, grad, hess = g_derivatives(row, x)
        # sign(-r) g^r convex (ln g concave for r = 0) iff B is negative semi-definite
        B = hess + (r - 1) / g * numpy.outer(grad, grad)
        top = numpy.linalg.eigvalsh(B)[-1]
        scale = numpy.abs(B).max()
        expected = top <= 0
        if r_concavity_holds(row, x, r) != expected:
            disagreements.append(abs(top) / scale)

    assert len(disagreements) <= 1
    assert all(d <= 1e-6 for d in disagreements)


def test_r_concavity_examples():
    row = RowModel(mu=numpy.zeros(2), sigma=numpy.eye(2), d=1.0)
    assert r_concavity_holds(row, [0.4, -1.0], -2.0)
    assert not r_concavity_holds(row, [1.0, 0.0], 1.0)
    row = RowModel(mu=numpy.array([1.0, 0.0]), sigma=numpy.eye(2), d=0.0)
    assert r_concavity_holds(row, [-2.0, 0.0], -2.0)
    with pytest.raises(OutsideDomain):
        r_concavity_holds(row, [2.0, 0.0], -2.0)
    with pytest.raises(OutsideDomain):
        r_concavity_holds(row, [0.0, 0.0], -2.0)


@pytest.mark.parametrize("mode", ["lMin", "closedForm", "definitionNumeric"])
def test_lambda_mu_min_isotropic(mode):
    assert lambda_mu_min([1.0, 2.0], SpdMatrix.isotropic(2.0, 2), mode) == pytest.approx(2.0)


def test_lambda_mu_min_modes():
    assert lambda_mu_min(MU1, SIGMA1, "closedForm") == pytest.approx(107.79, rel=1e-4)
    assert lambda_mu_min(MU1, SIGMA1, "lMin") == pytest.approx(97 - numpy.sqrt(122))
    assert lambda_mu_min(MU1, SIGMA1, "definitionNumeric") == pytest.approx(
        lambda_mu_min(MU1, SIGMA1, "closedForm"), rel=1e-6
    )
    # aligned with the smallest eigenvector
    v = SIGMA1.eig.vectors[:, 0]
    assert lambda_mu_min(v, SIGMA1, "closedForm") == pytest.approx(SIGMA1.eig.lmin)
    with pytest.raises(DomainError):
        lambda_mu_min([0.0, 0.0], SIGMA1)
    with pytest.raises(DomainError):
        lambda_mu_min(MU1, SIGMA1, "exact")


def test_tangency_constants():
    rc, rs = tangency_constants(MU1, SIGMA1, "lMin")
    assert rc == pytest.approx(1.254, abs=1e-3)
    assert rs == pytest.approx(-4.45, abs=1e-2)
    rc, rs = tangency_constants(MU1, SpdMatrix.isotropic(3.0, 2), "lMin")
    assert rc == pytest.approx(1.0)
    assert rs is None
    # closed form forces r_circle = 1
    assert tangency_constants(MU1, SIGMA1, "closedForm")[1] is None


def test_paper_thresholds(rows):
    thetas = [best_theta(row, -2.0, "lMin") for row in rows]
    numpy.testing.assert_allclose([t.theta for t in thetas], [2.4343, 0.1965, 1.4433], atol=5e-4)
    assert all(t.case_id == 7 for t in thetas)
    assert not any(t.is_best for t in thetas)


def test_paper_pstar(rows):
    result = assemble_pstar(rows, "lMin", 0.1)
    assert max(c[0] for c in result.contributions) == pytest.approx(0.9031, abs=1e-3)
    assert result.pstar == pytest.approx(0.9648, abs=1e-3)
    assert result.binding["term"] == "tstar"
    assert PStarResult.from_dict(result.to_dict()) == result


@pytest.mark.parametrize(
    "mu, d, r, case, exists",
    [
        ([0.0, 0.0], 1.0, -2.0, 1, True),
        ([0.0, 0.0], 1.0, -0.5, 1, False),
        ([1.0, 0.0], 0.0, -2.0, 2, True),
        ([1.0, 0.0], -1.0, -3.0, 3, True),
        ([1.0, 0.0], -1.0, -1.5, 4, True),
        ([1.0, 0.0], -1.0, 0.5, 5, True),
        ([1.0, 0.0], 1.0, 1.0, 6, False),
        ([1.0, 0.5], 1.0, -3.0, 7, True),
        ([1.0, 0.0], 0.0, 0.0, 9, True),
        ([1.0, 0.0], -1.0, 0.0, 10, True),
        ([1.0, 0.0], 1.0, 0.0, 11, False),
    ],
)
def test_best_theta_dispatch(mu, d, r, case, exists):
    sigma = [[2.0, 0.3], [0.3, 1.0]]
    result = best_theta(RowModel(mu=numpy.array(mu), sigma=sigma, d=d), r)
    assert result.case_id == case
    assert result.exists is exists
    assert ThetaResult.from_dict(result.to_dict()) == result


def test_best_theta_item2_best():
    row = RowModel(mu=numpy.array([1.0, 0.0]), sigma=numpy.eye(2), d=0.0)
    result = best_theta(row, -2.0)
    assert result.theta == pytest.approx(1.0)
    assert result.is_best


def test_best_theta_item8():
    row = RowModel(mu=numpy.array([1.0, 0.0]), sigma=numpy.eye(2), d=1.0)
    result = best_theta(row, -3.0)
    assert result.case_id == 8
    assert result.sqrt_theta == pytest.approx(2.0)


def test_conservative_b_negative():
    row = RowModel(mu=numpy.array([1.0, 0.5]), sigma=[[2.0, 0.3], [0.3, 1.0]], d=-1.0)
    sharp = best_theta(row, 0.5)
    loose = best_theta(row, 0.5, conservative=True)
    assert loose.theta >= sharp.theta


def test_b_negative_monotone_in_r():
    row = RowModel(mu=numpy.array([1.0, -0.7]), sigma=[[2.0, 0.3], [0.3, 1.0]], d=-1.0)
    values = [best_theta(row, r).theta for r in numpy.linspace(-0.9, 2.0, 30)]
    assert numpy.all(numpy.diff(values) >= 0)


@settings(max_examples=100, deadline=None)
@given(
    lam0=st.floats(0.1, 50),
    mu=st.lists(st.floats(-5, 5), min_size=2, max_size=4).filter(
        lambda m: numpy.linalg.norm(m) > 1e-3
    ),
    r=st.floats(-8, -1.01),
)
def test_isotropic_matches_item7(lam0, mu, r):
    mu = numpy.asarray(mu)
    norm2 = float(mu @ mu)
    item8 = isotropic_sqrt_theta(numpy.sqrt(norm2), lam0, r)
    item7 = item7_sqrt_theta(norm2, norm2 / lam0, lam0, r, 1.0, None)
    assert item7 == pytest.approx(item8, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), r=st.floats(-6, -1.05), b=st.floats(-3, 3))
def test_legacy_dominates(seed, r, b):
    row = random_row(numpy.random.default_rng(seed), b=b)
    result = best_theta(row, r, "lMin")
    if result.case_id in (3, 4, 7):
        assert result.sqrt_theta <= legacy_sqrt_theta(row.mu, row.sigma, r) * (1 + 1e-9)


def test_legacy_requires_r_below_minus_one():
    with pytest.raises(DomainError):
        legacy_sqrt_theta(MU1, SIGMA1, -0.5)


def _boundary_samples(row, lo, hi, n, rng):
    """Points of E with g in [lo, hi], directions uniform on the circle."""
    angles = rng.uniform(0, 2 * numpy.pi, n)
    dirs = numpy.stack([numpy.cos(angles), numpy.sin(angles)], axis=1)
    qhat = numpy.einsum("ij,jk,ik->i", dirs, row.sigma.entries, dirs)
    s = dirs @ row.mu / numpy.sqrt(qhat)
    if row.d == 0:
        # g is scale invariant: keep the directions that reach the band
        keep = (-s >= lo) & (-s <= hi)
        return dirs[keep]
    g = rng.uniform(lo, hi, n)
    t = (g + s) / row.d
    keep = t > 0
    return dirs[keep] / (t[keep] * numpy.sqrt(qhat[keep]))[:, None]


def test_item2_sharpness():
    rng = numpy.random.default_rng(3)
    row = RowModel(mu=MU1, sigma=SIGMA1, d=0.0)
    result = best_theta(row, -2.0)
    assert result.case_id == 2 and result.is_best

    # g is scale invariant for b = 0 and never exceeds sqrt(theta*)
    dirs = _boundary_samples(row, 0.0, numpy.inf, 10_000, rng)
    assert max(row.g(x) for x in dirs) <= result.sqrt_theta * (1 + 1e-12)

    deflated = numpy.sqrt(result.theta * (1 - 1e-2))
    points = _boundary_samples(row, deflated, result.sqrt_theta, 100_000, rng)
    assert len(points) > 0
    assert not all(r_concavity_holds(row, x, -2.0) for x in points)


@pytest.mark.parametrize("r", [-2.0, -3.5])
def test_item7_sharpness(r):
    rng = numpy.random.default_rng(5)
    row = RowModel(mu=MU1, sigma=SIGMA1, d=22.0)
    result = best_theta(row, r, "closedForm")
    assert result.case_id == 7 and result.is_best
    c = result.sqrt_theta

    inflated = numpy.sqrt(result.theta * (1 + 1e-3))
    points = _boundary_samples(row, inflated, 3 * inflated, 10_000, rng)
    assert len(points) > 100
    assert all(r_concavity_holds(row, x, r) for x in points)

    deflated = numpy.sqrt(result.theta * (1 - 1e-2))
    points = _boundary_samples(row, deflated, c, 100_000, rng)
    assert not all(r_concavity_holds(row, x, r) for x in points)


def test_numeric_threshold_matches_closed_forms(region_row):
    for r in (-2.0, -5.0):
        expected = best_theta(region_row, r, "lMin").sqrt_theta
        assert numeric_sqrt_theta(region_row, r, "lMin") == pytest.approx(expected, rel=1e-3)
    with pytest.raises(DomainError):
        numeric_sqrt_theta(region_row, -0.5)


def test_region_curve(region_row):
    rc, rs = tangency_constants(region_row.mu, region_row.sigma, "lMin")
    assert rc == pytest.approx(1.597, abs=2e-3)
    assert rs == pytest.approx(-3.27, abs=1e-2)
    expected = {-1.1: 581, -2.0: 78, -3.0: 48.9, -5.0: 33.8}
    for r, value in expected.items():
        assert best_theta(region_row, r).sqrt_theta == pytest.approx(value, rel=1e-2)


def test_region_tables(region_row):
    for r in (-1.0, 1.0):
        assert not region_table(region_row, r, 20.0).contained
    c0 = best_theta(region_row, -3.0).sqrt_theta * (1 + 1e-3)
    table = region_table(region_row, -3.0, c0)
    assert table.contained
    assert table.in_q.shape == (64, 64)
    assert set(table.to_dict()) == {"r", "c0", "contained", "t", "s", "in_q", "in_g"}


def test_gaussian_best_p():
    row = RowModel(mu=numpy.array([1.0, 0.0]), sigma=numpy.eye(2), d=0.0)
    result = gaussian_best_p(row)
    assert result.exists and result.best
    assert result.pstar == pytest.approx(0.8413447, abs=1e-6)
    assert result.theta == pytest.approx(1.0)
    assert GaussianBestP.from_dict(result.to_dict()) == result

    row = RowModel(mu=numpy.array([0.5, 0.0]), sigma=numpy.eye(2), d=0.0)
    assert gaussian_best_p(row).pstar == pytest.approx(0.6914625, abs=1e-6)

    row = RowModel(mu=numpy.array([0.5, 0.0]), sigma=numpy.eye(2), d=-1.0)
    result = gaussian_best_p(row)
    assert not result.exists
    assert result.pstar is None and result.theta is None

    row = RowModel(mu=numpy.array([0.5, 0.2]), sigma=[[2.0, 0.3], [0.3, 1.0]], d=1.0)
    result = gaussian_best_p(row)
    assert result.exists and not result.best
    assert 0.5 < result.pstar < 1.0

    with pytest.raises(WrongMarginal):
        gaussian_best_p(RowModel(mu=MU1, sigma=SIGMA1, d=1.0, marginal=Marginal1D.student(4)))


@pytest.mark.parametrize("b", [0.5, 1.0, 3.0])
def test_gaussian_best_p_zero_mean(b):
    # violation region is b t < sqrt(2) whatever b is
    result = gaussian_best_p(RowModel(mu=numpy.zeros(2), sigma=numpy.eye(2), d=b))
    assert result.exists and not result.best
    assert result.theta == pytest.approx(2.0)
    assert result.pstar == pytest.approx(scipy.stats.norm.cdf(numpy.sqrt(2.0)), abs=1e-9)


def test_pstar_single_gaussian_row():
    row = RowModel(mu=numpy.zeros(2), sigma=numpy.eye(2), d=0.0)
    result = assemble_pstar([row])
    assert result.pstar == pytest.approx(0.9584, abs=1e-4)
    assert result.binding == {"row": 0, "term": "tstar"}


def test_pstar_missing_theta():
    rows = [
        RowModel(mu=numpy.zeros(2), sigma=numpy.eye(2), d=0.0),
        RowModel(mu=MU1, sigma=SIGMA1, d=2.0, r=1.0),
    ]
    with pytest.raises(MissingTheta, match=r"no threshold \(Theorem item 6\) for row 1"):
        assemble_pstar(rows)


def test_pstar_not_decreasing():
    heavy = Marginal1D.gh1(-1.0, 1.0, 0.0)
    row = RowModel(mu=numpy.zeros(2), sigma=numpy.eye(2), d=0.0, marginal=heavy)
    # psi = phi = 0 and lambda = -1 admits alpha < 3 only
    with pytest.raises(NotDecreasing):
        assemble_pstar([row])


def test_r_zero_uses_eps0():
    row = RowModel(mu=numpy.array([1.0, 0.0]), sigma=numpy.eye(2), d=0.0, r=0.0)
    result = assemble_pstar([row], eps0=0.1)
    assert result.pstar >= 0.5
