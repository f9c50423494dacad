import numpy
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evconvex.copula import (
    GENERATORS,
    P_MIN,
    KappaModel,
    big_u,
    big_u_value,
    build_kappa,
    copula_value,
    d_bound,
    delta_det,
    grid_kappa,
    m_matrix_psd,
    phi_omega,
    psi,
    psi_inv,
    u_hessian,
)
from evconvex.domain import Domain
from evconvex.errors import AssumptionViolated, DomainError, InfeasibleBuild, ParamError


@pytest.fixture
def kappa_model():
    return build_kappa(1.0, 1.0, 10.0, Domain.ball(7.0))


@pytest.mark.parametrize(
    "family, theta",
    [("clayton", 2.0), ("frank", 3.0), ("joe", 2.0), ("independent", 1.0), ("gumbel", 2.0)],
)
@pytest.mark.parametrize("t", [0.05, 0.4, 0.9])
def test_generator_roundtrip(family, theta, t):
    gen = GENERATORS[family]
    assert gen.admissible(theta)
    assert gen.inverse(theta, gen.psi(theta, t)) == pytest.approx(t, rel=1e-12)


@pytest.mark.parametrize("kappa", [0.1, 0.35, 0.7, 1.0])
@pytest.mark.parametrize("t", numpy.linspace(0.01, 0.99, 9))
def test_psi_roundtrip(kappa, t):
    assert psi_inv(kappa, psi(kappa, t)) == pytest.approx(t, abs=1e-12)


def test_psi_domain():
    with pytest.raises(DomainError):
        psi(1.5, 0.5)
    with pytest.raises(DomainError):
        psi(0.5, 0.0)
    with pytest.raises(DomainError):
        psi_inv(0.5, -1.0)


def test_copula_value():
    s = numpy.sqrt(numpy.log(0.9) ** 2 + numpy.log(0.8) ** 2)
    c = copula_value(0.5, (0.9, 0.8))
    assert c == pytest.approx(numpy.exp(-s), rel=1e-12)
    assert c == pytest.approx(0.78133, abs=1e-5)
    assert c <= 0.8
    assert copula_value(0.3, (1.0, 1.0, 1.0)) == 1.0
    assert copula_value(1.0, (0.5, 0.4)) == pytest.approx(0.2)


def test_copula_value_domain():
    with pytest.raises(DomainError):
        copula_value(0.5, (0.0, 0.5))
    with pytest.raises(DomainError):
        copula_value(0.5, ())
    with pytest.raises(DomainError):
        copula_value(0.0, (0.5, 0.5))


def test_copula_bounds_and_monotonicity():
    rng = numpy.random.default_rng(11)
    for _ in range(10_000):
        kappa = rng.uniform(0.05, 1.0)
        u = rng.uniform(0.01, 1.0, size=rng.integers(2, 5))
        c = copula_value(kappa, u)
        # Gumbel lies between the independence copula and the upper bound
        assert numpy.prod(u) - 1e-12 <= c <= u.min() + 1e-12

    for _ in range(100):
        kappa = rng.uniform(0.05, 1.0)
        u = rng.uniform(0.01, 0.9, size=3)
        v = u.copy()
        v[rng.integers(3)] += 0.05
        assert copula_value(kappa, v) >= copula_value(kappa, u)


@settings(max_examples=200, deadline=None)
@given(
    kappa=st.floats(0.05, 1.0),
    y=st.floats(0.01, 0.99),
    p=st.floats(P_MIN, 0.999),
)
def test_big_u_closed_form(kappa, y, p):
    composed = psi_inv(kappa, y * psi(kappa, p))
    u = big_u_value(kappa, y, p)
    assert u == pytest.approx(composed, rel=1e-14, abs=1e-14)
    assert p <= u <= 1


def test_big_u(kappa_model):
    assert big_u(kappa_model, [0.0, 0.0], 1.0, 0.9) == pytest.approx(0.9)
    assert big_u_value(1.0, 0.5, 0.81) == pytest.approx(0.9)
    with pytest.raises(DomainError):
        big_u_value(1.0, 0.5, 0.2)
    # non-strict mode only warns below exp(-1)
    assert big_u_value(1.0, 0.5, 0.25, strict=False) == pytest.approx(0.5)


def test_phi_omega():
    phi1, phi2, omega = phi_omega(1.0, 0.5, P_MIN)
    assert phi1 == pytest.approx(0.5 * numpy.log(2), rel=1e-12)
    assert phi2 > 0
    assert omega == pytest.approx(phi2 / phi1)

    with pytest.raises(AssumptionViolated):
        phi_omega(1.0, 1.0, 0.9)
    with pytest.raises(AssumptionViolated):
        phi_omega(1.0, 0.5, 0.3)
    with pytest.raises(AssumptionViolated):
        phi_omega(1.2, 0.5, 0.9)


def test_d_bound():
    assert d_bound(0.5, P_MIN) == pytest.approx(0.2794, abs=1e-4)
    assert d_bound(1 - 1e-9, 0.9) < 1e-6
    with pytest.raises(DomainError):
        d_bound(0.5, 0.2)
    with pytest.raises(DomainError):
        d_bound(1.0, 0.9)


def test_d_bound_inequality():
    rng = numpy.random.default_rng(5)
    kappas = numpy.linspace(0.05, 1.0, 20)
    for _ in range(1000):
        y = rng.uniform(0.01, 0.99)
        p = rng.uniform(P_MIN, 0.999)
        d = d_bound(y, p)
        assert d > 0
        for kappa in kappas:
            _, _, omega = phi_omega(kappa, y, p)
            assert 1 / omega >= d * kappa - 1e-12


def test_build_kappa(kappa_model):
    assert kappa_model([0.0, 0.0]) == pytest.approx(0.2)
    assert kappa_model([-7.0, 0.0]) == pytest.approx(1 / 3 + 1 / 10)
    numpy.testing.assert_allclose(kappa_model.gradient([1.0, 2.0]), [-1 / 121, -1 / 144])
    numpy.testing.assert_allclose(
        kappa_model.hessian([1.0, 2.0]), numpy.diag([2 / 11 ** 3, 2 / 12 ** 3])
    )
    with pytest.raises(DomainError):
        kappa_model([8.0, 0.0])


def test_build_kappa_small_d():
    d = 0.5
    radius = 9 - d / (4 - 2 * d)
    model = build_kappa(d, 1.0, 10.0, Domain.ball(radius))
    assert 0 < model([-radius, 0.0]) <= 1
    assert numpy.all(numpy.diag(model.hessian([-radius, 0.0])) > 0)


def test_build_kappa_infeasible():
    with pytest.raises(InfeasibleBuild) as info:
        build_kappa(1.0, 1.0, 5.0, Domain.ball(7.0))
    assert info.value.corner is not None
    # kappa(0) exceeds one for a very small d
    with pytest.raises(InfeasibleBuild):
        build_kappa(0.1, 1.0, 10.0, Domain.ball(7.0))
    with pytest.raises(ParamError):
        KappaModel("builtSeparable", Domain.ball(7.0), d=0.0, c1=1.0, c2=10.0)
    with pytest.raises(ParamError):
        KappaModel("clayton", Domain.ball(7.0))


def test_to_dict_roundtrip(kappa_model):
    d = kappa_model.to_dict()
    assert d["kind"] == "builtSeparable"
    assert d["dim"] == 2
    assert KappaModel.from_dict(d) == kappa_model

    grid = grid_kappa(
        [[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0, 2.0]], numpy.full((3, 4), 0.4), Domain.box([-1, -1], [1, 2])
    )
    assert KappaModel.from_dict(grid.to_dict()).to_dict() == grid.to_dict()


def test_constant_grid_kappa():
    domain = Domain.box([-2.0, -2.0], [2.0, 2.0])
    model = grid_kappa([[-2.0, 0.0, 2.0]] * 2, numpy.full((3, 3), 0.5), domain)
    assert model.is_constant
    assert model([0.3, -1.1]) == 0.5
    diag = m_matrix_psd(model, [0.3, -1.1], 0.5, 0.9)
    assert diag.m_eig_min == 0.0
    assert diag.psd
    assert diag.a4_psd
    assert not diag.strict
    assert diag.d_bound == pytest.approx(d_bound(0.5, 0.9))


def test_interpolated_grid_kappa(kappa_model):
    domain = Domain.box([-4.0, -4.0], [4.0, 4.0])
    axes = [numpy.linspace(-4, 4, 41)] * 2
    X, Y = numpy.meshgrid(*axes, indexing="ij")
    model = grid_kappa(axes, 1 / (X + 10) + 1 / (Y + 10), domain)
    x = [0.37, -1.52]
    assert model(x) == pytest.approx(kappa_model(x), rel=1e-5)
    numpy.testing.assert_allclose(model.gradient(x), kappa_model.gradient(x), rtol=1e-3)
    numpy.testing.assert_allclose(model.hessian(x), kappa_model.hessian(x), rtol=5e-2, atol=1e-5)


def test_grid_kappa_rejects_out_of_range():
    with pytest.raises(InfeasibleBuild):
        values = numpy.full((4, 4), 0.5)
        values[-1, -1] = 1.5
        grid_kappa([numpy.linspace(0, 1, 4)] * 2, values, Domain.box([0, 0], [1, 1]))


def test_assumption4_matrix(kappa_model):
    rng = numpy.random.default_rng(2)
    for x in Domain.ball(7.0).sample(rng, 100):
        diag = m_matrix_psd(kappa_model, x, 0.5, 0.97, d=kappa_model.d)
        assert diag.a4_psd
        assert diag.strict


def test_assumption4_d_defaults_to_bound(kappa_model):
    # the separable kappa needs d >= 1/2, far above d_bound(1/2, 0.97)
    x = [0.4, -2.0]
    d = d_bound(0.5, 0.97)
    assert d < 0.5
    diag = m_matrix_psd(kappa_model, x, 0.5, 0.97)
    assert diag.delta_det == pytest.approx(delta_det(kappa_model, x, d), rel=1e-12)
    assert not diag.a4_psd
    assert m_matrix_psd(kappa_model, x, 0.5, 0.97, d=kappa_model.d).a4_psd


def test_delta_det(kappa_model):
    rng = numpy.random.default_rng(3)
    for x in Domain.ball(7.0).sample(rng, 20):
        expected = numpy.prod(2 / (x + 10) ** 3) * numpy.sum(1 / (x + 10)) * (1.0 - 0.5)
        assert delta_det(kappa_model, x, 1.0) == pytest.approx(expected, rel=1e-8)


def test_u_hessian_matches_finite_differences(kappa_model):
    x0 = numpy.array([1.5, -2.0])
    y0, p = 0.4, 0.9
    h = 1e-4

    def u(z):
        return big_u(kappa_model, z[:2], z[2], p)

    z0 = numpy.append(x0, y0)
    fd = numpy.empty((3, 3))
    for i in range(3):
        for j in range(3):
            ei = numpy.zeros(3)
            ej = numpy.zeros(3)
            ei[i] = h
            ej[j] = h
            fd[i, j] = (u(z0 + ei + ej) - u(z0 + ei - ej) - u(z0 - ei + ej) + u(z0 - ei - ej)) / (
                4 * h * h
            )
    numpy.testing.assert_allclose(u_hessian(kappa_model, x0, y0, p), fd, rtol=1e-4, atol=1e-6)


@pytest.mark.parametrize("p", [P_MIN, 0.9, 0.97])
def test_u_jointly_convex(kappa_model, p):
    rng = numpy.random.default_rng(17)
    xs = Domain.ball(6.9).sample(rng, 200)
    ys = rng.uniform(0.2, 0.5, size=200)
    for x, y in zip(xs, ys):
        H = u_hessian(kappa_model, x, y, p)
        scale = numpy.abs(H).max()
        assert numpy.linalg.eigvalsh(H)[0] >= -1e-7 * scale


def test_m_matrix_matches_full_hessian(kappa_model):
    rng = numpy.random.default_rng(23)
    xs = Domain.ball(6.9).sample(rng, 500)
    ys = rng.uniform(0.05, 0.95, size=500)
    ps = rng.uniform(P_MIN, 0.99, size=500)
    compared = 0
    for x, y, p in zip(xs, ys, ps):
        H = u_hessian(kappa_model, x, y, p)
        full = numpy.linalg.eigvalsh(H)[0] / numpy.abs(H).max()
        diag = m_matrix_psd(kappa_model, x, y, p)
        m = diag.m_eig_min / max(diag.phi1, diag.phi2)
        if abs(full) < 1e-8 or abs(m) < 1e-8:
            continue
        assert (full > 0) == (m > 0)
        compared += 1
    assert compared > 250
