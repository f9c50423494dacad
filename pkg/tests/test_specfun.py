import numpy
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evconvex import specfun
from evconvex.errors import DomainError


@pytest.mark.parametrize("x", numpy.linspace(0.1, 30, 40))
def test_bessel_half_order_closed_form(x):
    expected = numpy.sqrt(numpy.pi / (2 * x)) * numpy.exp(-x)
    assert specfun.bessel_k(0.5, x) == pytest.approx(expected, rel=1e-10)


@settings(max_examples=100, deadline=None)
@given(
    nu=st.floats(-10, 10, allow_nan=False),
    x=st.floats(0.05, 50, allow_nan=False),
)
def test_bessel_symmetry(nu, x):
    assert specfun.bessel_k(nu, x) == pytest.approx(specfun.bessel_k(-nu, x), rel=1e-12)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.3, 2.0, 4.7])
@pytest.mark.parametrize("x", [0.2, 1.0, 3.0, 10.0])
def test_bessel_derivative_recurrence(nu, x):
    # K'_nu(x) = -(K_{nu-1}(x) + K_{nu+1}(x)) / 2
    h = 1e-5 * x
    fd = (specfun.bessel_k(nu, x + h) - specfun.bessel_k(nu, x - h)) / (2 * h)
    rec = -0.5 * (specfun.bessel_k(nu - 1, x) + specfun.bessel_k(nu + 1, x))
    assert fd == pytest.approx(rec, rel=1e-6)


def test_bessel_underflow():
    ev = specfun.bessel_k_eval(1.0, 800.0)
    assert ev.method == "scaled"
    assert specfun.bessel_k(1.0, 800.0) == 0.0
    assert specfun.bessel_k_scaled(1.0, 800.0) > 0
    assert specfun.log_bessel_k(1.0, 800.0) == pytest.approx(
        numpy.log(specfun.bessel_k_scaled(1.0, 800.0)) - 800.0
    )
    assert specfun.bessel_k_eval(1.0, 1.0).method == "direct"


def test_bessel_domain():
    with pytest.raises(DomainError):
        specfun.bessel_k(1.0, 0.0)
    with pytest.raises(DomainError):
        specfun.bessel_k(numpy.inf, 1.0)
    with pytest.raises(DomainError):
        specfun.bessel_k_ratio(1.0, -1.0)


@pytest.mark.parametrize("nu", [0.0, 0.5, 2.0])
def test_bessel_asymptotics(nu):
    assert specfun.bessel_k_small(nu, 1e-6) == pytest.approx(specfun.bessel_k(nu, 1e-6), rel=1e-3)
    assert specfun.bessel_k_large(nu, 200.0) == pytest.approx(
        specfun.bessel_k_scaled(nu, 200.0) * numpy.exp(-200.0), rel=1e-3
    )


def test_bessel_ratio():
    assert specfun.bessel_k_ratio(0.0, 3.0) == 1.0
    s = 2.5
    assert specfun.bessel_k_ratio(1.0, s) == pytest.approx(
        specfun.bessel_k(0.5, s) / specfun.bessel_k(1.5, s), rel=1e-12
    )


@pytest.mark.parametrize("lam", [-1.0, 0.5, 2.0])
def test_bessel_ratio_limit(lam):
    big_lambda, chi = 1.0, 1.0
    limit = 2 * lam / big_lambda

    def scaled_gap(t):
        j = specfun.bessel_k_ratio(lam, big_lambda * numpy.sqrt(chi + t * t))
        return t * (1 - j * j)

    near, far = scaled_gap(1e3), scaled_gap(1e4)
    assert far == pytest.approx(limit, rel=2e-2)
    assert abs(far - limit) <= abs(near - limit)


def test_cdfs():
    assert specfun.gaussian_cdf(0.0) == 0.5
    assert specfun.gaussian_cdf(100.0) == 1.0
    assert specfun.gaussian_cdf(-100.0) == 0.0
    with pytest.raises(DomainError):
        specfun.gaussian_cdf(numpy.nan)
    # Student t2 has F(t) = 1/2 + t / (2 sqrt(2 + t^2))
    for t in (-3.0, 0.5, 2.0):
        assert specfun.student_cdf(2, t) == pytest.approx(0.5 + t / (2 * numpy.sqrt(2 + t * t)), rel=1e-12)
    with pytest.raises(DomainError):
        specfun.student_cdf(0, 1.0)


def test_student_pdf_cauchy():
    assert specfun.student_pdf(1, 2.0) == pytest.approx(1 / (numpy.pi * 5), rel=1e-12)


def test_log_gamma():
    assert specfun.log_gamma(5.0) == pytest.approx(numpy.log(24.0), rel=1e-14)
    with pytest.raises(DomainError):
        specfun.log_gamma(0.0)
