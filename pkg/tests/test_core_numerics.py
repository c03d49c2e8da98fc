import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from dickman.core_numerics import (
    EULER_GAMMA,
    DickmanParams,
    build_tables,
    cached_table,
    cdf_via_recursion,
    cumulant,
    laplace,
    normalizing_constant,
    rho,
    rho_first_steps,
)
from dickman.errors import CapabilityError, ParameterDomainError
from dickman.inversions import SubsetScheme
from dickman.mixing import MixingLaw

ONE = MixingLaw.point_mass_one()


def test_rho_at_two_closed_forms():
    assert rho(DickmanParams(1.0), 2.0) == pytest.approx(1 - math.log(2), abs=1e-12)
    assert rho(DickmanParams(2.0), 2.0) == pytest.approx(4 - 4 * math.log(2), abs=1e-12)


def test_rho_unit_interval_is_power():
    x = np.linspace(0.05, 1.0, 20)
    assert np.allclose(rho_first_steps(0.5, x), x**-0.5, rtol=1e-15)


def test_rho_one_known_values():
    # classical values of the Dickman function
    assert rho(1.0, 3.0) == pytest.approx(0.04860838829, rel=1e-9)
    assert rho(1.0, 4.0) == pytest.approx(0.004910925648, rel=1e-9)
    assert rho(1.0, 10.0) == pytest.approx(2.770171838e-11, rel=1e-8)


def test_second_interval_series_matches_quadrature():
    # rho(x) = x^(theta-1) (1 - theta int_1^x (t-1)^(theta-1) t^(-theta) dt) on (1, 2]
    for theta in (0.3, 1.0, 2.5):
        for x in (1.2, 1.7, 2.0):
            integral, _ = quad(lambda t: (t - 1) ** (theta - 1) * t**-theta, 1, x)
            want = x ** (theta - 1) * (1 - theta * integral)
            assert rho_first_steps(theta, x) == pytest.approx(want, rel=1e-9)


def test_total_mass_of_rho_one_is_exp_gamma():
    table = build_tables(DickmanParams(1.0))
    assert table.integral_rho(20.0) == pytest.approx(math.exp(EULER_GAMMA), abs=1e-10)


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 4.0])
def test_cdf_reaches_one(theta):
    table = cached_table(theta, 40.0)
    assert abs(table.total_mass() - 1.0) < 1e-9
    assert table.total_mass() <= 1.0 + 1e-12


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_two_routes_agree(theta):
    a = build_tables(DickmanParams(theta))
    b = cdf_via_recursion(DickmanParams(theta))
    xs = np.linspace(0, 20, 2001)
    assert np.max(np.abs(a.cdf(xs) - b.cdf(xs))) < 1e-10


@pytest.mark.parametrize("theta", [0.5, 1.0, 3.0])
def test_delay_equation_residual(theta):
    table = cached_table(theta)
    x = np.linspace(1.05, 19.5, 300)
    h = 1e-5
    deriv = (table.rho(x + h) - table.rho(x - h)) / (2 * h)
    residual = x * deriv + (1 - theta) * table.rho(x) + theta * table.rho(x - 1)
    scale = np.abs(x * deriv) + np.abs(table.rho(x)) + np.abs(table.rho(x - 1))
    assert np.max(np.abs(residual) / scale) < 1e-6


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_cdf_step_identity(theta):
    # F(x) = F(x-1) + x p(x) / theta
    table = cached_table(theta)
    x = np.linspace(1.0, 20.0, 97)
    lhs = table.cdf(x)
    rhs = table.cdf(x - 1) + x * table.density(x) / theta
    assert np.max(np.abs(lhs - rhs)) < 1e-12


@given(st.floats(0.1, 5.0), st.floats(0.01, 19.9), st.floats(0.01, 19.9))
def test_cdf_monotone(theta, x, y):
    table = cached_table(round(theta, 2))
    lo, hi = sorted((x, y))
    assert table.cdf(lo) <= table.cdf(hi) + 1e-15
    assert 0.0 <= table.cdf(lo) <= 1.0 + 1e-12


@given(st.floats(0.2, 1.0))
def test_rho_positive_and_decreasing_small_theta(theta):
    table = cached_table(round(theta, 2))
    x = np.linspace(0.05, 20.0, 400)
    r = table.rho(x)
    assert np.all(r > 0)
    assert np.all(np.diff(r) <= 1e-15)


@given(st.floats(1.0, 4.0))
def test_rho_rises_then_falls_large_theta(theta):
    # slope at 1+ is (theta - 1), so rho keeps rising past 1, then decays
    table = cached_table(round(theta, 2))
    r = table.rho(np.linspace(0.05, 20.0, 400))
    assert np.all(r > 0)
    peak = int(np.argmax(r))
    assert np.all(np.diff(r[peak:]) <= 1e-15)
    assert np.all(np.diff(r[: peak + 1]) >= -1e-15)


def test_quantile_inverts_cdf():
    table = cached_table(1.0)
    u = np.linspace(0.01, 0.99, 50)
    assert np.max(np.abs(table.cdf(table.quantile(u)) - u)) < 1e-10


def test_rho_beyond_table_raises():
    table = cached_table(1.0)
    with pytest.raises(ParameterDomainError):
        table.rho(25.0)


def test_rho_large_argument_extends_table():
    assert rho(1.0, 20.0) == pytest.approx(2.461782832e-29, rel=1e-7)
    assert rho(1.0, 25.0) > 0


def test_normalizing_constant():
    assert normalizing_constant(1.0) == pytest.approx(math.exp(-EULER_GAMMA))
    assert normalizing_constant(2.0) == pytest.approx(math.exp(-2 * EULER_GAMMA))


def test_bad_theta():
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ParameterDomainError):
            DickmanParams(bad)


def test_laplace_at_zero_is_exactly_one():
    for theta in (0.5, 1.0, 7.0):
        assert laplace(DickmanParams(theta), ONE, 0.0) == 1.0


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_laplace_matches_density_integral(theta):
    table = cached_table(theta, 40.0)
    lam = 0.7
    direct, _ = quad(lambda x: math.exp(-lam * x) * table.density(x), 0, 40, limit=400, points=list(range(1, 40)))
    assert laplace(DickmanParams(theta), ONE, lam) == pytest.approx(direct, rel=1e-8)


def test_laplace_mixing_point_mass_scales():
    # X == c gives D^(X) = c D
    mix = MixingLaw.finite_discrete([0.5])
    assert laplace(1.0, mix, 2.0) == pytest.approx(laplace(1.0, ONE, 1.0), rel=1e-12)


def test_laplace_rejects_negative_lambda():
    with pytest.raises(ParameterDomainError):
        laplace(1.0, ONE, -0.1)


def test_cumulants():
    assert cumulant(2.0, ONE, 1) == 2.0
    assert cumulant(2.0, ONE, 2) == 1.0
    mix = MixingLaw.finite_discrete([2 / 3, 4 / 3])
    assert cumulant(2.0, mix, 2) == pytest.approx((4 / 9 + 16 / 9) / 2)
    with pytest.raises(ParameterDomainError):
        cumulant(1.0, ONE, 0)


def test_cumulant_unavailable_without_atoms():
    with pytest.raises(CapabilityError):
        cumulant(1.0, MixingLaw.scheme_derived(SubsetScheme("full")), 2)


def test_recursion_rho_matches_steps_absolutely():
    a = cached_table(1.0)
    b = cdf_via_recursion(DickmanParams(1.0))
    x = np.linspace(2.5, 10, 31)
    assert np.max(np.abs(a.rho(x) - b.rho(x))) < 1e-8


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_first_moment_is_theta(theta):
    table = cached_table(theta, 40.0)
    total = 0.0
    for a in range(40):
        # rho has an integrable x^(theta-1) singularity at 0 for theta < 1
        val, _ = quad(lambda x: x * table.density(x), a, a + 1, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += val
    assert abs(total - theta) < 10 * 1e-10


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 3.0])
def test_delay_residual_at_random_points(theta):
    table = cached_table(theta)
    x = np.random.default_rng(int(theta * 10)).uniform(1.0, 19.9, 500)
    x = x[np.abs(x - np.round(x)) > 1e-3]  # derivatives jump at integer knots
    h = 1e-4
    r = table.rho
    deriv = (-r(x + 2 * h) + 8 * r(x + h) - 8 * r(x - h) + r(x - 2 * h)) / (12 * h)
    residual = x * deriv + (1 - theta) * r(x) + theta * r(x - 1)
    assert np.max(np.abs(residual) / (theta * r(x - 1))) <= 100 * 1e-10


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 3.0])
def test_normalization_window(theta):
    mass = build_tables(DickmanParams(theta), 20.0, 1e-10).total_mass()
    assert 1 - 1e-9 <= mass <= 1 + 4e-16


@pytest.mark.parametrize("theta", [0.5, 1.0, 3.0])
def test_density_decays_factorially(theta):
    table = cached_table(theta)
    x = np.linspace(2.0, 19.0, 200)
    growth = table.density(x + 1) * np.array([math.gamma(v + 2) for v in x]) / (
        table.density(x) * np.array([math.gamma(v + 1) for v in x]))
    assert np.all(np.isfinite(growth)) and growth.max() < 10.0
