import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dickman.errors import CapabilityError, ParameterDomainError
from dickman.schedules import (
    MuSchedule,
    PSchedule,
    eval_mu,
    eval_p,
    mu_increment,
    prefix_mass,
    series_diverges,
    validate_nontriv,
)


def test_examples():
    assert eval_mu(MuSchedule(1, (1,)), 7) == 7.0
    # k log k at k = 10
    assert eval_mu(MuSchedule(1, (1, 1)), 10) == pytest.approx(10 * math.log(10))
    assert eval_p(PSchedule(1, (2,)), 2) == pytest.approx(0.25)
    assert eval_p(PSchedule(4, (1,)), 2) == 1.0  # clamped


def test_iterated_log_clamp_threshold():
    # log log k is clamped below k0 = 16 so the factor stays >= 1
    mu = MuSchedule(1, (0, 0, 1))
    assert mu.k0 == 16
    assert eval_mu(mu, 3) == eval_mu(mu, 16)
    assert eval_mu(mu, 100) == pytest.approx(math.log(math.log(100)))


def test_increment_matches_difference():
    mu = MuSchedule(1, (1, 1))
    k = 10_000
    diff = eval_mu(mu, k + 1) - eval_mu(mu, k)
    assert mu_increment(mu, k) == pytest.approx(diff, rel=1e-3)
    with pytest.raises(ParameterDomainError):
        mu_increment(MuSchedule(1, (0, 0, 1)), 5)


def test_prefix_mass():
    m = prefix_mass(MuSchedule(1, (1,)), PSchedule(1, (1,)), 1000)
    assert m(1000) == pytest.approx(1000.0)
    h = prefix_mass(MuSchedule(1, (0,)), PSchedule(1, (1,)), 10**6)
    assert h(10**6) == pytest.approx(14.392726722865, rel=1e-12)
    with pytest.raises(ParameterDomainError):
        m(1001)


def test_bertrand_scale():
    assert series_diverges((-1,))
    assert series_diverges((-1, -1))
    assert not series_diverges((-1, -1.01))
    assert not series_diverges((-2,))
    assert series_diverges((-0.5,))
    assert series_diverges((-1, -1, -1, -1))


def test_nontriv_reports():
    assert validate_nontriv(MuSchedule(1, (1,)), PSchedule(1, (1,))).ok
    bad = validate_nontriv(MuSchedule(1, (0,)), PSchedule(1, (2,)))
    assert not bad.ok and "sum of p_k converges" in bad.violations
    bounded = validate_nontriv(MuSchedule(1, (-1,)), PSchedule(1, (1,)))
    assert "M_n stays bounded" in bounded.violations


def test_depth_limits():
    # depth 4 clamps log k at e^(e^e), so only log-scale growth stays representable
    deep = MuSchedule(1, (0, 0, 0, 0, 1))
    assert np.allclose(deep.values(np.array([10.0, 1e6])), 1.0)
    with pytest.raises(CapabilityError):
        MuSchedule(1, (1, 0, 0, 0, 1)).values(10)
    with pytest.raises(CapabilityError):
        MuSchedule(1, (1, 0, 0, 0, 0, 1)).values(10)


def test_validation():
    with pytest.raises(ParameterDomainError):
        MuSchedule(0, (1,))
    with pytest.raises(ParameterDomainError):
        PSchedule(1, ())
    with pytest.raises(ParameterDomainError):
        MuSchedule(1, (1,)).values(0)


@given(st.floats(0.1, 3.0), st.floats(0.0, 2.0), st.integers(16, 10**6))
def test_p_in_unit_interval_and_monotone(c, b0, k):
    p = PSchedule(c, (b0, 1.0))
    v = p.values(np.array([k, k + 1], dtype=float))
    assert np.all((0 < v) & (v <= 1))
    assert v[1] <= v[0] + 1e-15


@given(st.floats(0.0, 2.0), st.floats(-1.0, 1.0))
def test_mu_positive(a0, a1):
    v = MuSchedule(1.0, (a0, a1)).values(np.arange(1, 200, dtype=float))
    assert np.all(v > 0)


@pytest.mark.parametrize("a", [(1.0,), (1.0, 1.0), (0.5, -2.0), (2.0, 0.0, 1.0)])
@pytest.mark.parametrize("k", [10**3, 10**5])
def test_increment_consistency(a, k):
    mu = MuSchedule(1.0, a)
    diff = eval_mu(mu, k + 1) - eval_mu(mu, k)
    assert diff / mu_increment(mu, k) == pytest.approx(1.0, abs=0.05)


def _partial_sums(d, n):
    k = np.arange(1, n + 1, dtype=float)
    log_k = np.maximum(np.log(k), 1.0)
    terms = k ** d[0]
    if len(d) > 1:
        terms = terms * log_k ** d[1]
    return np.cumsum(terms)


@given(st.sampled_from([-2.0, -1.5, -0.5, 0.0]), st.sampled_from([-1.0, 0.0, 1.0]))
def test_series_diverges_against_partial_sums(d0, d1):
    s = _partial_sums((d0, d1), 10**7)
    growth = s[-1] / s[10**5 - 1]
    # away from d0 = -1 the regimes separate cleanly at 1e7; the boundary is covered analytically
    assert series_diverges((d0, d1)) == (growth > 1.5)
    assert (growth < 1.1) or series_diverges((d0, d1))


def test_log_scale_prefix_ratio_tends_to_one():
    m = prefix_mass(MuSchedule(1, (0,)), PSchedule(1, (1,)), 2 * 10**6)
    r_small = m(10**3) / m(2 * 10**3)
    r_large = m(10**6) / m(2 * 10**6)
    assert r_small < r_large < 1
