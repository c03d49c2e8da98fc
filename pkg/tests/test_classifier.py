from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dickman.acceptance import classifier_table
from dickman.classifier import (
    DEGENERATE,
    DICKMAN,
    INVALID,
    classify_shuffle,
    classify_theorem2,
    dickman_conditions_hold,
    kappa_indices,
    ratio_bounded,
)
from dickman.inversions import SubsetScheme, scheme_to_limit_inputs
from dickman.mixing import MixingLaw
from dickman.schedules import MuSchedule, PSchedule, validate_nontriv


@pytest.mark.parametrize("row", classifier_table(), ids=lambda r: r[0])
def test_decision_table(row):
    _, got, want = row
    assert got.kind == want.kind
    assert got.theta == want.theta and got.L == want.L and got.c == want.c


def test_records():
    v = classify_theorem2(MuSchedule(1, (0, 1)), PSchedule(1, (1, 1)))
    assert v.to_record() == {"kind": "Dickman", "theta": 1, "L": 1}
    v = classify_theorem2(MuSchedule(2, (1,)), PSchedule(0.5, (1,)))
    assert v.to_record() == {"kind": "Dickman", "theta": 0.5, "L": 2}
    assert classify_theorem2(MuSchedule(1, (0,)), PSchedule(1, (1,))).to_record() == {"kind": "Degenerate", "c": 1}
    assert classify_theorem2(MuSchedule(1, (1,)), PSchedule(1, (2,))).to_record()["kind"] == "Invalid"


def test_theta_is_ratio_of_constants():
    v = classify_theorem2(MuSchedule(1, (0, 0.25)), PSchedule(3, (1, 1)))
    assert v.theta == Fraction(12) and v.L * v.theta == 1


def test_kappa():
    k = kappa_indices(MuSchedule(1, (0, 0.5)), PSchedule(1, (1, 2)))
    assert (k.kappa_mu, k.kappa_p) == (1, 1)
    k = kappa_indices(MuSchedule(1, (0,)), PSchedule(1, (1,)))
    assert (k.kappa_mu, k.kappa_p) == (None, None)


def test_equal_kappas_fall_to_one():
    # kappa_mu = kappa_p = 1 with a_1 > 0: the "otherwise" branch gives c = 1
    v = classify_theorem2(MuSchedule(1, (0, 1)), PSchedule(1, (1, 0.5)))
    assert v.kind == DEGENERATE and v.c == 1


def test_zero_last_exponent_is_invalid():
    assert classify_theorem2(MuSchedule(1, (1,)), PSchedule(1, (1, 0))).kind == INVALID


exps = st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0, 2.0])


@given(st.lists(exps, min_size=1, max_size=3), st.lists(exps, min_size=1, max_size=3),
       st.sampled_from([0.5, 1.0, 2.0]), st.sampled_from([0.5, 1.0, 3.0]))
def test_verdicts_consistent(a, b, c_mu, c_p):
    mu, p = MuSchedule(c_mu, tuple(a)), PSchedule(c_p, tuple(b))
    v = classify_theorem2(mu, p)
    valid = p.well_shaped and validate_nontriv(mu, p).ok
    if not valid:
        assert v.kind == INVALID
    elif dickman_conditions_hold(mu, p):
        assert v.kind == DICKMAN and v.L * v.theta == 1
    else:
        assert v.kind == DEGENERATE and v.c in (0, 1)


def test_shuffle_pipeline():
    top = classify_shuffle(*scheme_to_limit_inputs(SubsetScheme("top")))
    assert top.kind == DICKMAN and top.theta == 1 and top.L == 1
    single = classify_shuffle(*scheme_to_limit_inputs(SubsetScheme("singleton")))
    assert single.kind == DEGENERATE and single.c == 1
    last3 = classify_shuffle(*scheme_to_limit_inputs(SubsetScheme("last_n", N=3)))
    assert last3.theta == 3 and last3.L == Fraction(1, 3)
    ratio = classify_shuffle(*scheme_to_limit_inputs(SubsetScheme("ratio", ratios=(0.5, 1.0))))
    assert ratio.theta == 2 and ratio.L == Fraction(1, 2) and ratio.mixing.atoms == pytest.approx((2 / 3, 4 / 3))


def test_shuffle_unestablished_is_invalid():
    # finite |E_k| with mu_k of order k^(-1/2): neither branch applies
    v = classify_shuffle(MuSchedule(1, (-0.5,)), 1, MixingLaw.point_mass_one())
    assert v.kind == INVALID


def test_ratio_bounded():
    assert ratio_bounded(MuSchedule(0.5, (1,)), 10**5)
    assert ratio_bounded(MuSchedule(1, (0,)), 10**5)  # ratio ~ 1/log n
    assert ratio_bounded(MuSchedule(1, (5,)), 10**5)  # ratio -> 5
