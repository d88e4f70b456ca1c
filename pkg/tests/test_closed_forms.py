import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralforge.closed_forms import (
    PoleSet,
    dfd_dlambda,
    dfn_dlambda,
    eval_fd,
    eval_fn,
    pole_guard,
    solve_lambda_d,
    solve_lambda_n,
)
from spectralforge.errors import DomainError, PoleError

# 40-digit mpmath evaluations of the closed forms
FD_1_M4 = -5.252141141997325214544644987723391331648  # -4 coth(1)
FN_1_M1 = -0.9242343145200195170046369672873450974606  # -2 tanh(1/2)
LN_M4_1 = -5.756915359562580603103919
LD_3_1 = 15.05038044759768889420776

lengths = st.floats(1e-3, 10.0)
strengths = st.floats(-1e3, 1e3)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


# ---- evaluation ------------------------------------------------------------


def test_fd_negative_branch():
    assert rel(eval_fd(1.0, -4.0), FD_1_M4) < 1e-14


def test_fn_negative_branch():
    assert rel(eval_fn(1.0, -1.0), FN_1_M1) < 1e-14


def test_fd_zero_and_first_node():
    assert eval_fd(1.0, 0.0) == -4.0
    assert abs(eval_fd(2.0, (math.pi / 2) ** 2)) < 1e-14


def test_fn_zero_and_tan_value():
    assert eval_fn(1.0, 0.0) == 0.0
    assert rel(eval_fn(1.0, (math.pi / 2) ** 2), math.pi) < 1e-14


def test_fd_limit_at_minus_infinity():
    assert eval_fd(1.0, -1e12) < -1e5


@given(lengths, st.floats(-1e-6, 1e-6))
def test_series_branch_is_continuous(d, lam):
    # the series and trigonometric branches must meet near zero
    x2 = 0.25 * d * d * lam
    exact = -(4.0 / d) * (1.0 - x2 / 3.0 - x2 * x2 / 45.0)
    assert rel(eval_fd(d, lam), exact) < 1e-12


def test_pole_guard_raises():
    d = 1.0
    with pytest.raises(PoleError):
        eval_fd(d, (2 * math.pi) ** 2)
    with pytest.raises(PoleError):
        eval_fn(d, math.pi**2 + 1e-12)
    assert pole_guard("D", d) > 0.0


def test_bad_length():
    with pytest.raises(DomainError):
        eval_fd(0.0, 1.0)
    with pytest.raises(DomainError):
        eval_fn(-1.0, 1.0)


def test_pole_sets():
    p = PoleSet("D", 1.0)
    assert p.below(200.0) == pytest.approx([(2 * math.pi) ** 2, (4 * math.pi) ** 2])
    q = PoleSet("N", 2.0)
    assert q.pole(1) == pytest.approx((math.pi / 2) ** 2)
    assert (math.pi / 2) ** 2 not in q.branch(0)
    assert 0.0 in q.branch(0)
    with pytest.raises(DomainError):
        PoleSet("X", 1.0)


# ---- monotonicity and derivatives ---------------------------------------------


@settings(max_examples=200)
@given(lengths, st.floats(0.0, 0.999))
def test_fd_increasing_on_first_branch(d, frac):
    pole = (2 * math.pi / d) ** 2
    lo = -pole + frac * 2 * pole * 0.999
    hi = lo + 1e-3 * pole
    assert eval_fd(d, lo, guard=0.0) < eval_fd(d, hi, guard=0.0)


@settings(max_examples=200)
@given(lengths, st.floats(-0.9, 0.9))
def test_derivatives_match_differences(d, frac):
    for f, df, pole in (
        (eval_fd, dfd_dlambda, (2 * math.pi / d) ** 2),
        (eval_fn, dfn_dlambda, (math.pi / d) ** 2),
    ):
        lam = frac * pole
        h = 1e-6 * max(1.0, abs(pole))
        fd = (f(d, lam + h, guard=0.0) - f(d, lam - h, guard=0.0)) / (2 * h)
        assert df(d, lam) == pytest.approx(fd, rel=1e-4, abs=1e-8)


# ---- inverse --------------------------------------------------------------


def test_solve_examples():
    assert solve_lambda_d(0.0, 1.0) == pytest.approx(math.pi**2, rel=1e-13)
    assert abs(solve_lambda_d(-4.0, 1.0)) < 1e-12
    assert solve_lambda_d(-100.0, 10.0) == pytest.approx(-2500.0, rel=1e-12)
    assert abs(solve_lambda_n(0.0, 1.0)) < 1e-13
    assert solve_lambda_n(-2 * math.tanh(0.5), 1.0) == pytest.approx(-1.0, rel=1e-13)
    assert solve_lambda_n(math.pi, 1.0) == pytest.approx((math.pi / 2) ** 2, rel=1e-13)


def test_solve_against_independent_roots():
    assert rel(solve_lambda_n(-4.0, 1.0), LN_M4_1) < 1e-13
    assert rel(solve_lambda_d(3.0, 1.0), LD_3_1) < 1e-13


@settings(max_examples=300)
@given(strengths, lengths)
def test_round_trip(alpha, d):
    lam = solve_lambda_d(alpha, d)
    assert lam < (2 * math.pi / d) ** 2
    assert abs(eval_fd(d, lam, guard=0.0) - alpha) <= 1e-8 * max(1.0, abs(alpha))
    lam = solve_lambda_n(alpha, d)
    assert lam < (math.pi / d) ** 2
    assert abs(eval_fn(d, lam, guard=0.0) - alpha) <= 1e-8 * max(1.0, abs(alpha))


@settings(max_examples=100)
@given(strengths, strengths, lengths)
def test_inverse_is_increasing(a, b, d):
    if a == b:
        return
    lo, hi = sorted((a, b))
    assert solve_lambda_d(lo, d) <= solve_lambda_d(hi, d)
    assert solve_lambda_n(lo, d) <= solve_lambda_n(hi, d)


def test_bad_tolerance():
    with pytest.raises(DomainError):
        solve_lambda_d(0.0, 1.0, tol=0.0)
