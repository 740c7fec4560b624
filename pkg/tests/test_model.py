import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisig_opt.errors import DivergentIntegral, InvalidParameter, UnsupportedExponent
from multisig_opt.model import (
    CurvatureParams,
    DecayParams,
    Regime,
    StageInterval,
    exp_integral,
    expected_loss_from_table,
    expected_static_loss,
    p_of,
    q_of,
    stage_weights,
    stage_weights_array,
    state_loss,
    valid_domain,
)
from multisig_opt.oracle import IntegrandSpec, quadrature

curv = st.floats(0.05, 20.0)
taus = st.floats(0.0, 1.0)


def test_loss_table():
    assert state_loss(1, 0, 10.0) == 0.0
    assert state_loss(0, 1, 10.0) == 10.0
    assert state_loss(0, 0, 10.0) == 10.0
    assert state_loss(1, 1, 10.0) == 5.0


def test_access_probabilities_at_endpoints():
    params = CurvatureParams(1.0, 2.5)
    assert p_of(0.0, params) == 1.0
    assert q_of(0.0, params) == 1.0
    assert p_of(1.0, params) == pytest.approx(0.5)
    assert q_of(1.0, params) == pytest.approx(-0.25)  # unclamped beyond the valid domain


def test_valid_domain():
    assert valid_domain(CurvatureParams(1.0, 2.5)) == pytest.approx(math.sqrt(0.8))
    assert valid_domain(CurvatureParams(1.0, 1.5)) == 1.0


@given(a=curv, b=curv, tau=taus, V=st.floats(0.01, 1e6))
def test_table_matches_closed_form(a, b, tau, V):
    params = CurvatureParams(a, b)
    table = expected_loss_from_table(tau, params, V)
    closed = expected_static_loss(tau, params, V)
    assert table == pytest.approx(closed, rel=1e-12, abs=1e-12 * V)


def test_static_loss_vectorised():
    params = CurvatureParams(1.0, 2.5)
    grid = np.linspace(0, 1, 11)
    vec = expected_static_loss(grid, params, 2.0)
    assert vec == pytest.approx([expected_static_loss(float(t), params, 2.0) for t in grid])


def test_rejects_bad_params():
    with pytest.raises(InvalidParameter):
        CurvatureParams(0.0, 1.0)
    with pytest.raises(InvalidParameter):
        CurvatureParams(1.0, math.nan)
    with pytest.raises(InvalidParameter):
        DecayParams(-0.1, 0.1)
    with pytest.raises(InvalidParameter):
        expected_static_loss(0.5, CurvatureParams(1, 2), 0.0)
    with pytest.raises(UnsupportedExponent):
        CurvatureParams(1.0, 2.0, k=3.0).require_quadratic()


def test_regime_from_string():
    assert DecayParams(0.1, 0.05, "growth").regime is Regime.GROWTH
    assert DecayParams(0.1, 0.05).attacker_rate == pytest.approx(0.15)
    assert DecayParams(0.1, 0.05, "growth").attacker_rate == pytest.approx(0.05)


def test_exp_integral_known_values():
    assert exp_integral(0.5, 0.0, math.inf) == pytest.approx(2.0, rel=1e-15)
    assert exp_integral(1.0, 0.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert exp_integral(0.0, 2.0, 5.0) == 3.0
    # growth-type (negative) rate on a finite interval: (e^{2} - 1) / 1
    assert exp_integral(-1.0, 0.0, 2.0) == pytest.approx(math.expm1(2.0), rel=1e-15)


def test_exp_integral_small_rate_is_stable():
    # Without expm1 this loses most of its digits.
    r = 1e-10
    assert exp_integral(r, 0.0, 1.0) == pytest.approx(1 - r / 2, rel=1e-15)


def test_exp_integral_divergent():
    with pytest.raises(DivergentIntegral):
        exp_integral(0.0, 0.0, math.inf)
    with pytest.raises(DivergentIntegral):
        exp_integral(-0.1, 0.0, math.inf)


@settings(max_examples=60, deadline=None)
@given(
    lam=st.floats(0.01, 1.0),
    gamma=st.floats(0.0, 1.0),
    start=st.floats(0.0, 30.0),
    length=st.floats(0.01, 50.0),
    regime=st.sampled_from(list(Regime)),
)
def test_stage_weights_match_quadrature(lam, gamma, start, length, regime):
    decay = DecayParams(lam, gamma, regime)
    iv = StageInterval(start, start + length)
    w = stage_weights(iv, decay)
    y = quadrature(IntegrandSpec(decay, iv, attacker=False), tol=1e-12).value
    z = quadrature(IntegrandSpec(decay, iv, attacker=True), tol=1e-12).value
    assert w.y == pytest.approx(y, rel=1e-8)
    assert w.Z == pytest.approx(z, rel=1e-8)


@given(lam=st.floats(0.0, 2.0), start=st.floats(0.0, 10.0), length=st.floats(0.01, 10.0),
       regime=st.sampled_from(list(Regime)))
def test_gamma_zero_weights_identical(lam, start, length, regime):
    w = stage_weights(StageInterval(start, start + length), DecayParams(lam, 0.0, regime))
    assert w.y == w.Z


@given(lam=st.floats(0.01, 1.0), gamma=st.floats(0.001, 1.0), start=st.floats(0.0, 10.0),
       length=st.floats(0.01, 10.0))
def test_attacker_weight_ordering(lam, gamma, start, length):
    iv = StageInterval(start, start + length)
    decay = stage_weights(iv, DecayParams(lam, gamma, Regime.DECAY))
    growth = stage_weights(iv, DecayParams(lam, gamma, Regime.GROWTH))
    assert decay.Z <= decay.y <= growth.Z


@given(lam=st.floats(0.01, 1.0), gamma=st.floats(0.0, 1.0), start=st.floats(0.0, 10.0),
       a=st.floats(0.01, 5.0), b=st.floats(0.01, 5.0))
def test_weights_monotone_in_interval(lam, gamma, start, a, b):
    decay = DecayParams(lam, gamma)
    short, long_ = sorted((a, b))
    ws = stage_weights(StageInterval(start, start + short), decay)
    wl = stage_weights(StageInterval(start, start + long_), decay)
    assert ws.y <= wl.y and ws.Z <= wl.Z


def test_stage_weights_array_matches_scalar():
    decay = DecayParams(0.2, 0.1)
    ends = np.array([1.0, 3.0, 10.0, math.inf])
    arr = stage_weights_array(0.5, ends, decay)
    for i, end in enumerate(ends):
        w = stage_weights(StageInterval(0.5, float(end)), decay)
        assert arr.y[i] == pytest.approx(w.y, rel=1e-14)
        assert arr.Z[i] == pytest.approx(w.Z, rel=1e-14)


def test_interval_validation():
    with pytest.raises(InvalidParameter):
        StageInterval(2.0, 1.0)
    assert StageInterval(1.0).infinite
