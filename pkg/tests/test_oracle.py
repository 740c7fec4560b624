import math

import numpy as np
import pytest

from multisig_opt.errors import DivergentIntegral, InvalidParameter
from multisig_opt.model import CurvatureParams, DecayParams, Regime, StageInterval
from multisig_opt.oracle import (
    GridSpec,
    IntegrandSpec,
    direct_minimize_schedule,
    finite_diff,
    grid_minimize_static,
    quadrature,
)


def test_grid_spec_values():
    assert np.allclose(GridSpec(0.0, 1.0, step=0.25).values(), [0, 0.25, 0.5, 0.75, 1.0])
    assert GridSpec(0.0, 1.0, points=5).spacing == 0.25
    with pytest.raises(InvalidParameter):
        GridSpec(1.0, 0.0, step=0.1)
    with pytest.raises(InvalidParameter):
        GridSpec(0.0, 1.0)


def test_grid_static_ties_go_low():
    # b <= a: loss rises from tau = 0, so argmin is exactly 0
    assert grid_minimize_static(CurvatureParams(2.0, 1.0), 1.0, GridSpec(0, 1, step=0.01)) == 0.0


def test_quadrature_known_integrals():
    decay = DecayParams(0.5, 0.0)
    res = quadrature(IntegrandSpec(decay, StageInterval(0.0, math.inf), attacker=False), tol=1e-12)
    assert res.value == pytest.approx(2.0, rel=1e-10)
    assert res.truncated_at is not None
    fin = quadrature(IntegrandSpec(decay, StageInterval(0.0, 2.0), attacker=False))
    assert fin.value == pytest.approx(2 * (1 - math.exp(-1)), rel=1e-10)
    assert fin.truncated_at is None


def test_quadrature_diverges():
    spec = IntegrandSpec(DecayParams(0.1, 0.2, Regime.GROWTH), StageInterval(0.0, math.inf))
    with pytest.raises(DivergentIntegral):
        quadrature(spec)


def test_finite_diff_on_polynomial():
    assert finite_diff(lambda x: x**3, 2.0, 1e-4) == pytest.approx(12.0, rel=1e-7)


def test_direct_minimize_limits():
    with pytest.raises(InvalidParameter):
        direct_minimize_schedule(4, CurvatureParams(1, 2), DecayParams(0.1, 0.05))


def test_direct_minimize_single_stage_matches_closed_form_benchmark():
    # y/Z = 1.5 at (0.1, 0.05), so tau = sqrt(0.2) for (a, b) = (1, 2.5)
    sched = direct_minimize_schedule(1, CurvatureParams(1.0, 2.5), DecayParams(0.1, 0.05))
    assert sched.taus[0] == pytest.approx(math.sqrt(0.2), abs=1e-4)
    assert sched.objective == pytest.approx(-6.75, abs=1e-8)
