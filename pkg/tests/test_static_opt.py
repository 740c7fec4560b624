import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from multisig_opt.errors import CornerSolution, UnsupportedExponent
from multisig_opt.model import CurvatureParams, expected_static_loss
from multisig_opt.oracle import GridSpec, finite_diff, grid_minimize_static
from multisig_opt.static_opt import (
    check_sosc,
    foc_residual,
    optimal_static_threshold,
    radicand_to_threshold,
    static_sensitivities,
)


def test_reference_point():
    sol = optimal_static_threshold(CurvatureParams(1.0, 2.5))
    assert sol.tau_star == pytest.approx(math.sqrt(0.6), rel=1e-15)
    # p = 0.7, q = 0.25 -> 0.5 * 0.175 + 0.3
    assert sol.loss_at_opt == pytest.approx(0.3875, rel=1e-14)
    assert sol.sosc_holds and not sol.corner and not sol.domain_warning


def test_grid_oracle_agrees_at_reference_point():
    params = CurvatureParams(1.0, 2.5)
    argmin = grid_minimize_static(params, 1.0, GridSpec(0.0, 1.0, step=1e-5))
    assert abs(argmin - optimal_static_threshold(params).tau_star) <= 2e-5


def test_corner_when_b_not_above_a():
    for a, b in ((2.0, 1.0), (1.5, 1.5)):
        sol = optimal_static_threshold(CurvatureParams(a, b))
        assert sol.tau_star == 0.0 and sol.corner
        assert sol.loss_at_opt == pytest.approx(0.5)


def test_clamped_when_root_above_one():
    # (b - a) / (ab) = 0.9 / 0.1 = 9
    sol = optimal_static_threshold(CurvatureParams(0.1, 1.0))
    assert sol.tau_star == 1.0 and sol.clamped and sol.unclamped == pytest.approx(3.0)


def test_radicand_mapping():
    assert radicand_to_threshold(-0.5) == (0.0, True, False)
    assert radicand_to_threshold(0.25) == (0.5, False, False)
    assert radicand_to_threshold(4.0) == (1.0, False, True)


@given(a=st.floats(0.1, 5.0), gap=st.floats(0.01, 10.0), V=st.floats(0.1, 100.0))
def test_foc_and_sosc_at_interior_optimum(a, gap, V):
    params = CurvatureParams(a, a + gap)
    sol = optimal_static_threshold(params, V)
    if sol.clamped:
        return
    assert abs(foc_residual(sol.tau_star, params, V)) < 1e-9 * V
    assert check_sosc(sol.tau_star, params, V)


@given(a=st.floats(0.2, 5.0), gap=st.floats(0.05, 10.0))
def test_optimum_beats_neighbours(a, gap):
    params = CurvatureParams(a, a + gap)
    sol = optimal_static_threshold(params)
    for t in (sol.tau_star - 1e-3, sol.tau_star + 1e-3):
        if 0 <= t <= 1:
            assert expected_static_loss(t, params, 1.0) >= sol.loss_at_opt - 1e-15


def test_sensitivities_match_finite_differences():
    a, b = 1.0, 2.5
    da, db = static_sensitivities(CurvatureParams(a, b))
    tau = lambda a_, b_: optimal_static_threshold(CurvatureParams(a_, b_)).tau_star  # noqa: E731
    assert da == pytest.approx(finite_diff(lambda x: tau(x, b), a, 1e-5), rel=1e-6)
    assert db == pytest.approx(finite_diff(lambda x: tau(a, x), b, 1e-5), rel=1e-6)
    assert da < 0 < db


def test_sensitivities_undefined_at_corner():
    with pytest.raises(CornerSolution):
        static_sensitivities(CurvatureParams(2.0, 1.0))


def test_only_quadratic_supported():
    with pytest.raises(UnsupportedExponent):
        optimal_static_threshold(CurvatureParams(1.0, 2.5, k=3.0))
