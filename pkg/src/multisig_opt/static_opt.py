"""Optimal time-invariant threshold for the quadratic (k = 2) model."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CornerSolution
from .model import CurvatureParams, expected_static_loss, p_of, q_of, valid_domain


@dataclass(frozen=True)
class StaticSolution:
    tau_star: float
    loss_at_opt: float
    sosc_holds: bool
    domain_warning: bool
    corner: bool
    clamped: bool = False
    # Formula value before clamping to [0, 1]; None at a corner.
    unclamped: float | None = None

    def __post_init__(self):
        if self.corner and self.tau_star != 0:
            raise ValueError("corner solutions must have tau_star = 0")


def radicand_to_threshold(radicand: float) -> tuple[float, bool, bool]:
    """Map tau^2 to (tau, corner, clamped) on [0, 1]."""
    if radicand < 0:
        return 0.0, True, False
    if radicand > 1:
        return 1.0, False, True
    return math.sqrt(radicand), False, False


def foc_residual(tau: float, params: CurvatureParams, V: float = 1.0) -> float:
    """Derivative of the static expected loss at ``tau``."""
    params.require_quadratic()
    dp = -params.a * tau
    dq = -params.b * tau
    return 0.5 * V * (dp * q_of(tau, params) + p_of(tau, params) * dq) - V * dp


def check_sosc(tau: float, params: CurvatureParams, V: float = 1.0) -> bool:
    """Second-order sufficient condition for a local minimum at ``tau``."""
    params.require_quadratic()
    a, b = params.a, params.b
    return 0.5 * V * (3 * a * b * tau * tau - a - b) + V * a > 0


def optimal_static_threshold(params: CurvatureParams, V: float = 1.0) -> StaticSolution:
    """Closed-form minimiser sqrt((b - a) / (ab)) of the static expected loss.

    For ``b <= a`` the first-order condition has no interior root and the loss
    is increasing in tau, so the optimum is the corner tau = 0.  Values above 1
    are clamped and flagged.
    """
    params.require_quadratic()
    a, b = params.a, params.b
    radicand = (b - a) / (a * b)
    if radicand <= 0:
        tau, corner, clamped = 0.0, True, False
    else:
        tau, corner, clamped = radicand_to_threshold(radicand)
    return StaticSolution(
        tau_star=tau,
        loss_at_opt=expected_static_loss(tau, params, V),
        sosc_holds=check_sosc(tau, params, V),
        domain_warning=tau > valid_domain(params),
        corner=corner,
        clamped=clamped,
        unclamped=None if corner else math.sqrt(radicand),
    )


def static_sensitivities(params: CurvatureParams) -> tuple[float, float]:
    """Analytic partials (d tau*/da, d tau*/db) of the unclamped closed form."""
    params.require_quadratic()
    a, b = params.a, params.b
    if b <= a:
        raise CornerSolution(f"no interior optimum for b = {b} <= a = {a}")
    # tau* = sqrt(1/a - 1/b)
    tau = math.sqrt((b - a) / (a * b))
    return -1.0 / (2.0 * a * a * tau), 1.0 / (2.0 * b * b * tau)
