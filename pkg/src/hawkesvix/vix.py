"""Forward variance, variance swap, and the affine VIX^2 decomposition.

Under the shifted measure the conditional variance mean is affine in the
current state (v_s, lambda_s), so the 30-day variance swap -- and with it
VIX^2 -- collapses to

    VIX_t^2 = (A * v_t + B * lambda_t + C) * 100^2,

with constants A, B, C built from exponential averages of the two decay
rates kappa_a and beta - alpha.  The 100^2 scaling stays out of the
coefficients: A, B, C live in variance units and the factor 100 enters
only when quoting VIX points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NegativeVixSquared, SingularShift
from .params import SINGULAR_SHIFT_RTOL, MeasureShift, ModelParams

# Radicand values in [-_VIX_CLAMP, 0) are floating-point dust near degenerate
# parameters and clamp to zero; anything below raises.
_VIX_CLAMP = 1e-12


def exp_decay_average(k: float, h: float) -> float:
    """Time average of exp(-k u) over [0, h]: (1 - e^{-kh}) / (kh).

    Strictly decreasing in k, with values in (0, 1).  For kh < 1e-4 the
    alternating series 1 - kh/2 + (kh)^2/6 - (kh)^3/24 avoids the
    cancellation in the direct quotient.
    """
    x = k * h
    if x < 1e-4:
        return 1.0 - x / 2.0 + x**2 / 6.0 - x**3 / 24.0
    return (1.0 - math.exp(-x)) / x


def _check_not_singular(shift: MeasureShift, p: ModelParams) -> float:
    gap = p.beta - p.alpha
    if abs(shift.kappa_a - gap) <= SINGULAR_SHIFT_RTOL * max(1.0, gap):
        raise SingularShift(
            f"kappa_a = {shift.kappa_a} collides with beta - alpha = {gap}"
        )
    return gap


def jump_feed_constants(
    shift: MeasureShift, p: ModelParams, jump_mean: float
) -> tuple[float, float, float]:
    """Constants (C1, C2, C3) feeding the affine variance-mean formulas.

    C1 = eta*E[J] / (kappa_a - (beta-alpha)), C2 = C1 * beta * lambda0,
    C3 = eta*E[J]*beta*lambda0 / (kappa_a*(beta-alpha)) + vbar_a.
    """
    gap = _check_not_singular(shift, p)
    drive = p.eta * jump_mean
    c1 = drive / (shift.kappa_a - gap)
    c2 = c1 * p.beta * p.lambda0
    c3 = drive * p.beta * p.lambda0 / (shift.kappa_a * gap) + shift.vbar_a
    return c1, c2, c3


def forward_variance(
    shift: MeasureShift,
    p: ModelParams,
    jump_mean: float,
    s: float,
    t: float,
    v_s: float,
    lambda_s: float,
) -> float:
    """Conditional mean of v_t given the time-s state, 0 <= s <= t.

    Affine in (v_s, lambda_s):
        D1(h) v_s + D2(h) lambda_s + D3(h),  h = t - s,
    with D1(h) = e^{-kappa_a h}, D2(h) = C1 (e^{-(beta-alpha) h} - e^{-kappa_a h}),
    D3(h) = (C2/kappa_a - vbar_a) e^{-kappa_a h} - C2/(beta-alpha) e^{-(beta-alpha) h} + C3.
    """
    if not 0 <= s <= t:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    gap = p.beta - p.alpha
    c1, c2, c3 = jump_feed_constants(shift, p, jump_mean)
    h = t - s
    e_k = math.exp(-shift.kappa_a * h)
    e_g = math.exp(-gap * h)
    d1 = e_k
    d2 = c1 * (e_g - e_k)
    d3 = (c2 / shift.kappa_a - shift.vbar_a) * e_k - c2 / gap * e_g + c3
    return d1 * v_s + d2 * lambda_s + d3


def forward_intensity(p: ModelParams, h: float, lambda_s: float) -> float:
    """Conditional mean of the Hawkes intensity h years ahead of state lambda_s.

    (lambda_s - beta*lambda0/(beta-alpha)) e^{-(beta-alpha) h}
        + beta*lambda0/(beta-alpha); measure-shift invariant.
    """
    gap = p.beta - p.alpha
    steady = p.beta * p.lambda0 / gap
    return (lambda_s - steady) * math.exp(-gap * h) + steady


def variance_swap(
    shift: MeasureShift,
    p: ModelParams,
    jump_mean: float,
    s: float,
    t: float,
    v_s: float,
    lambda_s: float,
) -> float:
    """Time average of the forward variance over [s, t], s < t.

    K1(h) v_s + K2(h) lambda_s + K3(h) where each K replaces the
    exponentials of the forward variance by their [0, h] time averages.
    """
    if not 0 <= s < t:
        raise ValueError(f"need 0 <= s < t, got s={s}, t={t}")
    k1, k2, k3 = _swap_coefficients(shift, p, jump_mean, t - s)
    return k1 * v_s + k2 * lambda_s + k3


def _swap_coefficients(
    shift: MeasureShift, p: ModelParams, jump_mean: float, h: float
) -> tuple[float, float, float]:
    gap = p.beta - p.alpha
    c1, c2, c3 = jump_feed_constants(shift, p, jump_mean)
    a_k = exp_decay_average(shift.kappa_a, h)
    a_g = exp_decay_average(gap, h)
    k1 = a_k
    k2 = c1 * (a_g - a_k)
    k3 = (c2 / shift.kappa_a - shift.vbar_a) * a_k - c2 / gap * a_g + c3
    return k1, k2, k3


@dataclass(frozen=True)
class VixCoefficients:
    """VIX^2 = (A v + B lambda + C) * 100^2 over the window ``delta``.

    C1, C2, C3 are the intermediate jump-feed constants; A > 0 always and
    B > 0 whenever the jump feed eta*E[J] is positive (B = 0 in the pure
    Heston limit eta = 0).
    """

    A: float
    B: float
    C: float
    C1: float
    C2: float
    C3: float
    delta: float


def vix_coefficients(
    shift: MeasureShift, p: ModelParams, jump_mean: float
) -> VixCoefficients:
    """Variance-swap coefficients at the VIX window: A = K1(delta), etc."""
    k1, k2, k3 = _swap_coefficients(shift, p, jump_mean, p.delta)
    c1, c2, c3 = jump_feed_constants(shift, p, jump_mean)
    if not k1 > 0:
        raise NegativeVixSquared(f"variance loading A = {k1} must be positive")
    if p.eta * jump_mean > 0 and not k2 > 0:
        raise NegativeVixSquared(f"intensity loading B = {k2} must be positive")
    return VixCoefficients(A=k1, B=k2, C=k3, C1=c1, C2=c2, C3=c3, delta=p.delta)


def vix_value(coeffs: VixCoefficients, v: float, lam: float) -> float:
    """VIX in index points: 100 * sqrt(A v + B lambda + C).

    The radicand equals a conditional expectation of positive variance, so
    true negatives signal inconsistent inputs; values in [-1e-12, 0) clamp
    to zero as floating-point dust.
    """
    radicand = coeffs.A * v + coeffs.B * lam + coeffs.C
    if radicand < -_VIX_CLAMP:
        raise NegativeVixSquared(
            f"VIX^2 radicand {radicand} is negative beyond tolerance"
        )
    return 100.0 * math.sqrt(max(radicand, 0.0))
