"""Model parameters and admissibility of the risk-neutral measure family.

The model: Heston variance dv = -kappa (v - vbar) dt + sigma sqrt(v) dW
plus eta dL, where L is a compound Hawkes process whose intensity decays
at rate beta toward the baseline lambda0 and self-excites by alpha per
event (0 < alpha < beta).  Pricing works under an equivalent martingale
measure indexed by a real shift ``a``; this module computes every bound
that keeps the shifted measure admissible:

* ``exp_moment_bound``   largest exponential-moment order c for which
  E[exp(c * integral of v)] stays finite (``c_l`` in reports),
* ``jump_mgf_bound``     largest jump-MGF argument, scaled by 1/eta,
  compatible with the Hawkes stability cap (``L_J`` in reports),
* ``max_shift``          maximal admissible |a|,
* ``check_shift``        the shifted reversion speed and long-run variance.

All types are immutable; all functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolated, NoAdmissibleC, ShiftOutOfRange, SingularShift
from .jumps import JumpLaw

VIX_WINDOW_YEARS = 30.0 / 365.0

# Relative tolerance below which the shifted reversion speed is treated as
# colliding with beta - alpha (the jump constants blow up at the collision).
SINGULAR_SHIFT_RTOL = 1e-10

_BISECT_ABS_TOL = 1e-12
_GRID_POINTS = 64


@dataclass(frozen=True)
class ModelParams:
    """All model parameters, annualized.

    mu       physical drift of the stock (constant; only enters one
             admissibility margin, pricing itself is drift-free)
    r        risk-free rate
    rho      spot/vol correlation, in (-1, 1)
    v0       initial variance
    kappa    variance mean-reversion speed
    vbar     long-run variance
    sigma    vol-of-vol
    eta      jump scaling factor (eta = 0 degenerates to pure Heston)
    lambda0  baseline Hawkes intensity
    alpha    self-excitation factor, alpha < beta
    beta     intensity mean-reversion speed
    T        model horizon in years
    delta    VIX window, 30/365 years
    """

    mu: float
    r: float
    rho: float
    v0: float
    kappa: float
    vbar: float
    sigma: float
    eta: float
    lambda0: float
    alpha: float
    beta: float
    T: float
    delta: float = VIX_WINDOW_YEARS


def validate_base(p: ModelParams) -> list[str]:
    """Return every violated base invariant; empty list means valid.

    Violations are data, not errors: callers decide whether to raise.
    """
    bad = []
    for name in ("v0", "kappa", "vbar", "sigma", "lambda0", "T", "delta"):
        val = getattr(p, name)
        if not val > 0:
            bad.append(f"{name} must be positive, got {val}")
    if p.eta < 0:
        bad.append(f"eta must be nonnegative, got {p.eta}")
    if not 0 < p.alpha < p.beta:
        bad.append(
            f"stability requires 0 < alpha < beta, got alpha={p.alpha}, beta={p.beta}"
        )
    if not 2.0 * p.kappa * p.vbar >= p.sigma**2:
        bad.append(
            "Feller condition 2*kappa*vbar >= sigma^2 violated: "
            f"{2.0 * p.kappa * p.vbar} < {p.sigma**2}"
        )
    if not p.rho**2 < 1.0:
        bad.append(f"rho^2 must be < 1, got rho={p.rho}")
    return bad


def stability_mgf_cap(alpha: float, beta: float) -> float:
    """Hawkes stability cap (beta/alpha) * exp(alpha/beta - 1), always > 1."""
    return beta / alpha * math.exp(alpha / beta - 1.0)


def exp_moment_transform(c, kappa: float, sigma: float, eta: float, T: float):
    """Map an exponential-moment order c to the jump-MGF argument it induces.

    Equals 2*eta*c*(e^{DT}-1) / (D-kappa+(D+kappa)e^{DT}) with
    D = sqrt(kappa^2 - 2 sigma^2 c); rewritten through tanh(DT/2)/D so the
    removable singularity at the top of the domain (D -> 0) stays finite.
    Accepts scalars or arrays of c in [0, kappa^2 / (2 sigma^2)].
    """
    c_arr = np.asarray(c, dtype=float)
    disc = kappa**2 - 2.0 * sigma**2 * c_arr
    if np.any(disc < -1e-12 * kappa**2):
        raise ValueError("exp_moment_transform requires c <= kappa^2/(2 sigma^2)")
    d = np.sqrt(np.maximum(disc, 0.0))
    x = 0.5 * d * T
    # g = tanh(DT/2)/D, series below x ~ 1e-4 to dodge 0/0 at D = 0.
    small = x < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(small, 0.5 * T * (1.0 - x**2 / 3.0), np.tanh(x) / np.where(d == 0.0, 1.0, d))
    out = 2.0 * eta * c_arr * g / (1.0 + kappa * g)
    if np.isscalar(c) or np.asarray(c).ndim == 0:
        return float(out)
    return out


def _feasible_moment_order(c, p: ModelParams, law: JumpLaw, cap: float):
    """Both admissibility conditions at order c (vectorized)."""
    lam = exp_moment_transform(c, p.kappa, p.sigma, p.eta, p.T)
    lam_arr = np.asarray(lam, dtype=float)
    ok = lam_arr < law.eps_j
    vals = np.where(ok, lam_arr, 0.0)
    mgf = np.asarray(law.mgf(vals), dtype=float)
    ok &= mgf <= cap
    if np.isscalar(c) or np.asarray(c).ndim == 0:
        return bool(ok)
    return ok


def exp_moment_bound(p: ModelParams, law: JumpLaw) -> float:
    """Largest admissible exponential-moment order (``c_l``).

    Supremum of c <= kappa^2/(2 sigma^2) such that the induced MGF argument
    stays inside the jump law's domain and its MGF under the stability cap.
    Bisection to absolute tolerance 1e-12; the down-set structure of the
    feasible region is verified on a 64-point grid first, with a grid
    refinement fallback when it fails to hold.
    """
    c_max = p.kappa**2 / (2.0 * p.sigma**2)
    cap = stability_mgf_cap(p.alpha, p.beta)
    if _feasible_moment_order(c_max, p, law, cap):
        return c_max
    if not _feasible_moment_order(c_max * 1e-12, p, law, cap):
        # Cannot happen for a law with mgf(0) = 1: the transform vanishes
        # as c -> 0+, so the conditions hold near zero.
        raise NoAdmissibleC(
            "no admissible exponential-moment order near zero; jump law is broken"
        )
    grid = np.linspace(c_max / _GRID_POINTS, c_max, _GRID_POINTS)
    feas = _feasible_moment_order(grid, p, law, cap)
    downset = not np.any(np.diff(feas.astype(int)) > 0)
    if downset:
        if feas[0]:
            idx = int(np.argmin(feas))  # first infeasible grid point
            lo, hi = grid[idx - 1], grid[idx]
        else:
            lo, hi = c_max * 1e-12, grid[0]
        while hi - lo > _BISECT_ABS_TOL:
            mid = 0.5 * (lo + hi)
            if _feasible_moment_order(mid, p, law, cap):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    return _refine_moment_bound(grid, feas, p, law, cap)


def _refine_moment_bound(grid, feas, p, law, cap) -> float:
    """Grid-refinement search for the supremum when feasibility is not monotone."""
    spacing = grid[1] - grid[0]
    while spacing > _BISECT_ABS_TOL:
        if not np.any(feas):
            raise NoAdmissibleC("feasible set vanished during grid refinement")
        top = grid[np.nonzero(feas)[0][-1]]
        lo = top
        hi = min(top + spacing, p.kappa**2 / (2.0 * p.sigma**2))
        grid = np.linspace(lo, hi, _GRID_POINTS)
        feas = _feasible_moment_order(grid, p, law, cap)
        spacing = grid[1] - grid[0]
    return float(grid[np.nonzero(feas)[0][-1]])


def jump_mgf_bound(p: ModelParams, law: JumpLaw) -> float:
    """Largest jump-MGF argument over eta compatible with the stability cap.

    Equals (1/eta) * mgf_inverse(stability cap); +inf when eta = 0 (the
    bound then never binds).  Reported as ``L_J``.
    """
    if p.eta == 0.0:
        return math.inf
    return law.mgf_inverse(stability_mgf_cap(p.alpha, p.beta)) / p.eta


def max_shift(p: ModelParams, c_l: float, q1: float, s: float) -> float:
    """Maximal admissible |a| for the measure shift.

    Minimum of the four admissibility bounds driven by the exponential
    moment order ``c_l`` and the constants q1, s > 1.  Requires
    rho^2 < c_l.
    """
    rho2 = p.rho**2
    if rho2 >= c_l:
        raise AssumptionViolated(
            f"rho^2 = {rho2} must be < exponential-moment bound {c_l}"
        )
    qs = q1 * s
    bracket = 2.0 * qs * (1.0 - rho2) + rho2 * s - 1.0
    bounds = (
        math.sqrt(2.0 * c_l) / 2.0,
        math.sqrt(c_l - rho2),
        math.sqrt(c_l / 2.0) / qs,
        math.sqrt((1.0 - rho2) * c_l / (qs * bracket)),
    )
    return min(bounds)


@dataclass(frozen=True)
class MeasureShift:
    """Shifted-measure quantities: kappa_a = kappa + a*sigma, vbar_a = kappa*vbar/kappa_a."""

    a: float
    kappa_a: float
    vbar_a: float


@dataclass(frozen=True)
class ConditionFlag:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AdmissibilityReport:
    """Every admissibility constant and per-condition verdict for one model.

    ``c_l`` and ``l_j`` are NaN when the base invariants already fail.
    """

    c_l: float
    l_j: float
    a_max: float
    q1: float
    q2: float
    eps1: float
    eps2: float
    flags: tuple[ConditionFlag, ...] = field(default_factory=tuple)

    @property
    def fully_admissible(self) -> bool:
        return all(f.passed for f in self.flags)


def admissibility_report(
    p: ModelParams,
    law: JumpLaw,
    *,
    q2: float = 2.0,
    eps1: float = 1.0,
    eps2: float = 1.0,
) -> AdmissibilityReport:
    """Assemble the full admissibility report for ``p`` under ``law``.

    q2 defaults to 2 (so q1 = q2/(q2-1) = 2); eps1 = eps2 = 1 by default.
    The drift margin uses D = (mu - r)^2; D = 0 makes that margin infinite.
    """
    flags: list[ConditionFlag] = []
    base = validate_base(p)
    for msg in base:
        flags.append(ConditionFlag("base_invariant", False, msg))
    if base:
        return AdmissibilityReport(
            c_l=math.nan, l_j=math.nan, a_max=math.nan,
            q1=q2 / (q2 - 1.0) if q2 > 1.0 else math.nan,
            q2=q2, eps1=eps1, eps2=eps2, flags=tuple(flags),
        )
    flags.append(ConditionFlag("base_invariants", True, "all base invariants hold"))

    c_l = exp_moment_bound(p, law)
    l_j = jump_mgf_bound(p, law)
    flags.append(
        ConditionFlag(
            "rho_sq_below_moment_bound",
            p.rho**2 < c_l,
            f"rho^2 = {p.rho**2} vs c_l = {c_l}",
        )
    )

    drift_sq = (p.mu - p.r) ** 2
    feller_margin = ((2.0 * p.kappa * p.vbar - p.sigma**2) / (2.0 * p.sigma)) ** 2
    denom = drift_sq * ((2.0 + eps1) ** 2 - (2.0 + eps1))
    q2_cap = math.inf if denom == 0.0 else (1.0 - p.rho**2) * feller_margin / denom
    flags.append(
        ConditionFlag(
            "drift_margin",
            q2_cap > 1.0,
            f"drift margin cap = {q2_cap} must exceed 1",
        )
    )
    flags.append(
        ConditionFlag(
            "q2_in_range",
            1.0 < q2 < q2_cap,
            f"q2 = {q2} must lie in (1, {q2_cap})",
        )
    )
    flags.append(
        ConditionFlag(
            "strict_feller_margin",
            2.0 * p.kappa * p.vbar > (1.0 + eps2) * p.sigma**2,
            f"2*kappa*vbar = {2.0 * p.kappa * p.vbar} vs "
            f"(1+eps2)*sigma^2 = {(1.0 + eps2) * p.sigma**2}",
        )
    )

    q1 = q2 / (q2 - 1.0)
    if p.rho**2 < c_l:
        a_max = max_shift(p, c_l, q1, 2.0 + eps1)
    else:
        a_max = 0.0
    return AdmissibilityReport(
        c_l=c_l, l_j=l_j, a_max=a_max,
        q1=q1, q2=q2, eps1=eps1, eps2=eps2, flags=tuple(flags),
    )


def check_shift(p: ModelParams, a: float, report: AdmissibilityReport) -> MeasureShift:
    """Validate the shift parameter ``a`` and return the shifted quantities.

    Raises ShiftOutOfRange when |a| >= a_max and SingularShift when the
    shifted reversion speed collides with beta - alpha (relative tolerance
    1e-10; the jump constants diverge at the collision).
    """
    if math.isnan(report.a_max) or not abs(a) < report.a_max:
        raise ShiftOutOfRange(
            f"|a| = {abs(a)} must be below the admissible maximum {report.a_max}"
        )
    kappa_a = p.kappa + a * p.sigma
    if kappa_a <= 0:
        raise ShiftOutOfRange(f"shifted reversion speed {kappa_a} is not positive")
    gap = p.beta - p.alpha
    if abs(kappa_a - gap) <= SINGULAR_SHIFT_RTOL * max(1.0, gap):
        raise SingularShift(
            f"kappa + a*sigma = {kappa_a} collides with beta - alpha = {gap}"
        )
    return MeasureShift(a=a, kappa_a=kappa_a, vbar_a=p.kappa * p.vbar / kappa_a)
