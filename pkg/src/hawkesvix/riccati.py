"""Generalized Riccati system behind the joint (variance, intensity) transform.

The exponential-affine transform E[exp(phi v_T + psi lambda_T) | F_t]
= exp(F(t) + G(t) v_t + H(t) lambda_t) requires three coupled ODEs on
[0, T], integrated backward from the terminal data (phi, psi, 0):

    G' = kappa_a G - (sigma^2/2) G^2,          G(T) = phi   (closed form)
    H' = beta H - e^{alpha H} M(eta G(t)) + 1, H(T) = psi   (numeric)
    F' = -kappa_a vbar_a G - beta lambda0 H,   F(T) = 0     (quadrature)

where M is the jump-size MGF.  Existence on all of [0, T] is guaranteed
only inside the argument domain

    0 < Re(phi) < min(2 kappa_a / (sigma^2 (2 e^{kappa_a T} - 1)), L_J),
    Re(psi) < (beta - alpha) / (alpha beta),

which ``domain_check`` verifies with per-constraint slacks.  H and F are
integrated in reversed time s = T - t so standard forward adaptive
steppers apply: H with a Dormand-Prince 4(5) pair at abs/rel tolerance
1e-10 and dense output, F by panelwise Gauss-Legendre quadrature of the
explicit right-hand side (refined until two node counts agree), which
decouples its error control from the ODE stepper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateDenominator,
    DomainViolation,
    ExplosionGuardExceeded,
    OutOfGrid,
    StepSizeUnderflow,
)
from .jumps import JumpLaw
from .params import MeasureShift, ModelParams

DEFAULT_TOL = 1e-10
DEFAULT_GRID_POINTS = 512

# Slack added to the a-priori bound on Re(H); crossing it means the solver
# escaped the guaranteed-existence region and the result must be discarded.
_EXPLOSION_SLACK = 10.0

_GL8 = np.polynomial.legendre.leggauss(8)
_GL16 = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class TransformArgs:
    """Transform arguments (phi, psi) plus optional extra output times."""

    phi: complex
    psi: complex
    t_eval: tuple[float, ...] = ()


@dataclass(frozen=True)
class DomainCheck:
    """Verdict of the argument-domain check with the binding constraint."""

    ok: bool
    binding: str
    slack: float
    details: tuple[str, ...]


def phi_domain_bound(shift: MeasureShift, sigma: float, horizon: float) -> float:
    """Upper bound on Re(phi) from the variance Riccati: 2k/(sigma^2(2e^{kT}-1))."""
    k = shift.kappa_a
    x = k * horizon
    if x > 350.0:
        # 2e^{kT} - 1 overflows; the bound is asymptotically (k/sigma^2) e^{-kT}.
        return k / sigma**2 * math.exp(-x)
    return 2.0 * k / (sigma**2 * (2.0 * math.exp(x) - 1.0))


def psi_domain_bound(alpha: float, beta: float) -> float:
    """Upper bound on Re(psi) from the intensity ODE: (beta-alpha)/(alpha*beta)."""
    return (beta - alpha) / (alpha * beta)


def domain_check(
    args: TransformArgs,
    shift: MeasureShift,
    p: ModelParams,
    l_j: float,
    horizon: float | None = None,
) -> DomainCheck:
    """Check (phi, psi) against the guaranteed-existence domain.

    Returns a verdict rather than raising; the slack of the binding
    constraint is negative exactly when the check fails.
    """
    horizon = p.T if horizon is None else horizon
    re_phi = args.phi.real
    re_psi = args.psi.real
    margins = {
        "re_phi_positive": re_phi,
        "re_phi_below_variance_bound": phi_domain_bound(shift, p.sigma, horizon) - re_phi,
        "re_phi_below_jump_bound": l_j - re_phi,
        "re_psi_below_intensity_bound": psi_domain_bound(p.alpha, p.beta) - re_psi,
    }
    binding = min(margins, key=margins.get)
    details = tuple(f"{name}: slack {slack:.6g}" for name, slack in margins.items())
    return DomainCheck(
        ok=all(m > 0 for m in margins.values()),
        binding=binding,
        slack=margins[binding],
        details=details,
    )


def g_closed_form(
    shift: MeasureShift, sigma: float, horizon: float, phi: complex, times
):
    """Closed-form G at ``times`` (scalar or array), terminal value phi.

    G(t) = 2k / (sigma^2 + e^{k (T-t)} (2k/phi - sigma^2)).  The denominator
    is bounded away from zero on the admissible domain; a vanishing one
    means the domain check was bypassed.
    """
    if phi == 0:
        out = np.zeros_like(np.asarray(times, dtype=float), dtype=complex)
        return complex(0.0) if np.ndim(times) == 0 else out
    k = shift.kappa_a
    grow = np.exp(k * (horizon - np.asarray(times, dtype=float)))
    denom = sigma**2 + grow * (2.0 * k / phi - sigma**2)
    if np.any(np.abs(denom) < 1e-30):
        raise DegenerateDenominator(
            "variance Riccati denominator vanished; arguments outside the domain"
        )
    out = 2.0 * k / denom
    return complex(out) if np.ndim(times) == 0 else out


def solve_G(
    shift: MeasureShift, sigma: float, horizon: float, phi: complex, t: float
) -> complex:
    """Closed-form G evaluated at a single time t in [0, T]."""
    return g_closed_form(shift, sigma, horizon, phi, t)


class HPath:
    """Dense-output wrapper for H, indexed in physical (unreversed) time."""

    def __init__(self, dense, horizon: float, psi: complex, max_re: float):
        self._dense = dense
        self.horizon = horizon
        self.psi = complex(psi)
        self.max_re = max_re  # largest Re(H) seen on the solver knots

    def at(self, t: float) -> complex:
        if t == self.horizon:
            return self.psi
        return complex(self._dense(self.horizon - t)[0])

    def many(self, times) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        vals = np.asarray(self._dense(self.horizon - times))[0]
        vals = np.atleast_1d(vals).astype(complex)
        vals[times == self.horizon] = self.psi
        return vals


def solve_H(
    shift: MeasureShift,
    alpha: float,
    beta: float,
    eta: float,
    law: JumpLaw,
    horizon: float,
    phi: complex,
    psi: complex,
    tol: float = DEFAULT_TOL,
    sigma: float | None = None,
) -> HPath:
    """Integrate the intensity Riccati backward from H(T) = psi.

    Dormand-Prince RK45 at abs/rel tolerance ``tol`` with dense output.
    ``sigma`` may be omitted only when phi = 0 (G is then identically 0).
    Raises StepSizeUnderflow when the integrator stalls and
    ExplosionGuardExceeded when Re(H) crosses the a-priori bound
    (1/alpha) log(beta / (alpha U)) + 10 with U = M(eta Re(phi)).
    """
    if phi != 0 and sigma is None:
        raise ValueError("sigma is required when phi != 0")

    def rhs(s, y):
        g = g_closed_form(shift, sigma, horizon, phi, horizon - s) if phi != 0 else 0.0
        m = law.mgf(eta * g) if eta != 0.0 else 1.0
        h = y[0]
        return [-beta * h + np.exp(alpha * h) * m - 1.0]

    sol = solve_ivp(
        rhs,
        (0.0, horizon),
        np.array([complex(psi)]),
        method="RK45",
        rtol=tol,
        atol=tol,
        dense_output=True,
    )
    if not sol.success:
        raise StepSizeUnderflow(
            f"intensity Riccati integration stalled: {sol.message}"
        )
    max_re = float(np.max(sol.y[0].real))
    u = float(np.real(law.mgf(eta * phi.real))) if eta != 0.0 else 1.0
    guard = math.log(beta / (alpha * u)) / alpha + _EXPLOSION_SLACK
    if max_re >= guard:
        raise ExplosionGuardExceeded(
            f"Re(H) reached {max_re}, beyond the explosion guard {guard} "
            f"(phi={phi}, psi={psi})"
        )
    return HPath(sol.sol, horizon, psi, max_re)


def solve_F(
    shift: MeasureShift,
    lambda0: float,
    beta: float,
    horizon: float,
    g_fn,
    h_fn,
    times,
    rel_tol: float = 1e-12,
) -> np.ndarray:
    """F at ``times`` via quadrature of the explicit right-hand side.

    F(t) = integral over [t, T] of kappa_a vbar_a G(s) + beta lambda0 H(s) ds,
    computed with panelwise Gauss-Legendre between consecutive requested
    times.  Each panel is refined adaptively (node count 8 vs 16, then
    subdivision doubling) until the two estimates agree to ``rel_tol``
    relative to the accumulated integral.  Requires times[-1] == horizon,
    where F = 0 exactly.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim == 0:
        times = times[None]
    if not np.all(np.diff(times) > 0):
        raise ValueError("times must be strictly increasing")
    if times[-1] != horizon:
        raise ValueError("times must end at the horizon (terminal condition F = 0)")

    def w(s):
        return shift.kappa_a * shift.vbar_a * g_fn(s) + beta * lambda0 * h_fn(s)

    subdiv = 1
    panels = _interval_integrals(w, times, subdiv, *_GL8)
    for _ in range(6):
        refined = _interval_integrals(w, times, subdiv, *_GL16)
        scale = max(float(np.max(np.abs(np.cumsum(refined[::-1])))), 1.0)
        if np.max(np.abs(refined - panels)) <= rel_tol * scale:
            panels = refined
            break
        subdiv *= 2
        panels = _interval_integrals(w, times, subdiv, *_GL8)
    else:
        panels = _interval_integrals(w, times, subdiv, *_GL16)
    return np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])


def _interval_integrals(w, times: np.ndarray, subdiv: int, nodes, weights):
    """Integral of ``w`` over every [times[j], times[j+1]] with ``subdiv`` sub-panels."""
    if subdiv == 1:
        edges = times
    else:
        steps = np.linspace(0.0, 1.0, subdiv + 1)
        edges = (times[:-1, None] + np.diff(times)[:, None] * steps[None, :])[:, :-1]
        edges = np.append(edges.ravel(), times[-1])
    panels = _panel_integrals(w, edges, nodes, weights)
    if subdiv == 1:
        return panels
    return panels.reshape(len(times) - 1, subdiv).sum(axis=1)


def _panel_integrals(w, edges: np.ndarray, nodes: np.ndarray, weights: np.ndarray):
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    pts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = np.asarray(w(pts), dtype=complex).reshape(len(a), len(nodes))
    return (vals @ weights) * half


@dataclass
class RiccatiSolution:
    """The (G, H, F) trajectories of one transform solve.

    ``grid`` holds the dense output times (512 uniform points plus any
    caller-requested ones); the ``*_vals`` arrays are the trajectory values
    there.  Point evaluation uses the closed form for G, the stepper's
    dense output for H, and the cumulative quadrature (plus a partial
    panel) for F, so interpolation error stays below the solver tolerance.
    """

    args: TransformArgs
    shift: MeasureShift
    horizon: float
    tol_abs: float
    tol_rel: float
    grid: np.ndarray
    G_vals: np.ndarray
    H_vals: np.ndarray
    F_vals: np.ndarray
    _sigma: float = field(repr=False, default=0.0)
    _h_path: HPath | None = field(repr=False, default=None)
    _w_fn: object = field(repr=False, default=None)

    def _check_time(self, t: float) -> None:
        if not 0.0 <= t <= self.horizon:
            raise OutOfGrid(f"t = {t} outside the solved interval [0, {self.horizon}]")

    def G(self, t: float) -> complex:
        self._check_time(t)
        return g_closed_form(self.shift, self._sigma, self.horizon, self.args.phi, t)

    def H(self, t: float) -> complex:
        self._check_time(t)
        if self._h_path is None:
            return 0.0 + 0.0j
        return self._h_path.at(t)

    def F(self, t: float) -> complex:
        self._check_time(t)
        idx = int(np.searchsorted(self.grid, t))
        if idx < len(self.grid) and self.grid[idx] == t:
            return complex(self.F_vals[idx])
        # Partial panel [t, grid[idx]] plus the stored cumulative tail.
        edges = np.array([t, self.grid[idx]])
        part = _panel_integrals(self._w_fn, edges, *_GL16)[0]
        return complex(part + self.F_vals[idx])


def solve_riccati(
    p: ModelParams,
    shift: MeasureShift,
    law: JumpLaw,
    l_j: float,
    phi: complex,
    psi: complex,
    *,
    horizon: float | None = None,
    tol: float = DEFAULT_TOL,
    extra_times=(),
    grid_points: int = DEFAULT_GRID_POINTS,
    enforce_domain: bool = True,
) -> RiccatiSolution:
    """Solve the full (G, H, F) system for one argument pair.

    ``horizon`` defaults to the model horizon; shorter horizons solve the
    ODEs with terminal time at an option maturity.  phi = psi = 0 yields
    the trivial all-zero solution without touching the domain check.
    """
    horizon = p.T if horizon is None else horizon
    if not 0 < horizon <= p.T:
        raise OutOfGrid(f"horizon {horizon} must lie in (0, {p.T}]")
    phi = complex(phi)
    psi = complex(psi)
    args = TransformArgs(phi=phi, psi=psi, t_eval=tuple(extra_times))

    grid = np.linspace(0.0, horizon, grid_points)
    if extra_times:
        extras = np.asarray(extra_times, dtype=float)
        if np.any((extras < 0) | (extras > horizon)):
            raise OutOfGrid("extra output times must lie in [0, horizon]")
        grid = np.unique(np.concatenate([grid, extras]))

    if phi == 0 and psi == 0:
        zeros = np.zeros_like(grid, dtype=complex)
        return RiccatiSolution(
            args=args, shift=shift, horizon=horizon, tol_abs=tol, tol_rel=tol,
            grid=grid, G_vals=zeros, H_vals=zeros.copy(), F_vals=zeros.copy(),
            _sigma=p.sigma, _h_path=None, _w_fn=lambda s: np.zeros_like(s, dtype=complex),
        )

    if enforce_domain:
        check = domain_check(args, shift, p, l_j, horizon)
        if not check.ok:
            raise DomainViolation(
                f"transform arguments outside the domain; binding constraint "
                f"{check.binding} with slack {check.slack:.6g}"
            )

    h_path = solve_H(
        shift, p.alpha, p.beta, p.eta, law, horizon, phi, psi, tol=tol, sigma=p.sigma
    )

    def g_fn(s):
        return g_closed_form(shift, p.sigma, horizon, phi, s)

    def w_fn(s):
        return shift.kappa_a * shift.vbar_a * g_fn(s) + p.beta * p.lambda0 * h_path.many(s)

    f_vals = solve_F(
        shift, p.lambda0, p.beta, horizon, g_fn, h_path.many, grid, rel_tol=tol
    )

    return RiccatiSolution(
        args=args, shift=shift, horizon=horizon, tol_abs=tol, tol_rel=tol,
        grid=grid,
        G_vals=np.asarray(g_fn(grid), dtype=complex),
        H_vals=h_path.many(grid),
        F_vals=f_vals,
        _sigma=p.sigma, _h_path=h_path, _w_fn=w_fn,
    )
