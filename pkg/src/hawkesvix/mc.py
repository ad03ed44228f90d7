"""Monte Carlo oracle: exact Hawkes thinning plus CIR-with-jumps variance.

Event times come from Ogata thinning, which is exact for the exponential
kernel: between events the intensity decays monotonically toward the
baseline, so the current value bounds the future one and candidate
arrivals proposed at that bound are accepted with probability
lambda(t_cand)/bound.  Variance transitions between events use the exact
noncentral chi-square CIR law (Broadie-Kaya style) with the shifted
parameters, adding eta * J at each event; a full-truncation Euler scheme
is retained as an independent cross-check.

Reproducibility: path i draws from Philox jumped to stream i from the run
seed, a counter-based split, so results do not depend on scheduling; the
chunked runner concatenates per-chunk arrays in fixed order and the
estimators reduce those arrays deterministically, making serial and
process-parallel runs bit-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .context import ModelContext
from .errors import SchemeUnavailable
from .jumps import JumpLaw
from .params import MeasureShift, ModelParams

_CHUNK = 8192


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings: path count, seed, and variance scheme."""

    n_paths: int
    seed: int
    cir_scheme: str = "exact"
    euler_steps_per_year: int = 2000

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.cir_scheme not in ("exact", "euler"):
            raise ValueError(f"unknown cir scheme {self.cir_scheme!r}")


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for path ``index``: Philox stream jumped to it."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(index))


def simulate_hawkes(
    lambda0: float, alpha: float, beta: float, horizon: float, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Exact event times on [0, horizon] and the terminal intensity.

    Ogata thinning with the running intensity as the proposal bound; no
    discretization anywhere.
    """
    events: list[float] = []
    t = 0.0
    lam = lambda0  # right limit of the intensity at t
    while True:
        wait = rng.exponential(1.0 / lam)
        t_next = t + wait
        if t_next >= horizon:
            lam_t = lambda0 + (lam - lambda0) * math.exp(-beta * (horizon - t))
            return np.array(events), lam_t
        decayed = lambda0 + (lam - lambda0) * math.exp(-beta * wait)
        if rng.random() * lam <= decayed:
            events.append(t_next)
            lam = decayed + alpha
        else:
            lam = decayed
        t = t_next


def intensity_at(
    t: float, events: np.ndarray, lambda0: float, alpha: float, beta: float
) -> float:
    """lambda_t = lambda0 + alpha * sum over events at or before t of e^{-beta (t - t_i)}."""
    past = events[events <= t]
    if len(past) == 0:
        return lambda0
    return lambda0 + alpha * float(np.sum(np.exp(-beta * (t - past))))

def intensity_integral(
    t: float, events: np.ndarray, lambda0: float, alpha: float, beta: float
) -> float:
    """Integral of the intensity over [0, t], exact for the exponential kernel."""
    past = events[events <= t]
    if len(past) == 0:
        return lambda0 * t
    return lambda0 * t + alpha / beta * float(np.sum(1.0 - np.exp(-beta * (t - past))))


def _cir_exact_step(
    v: float,
    dt: float,
    kappa: float,
    vbar: float,
    sigma: float,
    rng: np.random.Generator,
) -> float:
    """One exact CIR transition: scaled noncentral chi-square draw."""
    if dt <= 0.0:
        return v
    decay = math.exp(-kappa * dt)
    scale = sigma**2 * (1.0 - decay) / (4.0 * kappa)
    df = 4.0 * kappa * vbar / sigma**2
    nonc = v * decay / scale
    return scale * rng.noncentral_chisquare(df, nonc)


def simulate_variance(
    shift: MeasureShift,
    p: ModelParams,
    events: np.ndarray,
    jump_sizes: np.ndarray,
    checkpoints: np.ndarray,
    rng: np.random.Generator,
    scheme: str = "exact",
    euler_steps_per_year: int = 2000,
) -> tuple[np.ndarray, np.ndarray]:
    """Variance at the (sorted, positive) checkpoints and just after each event.

    The exact scheme samples the noncentral chi-square CIR transition with
    (kappa_a, vbar_a, sigma) between marked times and adds eta * J at each
    event; it needs the Feller degrees of freedom 4 kappa_a vbar_a / sigma^2
    >= 2, which base validation guarantees.  The Euler scheme uses full
    truncation with max(v, 0) in drift and diffusion on a fixed grid merged
    with the marked times.
    """
    checkpoints = np.asarray(checkpoints, dtype=float)
    if scheme == "exact":
        if 2.0 * shift.kappa_a * shift.vbar_a < p.sigma**2 * (1.0 - 1e-12):
            raise SchemeUnavailable(
                "exact CIR sampling requires the Feller condition under the shift"
            )
        return _variance_exact(shift, p, events, jump_sizes, checkpoints, rng)
    if scheme == "euler":
        return _variance_euler(
            shift, p, events, jump_sizes, checkpoints, rng, euler_steps_per_year
        )
    raise SchemeUnavailable(f"unknown variance scheme {scheme!r}")


def _variance_exact(shift, p, events, jump_sizes, checkpoints, rng):
    v = p.v0
    t = 0.0
    out = np.empty(len(checkpoints))
    v_events = np.empty(len(events))
    ei, ci = 0, 0
    n_e, n_c = len(events), len(checkpoints)
    while ci < n_c or ei < n_e:
        t_event = events[ei] if ei < n_e else math.inf
        t_check = checkpoints[ci] if ci < n_c else math.inf
        t_next = min(t_event, t_check)
        v = _cir_exact_step(v, t_next - t, shift.kappa_a, shift.vbar_a, p.sigma, rng)
        t = t_next
        if t_event <= t_check and ei < n_e:
            v += p.eta * jump_sizes[ei]
            v_events[ei] = v
            ei += 1
        else:
            out[ci] = v
            ci += 1
    return out, v_events


def _variance_euler(shift, p, events, jump_sizes, checkpoints, rng, steps_per_year):
    v = p.v0
    t = 0.0
    out = np.empty(len(checkpoints))
    v_events = np.empty(len(events))
    ei, ci = 0, 0
    n_e, n_c = len(events), len(checkpoints)
    while ci < n_c or ei < n_e:
        t_event = events[ei] if ei < n_e else math.inf
        t_check = checkpoints[ci] if ci < n_c else math.inf
        t_next = min(t_event, t_check)
        span = t_next - t
        if span > 0.0:
            n_sub = max(1, int(math.ceil(span * steps_per_year)))
            dt = span / n_sub
            shocks = rng.standard_normal(n_sub)
            root_dt = math.sqrt(dt)
            for z in shocks:
                v_plus = max(v, 0.0)
                v = (
                    v
                    - shift.kappa_a * (v_plus - shift.vbar_a) * dt
                    + p.sigma * math.sqrt(v_plus) * root_dt * z
                )
        t = t_next
        if t_event <= t_check and ei < n_e:
            v += p.eta * jump_sizes[ei]
            v_events[ei] = max(v, 0.0)
            ei += 1
        else:
            out[ci] = max(v, 0.0)
            ci += 1
    return out, v_events


@dataclass(frozen=True)
class PathSample:
    """One realization: event times, sizes, and state at the checkpoints."""

    events: np.ndarray
    jump_sizes: np.ndarray
    v_T: float
    lambda_T: float
    v_grid: np.ndarray | None = None
    lambda_grid: np.ndarray | None = None


def simulate_path(
    p: ModelParams,
    shift: MeasureShift,
    law: JumpLaw,
    horizon: float,
    checkpoints,
    rng: np.random.Generator,
    scheme: str = "exact",
    euler_steps_per_year: int = 2000,
) -> PathSample:
    """One joint (variance, intensity) path under the shifted measure."""
    checkpoints = np.asarray(checkpoints, dtype=float)
    events, _ = simulate_hawkes(p.lambda0, p.alpha, p.beta, horizon, rng)
    sizes = np.atleast_1d(law.sample(rng, size=len(events))) if len(events) else np.empty(0)
    marks = np.append(checkpoints, horizon)
    v_marks, _ = simulate_variance(
        shift, p, events, sizes, marks, rng, scheme, euler_steps_per_year
    )
    lam_marks = np.array(
        [intensity_at(t, events, p.lambda0, p.alpha, p.beta) for t in marks]
    )
    return PathSample(
        events=events,
        jump_sizes=sizes,
        v_T=float(v_marks[-1]),
        lambda_T=float(lam_marks[-1]),
        v_grid=v_marks[:-1] if len(checkpoints) else None,
        lambda_grid=lam_marks[:-1] if len(checkpoints) else None,
    )


@dataclass(frozen=True)
class StateSample:
    """Simulated joint states for a batch of paths.

    ``times`` are the recording times (checkpoints plus the horizon last);
    ``v`` and ``lam`` have shape (n_paths, len(times)).  ``int_lambda`` is
    the exact path integral of the intensity over [0, horizon] and
    ``jump_total`` the compound-process total, both for compensator checks.
    """

    times: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    n_events: np.ndarray
    int_lambda: np.ndarray
    jump_total: np.ndarray


def _simulate_chunk(payload) -> tuple[np.ndarray, ...]:
    (p, shift, law, horizon, checkpoints, scheme, steps, seed, start, count) = payload
    k = len(checkpoints) + 1
    v = np.empty((count, k))
    lam = np.empty((count, k))
    n_events = np.empty(count)
    int_lam = np.empty(count)
    jump_total = np.empty(count)
    marks = np.append(np.asarray(checkpoints, dtype=float), horizon)
    for j in range(count):
        rng = path_rng(seed, start + j)
        events, _ = simulate_hawkes(p.lambda0, p.alpha, p.beta, horizon, rng)
        sizes = (
            np.atleast_1d(law.sample(rng, size=len(events)))
            if len(events)
            else np.empty(0)
        )
        v[j], _ = simulate_variance(shift, p, events, sizes, marks, rng, scheme, steps)
        lam[j] = [
            intensity_at(t, events, p.lambda0, p.alpha, p.beta) for t in marks
        ]
        n_events[j] = len(events)
        int_lam[j] = intensity_integral(horizon, events, p.lambda0, p.alpha, p.beta)
        jump_total[j] = float(np.sum(sizes))
    return v, lam, n_events, int_lam, jump_total


def simulate_states(
    config: SimConfig,
    ctx: ModelContext,
    horizon: float,
    checkpoints=(),
    threads: int = 1,
) -> StateSample:
    """Simulate ``config.n_paths`` joint paths, recording state at checkpoints.

    ``threads`` > 1 distributes fixed-size chunks over worker processes;
    per-path streams make the result identical to the serial run.
    """
    checkpoints = tuple(float(t) for t in checkpoints)
    if any(not 0.0 < t < horizon for t in checkpoints):
        raise ValueError("checkpoints must lie strictly inside (0, horizon)")
    payloads = [
        (
            ctx.params, ctx.shift, ctx.law, horizon, checkpoints,
            config.cir_scheme, config.euler_steps_per_year,
            config.seed, start, min(_CHUNK, config.n_paths - start),
        )
        for start in range(0, config.n_paths, _CHUNK)
    ]
    if threads > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_simulate_chunk, payloads))
    else:
        parts = [_simulate_chunk(pl) for pl in payloads]
    v, lam, n_events, int_lam, jump_total = (
        np.concatenate([part[i] for part in parts]) for i in range(5)
    )
    times = np.append(np.asarray(checkpoints, dtype=float), horizon)
    return StateSample(
        times=times, v=v, lam=lam,
        n_events=n_events, int_lambda=int_lam, jump_total=jump_total,
    )


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    mean = float(np.mean(values))
    if n < 2:
        return mean, math.inf if n == 1 else math.nan
    sd = float(np.std(values, ddof=1))
    return mean, sd / math.sqrt(n)


@dataclass(frozen=True)
class CharFnEstimate:
    value: complex
    se_re: float
    se_im: float
    n_paths: int


def mc_char_fn(
    config: SimConfig,
    ctx: ModelContext,
    phi: complex,
    psi: complex,
    horizon: float | None = None,
    threads: int = 1,
    states: StateSample | None = None,
) -> CharFnEstimate:
    """Sample mean and per-component standard error of e^{phi v_T + psi lambda_T}."""
    horizon = ctx.params.T if horizon is None else horizon
    if states is None:
        states = simulate_states(config, ctx, horizon, threads=threads)
    w = np.exp(phi * states.v[:, -1] + psi * states.lam[:, -1])
    mean_re, se_re = _mean_se(np.real(w))
    mean_im, se_im = _mean_se(np.imag(w))
    return CharFnEstimate(
        value=complex(mean_re, mean_im), se_re=se_re, se_im=se_im,
        n_paths=config.n_paths,
    )


@dataclass(frozen=True)
class PriceEstimate:
    price: float
    se: float
    n_paths: int


def mc_vix_price(
    config: SimConfig,
    ctx: ModelContext,
    strike: float,
    maturity: float,
    threads: int = 1,
    states: StateSample | None = None,
) -> PriceEstimate:
    """Discounted mean of max(100 sqrt(A v + B lambda + C) - K, 0) at maturity.

    Passing ``states`` (from a previous run at the same maturity) re-uses
    one simulation across strikes.
    """
    if states is None:
        states = simulate_states(config, ctx, maturity, threads=threads)
    c = ctx.coeffs
    radicand = np.maximum(c.A * states.v[:, -1] + c.B * states.lam[:, -1] + c.C, 0.0)
    payoff = np.maximum(100.0 * np.sqrt(radicand) - strike, 0.0)
    mean, se = _mean_se(payoff)
    disc = math.exp(-ctx.params.r * maturity)
    return PriceEstimate(price=disc * mean, se=disc * se, n_paths=config.n_paths)


@dataclass(frozen=True)
class CurveEstimate:
    times: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    n_paths: int


def mc_forward_variance(
    config: SimConfig,
    ctx: ModelContext,
    times,
    threads: int = 1,
) -> CurveEstimate:
    """MC mean of v_t at each requested time (path average of checkpoints)."""
    times = sorted(float(t) for t in times)
    horizon = times[-1]
    states = simulate_states(config, ctx, horizon, checkpoints=times[:-1], threads=threads)
    means = np.empty(len(times))
    ses = np.empty(len(times))
    for j in range(len(times)):
        means[j], ses[j] = _mean_se(states.v[:, j])
    return CurveEstimate(
        times=np.asarray(times), mean=means, se=ses, n_paths=config.n_paths
    )


@dataclass(frozen=True)
class CompensatorEstimate:
    event_gap_mean: float
    event_gap_se: float
    jump_gap_mean: float
    jump_gap_se: float
    n_paths: int


def mc_compensators(
    config: SimConfig,
    ctx: ModelContext,
    horizon: float | None = None,
    threads: int = 1,
) -> CompensatorEstimate:
    """Martingale residuals N_T - Int(lambda) and L_T - E[J] Int(lambda).

    Both means should be zero within Monte Carlo error; the intensity path
    integral is exact, so no quadrature error enters.
    """
    horizon = ctx.params.T if horizon is None else horizon
    states = simulate_states(config, ctx, horizon, threads=threads)
    gap_n = states.n_events - states.int_lambda
    gap_l = states.jump_total - ctx.jump_mean * states.int_lambda
    m_n, se_n = _mean_se(gap_n)
    m_l, se_l = _mean_se(gap_l)
    return CompensatorEstimate(
        event_gap_mean=m_n, event_gap_se=se_n,
        jump_gap_mean=m_l, jump_gap_se=se_l,
        n_paths=config.n_paths,
    )
