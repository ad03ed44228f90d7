"""Command-line front door.

Subcommands: ``validate``, ``price``, ``charfn``, ``vix``, ``simulate``,
``dump-integrand``.  All consume a JSON run configuration via --config and
emit JSON on stdout (full double precision, machine-diffable); bulk dumps
(integrand lines, trajectories, per-path stats) go to CSV files.

Configuration schema (unknown keys are rejected at every level)::

    {
      "model": {"mu": 0.02, "r": 0.02, "rho": -0.7, "v0": 0.04,
                "kappa": 3.0, "vbar": 0.04, "sigma": 0.3, "eta": 0.01,
                "lambda0": 1.0, "alpha": 1.0, "beta": 2.0, "T": 1.0,
                "delta": 0.0821917808219178},          # optional, 30/365
      "jump": {"type": "exponential", "rate": 20.0},   # or gamma/constant
      "shift_a": 0.0,                                  # optional
      "assumption": {"Q2": 2.0, "eps1": 1.0, "eps2": 1.0},   # optional
      "pricing": {"strike": 20.0, "maturity": 0.5, "valuation_time": 0.0,
                  "v": 0.04, "lambda": 1.0, "phi_r_fraction": 0.5,
                  "tol": 1e-8, "max_nodes": 200000},   # optional
      "sim": {"n_paths": 200000, "seed": 20240901, "cir_scheme": "exact",
              "euler_steps_per_year": 2000},           # optional
      "output": {"format": "json", "path": null}       # optional
    }

Exit codes: 0 success, 1 domain or inadmissibility failure, 2 usage or
parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import mc
from .charfn import CharFnSolver
from .context import ModelContext, build_context
from .errors import (
    AssumptionViolated,
    ConfigError,
    DegenerateDenominator,
    DomainViolation,
    ExplosionGuardExceeded,
    HawkesVixError,
    NegativeVixSquared,
    NoAdmissibleC,
    OutOfGrid,
    PricingSanityError,
    QuadratureNotConverged,
    SchemeUnavailable,
    ShiftOutOfRange,
    SingularShift,
    StepSizeUnderflow,
)
from .jumps import JumpLaw, law_from_config
from .params import VIX_WINDOW_YEARS, ModelParams, admissibility_report, check_shift
from .pricer import PricingRequest, choose_phi_r, integrand_profile, price_call
from .riccati import solve_riccati
from .vix import forward_intensity, forward_variance

_DOMAIN_ERRORS = (
    AssumptionViolated, ShiftOutOfRange, SingularShift, NoAdmissibleC,
    DomainViolation, NegativeVixSquared, SchemeUnavailable, OutOfGrid,
)
_NUMERICAL_ERRORS = (
    StepSizeUnderflow, QuadratureNotConverged, DegenerateDenominator,
    ExplosionGuardExceeded, PricingSanityError,
)

_MODEL_KEYS = (
    "mu", "r", "rho", "v0", "kappa", "vbar", "sigma", "eta",
    "lambda0", "alpha", "beta", "T",
)


@dataclass(frozen=True)
class PricingDefaults:
    strike: float = 20.0
    maturity: float | None = None
    valuation_time: float = 0.0
    v: float | None = None
    lambda_: float | None = None
    phi_r_fraction: float = 0.5
    tol: float = 1e-8
    max_nodes: int = 200_000


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    jump: JumpLaw
    shift_a: float = 0.0
    q2: float = 2.0
    eps1: float = 1.0
    eps2: float = 1.0
    pricing: PricingDefaults = field(default_factory=PricingDefaults)
    sim: mc.SimConfig = field(default_factory=lambda: mc.SimConfig(10_000, 0))
    output_format: str = "json"
    output_path: str | None = None


def _require_mapping(obj, name: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"section {name!r} must be a JSON object")
    return obj


def _reject_unknown(section: dict, allowed, name: str) -> None:
    extra = set(section) - set(allowed)
    if extra:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(extra)}")


def parse_config(doc: dict) -> RunConfig:
    """Parse and validate a configuration document (unknown keys rejected)."""
    _require_mapping(doc, "config")
    _reject_unknown(
        doc, ("model", "jump", "shift_a", "assumption", "pricing", "sim", "output"),
        "config",
    )
    for required in ("model", "jump"):
        if required not in doc:
            raise ConfigError(f"config is missing the {required!r} section")

    model_raw = _require_mapping(doc["model"], "model")
    _reject_unknown(model_raw, _MODEL_KEYS + ("delta",), "model")
    missing = [k for k in _MODEL_KEYS if k not in model_raw]
    if missing:
        raise ConfigError(f"model section missing keys: {missing}")
    try:
        model = ModelParams(
            **{k: float(model_raw[k]) for k in _MODEL_KEYS},
            delta=float(model_raw.get("delta", VIX_WINDOW_YEARS)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model section malformed: {exc}") from exc

    jump = law_from_config(_require_mapping(doc["jump"], "jump"))

    assumption = _require_mapping(doc.get("assumption", {}), "assumption")
    _reject_unknown(assumption, ("Q2", "eps1", "eps2"), "assumption")

    pricing_raw = _require_mapping(doc.get("pricing", {}), "pricing")
    _reject_unknown(
        pricing_raw,
        ("strike", "maturity", "valuation_time", "v", "lambda",
         "phi_r_fraction", "tol", "max_nodes"),
        "pricing",
    )
    pricing = PricingDefaults(
        strike=float(pricing_raw.get("strike", 20.0)),
        maturity=(
            float(pricing_raw["maturity"]) if "maturity" in pricing_raw else None
        ),
        valuation_time=float(pricing_raw.get("valuation_time", 0.0)),
        v=float(pricing_raw["v"]) if "v" in pricing_raw else None,
        lambda_=float(pricing_raw["lambda"]) if "lambda" in pricing_raw else None,
        phi_r_fraction=float(pricing_raw.get("phi_r_fraction", 0.5)),
        tol=float(pricing_raw.get("tol", 1e-8)),
        max_nodes=int(pricing_raw.get("max_nodes", 200_000)),
    )

    sim_raw = _require_mapping(doc.get("sim", {}), "sim")
    _reject_unknown(
        sim_raw, ("n_paths", "seed", "cir_scheme", "euler_steps_per_year"), "sim"
    )
    try:
        sim = mc.SimConfig(
            n_paths=int(sim_raw.get("n_paths", 10_000)),
            seed=int(sim_raw.get("seed", 0)),
            cir_scheme=str(sim_raw.get("cir_scheme", "exact")),
            euler_steps_per_year=int(sim_raw.get("euler_steps_per_year", 2000)),
        )
    except ValueError as exc:
        raise ConfigError(f"sim section malformed: {exc}") from exc

    output = _require_mapping(doc.get("output", {}), "output")
    _reject_unknown(output, ("format", "path"), "output")
    fmt = output.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"output format must be json or csv, got {fmt!r}")

    return RunConfig(
        model=model,
        jump=jump,
        shift_a=float(doc.get("shift_a", 0.0)),
        q2=float(assumption.get("Q2", 2.0)),
        eps1=float(assumption.get("eps1", 1.0)),
        eps2=float(assumption.get("eps2", 1.0)),
        pricing=pricing,
        sim=sim,
        output_format=fmt,
        output_path=output.get("path"),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    return parse_config(doc)


def _context(cfg: RunConfig) -> ModelContext:
    return build_context(
        cfg.model, cfg.jump, cfg.shift_a, q2=cfg.q2, eps1=cfg.eps1, eps2=cfg.eps2
    )


def _emit(payload: dict, cfg: RunConfig | None = None) -> None:
    text = json.dumps(payload, indent=2)
    if cfg is not None and cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text + "\n")
    print(text)


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    report = admissibility_report(
        cfg.model, cfg.jump, q2=cfg.q2, eps1=cfg.eps1, eps2=cfg.eps2
    )
    shift_info = None
    shift_error = None
    if report.fully_admissible:
        try:
            shift = check_shift(cfg.model, cfg.shift_a, report)
            shift_info = {"a": shift.a, "kappa_a": shift.kappa_a, "vbar_a": shift.vbar_a}
        except HawkesVixError as exc:
            shift_error = str(exc)
    payload = {
        "c_l": report.c_l,
        "L_J": report.l_j,
        "a_max": report.a_max,
        "Q1": report.q1,
        "Q2": report.q2,
        "eps1": report.eps1,
        "eps2": report.eps2,
        "conditions": [
            {"name": f.name, "passed": f.passed, "detail": f.detail}
            for f in report.flags
        ],
        "shift": shift_info,
        "shift_error": shift_error,
        "admissible": report.fully_admissible and shift_error is None,
    }
    _emit(payload, cfg)
    return 0 if payload["admissible"] else 1


def _pricing_request(cfg: RunConfig, args) -> PricingRequest:
    pr = cfg.pricing
    maturity = args.maturity if args.maturity is not None else pr.maturity
    if maturity is None:
        maturity = cfg.model.T
    return PricingRequest(
        t=args.valuation_time if args.valuation_time is not None else pr.valuation_time,
        maturity=maturity,
        strike=args.strike if args.strike is not None else pr.strike,
        v_t=args.v if args.v is not None else (pr.v if pr.v is not None else cfg.model.v0),
        lambda_t=(
            args.lam if args.lam is not None
            else (pr.lambda_ if pr.lambda_ is not None else cfg.model.lambda0)
        ),
        phi_r_fraction=(
            args.phi_r_fraction if args.phi_r_fraction is not None
            else pr.phi_r_fraction
        ),
        tol=args.tol if args.tol is not None else pr.tol,
        max_nodes=pr.max_nodes,
    )


def cmd_price(args) -> int:
    cfg = load_config(args.config)
    ctx = _context(cfg)
    req = _pricing_request(cfg, args)
    result = price_call(req, ctx)
    if args.dump_integrand:
        _write_integrand_csv(args.dump_integrand, req, ctx)
    _emit(
        {
            "price": result.price,
            "phi_R": result.phi_r,
            "nodes": result.nodes_used,
            "est_error": result.est_quad_error,
            "discount": result.discount,
        },
        cfg,
    )
    return 0


def _write_integrand_csv(path: str, req: PricingRequest, ctx: ModelContext,
                         phi_i_max: float = 64.0, points: int = 257) -> None:
    xs = np.linspace(0.0, phi_i_max, points)
    vals = integrand_profile(req, ctx, xs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phi_I", "integrand"])
        for x, v in zip(xs, vals):
            writer.writerow([repr(float(x)), repr(float(v))])


def cmd_dump_integrand(args) -> int:
    cfg = load_config(args.config)
    ctx = _context(cfg)
    req = _pricing_request(cfg, args)
    _write_integrand_csv(args.output, req, ctx, args.phi_i_max, args.points)
    _emit({"written": args.output, "points": args.points, "phi_i_max": args.phi_i_max}, cfg)
    return 0


def cmd_vix(args) -> int:
    cfg = load_config(args.config)
    ctx = _context(cfg)
    c = ctx.coeffs
    _emit({"A": c.A, "B": c.B, "C": c.C, "C1": c.C1, "C2": c.C2, "C3": c.C3}, cfg)
    return 0


def cmd_charfn(args) -> int:
    cfg = load_config(args.config)
    ctx = _context(cfg)
    horizon = args.maturity if args.maturity is not None else cfg.model.T
    t = args.valuation_time or 0.0
    v = args.v if args.v is not None else cfg.model.v0
    lam = args.lam if args.lam is not None else cfg.model.lambda0
    solver = CharFnSolver(
        cfg.model, ctx.shift, cfg.jump, ctx.report.l_j, horizon=horizon
    )
    payload: dict = {}
    if args.phi is not None or args.psi is not None:
        phi = args.phi if args.phi is not None else 0j
        psi = args.psi if args.psi is not None else 0j
        val = solver.char_fn(t, v, lam, phi, psi)
        payload.update({
            "phi_re": phi.real, "phi_im": phi.imag,
            "psi_re": psi.real, "psi_im": psi.imag,
            "value_re": val.real, "value_im": val.imag,
        })
        if args.trajectory:
            sol = solver.solve(phi, psi).ode
            with open(args.trajectory, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t", "re_G", "im_G", "re_H", "im_H", "re_F", "im_F"])
                for i, ti in enumerate(sol.grid):
                    writer.writerow([
                        repr(float(ti)),
                        repr(sol.G_vals[i].real), repr(sol.G_vals[i].imag),
                        repr(sol.H_vals[i].real), repr(sol.H_vals[i].imag),
                        repr(sol.F_vals[i].real), repr(sol.F_vals[i].imag),
                    ])
            payload["trajectory"] = args.trajectory
    if args.line:
        phi_r = choose_phi_r(
            ctx.coeffs, ctx.shift, cfg.model, ctx.report.l_j,
            cfg.pricing.phi_r_fraction,
        )
        xs = np.linspace(0.0, args.line_max, args.line_points)
        with open(args.line, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["phi_I", "re_f", "im_f"])
            for x in xs:
                phi = complex(phi_r, float(x))
                val = solver.char_fn(
                    t, v, lam, ctx.coeffs.A * phi, ctx.coeffs.B * phi
                )
                writer.writerow([repr(float(x)), repr(val.real), repr(val.imag)])
        payload["line"] = args.line
    if not payload:
        raise ConfigError("charfn needs --phi/--psi and/or --line")
    _emit(payload, cfg)
    return 0


def _sim_config(cfg: RunConfig, args) -> mc.SimConfig:
    return mc.SimConfig(
        n_paths=args.n_paths if args.n_paths is not None else cfg.sim.n_paths,
        seed=args.seed if args.seed is not None else cfg.sim.seed,
        cir_scheme=args.scheme if args.scheme is not None else cfg.sim.cir_scheme,
        euler_steps_per_year=cfg.sim.euler_steps_per_year,
    )


def _zscore(diff: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return abs(diff) / se


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    ctx = _context(cfg)
    sim = _sim_config(cfg, args)
    threads = args.threads or 1
    payload: dict = {"target": args.target, "n_paths": sim.n_paths, "seed": sim.seed}

    if args.target == "charfn":
        phi = args.phi if args.phi is not None else 0.05 + 0j
        psi = args.psi if args.psi is not None else 0.2 + 0j
        horizon = args.maturity if args.maturity is not None else cfg.model.T
        states = mc.simulate_states(sim, ctx, horizon, threads=threads)
        est = mc.mc_char_fn(sim, ctx, phi, psi, horizon=horizon, states=states)
        solver = CharFnSolver(
            cfg.model, ctx.shift, cfg.jump, ctx.report.l_j, horizon=horizon
        )
        analytic = solver.char_fn(0.0, cfg.model.v0, cfg.model.lambda0, phi, psi)
        payload.update({
            "estimate_re": est.value.real, "estimate_im": est.value.imag,
            "se_re": est.se_re, "se_im": est.se_im,
            "analytic_re": analytic.real, "analytic_im": analytic.imag,
            "z_score": max(
                _zscore(est.value.real - analytic.real, est.se_re),
                _zscore(est.value.imag - analytic.imag, est.se_im),
            ),
        })
    elif args.target == "price":
        req = _pricing_request(cfg, args)
        states = mc.simulate_states(sim, ctx, req.maturity, threads=threads)
        est = mc.mc_vix_price(sim, ctx, req.strike, req.maturity, states=states)
        analytic = price_call(req, ctx).price
        payload.update({
            "estimate": est.price, "se": est.se, "analytic": analytic,
            "z_score": _zscore(est.price - analytic, est.se),
        })
    elif args.target == "forward-variance":
        times = [float(x) for x in args.times.split(",")] if args.times else [cfg.model.T]
        est = mc.mc_forward_variance(sim, ctx, times, threads=threads)
        analytic = [
            forward_variance(
                ctx.shift, cfg.model, ctx.jump_mean,
                0.0, ti, cfg.model.v0, cfg.model.lambda0,
            )
            for ti in est.times
        ]
        states = None
        payload.update({
            "times": list(est.times),
            "estimate": list(est.mean),
            "se": list(est.se),
            "analytic": analytic,
            "z_score": max(
                _zscore(m - a, s) for m, a, s in zip(est.mean, analytic, est.se)
            ),
        })
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown simulate target {args.target!r}")

    if args.per_path:
        if states is None:
            states = mc.simulate_states(sim, ctx, cfg.model.T, threads=threads)
        with open(args.per_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path_id", "v_T", "lambda_T", "n_events"])
            for i in range(sim.n_paths):
                writer.writerow([
                    i, repr(float(states.v[i, -1])), repr(float(states.lam[i, -1])),
                    int(states.n_events[i]),
                ])
        payload["per_path"] = args.per_path

    _emit(payload, cfg)
    return 0


# -- argument parsing ----------------------------------------------------------


def _add_state_flags(sub) -> None:
    sub.add_argument("--strike", type=float, default=None)
    sub.add_argument("--maturity", type=float, default=None)
    sub.add_argument("--valuation-time", dest="valuation_time", type=float, default=None)
    sub.add_argument("--v", type=float, default=None)
    sub.add_argument("--lambda", dest="lam", type=float, default=None)
    sub.add_argument("--phi-r-fraction", dest="phi_r_fraction", type=float, default=None)
    sub.add_argument("--tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawkesvix",
        description="VIX call pricing under Heston variance with self-exciting jumps",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    def common(sub):
        sub.add_argument("--config", required=True, help="path to the JSON run config")
        sub.add_argument("--seed", type=int, default=None)
        sub.add_argument("--threads", type=int, default=os.cpu_count())
        return sub

    common(subs.add_parser("validate", help="admissibility report"))

    price = common(subs.add_parser("price", help="Fourier price of a VIX call"))
    _add_state_flags(price)
    price.add_argument("--dump-integrand", default=None, help="CSV path for the integrand")

    charfn = common(subs.add_parser("charfn", help="transform values and dumps"))
    _add_state_flags(charfn)
    charfn.add_argument("--phi", type=complex, default=None)
    charfn.add_argument("--psi", type=complex, default=None)
    charfn.add_argument("--trajectory", default=None, help="CSV path for (G, H, F)")
    charfn.add_argument("--line", default=None, help="CSV path for f along the pricing line")
    charfn.add_argument("--line-max", dest="line_max", type=float, default=64.0)
    charfn.add_argument("--line-points", dest="line_points", type=int, default=257)

    common(subs.add_parser("vix", help="VIX^2 coefficients"))

    sim = common(subs.add_parser("simulate", help="Monte Carlo validation targets"))
    _add_state_flags(sim)
    sim.add_argument("--target", choices=("charfn", "price", "forward-variance"),
                     required=True)
    sim.add_argument("--phi", type=complex, default=None)
    sim.add_argument("--psi", type=complex, default=None)
    sim.add_argument("--times", default=None, help="comma-separated times")
    sim.add_argument("--n-paths", dest="n_paths", type=int, default=None)
    sim.add_argument("--scheme", choices=("exact", "euler"), default=None)
    sim.add_argument("--per-path", dest="per_path", default=None,
                     help="CSV path for per-path terminal stats")

    dump = common(subs.add_parser("dump-integrand", help="integrand CSV dump"))
    _add_state_flags(dump)
    dump.add_argument("--output", required=True)
    dump.add_argument("--phi-i-max", dest="phi_i_max", type=float, default=64.0)
    dump.add_argument("--points", type=int, default=257)

    return parser


_HANDLERS = {
    "validate": cmd_validate,
    "price": cmd_price,
    "charfn": cmd_charfn,
    "vix": cmd_vix,
    "simulate": cmd_simulate,
    "dump-integrand": cmd_dump_integrand,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "kind": "config"}), file=sys.stderr)
        return 2
    except _DOMAIN_ERRORS as exc:
        print(json.dumps({"error": str(exc), "kind": "domain"}), file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(json.dumps({"error": str(exc), "kind": "numerical"}), file=sys.stderr)
        return 3
    except ValueError as exc:
        print(json.dumps({"error": str(exc), "kind": "domain"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
