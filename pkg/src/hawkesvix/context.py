"""Assembled model context: parameters, jump law, shift, report, coefficients.

Everything downstream (pricer, simulator, CLI) consumes this bundle so the
admissibility chain runs exactly once per configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AssumptionViolated
from .jumps import JumpLaw
from .params import (
    AdmissibilityReport,
    MeasureShift,
    ModelParams,
    admissibility_report,
    check_shift,
    validate_base,
)
from .vix import VixCoefficients, vix_coefficients


@dataclass(frozen=True)
class ModelContext:
    """Validated model state shared by the pricer and the simulator."""

    params: ModelParams
    law: JumpLaw
    report: AdmissibilityReport
    shift: MeasureShift
    coeffs: VixCoefficients
    jump_mean: float = field(default=0.0)


def build_context(
    params: ModelParams,
    law: JumpLaw,
    a: float = 0.0,
    *,
    q2: float = 2.0,
    eps1: float = 1.0,
    eps2: float = 1.0,
) -> ModelContext:
    """Run the full admissibility chain and assemble the context.

    Raises AssumptionViolated when base invariants fail; shift validation
    raises its own errors for |a| out of range or a singular shift.
    """
    violations = validate_base(params)
    if violations:
        raise AssumptionViolated("; ".join(violations))
    report = admissibility_report(params, law, q2=q2, eps1=eps1, eps2=eps2)
    shift = check_shift(params, a, report)
    jump_mean = law.mean()
    coeffs = vix_coefficients(shift, params, jump_mean)
    return ModelContext(
        params=params,
        law=law,
        report=report,
        shift=shift,
        coeffs=coeffs,
        jump_mean=jump_mean,
    )
