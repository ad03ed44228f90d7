"""Exception hierarchy for the pricing engine.

Domain errors (inadmissible parameters or transform arguments) and
numerical errors (solver stalls, quadrature blow-ups) are kept apart so
callers can map them to different exit codes.
"""


class HawkesVixError(Exception):
    """Base class for all engine-specific failures."""


# -- domain / admissibility ---------------------------------------------------


class NoAdmissibleC(HawkesVixError):
    """No exponential-moment order is admissible; signals a broken jump law."""


class AssumptionViolated(HawkesVixError):
    """A standing admissibility assumption fails for the given parameters."""


class ShiftOutOfRange(HawkesVixError):
    """Measure-shift parameter exceeds the maximal admissible magnitude."""


class SingularShift(HawkesVixError):
    """Shifted reversion speed collides with the net intensity decay rate."""


class DomainViolation(HawkesVixError):
    """Argument lies outside the guaranteed-existence domain."""


class NegativeVixSquared(HawkesVixError):
    """VIX^2 radicand is negative beyond floating-point dust."""


class SchemeUnavailable(HawkesVixError):
    """Requested simulation scheme cannot handle the given parameters."""


# -- numerical ----------------------------------------------------------------


class DegenerateDenominator(HawkesVixError):
    """Closed-form denominator vanished; domain guards were bypassed."""


class StepSizeUnderflow(HawkesVixError):
    """Adaptive ODE integrator stalled before reaching the horizon."""


class ExplosionGuardExceeded(HawkesVixError):
    """ODE solution crossed the a-priori explosion guard; result discarded."""


class OutOfGrid(HawkesVixError):
    """Evaluation time lies outside the solved interval."""


class QuadratureNotConverged(HawkesVixError):
    """Pricing quadrature exhausted its node or truncation budget."""


class PricingSanityError(HawkesVixError):
    """Computed price violates a model-independent bound."""


class ConfigError(HawkesVixError):
    """Run configuration does not parse or contains unknown keys."""
