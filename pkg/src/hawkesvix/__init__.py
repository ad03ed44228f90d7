"""VIX call pricing under Heston variance with self-exciting jump clustering.

The variance follows a square-root diffusion plus a compound Hawkes jump
term; VIX^2 is affine in the state, the joint transform of (variance,
intensity) solves generalized Riccati ODEs, and European VIX calls price
through a half-line Fourier integral.  A built-in Monte Carlo oracle
(exact Hawkes thinning, exact CIR transitions) cross-validates every
analytic surface.
"""

from .charfn import CharFnSolution, CharFnSolver, char_fn
from .context import ModelContext, build_context
from .errors import HawkesVixError
from .jumps import ConstantJumps, ExponentialJumps, GammaJumps, JumpLaw, law_from_config
from .mc import SimConfig, mc_char_fn, mc_forward_variance, mc_vix_price, simulate_states
from .params import (
    AdmissibilityReport,
    MeasureShift,
    ModelParams,
    admissibility_report,
    check_shift,
    exp_moment_bound,
    jump_mgf_bound,
    max_shift,
    validate_base,
)
from .pricer import PricingRequest, PricingResult, choose_phi_r, erfc_complex, price_call
from .riccati import RiccatiSolution, TransformArgs, domain_check, solve_riccati
from .vix import (
    VixCoefficients,
    exp_decay_average,
    forward_intensity,
    forward_variance,
    variance_swap,
    vix_coefficients,
    vix_value,
)

__all__ = [
    "AdmissibilityReport",
    "CharFnSolution",
    "CharFnSolver",
    "ConstantJumps",
    "ExponentialJumps",
    "GammaJumps",
    "HawkesVixError",
    "JumpLaw",
    "MeasureShift",
    "ModelContext",
    "ModelParams",
    "PricingRequest",
    "PricingResult",
    "RiccatiSolution",
    "SimConfig",
    "TransformArgs",
    "VixCoefficients",
    "admissibility_report",
    "build_context",
    "char_fn",
    "check_shift",
    "choose_phi_r",
    "domain_check",
    "erfc_complex",
    "exp_decay_average",
    "exp_moment_bound",
    "forward_intensity",
    "forward_variance",
    "jump_mgf_bound",
    "law_from_config",
    "max_shift",
    "mc_char_fn",
    "mc_forward_variance",
    "mc_vix_price",
    "price_call",
    "simulate_states",
    "solve_riccati",
    "validate_base",
    "variance_swap",
    "vix_coefficients",
    "vix_value",
]

__version__ = "0.1.0"
