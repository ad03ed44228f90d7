"""Jump-size distributions driving the self-exciting variance jumps.

Every law is supported on (0, inf), integrable, and exposes the four
operations the transform solver and the simulator need:

* ``mgf(z)``          moment generating function E[exp(z J)], defined for
                      Re(z) < eps_j and extended to complex arguments by
                      analytic continuation (|E[exp(z J)]| <= mgf(Re z),
                      so the continuation stays finite on the half-plane),
* ``mgf_inverse(y)``  the unique t > 0 with mgf(t) = y for y > 1,
* ``mean()``          E[J],
* ``sample(rng)``     a draw, deterministic given the generator state.

``(-inf, eps_j)`` is the maximal real domain: for finite ``eps_j`` the MGF
blows up at the boundary.  Three closed-form laws ship (exponential, gamma,
constant); new laws only need to implement the abstract surface, falling
back to the generic bisection inverse.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainViolation

_INV_REL_TOL = 1e-12


class JumpLaw(ABC):
    """Abstract positive jump-size law with an exponential-moment domain."""

    @property
    @abstractmethod
    def eps_j(self) -> float:
        """Right endpoint of the maximal real MGF domain (may be +inf)."""

    @abstractmethod
    def mgf(self, z):
        """E[exp(z J)] for scalar or array ``z`` with Re(z) < eps_j."""

    @abstractmethod
    def mean(self) -> float:
        """E[J]."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the law using ``rng``; scalar when ``size`` is None."""

    def _check_domain(self, z) -> None:
        re = np.real(np.asarray(z))
        if np.any(re >= self.eps_j):
            raise DomainViolation(
                f"MGF argument has Re(z) >= {self.eps_j} (domain boundary)"
            )

    def mgf_inverse(self, y: float) -> float:
        """Solve mgf(t) = y for t in (0, eps_j), y > 1, by bisection.

        Relative tolerance 1e-12.  Subclasses override with closed forms.
        """
        return self._mgf_inverse_bisect(y)

    def _mgf_inverse_bisect(self, y: float) -> float:
        if y <= 1.0:
            raise DomainViolation(f"mgf_inverse requires y > 1, got {y}")
        # Bracket: mgf(0) = 1 < y; push hi toward eps_j until mgf(hi) >= y.
        if math.isinf(self.eps_j):
            hi = 1.0
            while self.mgf(hi) < y:
                hi *= 2.0
                if hi > 1e300:
                    raise DomainViolation("mgf_inverse bracket expansion failed")
            lo = 0.0
        else:
            lo, hi = 0.0, self.eps_j
            shrink = 0.5
            while True:
                probe = self.eps_j * (1.0 - shrink)
                if self.mgf(probe) >= y:
                    hi = probe
                    break
                lo = probe
                shrink *= 0.5
                if shrink < 1e-15:
                    hi = self.eps_j * (1.0 - shrink)
                    break
        while hi - lo > _INV_REL_TOL * max(hi, 1e-300):
            mid = 0.5 * (lo + hi)
            if self.mgf(mid) < y:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def _scalarize(out, z):
    """Return a Python scalar when the input was scalar, else the array."""
    arr = np.asarray(out)
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return arr.item()
    return arr


@dataclass(frozen=True)
class ExponentialJumps(JumpLaw):
    """Exponential law with rate ``rate``: density rate*exp(-rate*x) on (0, inf)."""

    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError(f"exponential rate must be positive, got {self.rate}")

    @property
    def eps_j(self) -> float:
        return self.rate

    def mgf(self, z):
        self._check_domain(z)
        return _scalarize(self.rate / (self.rate - np.asarray(z)), z)

    def mgf_inverse(self, y: float) -> float:
        if y <= 1.0:
            raise DomainViolation(f"mgf_inverse requires y > 1, got {y}")
        return self.rate * (1.0 - 1.0 / y)

    def mean(self) -> float:
        return 1.0 / self.rate

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.rate, size=size)


@dataclass(frozen=True)
class GammaJumps(JumpLaw):
    """Gamma law with shape ``shape`` and rate ``rate`` (mean shape/rate)."""

    shape: float
    rate: float

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError(
                f"gamma shape and rate must be positive, got {self.shape}, {self.rate}"
            )

    @property
    def eps_j(self) -> float:
        return self.rate

    def mgf(self, z):
        self._check_domain(z)
        za = np.asarray(z)
        # Re(rate - z) > 0 on the domain, so the principal power is branch-safe.
        out = np.exp(self.shape * (np.log(self.rate) - np.log(self.rate - za)))
        return _scalarize(out, z)

    def mgf_inverse(self, y: float) -> float:
        if y <= 1.0:
            raise DomainViolation(f"mgf_inverse requires y > 1, got {y}")
        return self.rate * (1.0 - y ** (-1.0 / self.shape))

    def mean(self) -> float:
        return self.shape / self.rate

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size=size)


@dataclass(frozen=True)
class ConstantJumps(JumpLaw):
    """Degenerate law: every jump has the same size ``value``."""

    value: float

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError(f"constant jump size must be positive, got {self.value}")

    @property
    def eps_j(self) -> float:
        return math.inf

    def mgf(self, z):
        return _scalarize(np.exp(self.value * np.asarray(z)), z)

    def mgf_inverse(self, y: float) -> float:
        if y <= 1.0:
            raise DomainViolation(f"mgf_inverse requires y > 1, got {y}")
        return math.log(y) / self.value

    def mean(self) -> float:
        return self.value

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)


_LAW_FIELDS = {
    "exponential": ("rate",),
    "gamma": ("shape", "rate"),
    "constant": ("value",),
}


def law_from_config(spec: dict) -> JumpLaw:
    """Build a jump law from a JSON-style mapping.

    Expected shapes: {"type": "exponential", "rate": r},
    {"type": "gamma", "shape": k, "rate": r}, {"type": "constant", "value": c}.
    Unknown keys are rejected.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("jump law spec must be an object with a 'type' key")
    kind = spec["type"]
    if kind not in _LAW_FIELDS:
        raise ConfigError(
            f"unknown jump law type {kind!r}; expected one of {sorted(_LAW_FIELDS)}"
        )
    fields = _LAW_FIELDS[kind]
    extra = set(spec) - {"type", *fields}
    if extra:
        raise ConfigError(f"unknown keys in jump law spec: {sorted(extra)}")
    missing = [f for f in fields if f not in spec]
    if missing:
        raise ConfigError(f"jump law spec missing keys: {missing}")
    kwargs = {f: float(spec[f]) for f in fields}
    try:
        if kind == "exponential":
            return ExponentialJumps(**kwargs)
        if kind == "gamma":
            return GammaJumps(**kwargs)
        return ConstantJumps(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
