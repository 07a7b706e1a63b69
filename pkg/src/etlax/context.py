"""Shared evaluation context for all elliptic evaluators.

Every evaluator in this package is a pure function of its arguments and a
ModularContext, which fixes the rank n, the modulus tau, the deformation
parameter hbar, the extra coupling c, the series truncation depth and the
tolerances used by the verification suites.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field


class ContextError(ValueError):
    """Invalid context parameters (wrong half-plane, resonant hbar, ...)."""


class SingularParameterError(ArithmeticError):
    """An evaluation hit a zero of a required denominator."""


class SamplingError(RuntimeError):
    """Generic-point sampling exhausted its resampling budget."""


def lattice_distance(z: complex, tau: complex) -> float:
    """Distance from z to the nearest point of Z + Z*tau."""
    b = z.imag / tau.imag
    a = z.real - b * tau.real
    a0, b0 = round(a), round(b)
    return min(abs(z - ((a0 + da) + (b0 + db) * tau))
               for da in (-1, 0, 1) for db in (-1, 0, 1))


@dataclass(frozen=True)
class ModularContext:
    """Global parameters shared by every evaluator.

    n           rank (the operators live on the sl_n weight space), n >= 2
    tau         modulus, Im tau > 0
    hbar        deformation parameter, kept off the period lattice
    c           coupling of the one-parameter operator family
    trunc       number of lattice terms kept on each side of a theta series
    tol_series  target bound for the discarded series tail
    tol_identity  residual threshold used by identity checks
    """

    n: int
    tau: complex
    hbar: complex
    c: complex = 0.0
    trunc: int = 24
    tol_series: float = 1e-13
    tol_identity: float = 1e-8
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ContextError(f"rank n must be >= 2, got {self.n}")
        if complex(self.tau).imag <= 0:
            raise ContextError(f"Im tau must be positive, got tau={self.tau}")
        if self.trunc < 4:
            raise ContextError(f"trunc must be >= 4, got {self.trunc}")
        if self.tol_series <= 0 or self.tol_identity <= 0:
            raise ContextError("tolerances must be positive")
        if lattice_distance(complex(self.hbar), complex(self.tau)) <= self.tol_identity:
            raise ContextError(f"hbar={self.hbar} sits on the period lattice Z + Z*tau")

    @property
    def p(self) -> complex:
        """Nome p = exp(2 pi i tau)."""
        return cmath.exp(2j * cmath.pi * self.tau)

    @property
    def q(self) -> complex:
        """q = exp(2 pi i hbar), the multiplicative shift step."""
        return cmath.exp(2j * cmath.pi * self.hbar)

    def cached(self, key, builder):
        """Memoize pure evaluations keyed by exact argument values."""
        try:
            return self._cache[key]
        except KeyError:
            value = builder()
            self._cache[key] = value
            return value

    def replace(self, **kw) -> "ModularContext":
        """A copy of this context with some fields replaced (fresh cache)."""
        data = dict(n=self.n, tau=self.tau, hbar=self.hbar, c=self.c,
                    trunc=self.trunc, tol_series=self.tol_series,
                    tol_identity=self.tol_identity)
        data.update(kw)
        return ModularContext(**data)


DEFAULT_TAU = 0.1 + 0.8j
DEFAULT_HBAR = 0.173 + 0.219j
DEFAULT_C = 0.37 + 0.21j


def default_context(n: int = 2, **kw) -> ModularContext:
    """The generic desk-scale context used by the verification suites."""
    params = dict(n=n, tau=DEFAULT_TAU, hbar=DEFAULT_HBAR, c=DEFAULT_C)
    params.update(kw)
    return ModularContext(**params)
