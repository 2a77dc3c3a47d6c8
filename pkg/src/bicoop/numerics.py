"""The C1 function and the chi-square expectation identities built on it.

C1(x) = (1/ln 2) * exp(1/x) * E1(1/x) for x > 0, where E1 is the exponential
integral. Every ergodic-capacity closed form in the package is a signed sum
of C1 terms, so this module is written for accuracy over a very wide range
of arguments (roughly 1e-6 .. 1e12 and beyond).

The random variable X behind ``expected_log_sinr`` is chi-square with two
degrees of freedom, i.e. density exp(-x/2)/2 (mean 2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

LN2 = math.log(2.0)
EULER_GAMMA = 0.57721566490153286061

# Below this z the power series of E1 is used, above it the continued fraction.
_SERIES_CUTOFF = 2.0
_SERIES_TERMS = 40
_CF_DEPTH = 80


class DomainError(ValueError):
    """Raised when an argument is outside the domain of a function."""


class ConvergenceError(RuntimeError):
    """Raised when adaptive quadrature does not meet the requested tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-10
    absolute_tolerance: float = 1e-14
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.absolute_tolerance > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


def _check_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return arr


def scaled_exp1(z):
    """exp(z) * E1(z) for z > 0, without forming either factor separately."""
    z = _check_positive("z", z)
    out = np.empty_like(z)

    small = z < _SERIES_CUTOFF
    if np.any(small):
        zs = z[small]
        # E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
        term = np.ones_like(zs)
        acc = np.zeros_like(zs)
        for k in range(1, _SERIES_TERMS + 1):
            term = term * (-zs) / k
            acc = acc + term / k
        out[small] = np.exp(zs) * (-EULER_GAMMA - np.log(zs) - acc)

    large = ~small
    if np.any(large):
        zl = z[large]
        # exp(z) E1(z) = 1/(z+1 - 1/(z+3 - 4/(z+5 - ...))), evaluated bottom-up
        f = zl + 2 * _CF_DEPTH + 1
        for k in range(_CF_DEPTH, 0, -1):
            f = zl + (2 * k - 1) - (k * k) / f
        out[large] = 1.0 / f

    return out[()] if out.ndim == 0 else out


def c1(x):
    """C1(x) = exp(1/x) E1(1/x) / ln 2. Accepts scalars or arrays, x > 0.

    Positive and strictly increasing; behaves like x/ln 2 as x -> 0 and like
    log2(x) - gamma/ln 2 as x -> infinity.
    """
    x = _check_positive("x", x)
    return scaled_exp1(1.0 / x) / LN2


def c1_quadrature_oracle(x: float, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """C1 by direct adaptive quadrature, independent of :func:`c1`.

    With t = 1 + x*u the defining integral becomes
    C1(x) = (1/ln 2) * int_0^inf exp(-u) * x / (1 + x*u) du,
    which has no exponential prefactor to overflow. The range is split at
    u = 1/x (where the 1/(1 + x u) factor turns over) and at u = 1.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"x must be finite and > 0, got {x!r}")

    def integrand(u):
        return math.exp(-u) * x / (1.0 + x * u)

    knots = sorted({0.0, min(1.0 / x, 50.0), 1.0})
    pieces = list(zip(knots[:-1], knots[1:])) + [(knots[-1], math.inf)]
    total = 0.0
    for lo, hi in pieces:
        if hi <= lo:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, _ = integrate.quad(
                    integrand, lo, hi,
                    epsabs=spec.absolute_tolerance,
                    epsrel=spec.relative_tolerance,
                    limit=spec.max_subdivisions,
                )
            except integrate.IntegrationWarning as exc:
                raise ConvergenceError(f"quadrature failed on [{lo}, {hi}] for x={x}: {exc}") from exc
        total += val
    return total / LN2


def expected_log_sinr(a, b):
    """E[log2(1 + a X / b)] for X chi-square with 2 degrees of freedom."""
    a = _check_positive("a", a)
    b = _check_positive("b", b)
    return c1(2.0 * a / b)


def lemma2_integral(a, b):
    """int_0^inf exp(-b x) log2(1 + a x) dx = C1(a/b) / b."""
    a = _check_positive("a", a)
    b = _check_positive("b", b)
    return c1(a / b) / b


def c1_gap(x, beta):
    """C1(x) - C1(beta x) for 0 < beta < 1; nonnegative and increasing in x."""
    x = _check_positive("x", x)
    beta_arr = np.asarray(beta, dtype=float)
    if np.any(~(beta_arr > 0)) or np.any(~(beta_arr < 1)):
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    return c1(x) - c1(beta_arr * x)
