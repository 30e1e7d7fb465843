"""Moments of the singularly perturbed Laguerre weight and the modified
Bessel function K_nu they reduce to.

The weight is w(x; t, a) = x^a exp(-x - t/x) on (0, oo) with t >= 0 and
a > -1.  Its j-th moment has the closed form

    mu_j(t, a) = 2 t^((j+a+1)/2) K_{j+a+1}(2 sqrt(t)),        t > 0,
    mu_j(0, a) = Gamma(j + a + 1).

Moments feed Hankel determinants where a silent error is catastrophic, so for
t > 0 every certified moment is computed by two independent routes (the Bessel
closed form and direct quadrature of the defining integral) with a mandatory
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from mpmath import mp, mpf

from .errors import CrossCheckMismatch, DomainError, PropertyViolation
from .numerics import (
    CertifiedReal,
    PrecisionPolicy,
    PrecisionExhausted,
    adaptive_eval,
    de_quadrature_raw,
    rel_diff,
)

_PARAM_CONVERSION_BITS = 512


def as_param(x) -> mpmath.mpf:
    """Convert a user-facing parameter to a fixed binary value.

    Conversion happens once at a fixed precision so that every subsequent
    escalation level sees bit-identical parameters (decimal strings such as
    "0.1" would otherwise re-round at each level).
    """
    if isinstance(x, mpmath.mpf):
        return x
    with mp.workprec(_PARAM_CONVERSION_BITS):
        if isinstance(x, float):
            return mpf(repr(x))
        return mpf(x)


@dataclass(frozen=True)
class WeightParams:
    """The pair (t, alpha) identifying one weight, plus the precision policy
    under which everything derived from it is certified."""

    t: mpmath.mpf
    alpha: mpmath.mpf
    policy: PrecisionPolicy = field(default_factory=PrecisionPolicy)

    def __post_init__(self):
        object.__setattr__(self, "t", as_param(self.t))
        object.__setattr__(self, "alpha", as_param(self.alpha))
        if not self.t >= 0:
            raise DomainError("t must be >= 0")
        if not self.alpha > -1:
            raise DomainError("alpha must be > -1")

    @property
    def low_alpha(self) -> bool:
        """True for -1 < alpha <= 0; such runs are flagged in report metadata
        so the empirically probed regime stays auditable."""
        return self.alpha <= 0

    def shifted(self, k: int) -> "WeightParams":
        """Same t and policy with alpha -> alpha + k."""
        return WeightParams(self.t, self.alpha + k, self.policy)

    def cache_key(self):
        return (self.t._mpf_, self.alpha._mpf_, self.policy)

    def weight(self, x):
        """w(x) = x^alpha exp(-x - t/x) at the ambient precision."""
        return x ** self.alpha * mpmath.exp(-x - self.t / x)


# ---------------------------------------------------------------------------
# Modified Bessel function of the second kind
# ---------------------------------------------------------------------------

def bessel_k_integrand(nu, z):
    """Integrand of K_nu(z) = (1/2)(z/2)^nu Int_0^oo exp(-x - z^2/(4x)) x^(-nu-1) dx."""
    q = z * z / 4

    def g(x):
        return mpmath.exp(-x - q / x) * x ** (-nu - 1)

    return g


def bessel_k_raw(nu, z, bits) -> mpmath.mpf:
    """K_nu(z) through the integral representation at one precision level."""
    with mp.workprec(bits + 10):
        pref = mpf(1) / 2 * (z / 2) ** nu
        return pref * de_quadrature_raw(bessel_k_integrand(nu, z), bits)


def bessel_k(nu, z, policy: PrecisionPolicy | None = None) -> CertifiedReal:
    """Certified K_nu(z) for nu > 0, z > 0, from the integral representation."""
    policy = policy or PrecisionPolicy()
    nu = as_param(nu)
    z = as_param(z)
    if not z > 0:
        raise DomainError("z must be positive")
    if not nu > 0:
        raise DomainError("nu must be positive")
    return adaptive_eval(lambda bits: bessel_k_raw(nu, z, bits), policy)


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------

def moment_raw(j: int, t, alpha) -> mpmath.mpf:
    """mu_j at the ambient working precision via the analytic closed form.

    Uses the series/asymptotic Bessel evaluation, which is algorithmically
    independent of the quadrature route and fast enough to rebuild whole
    moment tables inside determinant escalation loops.
    """
    nu = j + alpha + 1
    if t == 0:
        return mpmath.gamma(nu)
    s = mpmath.sqrt(t)
    return 2 * t ** (nu / 2) * mpmath.besselk(nu, 2 * s)


def moment_quadrature_raw(j: int, t, alpha, bits) -> mpmath.mpf:
    """mu_j by direct double-exponential quadrature of x^(j+alpha) w(x)."""
    e = j + alpha

    def g(x):
        return x ** e * mpmath.exp(-x - t / x) if t > 0 else x ** e * mpmath.exp(-x)

    return de_quadrature_raw(g, bits)


def moment(j: int, params: WeightParams) -> CertifiedReal:
    """Certified mu_j(t, alpha).

    For t = 0 this is the classical Laguerre branch Gamma(j + alpha + 1); the
    Bessel form degenerates there.  For t > 0 the value is computed by BOTH
    the Bessel closed form and direct quadrature; the routes must agree within
    combined certified bounds and the quadrature value is returned.
    """
    if j < 0:
        raise DomainError("j must be >= 0")
    t, alpha, policy = params.t, params.alpha, params.policy
    if t == 0:
        return adaptive_eval(lambda bits: mpmath.gamma(j + alpha + 1), policy)

    def f(bits):
        quad = moment_quadrature_raw(j, t, alpha, bits)
        closed = moment_raw(j, t, alpha)
        gap = rel_diff(quad, closed)
        if gap > 100 * mpf(policy.target_rel_err) and gap > mpf(2) ** (-(bits - 20)):
            raise CrossCheckMismatch(
                f"moment mu_{j}: quadrature and Bessel routes differ by {mpmath.nstr(gap, 5)}"
            )
        return quad

    return adaptive_eval(f, policy)


@dataclass(frozen=True)
class MomentTable:
    """mu_0..mu_J at fixed (t, alpha), each certified."""

    params: WeightParams
    mu: Sequence[CertifiedReal]

    def __len__(self):
        return len(self.mu)

    def value(self, j: int) -> mpmath.mpf:
        return self.mu[j].value


def moment_table(J: int, params: WeightParams) -> MomentTable:
    """Certified moment table with positivity and log-convexity asserted.

    Log-convexity mu_j^2 <= mu_{j-1} mu_{j+1} is the Cauchy-Schwarz inequality
    for positive measures and must hold beyond certified error.
    """
    if J < 0:
        raise DomainError("J must be >= 0")
    mus = [moment(j, params) for j in range(J + 1)]
    slack = 10 * mpf(params.policy.target_rel_err)
    for j, m in enumerate(mus):
        if not m.value > 0:
            raise PropertyViolation(f"mu_{j} positivity", float(m.value))
    for j in range(1, J):
        lhs = mus[j].value ** 2
        rhs = mus[j - 1].value * mus[j + 1].value
        margin = (rhs - lhs) / rhs
        if margin < -slack:
            raise PropertyViolation(f"log-convexity at j={j}", float(margin))
    return MomentTable(params, tuple(mus))
