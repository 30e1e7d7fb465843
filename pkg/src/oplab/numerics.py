"""Adaptive-precision arithmetic, double-exponential quadrature and
high-order numerical differentiation.

Every quantity in this package is produced by a precision-parameterized
computation ``f(bits)`` evaluated at doubling bit counts until two successive
levels agree to the target relative error; the observed agreement is the
certificate attached to the result.  There is no a-priori error bound: Hankel
determinants of moment matrices lose O(n) digits and only an empirical
two-level certificate is practical.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
from mpmath import mp, mpf

from .errors import (
    DomainError,
    NonConvergence,
    PrecisionExhausted,
    StepUnderflow,
)

ENV_MAX_BITS = "OPLAB_MAX_BITS"


class InsufficientPrecision(Exception):
    """Internal signal: the current precision level cannot complete the
    computation (e.g. a positive-definite factorization met a nonpositive
    pivot).  The adaptive driver escalates and retries."""


@dataclass(frozen=True)
class PrecisionPolicy:
    """Escalation schedule for adaptive evaluation."""

    start_bits: int = 128
    max_bits: int = 8192
    target_rel_err: float = 1e-30

    def __post_init__(self):
        if self.start_bits < 64:
            raise DomainError("start_bits must be >= 64")
        if self.max_bits < self.start_bits:
            raise DomainError("max_bits must be >= start_bits")
        if not self.target_rel_err > 0:
            raise DomainError("target_rel_err must be positive")

    def effective_max_bits(self) -> int:
        """max_bits, additionally capped by the OPLAB_MAX_BITS env var."""
        cap = os.environ.get(ENV_MAX_BITS)
        if cap:
            return min(self.max_bits, max(int(cap), self.start_bits))
        return self.max_bits

    def levels(self, start_bits: int | None = None):
        """Doubling bit levels from start_bits up to the effective cap."""
        bits = start_bits if start_bits is not None else self.start_bits
        top = self.effective_max_bits()
        while bits <= top:
            yield bits
            bits *= 2


@dataclass(frozen=True)
class CertifiedReal:
    """A value together with the empirically certified relative error bound
    (agreement of the last two precision levels) and the bits that produced it."""

    value: mpmath.mpf
    rel_err_bound: float
    bits_used: int

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return (
            f"CertifiedReal({mpmath.nstr(self.value, 25)}, "
            f"rel_err<={self.rel_err_bound:.3e}, bits={self.bits_used})"
        )


def rel_diff(a, b) -> mpmath.mpf:
    """|a-b| / max(|a|,|b|); zero when both vanish."""
    scale = max(abs(a), abs(b))
    if scale == 0:
        return mp.zero
    return abs(a - b) / scale


def seq_rel_diff(xs: Sequence, ys: Sequence, uniform_scale: bool = False) -> mpmath.mpf:
    """Worst entrywise relative difference between two equal-length sequences.

    With ``uniform_scale`` the differences are measured against the largest
    magnitude across both sequences instead of entrywise; use this for tuples
    of values on a common scale where individual entries may vanish (e.g. a
    polynomial and its derivative evaluated at a zero).
    """
    if len(xs) != len(ys):
        raise ValueError("sequence length mismatch")
    if uniform_scale:
        scale = mp.zero
        for v in (*xs, *ys):
            a = abs(v)
            if a > scale:
                scale = a
        if scale == 0:
            return mp.zero
        worst = mp.zero
        for x, y in zip(xs, ys):
            d = abs(x - y) / scale
            if d > worst:
                worst = d
        return worst
    worst = mp.zero
    for x, y in zip(xs, ys):
        d = rel_diff(x, y)
        if d > worst:
            worst = d
    return worst


def adaptive_eval(
    f: Callable[[int], mpmath.mpf],
    policy: PrecisionPolicy,
    start_bits: int | None = None,
) -> CertifiedReal:
    """Evaluate ``f(bits)`` at doubling precision until two successive levels
    agree to ``policy.target_rel_err``.

    ``f`` must be deterministic at fixed ``bits``; it runs with the working
    precision set to ``bits``.  A level may raise :class:`InsufficientPrecision`
    to request escalation without producing a value.
    """
    prev = None
    last_bits = 0
    for bits in policy.levels(start_bits):
        last_bits = bits
        try:
            with mp.workprec(bits):
                val = f(bits)
                val = +val  # round into the working precision
        except InsufficientPrecision:
            prev = None
            continue
        if prev is not None:
            agreement = rel_diff(val, prev)
            if agreement <= policy.target_rel_err:
                return CertifiedReal(val, float(agreement), bits)
        prev = val
    raise PrecisionExhausted(
        f"no two-level agreement to {policy.target_rel_err:g} within {last_bits} bits"
    )


def adaptive_eval_seq(
    f: Callable[[int], Sequence],
    policy: PrecisionPolicy,
    start_bits: int | None = None,
    check: Callable[[Sequence, int], None] | None = None,
    uniform_scale: bool = False,
):
    """Vector analogue of :func:`adaptive_eval`.

    ``f(bits)`` returns a sequence; certification requires the worst entrywise
    relative change between two successive levels to meet the target.  An
    optional ``check(values, bits)`` hook runs on the accepted level (used for
    cross-route consistency enforcement).  Returns ``(values, rel_err, bits)``.
    """
    prev = None
    last_bits = 0
    for bits in policy.levels(start_bits):
        last_bits = bits
        try:
            with mp.workprec(bits):
                vals = f(bits)
        except InsufficientPrecision:
            prev = None
            continue
        if prev is not None and len(prev) == len(vals):
            agreement = seq_rel_diff(vals, prev, uniform_scale=uniform_scale)
            if agreement <= policy.target_rel_err:
                if check is not None:
                    with mp.workprec(bits):
                        check(vals, bits)
                return vals, float(agreement), bits
        prev = vals
    raise PrecisionExhausted(
        f"no two-level agreement to {policy.target_rel_err:g} within {last_bits} bits"
    )


# ---------------------------------------------------------------------------
# Double-exponential quadrature on (0, oo)
# ---------------------------------------------------------------------------

def _trapezoid_de(node, bits, h0=None, max_halvings=16):
    """Trapezoid sum of ``node(u)`` over the whole real line with step halving.

    After the x = e^u substitution the integrands handled here decay at least
    exponentially in both directions, so the trapezoid rule converges
    double-exponentially in 1/h.  Terms are accumulated outward from u = 0 and
    truncated once they stay far below the running maximum.
    """
    eps = mpf(2) ** (-(bits + 30))
    min_span = mpf(4)
    max_nodes = 2_000_000

    def half_sum(base, h):
        """Sum of node(base + k*h) for k = 0, 1, ... plus the mirrored side."""
        total = mp.zero
        maxterm = mp.zero
        for sgn in (1, -1):
            k = 0
            small = 0
            while True:
                u = sgn * (base + k * h)
                if sgn < 0 and base == 0 and k == 0:
                    k += 1
                    continue  # u = 0 counted once on the positive pass
                term = node(u)
                total += term
                a = abs(term)
                if a > maxterm:
                    maxterm = a
                small = small + 1 if a <= eps * (maxterm + eps) else 0
                if small >= 12 and abs(u) >= min_span:
                    break
                k += 1
                if k > max_nodes:
                    raise NonConvergence("quadrature tail did not truncate")
        return total

    h = h0 if h0 is not None else mpf(1) / 4
    val = half_sum(mp.zero, h) * h
    prev = None
    for _ in range(max_halvings):
        mid = half_sum(h / 2, h)  # midpoints of the current grid
        val = val / 2 + mid * (h / 2)
        h = h / 2
        if prev is not None:
            err = rel_diff(val, prev)
            if err <= mpf(2) ** (-(bits - 5)) or (val == 0 and prev == 0):
                return val
        prev = val
    raise NonConvergence("quadrature step-halving stalled")


def de_quadrature_raw(g, bits) -> mpmath.mpf:
    """Integral of g over (0, oo) at a fixed precision level.

    Applies x = e^u and runs the double-exponential trapezoid rule on
    u in (-oo, oo).  Requires super-polynomial decay of g at both endpoints
    of (0, oo) after the substitution.
    """
    with mp.workprec(bits + 30):
        def node(u):
            x = mpmath.exp(u)
            return g(x) * x

        return _trapezoid_de(node, bits)


def de_quadrature(g, policy: PrecisionPolicy) -> CertifiedReal:
    """Certified integral of ``g`` over (0, oo).

    ``g`` receives an mpf argument and must evaluate at the ambient working
    precision.  The tanh-sinh style trapezoid (after the log substitution) is
    preferred over Gauss-Laguerre because an essential singularity such as
    exp(-t/x) at the origin defeats fixed Laguerre nodes, while under x = e^u
    the integrand decays double-exponentially.
    """
    return adaptive_eval(lambda bits: de_quadrature_raw(g, bits), policy)


# ---------------------------------------------------------------------------
# Numerical differentiation in t
# ---------------------------------------------------------------------------

def _stencil_derivative(f, t, order, bits):
    """Central difference at step h = t * 2^(-bits/4), Richardson-extrapolated
    once; inner evaluations run at 2x the working precision so differencing
    cancellation stays far below the certification target."""
    inner = 2 * bits
    with mp.workprec(inner):
        t = +t
        h = t * mpf(2) ** (-(bits // 4))
        if t + h == t:
            raise StepUnderflow("difference step underflowed at this precision")

        if order == 1:
            def d1(step):
                return (f(t + step) - f(t - step)) / (2 * step)

            coarse = d1(h)
            fine = d1(h / 2)
        elif order == 2:
            f0 = f(t)

            def d2(step):
                return (f(t + step) - 2 * f0 + f(t - step)) / (step * step)

            coarse = d2(h)
            fine = d2(h / 2)
        else:
            raise DomainError("order must be 1 or 2")
        return (4 * fine - coarse) / 3


def t_derivative(f, t, order: int, policy: PrecisionPolicy) -> CertifiedReal:
    """Certified d^order/dt^order of ``f`` at ``t > 0``.

    ``f`` maps an mpf to an mpf and must honour the ambient working precision;
    every verifier in this package differentiates quantities defined only
    through determinants, so finite differences at elevated inner precision
    are used instead of symbolic differentiation.
    """
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    if not t > 0:
        raise DomainError("t must be positive for a relative step")
    return adaptive_eval(lambda bits: _stencil_derivative(f, mpf(t), order, bits), policy)
