"""Coulomb-fluid endpoints, large-n asymptotic expansions, long-time
expansions, empirical remainder-order fitting and estimation of the
undetermined period-1 constants in the Hankel asymptotics.

The equilibrium-measure endpoints (a, b) of the large-n eigenvalue support
reduce to the arithmetic/geometric means X = (a+b)/2 and Y = sqrt(ab), where
Y solves the quartic Y^4 - alpha Y^3 - (2n+alpha) t Y - t^2 = 0 (unique
positive root) and X = 2n + alpha + t/Y.  Every expansion below is evaluated
termwise with kappa = 2^(1/3); all of them are singular at t = 0.

The n-linear and constant terms of ln D_n contain period-1 functions of alpha
that the analytic route leaves undetermined; they are estimated by least
squares against exact determinants and never claimed exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from mpmath import mp, mpf

from .errors import (
    DomainError,
    IllConditionedFit,
    RemainderBelowNoise,
    RootBracketFailure,
    SingularAtZero,
)
from .hankel import get_engine, pn_zero_ratio, suggested_start_bits
from .moments import WeightParams, as_param
from .numerics import CertifiedReal, PrecisionPolicy, adaptive_eval, adaptive_eval_seq
from .recurrence import cached_table

SERIES_BITS = 256  # plenty for termwise evaluation of explicit expansions


def kappa():
    """2^(1/3) at the ambient precision."""
    return mpf(2) ** (mpf(1) / 3)


# ---------------------------------------------------------------------------
# Coulomb-fluid endpoints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EndpointData:
    """Support endpoints of the equilibrium measure and the Lagrange
    multiplier of the constrained minimization."""

    n: int
    t: mpmath.mpf
    alpha: mpmath.mpf
    Y: mpmath.mpf  # geometric mean sqrt(ab)
    X: mpmath.mpf  # arithmetic mean (a+b)/2
    a: mpmath.mpf
    b: mpmath.mpf
    A: mpmath.mpf  # Lagrange multiplier
    rel_err_bound: float
    bits_used: int


def quartic_value(Y, n, t, alpha):
    """Y^4 - alpha Y^3 - (2n+alpha) t Y - t^2."""
    return Y ** 4 - alpha * Y ** 3 - (2 * n + alpha) * t * Y - t * t


def quartic_coefficient_signs(n, t, alpha):
    """Signs of the monic quartic coefficients (descending powers); the
    sequence has exactly one sign change for t > 0, n >= 1, alpha > -1,
    which forces a unique positive root."""
    coeffs = [mpf(1), -alpha, mp.zero, -(2 * n + alpha) * t, -t * t]
    return [0 if c == 0 else (1 if c > 0 else -1) for c in coeffs]


def endpoints(n: int, t, alpha, policy: PrecisionPolicy | None = None) -> EndpointData:
    """Solve the endpoint quartic for its unique positive root.

    Newton is seeded from the leading series term kappa (t n)^(1/3) + alpha/3,
    bracketed first so the positive branch is guaranteed without global root
    classification.
    """
    policy = policy or PrecisionPolicy()
    t, alpha = as_param(t), as_param(alpha)
    if n < 1:
        raise DomainError("n must be >= 1")
    if not t > 0:
        raise DomainError("endpoints need t > 0")

    def solve(bits):
        seed = kappa() * (t * n) ** (mpf(1) / 3) + alpha / 3
        if not seed > 0:
            seed = mpf(1)
        lo, hi = seed / 2, seed * 2
        grow = 0
        while quartic_value(lo, n, t, alpha) > 0:
            lo /= 2
            grow += 1
            if grow > 80:
                raise RootBracketFailure("no sign change below the seed")
        grow = 0
        while quartic_value(hi, n, t, alpha) < 0:
            hi *= 2
            grow += 1
            if grow > 80:
                raise RootBracketFailure("no sign change above the seed")
        y = seed if lo < seed < hi else (lo + hi) / 2
        tol = mpf(2) ** (-(bits - 6))
        for _ in range(bits):
            f = quartic_value(y, n, t, alpha)
            df = 4 * y ** 3 - 3 * alpha * y ** 2 - (2 * n + alpha) * t
            step = f / df
            y_new = y - step
            if not lo < y_new < hi:
                y_new = (lo + hi) / 2  # bisection fallback keeps the bracket
            if quartic_value(y_new, n, t, alpha) < 0:
                lo = y_new
            else:
                hi = y_new
            done = abs(y_new - y) <= tol * abs(y_new)
            y = y_new
            if done:
                return y
        return y

    cert = adaptive_eval(solve, policy)
    with mp.workprec(cert.bits_used):
        Y = cert.value
        X = 2 * n + alpha + t / Y
        if X * X < Y * Y:
            raise DomainError("endpoint reconstruction failed: X^2 < Y^2")
        half = mpmath.sqrt(X * X - Y * Y)
        a, b = X - half, X + half
        A = X + t / Y - n * mpmath.ln((X - Y) / 2) - (n + alpha) * mpmath.ln((X + Y) / 2)
    return EndpointData(n, t, alpha, Y, X, a, b, A, cert.rel_err_bound, cert.bits_used)


# ---------------------------------------------------------------------------
# Expansion machinery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    """One expansion term: coefficient times n^power (ln n)^logpow, or the
    t-analogue in long-time mode."""

    label: str
    power: Fraction
    logpow: int
    coefficient: mpmath.mpf
    contribution: mpmath.mpf


@dataclass(frozen=True)
class ExpansionResult:
    quantity: str
    mode: str  # "large-n" | "long-time"
    n: int | None
    t: mpmath.mpf
    alpha: mpmath.mpf
    value: mpmath.mpf
    terms: Sequence[Term]
    remainder_order: Fraction
    up_to_constant: bool = False

    def term_rows(self):
        return [
            {
                "label": tm.label,
                "coefficient": mpmath.nstr(tm.coefficient, 30),
                "contribution": mpmath.nstr(tm.contribution, 30),
            }
            for tm in self.terms
        ]


def _build(quantity, mode, n, t, alpha, raw_terms, remainder, up_to_constant=False):
    """Assemble an ExpansionResult from (label, power, logpow, coefficient)
    tuples, ordered by decreasing asymptotic size."""
    var = mpf(n) if mode == "large-n" else t
    terms = []
    for label, power, logpow, coeff in raw_terms:
        power = Fraction(power)
        if power != 0:
            base = var ** (mpf(power.numerator) / power.denominator)
        else:
            base = mpf(1)
        if logpow:
            base *= mpmath.ln(var) ** logpow
        terms.append(Term(label, power, logpow, coeff, coeff * base))
    terms.sort(key=lambda tm: (tm.power, tm.logpow), reverse=True)
    value = mp.zero
    for tm in terms:
        value += tm.contribution
    return ExpansionResult(
        quantity, mode, n, t, alpha, value, tuple(terms), Fraction(remainder), up_to_constant
    )


F = Fraction
LARGE_N_QUANTITIES = (
    "alpha_n", "beta_n", "p", "H", "lnD", "lnh", "lnPn0", "Y", "X", "quarter_sq", "A",
)
LONG_TIME_QUANTITIES = ("alpha_n", "beta_n", "p", "H", "lnD", "lnh")


def _large_n_terms(quantity, t, a, constants):
    """Raw (label, power-of-n, logpow, coefficient) tuples at the ambient
    precision; kappa = 2^(1/3)."""
    k = kappa()
    t13, t23 = t ** (mpf(1) / 3), t ** (mpf(2) / 3)
    ln_t, ln2 = mpmath.ln(t), mpmath.ln(2)
    c3h, c0h = constants if constants is not None else (None, None)

    if quantity == "alpha_n":
        return [
            ("2n", F(1), 0, mpf(2)),
            ("const", F(0), 0, a + 1),
            ("n^-1/3", F(-1, 3), 0, t23 / k),
            ("n^-2/3", F(-2, 3), 0, -a * t13 / (3 * k ** 2)),
            ("n^-4/3", F(-4, 3), 0, (a + 1) * (a * (a - 1) - 27 * t) / (162 * k * t13)),
            ("n^-5/3", F(-5, 3), 0,
             (a ** 2 * (a ** 2 - 1) + 54 * a * (a + 1) * t - 81 * t ** 2)
             / (486 * k ** 2 * t23)),
            ("n^-2", F(-2), 0, a * (a ** 2 + 81 * t ** 2 - 1) / (972 * t)),
        ], F(-7, 3)
    if quantity == "beta_n":
        return [
            ("n^2", F(2), 0, mpf(1)),
            ("n", F(1), 0, a),
            ("n^2/3", F(2, 3), 0, t23 / (2 * k)),
            ("n^1/3", F(1, 3), 0, -k * a * t13 / 3),
            ("const", F(0), 0, (6 * a ** 2 - 1) / mpf(36)),
            ("n^-1/3", F(-1, 3), 0, -a * (4 * a ** 2 - 27 * t - 4) / (162 * k * t13)),
            ("n^-2/3", F(-2, 3), 0,
             -(5 * a ** 4 + a ** 2 * (108 * t - 5) + 81 * t ** 2) / (972 * k ** 2 * t23)),
            ("n^-1", F(-1), 0, -a * (a ** 2 - 1) / (486 * t)),
        ], F(-4, 3)
    if quantity in ("p", "H"):
        shared = [
            ("n^2/3", F(2, 3), 0, -3 * t23 / (2 * k)),
            ("n^1/3", F(1, 3), 0, a * t13 / k ** 2),
            ("const", F(0), 0, -(6 * a ** 2 - 18 * t - 1) / mpf(36)),
            ("n^-1/3", F(-1, 3), 0, a * (a ** 2 - 27 * t - 1) / (54 * k * t13)),
            ("n^-2/3", F(-2, 3), 0,
             (a ** 4 + a ** 2 * (54 * t - 1) - 81 * t ** 2) / (324 * k ** 2 * t23)),
            ("n^-1", F(-1), 0, a * (a ** 2 + 81 * t ** 2 - 1) / (972 * t)),
        ]
        if quantity == "p":
            shared = [("n^2", F(2), 0, mpf(-1)), ("n", F(1), 0, -a)] + shared
        return shared, F(-4, 3)
    if quantity == "lnD":
        terms = [
            ("n^2 ln n", F(2), 1, mpf(1)),
            ("n ln n", F(1), 1, a),
            ("ln n", F(0), 1, (12 * a ** 2 - 5) / mpf(36)),
            ("n^2", F(2), 0, mpf(-3) / 2),
            ("n", F(1), 0, -a - (c3h if c3h is not None else 0)),
            ("n^2/3", F(2, 3), 0, -9 * t23 / (4 * k)),
            ("n^1/3", F(1, 3), 0, 3 * a * t13 / k ** 2),
            ("const", F(0), 0,
             -((6 * a ** 2 - 1) / mpf(36) * ln_t - t / 2 + a ** 2 * ln2 / 6
               + (c0h if c0h is not None else 0))),
            ("n^-1/3", F(-1, 3), 0, -a * (2 * a ** 2 + 27 * t - 2) / (36 * k * t13)),
            ("n^-2/3", F(-2, 3), 0,
             -(2 * a ** 4 - 2 * a ** 2 * (108 * t + 1) + 81 * t ** 2)
             / (432 * k ** 2 * t23)),
            ("n^-1", F(-1), 0,
             a * (2 * (81 * t - 1) * a ** 2 + 162 * t ** 2 - 135 * t + 2) / (1944 * t)),
        ]
        return terms, F(-4, 3)
    if quantity == "lnh":
        return [
            ("2n ln n", F(1), 1, mpf(2)),
            ("n", F(1), 0, mpf(-2)),
            ("ln n", F(0), 1, a + 1),
            ("const", F(0), 0, -(c3h if c3h is not None else mp.zero)),
            ("n^-1/3", F(-1, 3), 0, -3 * t23 / (2 * k)),
            ("n^-2/3", F(-2, 3), 0, a * t13 / k ** 2),
            ("n^-1", F(-1), 0, (12 * a ** 2 + 18 * a + 7) / mpf(36)),
            ("n^-4/3", F(-4, 3), 0,
             (a + 1) * (2 * a ** 2 - 2 * a + 27 * t) / (108 * k * t13)),
        ], F(-5, 3)
    if quantity == "lnPn0":
        # difference of the ln D expansions at alpha+1 and alpha; the unknown
        # period-1 constants cancel, leaving a fully explicit series
        return [
            ("n ln n", F(1), 1, mpf(1)),
            ("ln n", F(0), 1, (2 * a + 1) / mpf(3)),
            ("n", F(1), 0, mpf(-1)),
            ("n^1/3", F(1, 3), 0, 3 * t13 / k ** 2),
            ("const", F(0), 0, -(2 * a + 1) / mpf(6) * mpmath.ln(2 * t)),
            ("n^-1/3", F(-1, 3), 0, -(2 * a ** 2 + 2 * a + 9 * t) / (12 * k * t13)),
            ("n^-2/3", F(-2, 3), 0,
             -(2 * a + 1) * (a ** 2 + a - 54 * t) / (108 * k ** 2 * t23)),
            ("n^-1", F(-1), 0,
             (2 * a * (a + 1) * (81 * t - 1) + 9 * t * (6 * t + 1)) / (648 * t)),
        ], F(-4, 3)
    if quantity == "Y":
        return [
            ("n^1/3", F(1, 3), 0, k * t13),
            ("const", F(0), 0, a / 3),
            ("n^-1/3", F(-1, 3), 0, a ** 2 / (9 * k * t13)),
            ("n^-2/3", F(-2, 3), 0, a * (2 * a ** 2 + 27 * t) / (81 * k ** 2 * t23)),
            ("n^-1", F(-1), 0, t / 6),
            ("n^-4/3", F(-4, 3), 0,
             -a * (2 * a ** 4 + 27 * a ** 2 * t + 81 * t ** 2)
             / (1458 * k * t ** (mpf(4) / 3))),
            ("n^-5/3", F(-5, 3), 0,
             -a ** 2 * (7 * a ** 4 + 108 * a ** 2 * t + 972 * t ** 2)
             / (13122 * k ** 2 * t ** (mpf(5) / 3))),
            ("n^-2", F(-2), 0, -a * t / 12),
        ], F(-7, 3)
    if quantity == "X":
        return [
            ("2n", F(1), 0, mpf(2)),
            ("const", F(0), 0, a),
            ("n^-1/3", F(-1, 3), 0, t23 / k),
            ("n^-2/3", F(-2, 3), 0, -a * t13 / (3 * k ** 2)),
            ("n^-4/3", F(-4, 3), 0, a * (a ** 2 - 27 * t) / (162 * k * t13)),
            ("n^-5/3", F(-5, 3), 0,
             (a ** 4 + 54 * a ** 2 * t - 81 * t ** 2) / (486 * k ** 2 * t23)),
            ("n^-2", F(-2), 0, a * t / 12),
        ], F(-7, 3)
    if quantity == "quarter_sq":
        return [
            ("n^2", F(2), 0, mpf(1)),
            ("n", F(1), 0, a),
            ("n^2/3", F(2, 3), 0, t23 / (2 * k)),
            ("n^1/3", F(1, 3), 0, -k * a * t13 / 3),
            ("const", F(0), 0, a ** 2 / 6),
            ("n^-1/3", F(-1, 3), 0, a * (27 * t - 4 * a ** 2) / (162 * k * t13)),
            ("n^-2/3", F(-2, 3), 0,
             -(5 * a ** 4 + 108 * a ** 2 * t + 81 * t ** 2) / (972 * k ** 2 * t23)),
            ("n^-4/3", F(-4, 3), 0,
             a ** 2 * (7 * a ** 4 + 108 * a ** 2 * t - 243 * t ** 2)
             / (26244 * k * t ** (mpf(4) / 3))),
            ("n^-5/3", F(-5, 3), 0,
             a * (8 * a ** 6 + 135 * a ** 4 * t + 1620 * a ** 2 * t ** 2
                  + 2187 * t ** 3) / (78732 * k ** 2 * t ** (mpf(5) / 3))),
            ("n^-2", F(-2), 0, t ** 2 / 48),
        ], F(-7, 3)
    if quantity == "A":
        return [
            ("-2n ln n", F(1), 1, mpf(-2)),
            ("2n", F(1), 0, mpf(2)),
            ("-alpha ln n", F(0), 1, -a),
            ("n^-1/3", F(-1, 3), 0, 3 * t23 / (2 * k)),
            ("n^-2/3", F(-2, 3), 0, -a * t13 / k ** 2),
            ("n^-1", F(-1), 0, -a ** 2 / 3),
            ("n^-4/3", F(-4, 3), 0, -a * (2 * a ** 2 + 27 * t) / (108 * k * t13)),
            ("n^-5/3", F(-5, 3), 0,
             -(2 * a ** 4 - 216 * a ** 2 * t + 81 * t ** 2) / (648 * k ** 2 * t23)),
            ("n^-2", F(-2), 0, a * (a ** 2 + t) / 12),
        ], F(-7, 3)
    raise DomainError(f"unknown large-n quantity: {quantity}")


def large_n(
    quantity: str,
    n: int,
    t,
    alpha,
    constants: tuple | None = None,
    prec_bits: int = SERIES_BITS,
) -> ExpansionResult:
    """Truncated large-n expansion of one quantity at fixed t > 0.

    ``constants`` supplies the fitted period-1 pair (c3_hat, c0_hat) entering
    ln D_n and ln h_n; without it those terms are omitted and the result is
    flagged up_to_constant.
    """
    t, alpha = as_param(t), as_param(alpha)
    if t == 0:
        raise SingularAtZero("every large-n expansion here is singular at t = 0")
    if n < 1:
        raise DomainError("n must be >= 1")
    if quantity not in LARGE_N_QUANTITIES:
        raise DomainError(f"unknown large-n quantity: {quantity}")
    with mp.workprec(prec_bits):
        if constants is not None:
            constants = (as_param(constants[0]), as_param(constants[1]))
        raw, remainder = _large_n_terms(quantity, t, alpha, constants)
        flagged = quantity in ("lnD", "lnh") and constants is None
        return _build(quantity, "large-n", n, t, alpha, raw, remainder, flagged)


# ---------------------------------------------------------------------------
# Long-time expansions
# ---------------------------------------------------------------------------

def barnes_g_log(n: int):
    """ln G(n+1) = sum_{k=1}^{n-1} ln k! at the ambient precision
    (G(z+1) = Gamma(z) G(z), G(1) = 1)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    acc = mp.zero
    for k in range(1, n):
        acc += mpmath.loggamma(k + 1)
    return acc


def lnD_longtime_constant(n: int):
    """C~(n) = (n ln pi)/2 - n(n-1) ln 2 / 2 + ln G(n+1)."""
    return n * mpmath.ln(mpmath.pi) / 2 - n * (n - 1) * mpmath.ln(2) / 2 + barnes_g_log(n)


def lnh_longtime_constant(n: int):
    """C^(n) = (ln pi)/2 - n ln 2 + ln Gamma(n+1)."""
    return mpmath.ln(mpmath.pi) / 2 - n * mpmath.ln(2) + mpmath.loggamma(n + 1)


def _long_time_terms(quantity, n, a):
    u = 2 * a + 2 * n + 1
    if quantity == "alpha_n":
        return [
            ("sqrt(t)", F(1, 2), 0, mpf(1)),
            ("const", F(0), 0, (2 * a + 6 * n + 3) / mpf(4)),
            ("t^-1/2", F(-1, 2), 0, u * (2 * a + 6 * n + 3) / mpf(32)),
            ("t^-1", F(-1), 0,
             -u * (a * (4 * n + 2) + 8 * n ** 2 + 8 * n + 3) / mpf(64)),
        ], F(-3, 2)
    if quantity == "beta_n":
        return [
            ("sqrt(t)", F(1, 2), 0, mpf(n) / 2),
            ("const", F(0), 0, n * (2 * a + 3 * n) / mpf(4)),
            ("t^-1/2", F(-1, 2), 0, 3 * n * u * (2 * a + 2 * n - 1) / mpf(64)),
            ("t^-1", F(-1), 0, -n ** 2 * u * (2 * a + 2 * n - 1) / mpf(32)),
        ], F(-3, 2)
    if quantity == "p":
        return [
            ("sqrt(t)", F(1, 2), 0, mpf(-n)),
            ("const", F(0), 0, -n * (2 * a + 3 * n) / mpf(4)),
            ("t^-1/2", F(-1, 2), 0, -n * (4 * (a + n) ** 2 - 1) / mpf(32)),
        ], F(-1)
    if quantity == "H":
        return [
            ("sqrt(t)", F(1, 2), 0, mpf(-n)),
            ("const", F(0), 0, n * (2 * a + n) / mpf(4)),
            ("t^-1/2", F(-1, 2), 0, -n * (4 * (a + n) ** 2 - 1) / mpf(32)),
        ], F(-1)
    if quantity == "lnD":
        return [
            ("sqrt(t)", F(1, 2), 0, mpf(-2 * n)),
            ("ln t", F(0), 1, n * (2 * a + n) / mpf(4)),
            ("const", F(0), 0, lnD_longtime_constant(n)),
            ("t^-1/2", F(-1, 2), 0, n * (4 * (a + n) ** 2 - 1) / mpf(16)),
        ], F(-1)
    if quantity == "lnh":
        return [
            ("sqrt(t)", F(1, 2), 0, mpf(-2)),
            ("ln t", F(0), 1, u / mpf(4)),
            ("const", F(0), 0, lnh_longtime_constant(n)),
            ("t^-1/2", F(-1, 2), 0, u * (2 * a + 6 * n + 3) / mpf(16)),
        ], F(-1)
    raise DomainError(f"unknown long-time quantity: {quantity}")


def long_time(
    quantity: str, n: int, t, alpha, prec_bits: int = SERIES_BITS
) -> ExpansionResult:
    """Truncated t -> +oo expansion at fixed integer n >= 0.

    The constants use factorials and the Barnes G recursion at integer
    arguments, so n must be an integer.
    """
    t, alpha = as_param(t), as_param(alpha)
    if not isinstance(n, int):
        raise DomainError("long-time expansions are defined for integer n")
    if n < 0:
        raise DomainError("n must be >= 0")
    if t == 0:
        raise SingularAtZero("long-time expansions need t > 0")
    if quantity not in LONG_TIME_QUANTITIES:
        raise DomainError(f"unknown long-time quantity: {quantity}")
    with mp.workprec(prec_bits):
        raw, remainder = _long_time_terms(quantity, n, alpha)
        return _build(quantity, "long-time", n, t, alpha, raw, remainder)


# ---------------------------------------------------------------------------
# Exact-value helpers (the oracles the expansions are compared against)
# ---------------------------------------------------------------------------

def exact_lnD(n: int, params: WeightParams) -> CertifiedReal:
    """ln D_n through the certified determinant pipeline."""
    eng = get_engine(params)
    return adaptive_eval(
        lambda bits: mpmath.ln(eng.det_sequence(n, bits)[n]),
        params.policy,
        suggested_start_bits(n, params.policy),
    )


def exact_quantity(quantity: str, n: int, params: WeightParams) -> CertifiedReal:
    """Exact value of one expandable quantity from the certified tables."""
    if quantity == "lnD":
        return exact_lnD(n, params)
    if quantity == "lnPn0":
        c = pn_zero_ratio(n, params)
        with mp.workprec(max(c.bits_used, 64)):
            return CertifiedReal(mpmath.ln(c.value), c.rel_err_bound, c.bits_used)
    table = cached_table(n, params)
    with mp.workprec(table.bits_used):
        if quantity == "alpha_n":
            v = table.alpha(n)
        elif quantity == "beta_n":
            v = table.beta(n)
        elif quantity == "p":
            v = table.p(n)
        elif quantity == "H":
            v = table.H(n)
        elif quantity == "lnh":
            v = mpmath.ln(table.h(n))
        else:
            raise DomainError(f"no exact route for quantity: {quantity}")
    return CertifiedReal(v, table.rel_err_bound, table.bits_used)


def exact_large_n_fn(quantity: str, t, alpha, policy: PrecisionPolicy) -> Callable:
    """n -> CertifiedReal exact value at fixed (t, alpha)."""

    def f(n):
        return exact_quantity(quantity, int(n), WeightParams(t, alpha, policy))

    return f


def exact_long_time_fn(quantity: str, n: int, alpha, policy: PrecisionPolicy) -> Callable:
    """t -> CertifiedReal exact value at fixed (n, alpha)."""

    def f(tv):
        return exact_quantity(quantity, n, WeightParams(tv, alpha, policy))

    return f


# ---------------------------------------------------------------------------
# Remainder-order fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope of log|exact - series| against the log variable."""

    quantity: str
    mode: str
    expected_exponent: float
    slope: float
    deviation: float
    points: tuple  # (variable, |diff|, noise_floor) triples as floats
    saturated: int


def remainder_slope(
    quantity: str,
    exact_fn: Callable,
    grid: Sequence,
    expected_exponent,
    *,
    mode: str = "large-n",
    t=None,
    alpha=None,
    n: int | None = None,
    constants: tuple | None = None,
) -> SlopeFit:
    """Empirical order check for one truncated expansion.

    Points whose |exact - series| sits inside the certified noise floor are
    excluded; if most of the grid saturates the check passes by saturation
    and RemainderBelowNoise (carrying the diagnostics) is raised.
    """
    grid = list(grid)
    if len(grid) < 5:
        raise DomainError("remainder fitting needs >= 5 grid points")
    if not max(grid) / min(grid) >= 10:
        raise DomainError("grid must span at least one decade")
    pts = []
    saturated = 0
    for v in grid:
        exact = exact_fn(v)
        if mode == "large-n":
            series = large_n(quantity, int(v), t, alpha, constants)
        else:
            series = long_time(quantity, n, v, alpha)
        with mp.workprec(max(exact.bits_used, SERIES_BITS)):
            diff = abs(exact.value - series.value)
            floor = abs(exact.value) * mpf(max(exact.rel_err_bound, 1e-300)) * 10
        if diff <= floor:
            saturated += 1
            pts.append((float(v), float(diff), float(floor), False))
        else:
            pts.append((float(v), float(diff), float(floor), True))
    usable = [(v, d) for v, d, _, ok in pts if ok]
    if saturated > len(grid) // 2 or len(usable) < 3:
        raise RemainderBelowNoise(
            f"{quantity}: {saturated}/{len(grid)} points inside the certified "
            "noise floor (pass-by-saturation)",
            points=pts,
        )
    xs = np.log([v for v, _ in usable])
    ys = np.log([d for _, d in usable])
    slope = float(np.polyfit(xs, ys, 1)[0])
    expected = float(expected_exponent)
    return SlopeFit(
        quantity,
        mode,
        expected,
        slope,
        slope - expected,
        tuple((v, d, f) for v, d, f, _ in pts),
        saturated,
    )


# ---------------------------------------------------------------------------
# Fitting the undetermined period-1 constants of ln D_n
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantFit:
    """Estimates of the period-1 constants entering ln D_n.

    ``c3_hat``/``c0_hat`` are means over the t-grid; the spreads must be
    consistent with t-independence.  The estimates are never claimed exact.
    """

    alpha: float
    per_t: dict  # t (str) -> (c3_hat, c0_hat)
    c3_hat: float
    c0_hat: float
    c3_spread: float
    c0_spread: float
    design_condition: float
    c3_tilde_diff: float | None = None  # fitted c~3(alpha+1) - c~3(alpha)
    c0_tilde_diff: float | None = None  # fitted c~0(alpha+1) - c~0(alpha)


def _fit_one(alpha, t_grid, n_grid, policy):
    per_t = {}
    conds = []
    for tv in t_grid:
        params = WeightParams(tv, alpha, policy)
        eng = get_engine(params)
        nmax = max(n_grid)

        def lnD_vec(bits):
            D = eng.det_sequence(nmax, bits)
            return [mpmath.ln(D[k]) for k in n_grid]

        vals, _, bits = adaptive_eval_seq(
            lnD_vec, policy, suggested_start_bits(nmax, policy)
        )
        with mp.workprec(bits):
            resid = []
            for k, nv in enumerate(n_grid):
                known = large_n("lnD", nv, params.t, params.alpha, constants=None)
                resid.append(float(vals[k] - known.value))
        A = np.array(
            [
                [float(nv), 1.0, float(nv) ** (-4.0 / 3.0), float(nv) ** (-5.0 / 3.0)]
                for nv in n_grid
            ]
        )
        cond = float(np.linalg.cond(A))
        conds.append(cond)
        if cond > 1e12:
            raise IllConditionedFit(f"design matrix condition {cond:.3e}")
        coef, *_ = np.linalg.lstsq(A, np.array(resid), rcond=None)
        per_t[mpmath.nstr(as_param(tv), 12)] = (-coef[0], -coef[1])
    c3s = [v[0] for v in per_t.values()]
    c0s = [v[1] for v in per_t.values()]
    return (
        per_t,
        float(np.mean(c3s)),
        float(np.mean(c0s)),
        float(max(c3s) - min(c3s)),
        float(max(c0s) - min(c0s)),
        float(max(conds)),
    )


def fit_constants(
    alpha,
    t_grid: Sequence,
    n_grid: Sequence[int] | None = None,
    policy: PrecisionPolicy | None = None,
    with_shift_diagnostics: bool = True,
) -> ConstantFit:
    """Least-squares estimates of (c3_hat, c0_hat) from exact determinants.

    Every known term of the ln D_n expansion is subtracted from exact ln D_n;
    the n-linear coefficient and the constant are then fitted in a basis of
    inverse cube-root powers over n_grid for each t.  Diagnostics cover the
    t-spread and, when requested, the unit shift of the full n-coefficient
    c~3 = alpha + c3_hat under alpha -> alpha+1 and the matching shift of
    c~0 = alpha^2 ln2/6 + c0_hat, both implied by the determinant ratio for
    P_n(0).
    """
    policy = policy or PrecisionPolicy()
    alpha = as_param(alpha)
    n_grid = list(n_grid) if n_grid is not None else list(range(16, 61, 4))
    if len(n_grid) < 6:
        raise DomainError("constant fitting needs >= 6 n values")
    per_t, c3, c0, s3, s0, cond = _fit_one(alpha, t_grid, n_grid, policy)
    c3d = c0d = None
    if with_shift_diagnostics:
        _, c3u, c0u, _, _, _ = _fit_one(alpha + 1, t_grid, n_grid, policy)
        ln2 = float(mpmath.ln(2))
        a = float(alpha)
        c3d = (a + 1 + c3u) - (a + c3)
        c0d = ((a + 1) ** 2 * ln2 / 6 + c0u) - (a ** 2 * ln2 / 6 + c0)
    return ConstantFit(
        alpha=float(alpha),
        per_t=per_t,
        c3_hat=c3,
        c0_hat=c0,
        c3_spread=s3,
        c0_spread=s0,
        design_condition=cond,
        c3_tilde_diff=c3d,
        c0_tilde_diff=c0d,
    )
