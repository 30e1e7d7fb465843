"""Monic orthogonal polynomials for the weight x^alpha exp(-x - t/x): pointwise
evaluation, ladder coefficients, the second-order ODE residual, zeros with
their structural properties, the mixed three-term recurrence and both
Christoffel-Darboux forms, and the Sturm spacing function F.

Zeros are computed as eigenvalues of the symmetric tridiagonal Jacobi matrix
(diagonal alpha_k, off-diagonal sqrt(beta_k)) at double precision and then
polished by Newton iterations on P_n at adaptive precision; root finding on
explicit coefficients would overflow and cancel, while the tridiagonal route
is backward-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from mpmath import mp, mpf
from scipy.linalg import eigh_tridiagonal

from .errors import (
    DomainError,
    EigenNonConvergence,
    InsufficientZeros,
    PropertyViolation,
)
from .hankel import get_engine, pn_zero_ratio
from .moments import WeightParams
from .numerics import CertifiedReal, adaptive_eval_seq
from .recurrence import cached_table


# ---------------------------------------------------------------------------
# Potential and ladder coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialData:
    """v(x) = -ln w(x) = x + t/x - alpha ln x and its derivatives."""

    t: mpmath.mpf
    alpha: mpmath.mpf

    def v(self, x):
        return x + self.t / x - self.alpha * mpmath.ln(x)

    def dv(self, x):
        return 1 - self.alpha / x - self.t / x ** 2

    def d2v(self, x):
        return self.alpha / x ** 2 + 2 * self.t / x ** 3

    @classmethod
    def of(cls, params: WeightParams) -> "PotentialData":
        return cls(params.t, params.alpha)


@dataclass(frozen=True)
class LadderPair:
    """Ladder coefficient functions A_n(x) = 1/x + R_n/x^2 and
    B_n(x) = -n/x + r_n/x^2.

    For t >= 0 both numerators are nonnegative in A_n, so A_n(x) > 0 on x > 0.
    """

    n: int
    R: mpmath.mpf
    r: mpmath.mpf

    def A(self, x):
        return 1 / x + self.R / x ** 2

    def dA(self, x):
        return -1 / x ** 2 - 2 * self.R / x ** 3

    def d2A(self, x):
        return 2 / x ** 3 + 6 * self.R / x ** 4

    def B(self, x):
        return -self.n / x + self.r / x ** 2

    def dB(self, x):
        return self.n / x ** 2 - 2 * self.r / x ** 3

    @classmethod
    def from_table(cls, table, n: int) -> "LadderPair":
        return cls(n, table.R(n), table.r(n))


# ---------------------------------------------------------------------------
# Evaluation by the three-term recurrence
# ---------------------------------------------------------------------------

def eval_poly_raw(n: int, x, al: Sequence, be: Sequence, derivatives: int = 1):
    """(P_n, P_{n-1}, P_n', [P_{n-1}', P_n'']) by the forward recurrence
    x P_k = P_{k+1} + alpha_k P_k + beta_k P_{k-1}, differentiated alongside."""
    p_prev, p = mp.zero, mp.one
    dp_prev, dp = mp.zero, mp.zero
    d2p_prev, d2p = mp.zero, mp.zero
    for k in range(n):
        c = x - al[k]
        p_next = c * p - be[k] * p_prev
        dp_next = p + c * dp - be[k] * dp_prev
        d2p_next = 2 * dp + c * d2p - be[k] * d2p_prev
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
        d2p_prev, d2p = d2p, d2p_next
    if derivatives >= 2:
        return p, p_prev, dp, dp_prev, d2p
    return p, p_prev, dp


def eval_polynomial(n: int, x, params: WeightParams):
    """Certified (P_n(x), P_{n-1}(x), P_n'(x)).

    Agreement between levels is measured relative to the largest entry so the
    triple certifies even when x sits at a zero of one component.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    x = mpf(x) if not isinstance(x, mpmath.mpf) else x
    eng = get_engine(params)

    def f(bits):
        al, be, _ = eng.chebyshev(max(n - 1, 0), bits)
        with mp.workprec(bits):
            return list(eval_poly_raw(n, x, al, be))

    vals, rel_err, bits = adaptive_eval_seq(f, params.policy, uniform_scale=True)
    return tuple(CertifiedReal(v, rel_err, bits) for v in vals)


# ---------------------------------------------------------------------------
# Second-order ODE residual
# ---------------------------------------------------------------------------

def _ode_terms(n, x, al, be, t, alpha, bits):
    """The three additive terms of the ODE applied to P_n at x."""
    with mp.workprec(bits):
        p, _, dp, _, d2p = eval_poly_raw(n, x, al, be, derivatives=2)
        if t == 0:
            # classical Laguerre form x P'' + (alpha + 1 - x) P' + n P = 0
            return x * d2p, (alpha + 1 - x) * dp, n * p
        pot = PotentialData(t, alpha)
        R_n = al[n] - (2 * n + 1 + alpha)
        R_nm1 = al[n - 1] - (2 * n - 1 + alpha) if n >= 1 else mp.zero
        den = 2 * n + alpha
        r_n = (
            (n * t - be[n] * (al[n] + al[n - 1] - 4 * n - 2 * alpha)) / den
            if n >= 1
            else mp.zero
        )
        lad = LadderPair(n, R_n, r_n)
        lad_down = LadderPair(n - 1, R_nm1, mp.zero) if n >= 1 else None
        A = lad.A(x)
        dA = lad.dA(x)
        B = lad.B(x)
        dB = lad.dB(x)
        dv = pot.dv(x)
        beta_AA = be[n] * A * lad_down.A(x) if n >= 1 else mp.zero
        coeff1 = -(dv + dA / A)
        coeff0 = dB - B * B - dv * B + beta_AA - dA * B / A
        return d2p, coeff1 * dp, coeff0 * p


def ode_residual(n: int, x, params: WeightParams) -> CertifiedReal:
    """Relative residual of the second-order ODE satisfied by P_n at x > 0:

        P'' - (v' + A_n'/A_n) P' + (B_n' - B_n^2 - v' B_n
              + beta_n A_n A_{n-1} - A_n' B_n / A_n) P = 0.

    At t = 0 the classical Laguerre form x P'' + (alpha+1-x) P' + n P is used.
    The residual is scaled by the largest term magnitude.
    """
    if not (isinstance(x, mpmath.mpf) or isinstance(x, (int, float, str))):
        raise DomainError("x must be a real scalar")
    x = mpf(x) if not isinstance(x, mpmath.mpf) else x
    if not x > 0:
        raise DomainError("x must be positive")
    t, alpha = params.t, params.alpha
    table = cached_table(n, params)
    eng = get_engine(params)

    def residual(bits):
        al, be, _ = eng.chebyshev(n, bits)
        t1, t2, t3 = _ode_terms(n, x, al, be, t, alpha, bits)
        with mp.workprec(bits):
            scale = max(abs(t1), abs(t2), abs(t3))
            if scale == 0:
                return mp.zero
            return abs(t1 + t2 + t3) / scale

    b = table.bits_used
    r1 = residual(b)
    r2 = residual(2 * b) if 2 * b <= params.policy.effective_max_bits() else r1
    out = max(r1, r2)
    return CertifiedReal(out, float(out), b)


# ---------------------------------------------------------------------------
# Zeros
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroSet:
    """Strictly increasing certified zeros x_{1,n} < ... < x_{n,n} of P_n."""

    n: int
    params: WeightParams
    zeros: Sequence
    rel_err_bound: float
    bits_used: int

    def __iter__(self):
        return iter(self.zeros)

    def __len__(self):
        return len(self.zeros)


def zeros(n: int, params: WeightParams) -> ZeroSet:
    """Zeros of P_n via Jacobi-matrix eigenvalues polished by Newton.

    Eigenvalues of the symmetric tridiagonal matrix with diagonal
    alpha_0..alpha_{n-1} and off-diagonals sqrt(beta_1..beta_{n-1}) seed a
    Newton iteration on the recurrence-evaluated P_n at each adaptive level.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    table = cached_table(n, params)
    diag = np.array([float(table.alpha(k)) for k in range(n)])
    off = np.array([math.sqrt(float(table.beta(k))) for k in range(1, n)])
    try:
        seeds = eigh_tridiagonal(diag, off, eigvals_only=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy rarely fails
        raise EigenNonConvergence(str(exc)) from exc
    seeds = np.sort(seeds)
    eng = get_engine(params)

    def f(bits):
        al, be, _ = eng.chebyshev(max(n - 1, 0), bits)
        with mp.workprec(bits):
            tol = mpf(2) ** (-(bits - 8))
            out = []
            for s in seeds:
                xk = mpf(s)
                for _ in range(80):
                    p, _, dp = eval_poly_raw(n, xk, al, be)
                    if dp == 0:
                        raise EigenNonConvergence("Newton derivative vanished")
                    step = p / dp
                    xk -= step
                    if abs(step) <= tol * max(abs(xk), mpf(1)):
                        break
                else:
                    raise EigenNonConvergence("Newton polish did not converge")
                out.append(xk)
            return out

    vals, rel_err, bits = adaptive_eval_seq(f, params.policy)
    zs = ZeroSet(n, params, tuple(vals), rel_err, bits)
    for k, z in enumerate(zs.zeros):
        if not z > 0:
            raise PropertyViolation(f"zero x_{k+1},{n} positivity", float(z))
        if k and not zs.zeros[k] > zs.zeros[k - 1]:
            raise PropertyViolation(
                f"strict ordering at x_{k+1},{n}", float(zs.zeros[k] - zs.zeros[k - 1])
            )
    return zs


# ---------------------------------------------------------------------------
# Zero property report
# ---------------------------------------------------------------------------

@dataclass
class ZeroPropertyReport:
    """Margins of the interlacing, monotonicity and bound checks for one n.

    ``sharp`` holds margins that are algebraic equalities rather than strict
    inequalities (the n = 2 outer bounds with eps = 0); they carry roundoff
    sign noise and do not participate in pass/fail.
    """

    n: int
    params: WeightParams
    items: dict = field(default_factory=dict)
    sharp: dict = field(default_factory=dict)
    low_alpha: bool = False

    @property
    def passed(self) -> bool:
        return all(m > 0 for m in self.items.values())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t": mpmath.nstr(self.params.t, 17),
            "alpha": mpmath.nstr(self.params.alpha, 17),
            "low_alpha_regime": self.low_alpha,
            "items": {k: float(v) for k, v in self.items.items()},
            "sharp_equalities": {k: float(v) for k, v in self.sharp.items()},
            "passed": self.passed,
        }


def zero_properties(
    n: int,
    params: WeightParams,
    t_step=mpf("0.1"),
    alpha_step=mpf("0.1"),
    eps=0,
    eps_a=None,
    eps_b=None,
    raise_on_violation: bool = True,
) -> ZeroPropertyReport:
    """Check the four-part zero theorem for P_n and report every margin.

    * interlacing of consecutive zero sets;
    * strict increase of every zero under t -> t + t_step and
      alpha -> alpha + alpha_step (discrete probes test the monotone
      dependence directly);
    * outer bounds a_n < x_{1,n} and x_{n,n} < b_n with the chain-sequence
      constant c_n = 4 cos^2(pi/(n+1)) + eps (eps_a/eps_b override eps per
      side; c_n = 4 for a_n recovers the classical Laguerre bound);
    * the inner bound 0 < x_{1,n} < alpha_{n-1} + d_n beta_{n-1}/e_n < x_{n,n}
      built from determinant ratios of P_k(0) at alpha and alpha+1 (n >= 2).

    Margins are positive iff the check holds; raises PropertyViolation on the
    first failure unless raise_on_violation=False.
    """
    if n < 2:
        raise DomainError("zero properties need n >= 2")
    report = ZeroPropertyReport(n=n, params=params, low_alpha=params.low_alpha)
    zs = zeros(n, params)
    zlo = zeros(n - 1, params)
    t_step, alpha_step = mpf(t_step), mpf(alpha_step)
    up_t = zeros(n, WeightParams(params.t + t_step, params.alpha, params.policy))
    up_a = zeros(n, WeightParams(params.t, params.alpha + alpha_step, params.policy))

    with mp.workprec(zs.bits_used):
        # (i) interlacing x_{k,n} < x_{k,n-1} < x_{k+1,n}
        report.items["interlacing"] = min(
            min(zlo.zeros[k] - zs.zeros[k] for k in range(n - 1)),
            min(zs.zeros[k + 1] - zlo.zeros[k] for k in range(n - 1)),
        )
        # (ii) monotonicity probes
        report.items["t_monotonicity"] = min(
            u - z for u, z in zip(up_t.zeros, zs.zeros)
        )
        report.items["alpha_monotonicity"] = min(
            u - z for u, z in zip(up_a.zeros, zs.zeros)
        )

    # (iii) outer bounds plus the alpha_{n-1} inner point
    table = cached_table(n, params)
    with mp.workprec(table.bits_used):
        eps = mpf(eps)
        base = 4 * mpmath.cos(mpmath.pi / (n + 1)) ** 2
        c_a = base + (mpf(eps_a) if eps_a is not None else eps)
        c_b = base + (mpf(eps_b) if eps_b is not None else eps)

        def bound(c_n, sign):
            best = None
            for k in range(1, n):
                mid = (table.alpha(k) + table.alpha(k - 1)) / 2
                half = (
                    mpmath.sqrt(
                        (table.alpha(k) - table.alpha(k - 1)) ** 2
                        + 4 * c_n * table.beta(k)
                    )
                    / 2
                )
                cand = mid + sign * half
                if best is None or (sign < 0 and cand < best) or (sign > 0 and cand > best):
                    best = cand
            return best

        a_n = bound(c_a, -1)
        b_n = bound(c_b, +1)
        x1, xn = zs.zeros[0], zs.zeros[-1]
        # at n = 2 the k = 1 bound formula coincides with the P_2 root formula
        # whenever c_n = 4 cos^2(pi/3) = 1, so the outer bounds are equalities
        out_low = report.sharp if (n == 2 and c_a == base) else report.items
        out_high = report.sharp if (n == 2 and c_b == base) else report.items
        out_low["outer_lower"] = x1 - a_n
        report.items["inner_alpha_low"] = table.alpha(n - 1) - x1
        report.items["inner_alpha_high"] = xn - table.alpha(n - 1)
        out_high["outer_upper"] = b_n - xn

        # (iv) inner bound from the mixed recurrence data
        d_n, e_n = mixed_recurrence_data(n, params)
        inner = table.alpha(n - 1) + d_n * table.beta(n - 1) / e_n
        report.items["inner_point_low"] = inner - x1
        report.items["inner_point_high"] = xn - inner
        report.items["x1_positive"] = x1

    if raise_on_violation and not report.passed:
        item, margin = min(report.items.items(), key=lambda kv: kv[1])
        raise PropertyViolation(item, float(margin), report)
    return report


def mixed_recurrence_data(n: int, params: WeightParams):
    """(d_n, e_n) built from zero-argument values of the polynomials:

        d_n = P_n(0;a)/P_{n-1}(0;a) + P_{n-1}(0;a+1)/P_{n-2}(0;a+1),
        e_n = P_{n-1}(0;a)/P_{n-2}(0;a) * P_{n-1}(0;a+1)/P_{n-2}(0;a+1).

    Evaluated through the cancellation-free determinant ratios
    (-1)^k P_k(0) = D_k(alpha+1)/D_k(alpha); consecutive ratios alternate in
    sign, so each quotient here is negative and e_n > 0.
    """
    if n < 2:
        raise DomainError("mixed recurrence data needs n >= 2")
    up = params.shifted(1)
    qc = {k: pn_zero_ratio(k, params) for k in (n - 2, n - 1, n)}
    quc = {k: pn_zero_ratio(k, up) for k in (n - 2, n - 1)}
    bits = max(c.bits_used for c in (*qc.values(), *quc.values()))
    with mp.workprec(max(bits, 128)):
        q = {k: c.value for k, c in qc.items()}
        qu = {k: c.value for k, c in quc.items()}
        d_n = -(q[n] / q[n - 1] + qu[n - 1] / qu[n - 2])
        e_n = (q[n - 1] / q[n - 2]) * (qu[n - 1] / qu[n - 2])
    return d_n, e_n


# ---------------------------------------------------------------------------
# Sturm spacing function and spacing checks
# ---------------------------------------------------------------------------

def sturm_F(x, n: int, table, params: WeightParams):
    """F(x) in Q_n'' + F Q_n = 0 for Q_n = sqrt(w/A_n) P_n:

    F = beta_n A_n A_{n-1} - 3 A_n'^2/(4 A_n^2)
        + (A_n'' - A_n' v' - 2 A_n' B_n)/(2 A_n)
        - B_n^2 + B_n' - B_n v' - v'^2/4 + v''/2.
    """
    pot = PotentialData.of(params)
    lad = LadderPair.from_table(table, n)
    lad_dn = LadderPair.from_table(table, n - 1)
    A, dA, d2A = lad.A(x), lad.dA(x), lad.d2A(x)
    B, dB = lad.B(x), lad.dB(x)
    dv, d2v = pot.dv(x), pot.d2v(x)
    return (
        table.beta(n) * A * lad_dn.A(x)
        - 3 * dA ** 2 / (4 * A ** 2)
        + (d2A - dA * dv - 2 * dA * B) / (2 * A)
        - B ** 2
        + dB
        - B * dv
        - dv ** 2 / 4
        + d2v / 2
    )


@dataclass
class SpacingReport:
    """Gap and convexity checks for the zeros of P_n inside one interval."""

    n: int
    interval: tuple
    m1: float  # max of sampled F (estimate)
    m2: float  # min of sampled F (estimate)
    monotonicity: str  # "increasing" | "decreasing" | "mixed"
    items: dict = field(default_factory=dict)
    zero_count: int = 0

    @property
    def passed(self) -> bool:
        return all(m > 0 for m in self.items.values())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "F_max_estimate": self.m1,
            "F_min_estimate": self.m2,
            "F_monotonicity": self.monotonicity,
            "zero_count": self.zero_count,
            "items": {k: float(v) for k, v in self.items.items()},
            "passed": self.passed,
        }


def spacing_check(
    n: int,
    params: WeightParams,
    interval,
    samples: int = 512,
    raise_on_violation: bool = True,
) -> SpacingReport:
    """Sturm comparison checks on the zeros of P_n inside (c, d).

    Samples F on a dense grid (doubling from ``samples`` points until the
    extrema stabilize to 1e-6 relative; the extrema are estimates, not
    proofs), then verifies the gap bounds pi/sqrt(M1) < dy < pi/sqrt(M2)
    where applicable and that second differences of the zeros match the
    detected monotonicity of F (increasing F -> concave zeros).
    """
    c, d = (mpf(interval[0]), mpf(interval[1]))
    if not (0 < c < d):
        raise DomainError("interval must satisfy 0 < c < d")
    table = cached_table(n, params)
    zs = [z for z in zeros(n, params).zeros if c < z < d]
    if len(zs) < 2:
        raise InsufficientZeros(f"interval contains {len(zs)} zero(s); need >= 2")

    with mp.workprec(table.bits_used):
        m = samples
        prev = None
        while True:
            grid = [c + (d - c) * k / (m - 1) for k in range(m)]
            fv = [sturm_F(x, n, table, params) for x in grid]
            m1, m2 = max(fv), min(fv)
            if prev is not None:
                p1, p2 = prev
                ok1 = abs(m1 - p1) <= mpf("1e-6") * max(abs(m1), mpf(1))
                ok2 = abs(m2 - p2) <= mpf("1e-6") * max(abs(m2), mpf(1))
                if ok1 and ok2:
                    break
            prev = (m1, m2)
            m *= 2
            if m > 16384:
                break
        increasing = all(fv[i + 1] > fv[i] for i in range(len(fv) - 1))
        decreasing = all(fv[i + 1] < fv[i] for i in range(len(fv) - 1))
        mono = "increasing" if increasing else "decreasing" if decreasing else "mixed"

        report = SpacingReport(
            n=n,
            interval=(c, d),
            m1=float(m1),
            m2=float(m2),
            monotonicity=mono,
            zero_count=len(zs),
        )
        gaps = [zs[k + 1] - zs[k] for k in range(len(zs) - 1)]
        if m1 > 0:
            bound = mpmath.pi / mpmath.sqrt(m1)
            report.items["gap_lower"] = min(g - bound for g in gaps)
        if m2 > 0:
            bound = mpmath.pi / mpmath.sqrt(m2)
            report.items["gap_upper"] = min(bound - g for g in gaps)
        if len(zs) >= 3 and mono != "mixed":
            second = [zs[k + 2] - 2 * zs[k + 1] + zs[k] for k in range(len(zs) - 2)]
            if mono == "increasing":  # concave zeros
                report.items["convexity"] = min(-s for s in second)
            else:  # convex zeros
                report.items["convexity"] = min(second)

    if raise_on_violation and not report.passed:
        item, margin = min(report.items.items(), key=lambda kv: kv[1])
        raise PropertyViolation(item, float(margin), report)
    return report


# ---------------------------------------------------------------------------
# Structural residuals: mixed recurrence and Christoffel-Darboux
# ---------------------------------------------------------------------------

def structural_residuals(n: int, x, y, params: WeightParams):
    """Relative residuals of three structural identities at (x, y):

    (i)  the mixed three-term recurrence
         x^2 P_{n-2}(x; a+2) = [e_n/beta_{n-1} (x - alpha_{n-1}) - d_n]
         P_{n-1}(x; a) + (1 - e_n/beta_{n-1}) P_n(x; a),
         using independently built tables at a, a+1 and a+2;
    (ii) the two-point Christoffel-Darboux formula (x != y);
    (iii) its confluent form at x.

    Returns a (mixed, cd, cd_confluent) triple of certified residuals, each
    relative to the largest participating term.
    """
    if n < 2:
        raise DomainError("n must be >= 2")
    x = mpf(x) if not isinstance(x, mpmath.mpf) else x
    y = mpf(y) if not isinstance(y, mpmath.mpf) else y
    if not (x > 0 and y > 0):
        raise DomainError("x and y must be positive")
    if x == y:
        raise DomainError("two-point Christoffel-Darboux needs x != y")
    table = cached_table(n, params)
    d_n, e_n = mixed_recurrence_data(n, params)
    eng = get_engine(params)
    eng_upup = get_engine(params.shifted(2))

    def run(bits):
        al, be, h = eng.chebyshev(n, bits)
        al2, be2, _ = eng_upup.chebyshev(max(n - 2, 0), bits)
        with mp.workprec(bits):
            # mixed three-term recurrence
            p_n, p_nm1, _ = eval_poly_raw(n, x, al, be)
            p2, _, _ = eval_poly_raw(n - 2, x, al2, be2)
            lhs = x ** 2 * p2
            g = e_n / be[n - 1] * (x - al[n - 1]) - d_n
            rhs1 = g * p_nm1
            rhs2 = (1 - e_n / be[n - 1]) * p_n
            scale = max(abs(lhs), abs(rhs1), abs(rhs2))
            mixed = abs(lhs - rhs1 - rhs2) / scale if scale > 0 else mp.zero

            # two-point Christoffel-Darboux
            q_n, q_nm1, _ = eval_poly_raw(n, y, al, be)
            lhs_terms = []
            acc = mp.zero
            for j in range(n):
                pj, _, _ = eval_poly_raw(j, x, al, be)
                qj, _, _ = eval_poly_raw(j, y, al, be)
                term = pj * qj / h[j]
                lhs_terms.append(abs(term))
                acc += term
            rhs = (p_n * q_nm1 - q_n * p_nm1) / (h[n - 1] * (x - y))
            scale = max(max(lhs_terms), abs(rhs))
            cd = abs(acc - rhs) / scale if scale > 0 else mp.zero

            # confluent form at x
            acc2 = mp.zero
            terms2 = []
            for j in range(n):
                pj, _, _ = eval_poly_raw(j, x, al, be)
                term = pj * pj / h[j]
                terms2.append(abs(term))
                acc2 += term
            _, _, dp_n, dp_nm1, _ = eval_poly_raw(n, x, al, be, derivatives=2)
            rhs2c = (dp_n * p_nm1 - p_n * dp_nm1) / h[n - 1]
            scale = max(max(terms2), abs(rhs2c))
            cdc = abs(acc2 - rhs2c) / scale if scale > 0 else mp.zero
            return mixed, cd, cdc

    b = table.bits_used
    r1 = run(b)
    r2 = run(2 * b) if 2 * b <= params.policy.effective_max_bits() else r1
    out = tuple(max(a, bb) for a, bb in zip(r1, r2))
    return tuple(CertifiedReal(v, float(v), b) for v in out)
