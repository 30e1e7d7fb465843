"""Hankel determinants of the moment matrix and quantities derived from them.

D_n is the determinant of the n x n matrix (mu_{i+j}), positive definite for a
positive measure, with D_0 = 1 by convention.  The shifted determinant
Dt_n replaces the last column (mu_{n-1}..mu_{2n-2}) by (mu_n..mu_{2n-1}); the
conventions Dt_0 = 0 and p(0) = 0 keep alpha_0 = Dt_1/D_1 consistent with the
integral definition.

Two independent raw routes are maintained per (t, alpha):

* the determinant route: one Cholesky factorization of the moment matrix
  yields every leading principal minor D_n as a pivot product, and the
  sub-leading coefficient p(n) = -Dt_n/D_n as the exact subdiagonal ratio
  -L[n][n-1]/L[n-1][n-1] of the factor;
* the moment-recursion route: the classical Chebyshev-style recursion builds
  alpha_n, beta_n and h_n directly from raw moments in O(N^2).

Both routes share nothing past the raw moments, so their agreement inside the
adaptive loop certifies the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import mpmath
from mpmath import mp, mpf

from .errors import CrossCheckMismatch, DomainError
from .moments import WeightParams, moment_raw
from .numerics import (
    CertifiedReal,
    InsufficientPrecision,
    PrecisionPolicy,
    adaptive_eval,
)


class HankelEngine:
    """Per-(t, alpha) cache of raw, precision-parameterized computations.

    Construction is single-writer; once built for a given bit level the cached
    lists are read-only and safe for concurrent readers.
    """

    def __init__(self, params: WeightParams):
        self.params = params
        self._moments: dict[int, list] = {}
        self._chol: dict[int, tuple] = {}       # bits -> (D list, L rows)
        self._cheb: dict[tuple, tuple] = {}     # (N, bits) -> (alpha, beta, h)

    # -- raw moments -------------------------------------------------------

    def moments(self, J: int, bits: int) -> list:
        """mu_0..mu_J at the given precision level (cached, extended in place)."""
        cached = self._moments.get(bits)
        if cached is None:
            cached = []
            self._moments[bits] = cached
        if len(cached) <= J:
            t, alpha = self.params.t, self.params.alpha
            with mp.workprec(bits):
                for j in range(len(cached), J + 1):
                    cached.append(moment_raw(j, t, alpha))
        return cached

    # -- determinant route ---------------------------------------------------

    def cholesky(self, size: int, bits: int):
        """Cholesky factor of the size x size moment matrix, extended row-wise.

        Returns (D, L) where D[k] = det of the k x k leading block for
        k = 0..size (pivot products) and L holds the factor rows.  A
        nonpositive pivot means the level cannot resolve the matrix and
        escalation is requested.
        """
        D, L = self._chol.get(bits, ([mp.one], []))
        if len(L) < size:
            mu = self.moments(2 * size - 2, bits)
            with mp.workprec(bits):
                for i in range(len(L), size):
                    row = [mp.zero] * (i + 1)
                    for j in range(i):
                        acc = mu[i + j]
                        Lj = L[j]
                        for k in range(j):
                            acc -= row[k] * Lj[k]
                        row[j] = acc / Lj[j]
                    pivot = mu[2 * i]
                    for k in range(i):
                        pivot -= row[k] * row[k]
                    if not pivot > 0:
                        raise InsufficientPrecision(
                            f"moment matrix lost positive definiteness at row {i}"
                        )
                    row[i] = mpmath.sqrt(pivot)
                    L.append(row)
                    D.append(D[-1] * pivot)
            self._chol[bits] = (D, L)
        return D, L

    def det_sequence(self, nmax: int, bits: int) -> list:
        """D_0..D_nmax from the pivot products."""
        D, _ = self.cholesky(nmax, bits)
        return D[: nmax + 1]

    def subleading_sequence(self, nmax: int, bits: int) -> list:
        """p(0)..p(nmax) with p(n) = -Dt_n/D_n read off the Cholesky factor."""
        _, L = self.cholesky(nmax + 1, bits)
        with mp.workprec(bits):
            out = [mp.zero]
            for n in range(1, nmax + 1):
                out.append(-L[n][n - 1] / L[n - 1][n - 1])
        return out

    # -- moment-recursion route ---------------------------------------------

    def chebyshev(self, N: int, bits: int):
        """(alpha_0..alpha_N, beta_0..beta_N, h_0..h_N) by the moment recursion.

        Maintains sigma_{k,l} = integral of P_k(x) x^l w(x); then
        alpha_k = sigma_{k,k+1}/sigma_{k,k} - sigma_{k-1,k}/sigma_{k-1,k-1},
        beta_k = sigma_{k,k}/sigma_{k-1,k-1} and h_k = sigma_{k,k}.
        """
        key = (N, bits)
        hit = self._cheb.get(key)
        if hit is not None:
            return hit
        mu = self.moments(2 * N + 1, bits)
        with mp.workprec(bits):
            width = 2 * N + 2
            sig_prev = [mp.zero] * width
            sig_cur = list(mu[:width])
            if not sig_cur[0] > 0:
                raise InsufficientPrecision("mu_0 not positive at this level")
            alpha = [mu[1] / mu[0]]
            beta = [mp.zero]
            h = [mu[0]]
            for k in range(1, N + 1):
                sig_new = [mp.zero] * width
                for ell in range(k, width - k):
                    s = sig_cur[ell + 1] - alpha[k - 1] * sig_cur[ell]
                    if k >= 2:
                        s -= beta[k - 1] * sig_prev[ell]
                    sig_new[ell] = s
                if not sig_new[k] > 0:
                    raise InsufficientPrecision(
                        f"moment recursion lost positivity at n={k}"
                    )
                alpha.append(sig_new[k + 1] / sig_new[k] - sig_cur[k] / sig_cur[k - 1])
                beta.append(sig_new[k] / sig_cur[k - 1])
                h.append(sig_new[k])
                sig_prev, sig_cur = sig_cur, sig_new
        result = (alpha, beta, h)
        self._cheb[key] = result
        return result


_ENGINES: dict = {}


def get_engine(params: WeightParams) -> HankelEngine:
    """Memoized engine per (t, alpha, policy); no caching across distinct keys."""
    key = params.cache_key()
    eng = _ENGINES.get(key)
    if eng is None:
        eng = HankelEngine(params)
        _ENGINES[key] = eng
    return eng


def suggested_start_bits(n: int, policy: PrecisionPolicy) -> int:
    """First doubling level with headroom for the ~2n bits of cancellation a
    size-n Hankel determinant costs; keeps levels aligned with the policy."""
    need = 2 * n + 64
    bits = policy.start_bits
    while bits < need and bits * 2 <= policy.effective_max_bits():
        bits *= 2
    return bits


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _lu_det(rows) -> mpmath.mpf:
    """Determinant by LU factorization with partial pivoting (in place)."""
    n = len(rows)
    sign = 1
    for col in range(n):
        piv, pmag = col, abs(rows[col][col])
        for r in range(col + 1, n):
            m = abs(rows[r][col])
            if m > pmag:
                piv, pmag = r, m
        if pmag == 0:
            raise InsufficientPrecision("singular pivot in LU")
        if piv != col:
            rows[piv], rows[col] = rows[col], rows[piv]
            sign = -sign
        inv = 1 / rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] * inv
            if factor == 0:
                continue
            rr, rc = rows[r], rows[col]
            for c in range(col + 1, n):
                rr[c] -= factor * rc[c]
    det = mpf(sign)
    for k in range(n):
        det *= rows[k][k]
    return det


def hankel_det(n: int, params: WeightParams, shifted: bool = False) -> CertifiedReal:
    """Certified D_n (or the shifted Dt_n).

    Builds the n x n moment matrix and factorizes it by LU with partial
    pivoting inside the adaptive loop; a structured Hankel solver is not worth
    the certification risk at desk scale.  D_0 = 1 and Dt_0 = 0 by convention.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return CertifiedReal(mpf(1) if not shifted else mpf(0), 0.0, 0)
    eng = get_engine(params)

    def f(bits):
        mu = eng.moments(2 * n - 1, bits)
        rows = []
        for i in range(n):
            row = [mu[i + j] for j in range(n)]
            if shifted:
                row[n - 1] = mu[i + n]
            rows.append(row)
        return _lu_det(rows)

    return adaptive_eval(f, params.policy, suggested_start_bits(n, params.policy))


@dataclass(frozen=True)
class HankelValue:
    """D_n (and optionally Dt_n) at one (n, t, alpha)."""

    n: int
    params: WeightParams
    d: CertifiedReal
    d_shifted: Optional[CertifiedReal] = None


def hankel_value(n: int, params: WeightParams, with_shifted: bool = False) -> HankelValue:
    d = hankel_det(n, params)
    ds = hankel_det(n, params, shifted=True) if with_shifted else None
    return HankelValue(n, params, d, ds)


def norm_constant(n: int, params: WeightParams) -> CertifiedReal:
    """h_n = D_{n+1}/D_n, cross-checked against the moment-recursion h_n."""
    if n < 0:
        raise DomainError("n must be >= 0")
    eng = get_engine(params)

    def f(bits):
        D = eng.det_sequence(n + 1, bits)
        ratio = D[n + 1] / D[n]
        _, _, h = eng.chebyshev(n, bits)
        gap = abs(ratio - h[n]) / ratio
        if gap > 100 * mpf(params.policy.target_rel_err) and gap > mpf(2) ** (-(bits // 2)):
            raise CrossCheckMismatch(
                f"h_{n}: determinant and recursion routes differ by {mpmath.nstr(gap, 5)}"
            )
        return ratio

    return adaptive_eval(f, params.policy, suggested_start_bits(n + 1, params.policy))


def pn_zero_ratio(n: int, params: WeightParams) -> CertifiedReal:
    """(-1)^n P_n(0) as the determinant ratio D_n(t, alpha+1)/D_n(t, alpha).

    The ratio form is cancellation-free: P_n(0) alternates in sign while the
    two determinants are positive.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return CertifiedReal(mpf(1), 0.0, 0)
    eng = get_engine(params)
    eng_up = get_engine(params.shifted(1))

    def f(bits):
        D = eng.det_sequence(n, bits)
        Du = eng_up.det_sequence(n, bits)
        return Du[n] / D[n]

    return adaptive_eval(f, params.policy, suggested_start_bits(n, params.policy))
