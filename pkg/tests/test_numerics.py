import mpmath
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from conftest import relerr
from oplab import (
    DomainError,
    PrecisionExhausted,
    PrecisionPolicy,
    WeightParams,
    adaptive_eval,
    de_quadrature,
    t_derivative,
)
from oplab.hankel import get_engine
from oplab.numerics import de_quadrature_raw, rel_diff


def test_policy_validation():
    with pytest.raises(DomainError):
        PrecisionPolicy(start_bits=32)
    with pytest.raises(DomainError):
        PrecisionPolicy(start_bits=128, max_bits=64)
    with pytest.raises(DomainError):
        PrecisionPolicy(target_rel_err=0)


def test_adaptive_eval_exact_constant(policy):
    c = adaptive_eval(lambda bits: mpf(1), policy)
    assert c.value == 1
    assert c.rel_err_bound == 0.0


def test_adaptive_eval_forced_convergence(policy):
    c = adaptive_eval(lambda bits: 1 + mpf(2) ** (-bits), policy)
    assert relerr(c.value, 1) <= policy.target_rel_err


def test_adaptive_eval_hilbert_determinant(policy):
    # det of the 3x3 Hilbert matrix equals 1/2160
    def hilbert_det(bits):
        m = [[mpf(1) / (i + j + 1) for j in range(3)] for i in range(3)]
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )

    c = adaptive_eval(hilbert_det, policy)
    with mp.workprec(400):
        ref = mpf(1) / 2160
    assert relerr(c.value, ref) <= policy.target_rel_err


def test_adaptive_eval_exhaustion():
    # alternates by level parity, never settles
    pol = PrecisionPolicy(start_bits=64, max_bits=256)
    with pytest.raises(PrecisionExhausted):
        adaptive_eval(lambda bits: mpf(1 if bits.bit_length() % 2 else 2), pol)


@given(num=st.integers(-1000, 1000), den=st.integers(1, 97))
def test_adaptive_eval_rationals_exact(num, den):
    pol = PrecisionPolicy()
    c = adaptive_eval(lambda bits: mpf(num) / den, pol)
    assert relerr(c.value, mpf(num) / den) <= pol.target_rel_err


def test_refinement_is_monotone(params_std):
    # successive-level agreement of the quadrature shrinks as bits double
    def g(x):
        return x ** mpf("1.5") * mpmath.exp(-x)

    vals = {b: de_quadrature_raw(g, b) for b in (128, 256, 512)}
    with mp.workprec(600):
        gap1 = rel_diff(vals[128], vals[256])
        gap2 = rel_diff(vals[256], vals[512])
    assert gap2 <= gap1


@pytest.mark.parametrize(
    "s",
    ["0.5", "1", "2.5", "7"],
)
def test_gamma_oracle_suite(s, policy):
    s = mpf(s)
    c = de_quadrature(lambda x: x ** (s - 1) * mpmath.exp(-x), policy)
    with mp.workprec(400):
        ref = mpmath.gamma(s)
    assert relerr(c.value, ref) <= policy.target_rel_err


def test_de_quadrature_examples(policy):
    c = de_quadrature(lambda x: mpmath.exp(-x), policy)
    assert relerr(c.value, 1) <= policy.target_rel_err

    c = de_quadrature(lambda x: x ** mpf("1.5") * mpmath.exp(-x), policy)
    with mp.workprec(400):
        ref = 3 * mpmath.sqrt(mpmath.pi) / 4
    assert relerr(c.value, ref) <= policy.target_rel_err

    c = de_quadrature(lambda x: x ** mpf("-0.5") * mpmath.exp(-x - 1 / x), policy)
    with mp.workprec(400):
        ref = mpmath.sqrt(mpmath.pi) * mpmath.exp(-2)
    assert relerr(c.value, ref) <= policy.target_rel_err


def test_t_derivative_polynomials(policy):
    d = t_derivative(lambda t: t ** 2, 1, 1, policy)
    assert relerr(d.value, 2) <= policy.target_rel_err
    d = t_derivative(lambda t: t ** 3, 1, 2, policy)
    assert relerr(d.value, 6) <= policy.target_rel_err


@given(
    coeffs=st.lists(st.integers(-9, 9), min_size=5, max_size=5),
    t0=st.sampled_from(["0.25", "1", "3"]),
)
def test_t_derivative_quartics_exact(coeffs, t0):
    pol = PrecisionPolicy()
    t0 = mpf(t0)

    def f(t):
        acc = mp.zero
        for k, c in enumerate(coeffs):
            acc += c * t ** k
        return acc

    d = t_derivative(f, t0, 1, pol)
    with mp.workprec(400):
        ref = sum(k * c * t0 ** (k - 1) for k, c in enumerate(coeffs) if k)
    if ref == 0:
        assert abs(d.value) <= 1e-25
    else:
        assert relerr(d.value, ref) <= 10 * pol.target_rel_err


def test_t_derivative_domain(policy):
    with pytest.raises(DomainError):
        t_derivative(lambda t: t, 0, 1, policy)
    with pytest.raises(DomainError):
        t_derivative(lambda t: t, 1, 3, policy)


def test_log_hankel_derivative_bessel_ratio(policy):
    # d/dt ln D_1 at t = 1, alpha = 0 against the quadrature of the
    # differentiated integrand: d/dt mu_0 = -int x^{-1} e^{-x-t/x} dx
    params = WeightParams(1, 0, policy)
    eng = get_engine(params)

    def lnD1(t):
        p = WeightParams(t, 0, policy)
        return mpmath.ln(get_engine(p).det_sequence(1, mp.prec)[1])

    d = t_derivative(lnD1, 1, 1, policy)
    num = de_quadrature(lambda x: mpmath.exp(-x - 1 / x) / x, policy)
    den = de_quadrature(lambda x: mpmath.exp(-x - 1 / x), policy)
    with mp.workprec(400):
        oracle = -num.value / den.value
    assert relerr(d.value, oracle) <= 100 * policy.target_rel_err
