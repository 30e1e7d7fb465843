import mpmath
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from conftest import relerr
from oplab import DomainError, PrecisionPolicy, WeightParams, bessel_k, moment, moment_table


def bessel_k1_series(z, bits):
    """Ascending series of K_1 with digamma terms, summed to convergence;
    independent of every quadrature path."""
    with mp.workprec(bits):
        z = mpf(z)
        q = z * z / 4
        # I_1(z) = (z/2) sum q^k / (k! (k+1)!)
        i1 = mp.zero
        term = mpf(1)
        for k in range(0, 400):
            if k:
                term *= q / (k * (k + 1))
            i1 += term
            if term < mpf(2) ** (-bits - 20):
                break
        i1 *= z / 2
        # K_1(z) = 1/z + ln(z/2) I_1(z)
        #          - (z/4) sum [psi(k+1) + psi(k+2)] q^k / (k! (k+1)!)
        s = mp.zero
        term = mpf(1)
        for k in range(0, 400):
            if k:
                term *= q / (k * (k + 1))
            piece = (mpmath.psi(0, k + 1) + mpmath.psi(0, k + 2)) * term
            s += piece
            if abs(piece) < mpf(2) ** (-bits - 20):
                break
        return 1 / z + mpmath.ln(z / 2) * i1 - (z / 4) * s


def test_weight_params_domain(policy):
    with pytest.raises(DomainError):
        WeightParams(-1, 0, policy)
    with pytest.raises(DomainError):
        WeightParams(1, -1, policy)
    p = WeightParams(1, "-0.5", policy)
    assert p.low_alpha
    assert not WeightParams(1, "0.5", policy).low_alpha


def test_bessel_k_half_order(policy):
    c = bessel_k("0.5", 2, policy)
    with mp.workprec(400):
        ref = mpmath.sqrt(mpmath.pi / 4) * mpmath.exp(-2)
    assert relerr(c.value, ref) <= policy.target_rel_err


def test_bessel_k_three_halves(policy):
    c = bessel_k("1.5", 1, policy)
    with mp.workprec(400):
        ref = mpmath.sqrt(mpmath.pi / 2) * mpmath.exp(-1) * 2
    assert relerr(c.value, ref) <= policy.target_rel_err


def test_bessel_k1_series_oracle(policy):
    c = bessel_k(1, 2, policy)
    ref = bessel_k1_series(2, 256)
    assert relerr(c.value, ref) <= 100 * policy.target_rel_err


def test_bessel_k_domain(policy):
    with pytest.raises(DomainError):
        bessel_k(1, 0, policy)
    with pytest.raises(DomainError):
        bessel_k(-1, 1, policy)


def test_moment_classical(policy):
    c = moment(2, WeightParams(0, 0, policy))
    assert relerr(c.value, 2) <= policy.target_rel_err


def test_moment_half_integer_closed_form(policy):
    c = moment(0, WeightParams(1, "-0.5", policy))
    with mp.workprec(400):
        ref = mpmath.sqrt(mpmath.pi) * mpmath.exp(-2)
    assert relerr(c.value, ref) <= policy.target_rel_err


def test_moment_k1_value(policy):
    c = moment(0, WeightParams(1, 0, policy))
    with mp.workprec(512):
        ref = 2 * bessel_k1_series(2, 512)
    assert relerr(c.value, ref) <= 100 * policy.target_rel_err


def test_moment_table_trivial(policy):
    tab = moment_table(0, WeightParams(0, 0, policy))
    assert relerr(tab.value(0), 1) <= policy.target_rel_err

    tab = moment_table(2, WeightParams(0, 1, policy))
    for j, want in enumerate([1, 2, 6]):
        assert relerr(tab.value(j), want) <= policy.target_rel_err


def test_moment_table_log_convex(policy):
    tab = moment_table(4, WeightParams(1, "0.5", policy))
    with mp.workprec(400):
        for j in range(1, 4):
            assert tab.value(j) ** 2 <= tab.value(j - 1) * tab.value(j + 1)


def test_moment_decreasing_in_t(policy):
    for j in (0, 1, 3):
        lo = moment(j, WeightParams(2, "0.5", policy))
        hi = moment(j, WeightParams("0.5", "0.5", policy))
        assert lo.value < hi.value


def test_moment_gamma_at_zero(policy):
    for j in (0, 1, 4):
        c = moment(j, WeightParams(0, "0.7", policy))
        with mp.workprec(400):
            ref = mpmath.gamma(j + mpf("0.7") + 1)
        assert relerr(c.value, ref) <= policy.target_rel_err


@given(
    j=st.integers(0, 6),
    t=st.sampled_from(["0.05", "0.3", "1", "4"]),
    alpha=st.sampled_from(["-0.9", "-0.25", "0.5", "2.5"]),
)
def test_moment_two_route_agreement(j, t, alpha):
    # moment() enforces the quadrature/Bessel cross-check internally and
    # raises CrossCheckMismatch when the routes drift apart
    pol = PrecisionPolicy()
    c = moment(j, WeightParams(t, alpha, pol))
    assert c.value > 0
    assert c.rel_err_bound <= pol.target_rel_err
