import mpmath
import pytest
from hypothesis import HealthCheck, settings
from mpmath import mp, mpf

from oplab import PrecisionPolicy, WeightParams

settings.register_profile(
    "oplab",
    max_examples=12,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("oplab")

COMPARE_BITS = 420  # comparisons never limited by the ambient 53-bit default


def relerr(a, b):
    """|a-b|/max(|a|,|b|) at high precision; 0 if both vanish."""
    with mp.workprec(COMPARE_BITS):
        a = a.value if hasattr(a, "value") else mpf(a) if not isinstance(a, mpmath.mpf) else a
        b = b.value if hasattr(b, "value") else mpf(b) if not isinstance(b, mpmath.mpf) else b
        scale = max(abs(a), abs(b))
        if scale == 0:
            return 0.0
        return float(abs(a - b) / scale)


def abserr(a, b):
    with mp.workprec(COMPARE_BITS):
        a = a.value if hasattr(a, "value") else mpf(a) if not isinstance(a, mpmath.mpf) else a
        b = b.value if hasattr(b, "value") else mpf(b) if not isinstance(b, mpmath.mpf) else b
        return float(abs(a - b))


@pytest.fixture(scope="session")
def policy():
    return PrecisionPolicy()


@pytest.fixture(scope="session")
def params_std(policy):
    """The workhorse parameter point t = 1, alpha = 1/2."""
    return WeightParams(1, "0.5", policy)


@pytest.fixture(scope="session")
def params_classical(policy):
    """t = 0, alpha = 0: classical Laguerre."""
    return WeightParams(0, 0, policy)
