import math

import mpmath
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

E = math.e


def mp_weight(beta, a, alpha, k):
    """Extended-precision w(k, alpha)."""
    beta, a, alpha = mpmath.mpf(beta), mpmath.mpf(a), mpmath.mpf(alpha)
    c = mpmath.log(a)
    s = alpha + k * beta
    return alpha * c**k * s ** (k - 1) * a ** (-s) / mpmath.factorial(k)


def mp_series(beta, a, alpha, g, kmax):
    """sum_{k < kmax} w(k, alpha) g(k) in 40-digit arithmetic."""
    with mpmath.workdps(40):
        return mpmath.fsum(mp_weight(beta, a, alpha, k) * g(k) for k in range(kmax))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
