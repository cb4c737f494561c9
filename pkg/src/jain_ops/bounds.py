"""Quantitative error bounds for P_n^[beta,a] and their empirical domination checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConditionError
from .funcspec import FunctionSpec, derivative, evaluate, lipschitz_constant, modulus_of_continuity
from .kernel import JainParams
from .operator import OperatorInstance, apply_residual, central_moment_numeric

__all__ = [
    "BoundCheck",
    "SLACK",
    "check_beta_condition",
    "theorem2_bound",
    "theorem3_bound",
    "theorem4_bound",
    "lemma5_bound",
    "distance_to_set",
    "sup_error",
    "check_theorem2",
    "check_theorem3",
    "check_theorem4",
    "check_lemma5",
    "lemma5_consolidated_holds",
    "lemma5_crossover",
]

SLACK = 1e-10


@dataclass(frozen=True)
class BoundCheck:
    theorem: str
    params: JainParams
    n: int
    x_or_interval: float | tuple[float, float]
    actual: float
    bound: float

    @property
    def satisfied(self) -> bool:
        return self.actual <= self.bound + SLACK

    @property
    def margin(self) -> float:
        return self.bound - self.actual


def check_beta_condition(params: JainParams, n: int, beta_prime: float):
    """Enforce 1 > beta'/n >= beta >= 0, naming the inequality that fails."""
    ratio = beta_prime / n
    if not ratio < 1.0:
        raise ConditionError(f"1 > beta'/n fails: beta'/n = {ratio}")
    # beta = beta'/n is the intended tie, so allow rounding in the division
    if not ratio >= params.beta * (1.0 - 1e-14):
        raise ConditionError(f"beta'/n >= beta fails: {ratio} < {params.beta}")
    if not params.beta >= 0.0:
        raise ConditionError(f"beta >= 0 fails: beta = {params.beta}")


def _variance_factor(params, lam, beta_prime):
    d = 1.0 - params.theta
    return lam * (1.0 + lam * params.beta * beta_prime) / d**3


def theorem2_bound(params: JainParams, n: int, lam: float, beta_prime: float, f: FunctionSpec) -> float:
    """{1 + (lam (1 + lam beta beta') / (1 - beta ln a)^3)^(1/2)} omega(1/sqrt n) on [0, lam]."""
    check_beta_condition(params, n, beta_prime)
    omega = modulus_of_continuity(f, lam, 1.0 / math.sqrt(n)).value
    return (1.0 + math.sqrt(_variance_factor(params, lam, beta_prime))) * omega


def theorem3_bound(
    params: JainParams,
    n: int,
    lam: float,
    beta_prime: float,
    f: FunctionSpec,
    delta: float | None = None,
    reading: str = "printed",
) -> float:
    """(V/n)^(1/2) [1 + (V/(n delta^p))^(1/2)] omega_1(delta) with V = lam(1 + lam beta beta')/(1 - beta ln a)^3.

    omega_1 is the modulus of continuity of f'; delta defaults to 1/sqrt(n).
    p = 1 for ``reading="printed"``; p = 2 for ``reading="derived"``, which is
    what the Cauchy step actually yields (second moment divided by delta).
    ``reading="corrected"`` uses p = 2 and adds the drift term
    sup_x |f'(x)| x |ln a/(1 - beta ln a) - 1| that the argument drops; only
    this reading is a valid bound when beta > 0 (linear f is not reproduced).
    """
    if reading not in ("printed", "derived", "corrected"):
        raise ValueError(f"reading must be 'printed', 'derived' or 'corrected', got {reading!r}")
    check_beta_condition(params, n, beta_prime)
    fprime = derivative(f)
    if delta is None:
        delta = 1.0 / math.sqrt(n)
    v = _variance_factor(params, lam, beta_prime)
    omega1 = modulus_of_continuity(fprime, lam, delta).value
    dpow = delta if reading == "printed" else delta * delta
    bound = math.sqrt(v / n) * (1.0 + math.sqrt(v / (n * dpow))) * omega1
    if reading == "corrected":
        bound += _drift_sup(params, lam, fprime)
    return bound


def _drift_sup(params, lam, fprime):
    """sup over [0, lam] of |f'(x) P_n(t - x, x)| = |f'(x)| x |ln a/(1 - beta ln a) - 1|."""
    slope = abs(params.log_a / (1.0 - params.theta) - 1.0)
    if slope == 0.0:
        return 0.0
    g = lambda t: abs(float(evaluate(fprime, t))) * t
    xs = np.linspace(0.0, lam, 4097)
    vals = np.abs(np.asarray(evaluate(fprime, xs), dtype=float)) * xs
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
    res = minimize_scalar(lambda t: -g(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return slope * max(best, -float(res.fun))


def theorem4_bound(
    params: JainParams, n: int, x: float, eta: float, M_f: float, dist: float, exponent: str = "half"
) -> float:
    """M_f C max{x^(eta/2), x^eta} + 2 M_f dist^eta.

    C = (1/(n (1 - beta ln a)^3) + beta^2/(1 - beta ln a)^2)^p with p = eta/2
    for ``exponent="half"`` (the Hoelder step of the derivation) or p = eta for
    ``exponent="full"`` (the statement as printed).
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if exponent not in ("half", "full"):
        raise ValueError(f"exponent must be 'half' or 'full', got {exponent!r}")
    d = 1.0 - params.theta
    base = 1.0 / (n * d**3) + params.beta**2 / d**2
    power = eta / 2.0 if exponent == "half" else eta
    return M_f * base**power * max(x ** (eta / 2.0), x**eta) + 2.0 * M_f * dist**eta


def lemma5_bound(params: JainParams, n: int, x: float) -> tuple[float, float]:
    """(four-term intermediate bound, consolidated 41(x + x^2 + x^3 + x^4)/(n^3 D^7)) on P_n((t-x)^4, x)."""
    d = 1.0 - params.theta
    intermediate = (
        15 * x / (n**3 * d**7) + 19 * x**2 / (n**2 * d**6) + 6 * x**3 / (n * d**5) + x**4 / d**4
    )
    final = 41 * (x + x**2 + x**3 + x**4) / (n**3 * d**7)
    return intermediate, final


def distance_to_set(x: float, intervals: Sequence[tuple[float, float]]) -> float:
    """d(x, E) for E a finite union of closed intervals (points as degenerate intervals)."""
    if not intervals:
        raise ValueError("E must be nonempty")
    return min(0.0 if lo <= x <= hi else min(abs(x - lo), abs(x - hi)) for lo, hi in intervals)


def sup_error(op: OperatorInstance, f: FunctionSpec, interval, points: int = 512, refine: bool = True):
    """(argmax, sup |P_n f - f|) over a uniform grid of the interval, refined near the grid maximizer."""
    lo, hi = (0.0, float(interval)) if np.ndim(interval) == 0 else map(float, interval)
    xs = np.linspace(lo, hi, points)
    err = np.abs(apply_residual(op, f, xs))
    i = int(np.argmax(err))
    best_x, best = float(xs[i]), float(err[i])
    if refine and points > 1:
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, points - 1)]
        res = minimize_scalar(
            lambda t: -abs(float(apply_residual(op, f, [t])[0])),
            bounds=(a, b), method="bounded", options={"xatol": 1e-10},
        )
        if -res.fun > best:
            best_x, best = float(res.x), float(-res.fun)
    return best_x, best


def check_theorem2(op: OperatorInstance, f: FunctionSpec, lam: float, beta_prime: float) -> BoundCheck:
    bound = theorem2_bound(op.params, op.n, lam, beta_prime, f)
    _, actual = sup_error(op, f, lam)
    return BoundCheck("T2", op.params, op.n, (0.0, float(lam)), actual, bound)


def check_theorem3(
    op: OperatorInstance, f: FunctionSpec, lam: float, beta_prime: float, reading: str = "printed"
) -> BoundCheck:
    bound = theorem3_bound(op.params, op.n, lam, beta_prime, f, reading=reading)
    _, actual = sup_error(op, f, lam)
    return BoundCheck("T3", op.params, op.n, (0.0, float(lam)), actual, bound)


def check_theorem4(
    op: OperatorInstance,
    f: FunctionSpec,
    x: float,
    E: Sequence[tuple[float, float]],
    eta: float = 1.0,
    M_f: float | None = None,
    exponent: str = "half",
) -> BoundCheck:
    """Theorem 4 at one point x; M_f defaults to the analytic Lipschitz constant (eta = 1)."""
    if M_f is None:
        if eta != 1.0:
            raise ValueError("M_f must be supplied when eta < 1")
        M_f = lipschitz_constant(f)
        if not math.isfinite(M_f):
            raise ValueError("f has no global Lipschitz constant; supply M_f")
    bound = theorem4_bound(op.params, op.n, x, eta, M_f, distance_to_set(x, E), exponent)
    actual = abs(float(apply_residual(op, f, [x], compensated=True)[0]))
    return BoundCheck("T4", op.params, op.n, float(x), actual, bound)


def check_lemma5(op: OperatorInstance, x: float) -> BoundCheck:
    """Four-term intermediate bound against the numeric fourth central moment."""
    intermediate, _ = lemma5_bound(op.params, op.n, x)
    actual = central_moment_numeric(op, 4, x)
    return BoundCheck("L5", op.params, op.n, float(x), actual, intermediate)


def lemma5_consolidated_holds(op: OperatorInstance, x: float) -> bool:
    _, final = lemma5_bound(op.params, op.n, x)
    return central_moment_numeric(op, 4, x) <= final


def lemma5_crossover(params: JainParams, x: float, n_max: int = 1 << 16) -> int | None:
    """Smallest n at which the consolidated bound falls below the fourth central moment.

    Octave scan then bisection, assuming a single sign change; None if the
    bound holds for every n up to ``n_max``.
    """
    def fails(n):
        return not lemma5_consolidated_holds(OperatorInstance(params, n), x)

    if fails(1):
        return 1
    good, n = 1, 2
    while n <= n_max and not fails(n):
        good, n = n, 2 * n
    if n > n_max:
        return None
    bad = n
    while bad - good > 1:
        mid = (good + bad) // 2
        if fails(mid):
            bad = mid
        else:
            good = mid
    return bad
