"""The operator P_n^[beta,a] and its moments.

    P_n(f, x) = sum_k w(k, n x) f(k / n)

Moments are produced three ways: the truncated series itself (authoritative),
an assembly from S-series values obtained through the recursion, and the
published closed forms evaluated as printed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterDomainError
from .funcspec import Exponential, FunctionSpec, Polynomial, Sum, evaluate
from .kernel import (
    DEFAULT_POLICY,
    JainParams,
    TruncationPolicy,
    _initial_width,
    _left_start,
    log_weights,
    s_series_recursion,
    summation_window,
)

__all__ = [
    "OperatorInstance",
    "MomentReport",
    "Discrepancy",
    "apply",
    "apply_many",
    "apply_residual",
    "raw_moment",
    "central_moment",
    "central_moment_numeric",
    "printed_raw_moment",
    "printed_central_moment",
    "recursion_raw_moment",
    "moment_discrepancy",
    "DISCREPANCY_TOL",
]

DISCREPANCY_TOL = 1e-6

# Stirling numbers of the second kind S2(s, m), m = 1..s
_STIRLING2 = {1: (1,), 2: (1, 1), 3: (1, 3, 1), 4: (1, 7, 6, 1)}


@dataclass(frozen=True)
class OperatorInstance:
    params: JainParams
    n: int
    policy: TruncationPolicy = field(default=DEFAULT_POLICY)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterDomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))


def _exponential_rates(f: FunctionSpec):
    if isinstance(f, Exponential):
        yield f.rate
    elif isinstance(f, Sum):
        for _, g in f.terms:
            yield from _exponential_rates(g)


def _check_growth(op: OperatorInstance, f: FunctionSpec):
    # sum_k w_k e^(r k / n) behaves like (theta e^(1 - theta + r/n))^k
    theta = op.params.theta
    if theta == 0.0:
        return
    for rate in _exponential_rates(f):
        if math.log(theta) + 1.0 - theta + rate / op.n >= 0.0:
            raise ParameterDomainError(
                f"exp({rate} t) grows too fast: the operator series diverges for "
                f"beta ln a={theta}, n={op.n}"
            )


def _weighted_sums(op: OperatorInstance, xs: np.ndarray, g, compensated: bool) -> np.ndarray:
    """sum_k w(k, n x) g(k/n, x) for every x > 0 in ``xs``."""
    params, n = op.params, op.n
    alpha = n * xs
    lo = _left_start(params, alpha, op.policy)
    mode = np.ceil(params.mean(alpha)).astype(np.int64) + 1

    def terms(rows, k):
        w = np.exp(log_weights(params, alpha[rows, None], k))
        gv = g(k / n, xs[rows, None])
        if not np.isfinite(gv).all():
            raise ValueError("function is not finite on the summation range")
        mags = np.abs(gv)
        mags += 1.0
        mags *= w
        gv *= w
        return gv, mags

    win = summation_window(terms, lo, mode, op.policy, _initial_width(params, alpha))
    return win.sums(compensated)


def _rowwise(op, xs, g, at_zero, compensated):
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise ParameterDomainError("x must be finite and nonnegative")
    out = np.empty_like(xs)
    zero = xs == 0.0
    # at x = 0 all mass sits at k = 0
    out[zero] = at_zero
    if (~zero).any():
        out[~zero] = _weighted_sums(op, xs[~zero], g, compensated)
    return out


def apply(op: OperatorInstance, f: FunctionSpec, x: float) -> float:
    """P_n^[beta,a](f, x)."""
    _check_growth(op, f)
    return float(_rowwise(op, [x], lambda t, _: evaluate(f, t), evaluate(f, 0.0), True)[0])


def apply_many(op: OperatorInstance, f: FunctionSpec, xs) -> np.ndarray:
    """P_n(f, x) over an array of x; pairwise rather than exact row sums."""
    _check_growth(op, f)
    return _rowwise(op, xs, lambda t, _: evaluate(f, t), evaluate(f, 0.0), False)


def apply_residual(op: OperatorInstance, f: FunctionSpec, xs, compensated: bool = False) -> np.ndarray:
    """P_n(f, x) - f(x) summed as sum_k w_k (f(k/n) - f(x)), avoiding the cancellation."""
    _check_growth(op, f)
    return _rowwise(op, xs, lambda t, x: evaluate(f, t) - evaluate(f, x), 0.0, compensated)


def central_moment_numeric(op: OperatorInstance, order: int, x: float) -> float:
    """sum_k w(k, n x) (k/n - x)^s, summed exactly per term."""
    return float(_rowwise(op, [x], lambda t, xx: (t - xx) ** order, 0.0, True)[0])


def recursion_raw_moment(params: JainParams, n: int, order: int, x: float) -> float:
    """P_n(t^s, x) assembled from recursion-path S-values:

        P_n(t^s, x) = (x / n^(s-1)) sum_m S2(s, m) (ln a)^m S(m, n x + m beta)
    """
    if order == 0:
        return 1.0
    if x == 0.0:
        return 0.0
    c, alpha = params.log_a, n * x
    parts = [
        s2 * c**m * s_series_recursion(m, alpha + m * params.beta, params)
        for m, s2 in enumerate(_STIRLING2[order], start=1)
    ]
    return x / n ** (order - 1) * math.fsum(parts)


def printed_raw_moment(params: JainParams, n: int, order: int, x: float) -> float:
    """The published closed forms for P_n(t^s, x), s = 0..4, evaluated as printed."""
    b, c = params.beta, params.log_a
    d = 1.0 - b * c
    if order == 0:
        return 1.0
    if order == 1:
        return x * c / d
    if order == 2:
        return x**2 * c**2 / d**2 + x * c / (n * d**3)
    if order == 3:
        return (
            x**3 * c**3 / d**3
            + 3 * x**2 * c**2 / (n * d**4)
            + x * c * (1 + 2 * b * c + 2 * b**4 * c**3 - 2 * b**4 * c**4) / (n**2 * d**5)
        )
    if order == 4:
        return (
            x**4 * c**4 / d**4
            + 6 * x**3 * c**3 / (n * d**5)
            + x**2 * c**2 * (7 + 8 * b * c + 2 * b**4 * c**3 - 2 * b**4 * c**4) / (n**2 * d**6)
            + x
            * (c + 8 * b * c**2 + 6 * b**2 * c**3 + (12 * b**4 * c**4 - 16 * b**5 * c**5 + 6 * b**6 * c**6) * (1 - c))
            / (n**3 * d**7)
        )
    raise ValueError(f"raw moment order must be 0..4, got {order}")


def printed_central_moment(params: JainParams, n: int, order: int, x: float) -> float:
    """The published closed forms for P_n((t - x)^s, x), s = 1..4, evaluated as printed."""
    b, c = params.beta, params.log_a
    d = 1.0 - b * c
    if order == 1:
        return x * (c + b * c - 1) / d
    if order == 2:
        return x * c / (n * d**3) + x**2 * (1 - 2 * (1 + b) * c + (1 + b) ** 2 * c**2) / d**2
    if order == 3:
        return (
            x * (c + 2 * b * c**2 + 2 * b**4 * c**4 - 2 * b**4 * c**5) / (n**2 * d**5)
            + 3 * x**2 * c * ((1 + b) * c - 1) / (n * d**4)
            + x**3 * (3 * c - (3 + 6 * b) * c**2 + (1 + 3 * b + 3 * b**2) * c**3 - d**3) / d**3
        )
    if order == 4:
        return (
            x * c * (1 + 8 * b * c + 6 * b**2 * c**2 + (12 * b**4 * c**3 - 16 * b**5 * c**4 + 6 * b**6 * c**5) * (1 - c))
            / (n**3 * d**7)
            + x**2
            * c
            * ((7 - 4 * b) * c - 4 + 8 * b * (1 + b) * c**2 - 8 * b**4 * c**3
               + 2 * b**4 * (5 + 4 * b) * c**4 - 2 * b**4 * (1 + 4 * b) * c**5)
            / (n**2 * d**6)
            + 6 * x**3 * c * (d**2 - 2 * c + (1 + 2 * b) * c**2) / (n * d**5)
            + x**4
            * (1 - 4 * (1 + b) * c + 6 * (1 + b) ** 2 * c**2 - 4 * (1 + b) ** 3 * c**3 + (1 + b) ** 4 * c**4)
            / d**4
        )
    raise ValueError(f"central moment order must be 1..4, got {order}")


def _rel(value, reference, floor):
    return abs(value - reference) / max(abs(reference), floor)


@dataclass(frozen=True)
class MomentReport:
    """One moment computed three ways; ``numeric`` is authoritative.

    Relative errors are taken against max(|numeric|, floor); the floor is
    1e-300 for raw moments and 1e-6 x^order for central moments, so that a
    central moment that vanishes exactly is compared on its natural scale.
    """

    kind: str
    order: int
    x: float
    numeric: float
    recursion_path: float
    closed_form: float
    rel_err_numeric_vs_recursion: float
    rel_err_numeric_vs_closed: float
    params: JainParams | None = None
    n: int | None = None
    binomial_path: float | None = None


def raw_moment(op: OperatorInstance, order: int, x: float) -> MomentReport:
    if order not in range(5):
        raise ValueError(f"raw moment order must be 0..4, got {order}")
    numeric = apply(op, Polynomial((0.0,) * order + (1.0,)), x)
    rec = recursion_raw_moment(op.params, op.n, order, x)
    closed = printed_raw_moment(op.params, op.n, order, x)
    floor = 1e-300
    return MomentReport(
        kind="raw", order=order, x=float(x), numeric=numeric, recursion_path=rec, closed_form=closed,
        rel_err_numeric_vs_recursion=_rel(rec, numeric, floor),
        rel_err_numeric_vs_closed=_rel(closed, numeric, floor),
        params=op.params, n=op.n,
    )


def _binomial(raw, order, x):
    return math.fsum(math.comb(order, j) * raw[j] * (-x) ** (order - j) for j in range(order + 1))


def central_moment(op: OperatorInstance, order: int, x: float) -> MomentReport:
    """P_n((t - x)^s, x).

    ``numeric`` sums w_k (k/n - x)^s directly; ``binomial_path`` expands over
    the numeric raw moments and loses digits to cancellation when n x is large.
    """
    if order not in range(1, 5):
        raise ValueError(f"central moment order must be 1..4, got {order}")
    numeric = central_moment_numeric(op, order, x)
    raw_num = [raw_moment(op, j, x).numeric for j in range(order + 1)]
    raw_rec = [recursion_raw_moment(op.params, op.n, j, x) for j in range(order + 1)]
    rec = _binomial(raw_rec, order, x)
    closed = printed_central_moment(op.params, op.n, order, x)
    floor = max(1e-6 * x**order, 1e-300)
    return MomentReport(
        kind="central", order=order, x=float(x), numeric=numeric, recursion_path=rec, closed_form=closed,
        rel_err_numeric_vs_recursion=_rel(rec, numeric, floor),
        rel_err_numeric_vs_closed=_rel(closed, numeric, floor),
        params=op.params, n=op.n, binomial_path=_binomial(raw_num, order, x),
    )


@dataclass(frozen=True)
class Discrepancy:
    """A printed closed form that disagrees with the series value."""

    kind: str
    order: int
    beta: float
    a: float
    n: int | None
    x: float | None
    alpha: float | None
    printed_value: float
    numeric_value: float

    @property
    def abs_diff(self) -> float:
        return abs(self.printed_value - self.numeric_value)

    @property
    def rel_diff(self) -> float:
        return self.abs_diff / max(1.0, abs(self.numeric_value))


def moment_discrepancy(report: MomentReport, tol: float = DISCREPANCY_TOL) -> Discrepancy | None:
    """A Discrepancy when |closed_form - numeric| > tol * max(1, |numeric|), else None."""
    if abs(report.closed_form - report.numeric) <= tol * max(1.0, abs(report.numeric)):
        return None
    return Discrepancy(
        kind=report.kind, order=report.order, beta=report.params.beta, a=report.params.a,
        n=report.n, x=report.x, alpha=None,
        printed_value=report.closed_form, numeric_value=report.numeric,
    )
