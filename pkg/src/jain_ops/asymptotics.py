"""Convergence along parameter ladders: uniform convergence and the Voronovskaya limit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ParameterDomainError, TruncationError
from .funcspec import FunctionSpec, evaluate
from .kernel import DEFAULT_POLICY, JainParams, TruncationPolicy
from .operator import OperatorInstance, apply_residual, central_moment_numeric

__all__ = [
    "Constant",
    "Decay",
    "Custom",
    "ParamLadder",
    "custom_ladder",
    "uniform_convergence_trace",
    "VoronovskayaTrace",
    "voronovskaya_trace",
    "richardson_limit",
    "second_derivative_fd",
]


@dataclass(frozen=True)
class Constant:
    beta: float
    a: float

    def params(self, n: int) -> JainParams:
        return JainParams(self.beta, self.a)


@dataclass(frozen=True)
class Decay:
    """beta_n = c/n, a_n = e^(1 - d/n); needs n > d so that a_n > 1."""

    c: float = 1.0
    d: float = 1.0

    def params(self, n: int) -> JainParams:
        if not n > self.d:
            raise ParameterDomainError(f"Decay ladder needs n > d = {self.d}, got n = {n}")
        return JainParams(self.c / n, math.exp(1.0 - self.d / n))


@dataclass(frozen=True)
class Custom:
    """Explicit (n, beta_n, a_n) table."""

    table: tuple[tuple[int, float, float], ...]

    def __post_init__(self):
        rows = tuple((int(n), float(b), float(a)) for n, b, a in self.table)
        for _, b, a in rows:
            JainParams(b, a)
        object.__setattr__(self, "table", rows)

    def params(self, n: int) -> JainParams:
        for m, b, a in self.table:
            if m == n:
                return JainParams(b, a)
        raise ParameterDomainError(f"custom ladder has no entry for n = {n}")


ParamLadder = Union[Constant, Decay, Custom]


def custom_ladder(rule: Callable[[int], tuple[float, float]], n_values: Sequence[int]) -> Custom:
    """Tabulate rule(n) -> (beta_n, a_n), e.g. c/n^2-type ladders."""
    return Custom(tuple((n, *rule(n)) for n in n_values))


def _check_ns(n_values):
    ns = [int(n) for n in n_values]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_values must be nonempty and strictly increasing")
    return ns


def uniform_convergence_trace(
    ladder: ParamLadder,
    f: FunctionSpec,
    interval,
    n_values: Sequence[int],
    points: int = 512,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> list[tuple[int, float]]:
    """(n, max over a uniform grid of [a, b] of |P_n f - f|) along the ladder."""
    lo, hi = map(float, interval)
    if not 0.0 <= lo < hi < math.inf:
        raise ValueError(f"need 0 <= a < b < inf, got [{lo}, {hi}]")
    xs = np.linspace(lo, hi, points)
    out = []
    for n in _check_ns(n_values):
        op = OperatorInstance(ladder.params(n), n, policy)
        try:
            err = np.abs(apply_residual(op, f, xs))
        except TruncationError as exc:
            raise TruncationError(f"n={n}: {exc}", exc.partial_sum, exc.k_reached) from exc
        out.append((n, float(err.max())))
    return out


@dataclass(frozen=True)
class VoronovskayaTrace:
    n_values: tuple[int, ...]
    scaled_residuals: tuple[float, ...]
    target: float
    extrapolated_limit: float
    drifts: tuple[float, ...]  # n P_n(t - x, x)
    betas: tuple[float, ...]
    a_values: tuple[float, ...]

    @property
    def drift_vanishing(self) -> bool:
        """Side condition n P_n(t - x, x) -> 0, judged on the tail of the ladder."""
        d = np.abs(self.drifts)
        if d[-1] < 1e-12:
            return True
        scale = 1e-2 * max(1.0, abs(self.target))
        return bool(d[-1] < scale and (d.size < 2 or d[-1] <= d[-2]))


def richardson_limit(n_values: Sequence[int], values: Sequence[float]) -> float:
    """Polynomial extrapolation in h = 1/n to h = 0 through the last three points (Neville)."""
    h = [1.0 / n for n in n_values[-3:]]
    p = [float(v) for v in values[-3:]]
    m = len(p)
    for level in range(1, m):
        for i in range(m - level):
            j = i + level
            p[i] = (h[j] * p[i] - h[i] * p[i + 1]) / (h[j] - h[i])
    return p[0]


def voronovskaya_trace(
    ladder: ParamLadder,
    f: FunctionSpec,
    x: float,
    n_values: Sequence[int],
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> VoronovskayaTrace:
    """n (P_n f - f)(x) along the ladder, its extrapolated limit, and the drift side condition."""
    if not x > 0:
        raise ValueError(f"x must be positive, got {x}")
    target = 0.5 * x * evaluate(f, x, 2)
    ns = _check_ns(n_values)
    res, drifts, betas, avals = [], [], [], []
    for n in ns:
        params = ladder.params(n)
        op = OperatorInstance(params, n, policy)
        res.append(n * float(apply_residual(op, f, [x], compensated=True)[0]))
        drifts.append(n * central_moment_numeric(op, 1, x))
        betas.append(params.beta)
        avals.append(params.a)
    return VoronovskayaTrace(
        n_values=tuple(ns),
        scaled_residuals=tuple(res),
        target=float(target),
        extrapolated_limit=richardson_limit(ns, res),
        drifts=tuple(drifts),
        betas=tuple(betas),
        a_values=tuple(avals),
    )


def second_derivative_fd(f: FunctionSpec, x: float) -> float:
    """Central second difference; an oracle for the exact derivatives only."""
    evaluate(f, x, 2)  # raises NondifferentiableError at a kink
    h = np.finfo(float).eps ** 0.25 * max(1.0, abs(x))
    f0, fp, fm = (float(evaluate(f, t)) for t in (x, x + h, x - h))
    return (fp - 2.0 * f0 + fm) / (h * h)
