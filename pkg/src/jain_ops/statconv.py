"""Natural density, statistical limits, and statistical convergence of the operator sequence."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import TruncationError
from .funcspec import FunctionSpec
from .kernel import DEFAULT_POLICY, JainParams, TruncationPolicy
from .operator import OperatorInstance, apply_residual

__all__ = [
    "IndexSet",
    "density",
    "StatSequence",
    "stat_limit_check",
    "Theorem7Result",
    "theorem7_experiment",
    "square_exception_sequences",
]


@dataclass(frozen=True)
class IndexSet:
    """A subset of {1, ..., horizon}, stored sorted."""

    members: tuple[int, ...]
    horizon: int

    def __post_init__(self):
        m = tuple(sorted(set(int(k) for k in self.members)))
        if m and (m[0] < 1 or m[-1] > self.horizon):
            raise ValueError("members must lie in [1, horizon]")
        object.__setattr__(self, "members", m)

    @classmethod
    def from_predicate(cls, pred: Callable[[int], bool], horizon: int) -> "IndexSet":
        return cls(tuple(k for k in range(1, horizon + 1) if pred(k)), horizon)

    @classmethod
    def squares(cls, horizon: int) -> "IndexSet":
        return cls(tuple(k * k for k in range(1, math.isqrt(horizon) + 1)), horizon)

    def __contains__(self, n: int) -> bool:
        i = bisect.bisect_left(self.members, n)
        return i < len(self.members) and self.members[i] == n

    def mask(self, horizon: int) -> np.ndarray:
        """Boolean indicator over 1..horizon (index 0 is n = 1)."""
        out = np.zeros(horizon, dtype=bool)
        m = np.asarray(self.members, dtype=np.int64)
        out[m[m <= horizon] - 1] = True
        return out


def density(S: IndexSet, horizon: int) -> float:
    """|S intersected with [1, horizon]| / horizon."""
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    return bisect.bisect_right(S.members, horizon) / horizon


Value = Union[float, Callable[[int], float]]


@dataclass(frozen=True)
class StatSequence:
    """x_n = exception_value on exception_set, base(n) elsewhere."""

    base: Value
    exception_set: IndexSet | None = None
    exception_value: Value = 0.0

    def __call__(self, n: int) -> float:
        if self.exception_set is not None and n in self.exception_set:
            v = self.exception_value
        else:
            v = self.base
        return _at(v, n)

    def values(self, horizon: int) -> np.ndarray:
        out = np.array([_at(self.base, n) for n in range(1, horizon + 1)])
        if self.exception_set is not None:
            idx = np.flatnonzero(self.exception_set.mask(horizon)) + 1
            out[idx - 1] = [_at(self.exception_value, n) for n in idx]
        return out


def _at(v: Value, n) -> float:
    return float(v(int(n)) if callable(v) else v)


def _bad_rows(bad: np.ndarray, horizons):
    hs = [int(h) for h in horizons]
    if any(b <= a for a, b in zip(hs, hs[1:])):
        raise ValueError("horizons must be increasing")
    counts = np.cumsum(bad)
    return [(h, int(counts[h - 1]), int(counts[h - 1]) / h) for h in hs]


def stat_limit_check(seq: StatSequence, L: float, epsilon: float, horizons: Sequence[int]) -> list[tuple[int, float]]:
    """(h, density of {n <= h : |x_n - L| >= epsilon}) per horizon."""
    bad = np.abs(seq.values(max(horizons)) - L) >= epsilon
    return [(h, d) for h, _, d in _bad_rows(bad, horizons)]


@dataclass(frozen=True)
class Theorem7Result:
    rows: tuple[tuple[int, int, float], ...]  # (horizon, bad_count, bad_density)
    epsilon: float
    trace: tuple[tuple[int, float, float, float], ...] | None = None  # (n, beta_n, a_n, e_n)
    truncation_failures: tuple[int, ...] = ()

    @property
    def bad_densities(self) -> list[float]:
        return [d for _, _, d in self.rows]


def theorem7_experiment(
    seq_beta: StatSequence,
    seq_a: StatSequence,
    f: FunctionSpec,
    interval,
    epsilon: float,
    horizons: Sequence[int],
    points: int = 64,
    keep_trace: bool = False,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> Theorem7Result:
    """Densities of {n <= h : max over a grid of [c, d] of |P_n^[beta_n,a_n] f - f| >= epsilon}.

    An index whose series fails to truncate counts as bad.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    lo, hi = map(float, interval)
    xs = np.linspace(lo, hi, points)
    horizon = max(horizons)
    errs = np.empty(horizon)
    failures, trace = [], []
    for n in range(1, horizon + 1):
        params = JainParams(seq_beta(n), seq_a(n))
        try:
            e_n = float(np.abs(apply_residual(OperatorInstance(params, n, policy), f, xs)).max())
        except TruncationError:
            e_n = math.inf
            failures.append(n)
        errs[n - 1] = e_n
        if keep_trace:
            trace.append((n, params.beta, params.a, e_n))
    rows = _bad_rows(errs >= epsilon, horizons)
    return Theorem7Result(tuple(rows), float(epsilon), tuple(trace) if keep_trace else None, tuple(failures))


def square_exception_sequences(horizon: int) -> tuple[StatSequence, StatSequence]:
    """beta_n = 1/2 and a_n = 2 on perfect squares; beta_n = 1/n and a_n = e^(1 - 1/n) elsewhere."""
    sq = IndexSet.squares(horizon)
    beta = StatSequence(lambda n: 1.0 / n, sq, 0.5)
    a = StatSequence(lambda n: math.exp(1.0 - 1.0 / n), sq, 2.0)
    return beta, a
