"""Basis weights of the generalized Jain operators and the auxiliary S-series.

The weights

    w(k, alpha) = alpha (ln a)^k (alpha + k beta)^(k-1) a^-(alpha + k beta) / k!

form a generalized Poisson law with parameters (alpha ln a, beta ln a), so they
sum to one for 0 <= beta < 1 and 1 < a <= e.  Everything here is evaluated in
log space; (alpha + k beta)^(k-1) / k! overflows doubles near k ~ 200.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, lambertw

from .errors import ParameterDomainError, TruncationError, UnsupportedOrderError

__all__ = [
    "JainParams",
    "TruncationPolicy",
    "WeightTail",
    "DEFAULT_POLICY",
    "weight",
    "weights",
    "weight_sum",
    "generating_identity_residual",
    "s_series_sum",
    "s_series_recursion",
    "s_series_closed",
    "summation_window",
]


@dataclass(frozen=True)
class JainParams:
    """The pair (beta, a) identifying one member of the operator family."""

    beta: float
    a: float
    log_a: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        beta, a = float(self.beta), float(self.a)
        if not (math.isfinite(beta) and math.isfinite(a)):
            raise ParameterDomainError(f"non-finite parameters beta={beta!r}, a={a!r}")
        if not 0.0 <= beta < 1.0:
            raise ParameterDomainError(f"beta={beta} outside [0, 1)")
        if not 1.0 < a <= math.e:
            raise ParameterDomainError(f"a={a} outside (1, e]")
        log_a = math.log(a)
        if not beta * log_a < 1.0:
            raise ParameterDomainError(f"beta*ln(a)={beta * log_a} is not < 1")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "log_a", log_a)

    @property
    def theta(self) -> float:
        """beta * ln(a); the ratio of the geometric decay in the S-recursion."""
        return self.beta * self.log_a

    def mean(self, alpha):
        return alpha * self.log_a / (1.0 - self.theta)

    def variance(self, alpha):
        return alpha * self.log_a / (1.0 - self.theta) ** 3

    def mode_estimate(self, alpha) -> int:
        return math.ceil(self.mean(alpha)) + 1


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for the sums over k.

    Summation stops once ``consecutive_small`` successive terms fall below
    ``max(abs_tol, rel_tol * partial_sum)``, but never before the term-mode
    estimate: the terms grow before they decay.
    """

    abs_tol: float = 1e-16
    rel_tol: float = 1e-14
    consecutive_small: int = 5
    k_max: int = 1_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.consecutive_small < 1 or self.k_max < 1:
            raise ValueError("consecutive_small and k_max must be >= 1")

    @classmethod
    def from_env(cls, **overrides) -> "TruncationPolicy":
        """Default policy, with ``JAIN_OPS_KMAX`` overriding ``k_max``."""
        raw = os.environ.get("JAIN_OPS_KMAX")
        if raw is not None and "k_max" not in overrides:
            overrides["k_max"] = int(raw)
        return cls(**overrides)


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class WeightTail:
    partial_sum: float
    k_used: int
    tail_estimate: float


def _check_alpha(alpha):
    if not (np.all(np.isfinite(alpha)) and np.all(np.asarray(alpha) > 0)):
        raise ParameterDomainError(f"alpha must be positive and finite, got {alpha!r}")


_LOG_FACT = gammaln(np.arange(4096, dtype=float) + 1.0)


def _log_factorial(k: np.ndarray) -> np.ndarray:
    global _LOG_FACT
    top = int(k.max(initial=0))
    if top >= _LOG_FACT.shape[0]:
        size = max(2 * _LOG_FACT.shape[0], top + 1)
        # rebinding is atomic, so concurrent readers see either table
        _LOG_FACT = gammaln(np.arange(size, dtype=float) + 1.0)
    return _LOG_FACT[k]


def log_weights(params: JainParams, alpha, k) -> np.ndarray:
    """Natural log of w(k, alpha); broadcasts over ``alpha`` and ``k``."""
    k = np.asarray(k, dtype=np.int64)
    alpha = np.asarray(alpha, dtype=float)
    c = params.log_a
    s = alpha + k * params.beta
    with np.errstate(divide="ignore"):
        lw = np.log(s)
        lw *= k - 1
        s *= c
        lw -= s
        lw -= _log_factorial(k)
        lw += k * math.log(c)
        lw += np.log(alpha)
    if k.size and k.min() > 0:
        return lw
    return np.where(k == 0, -c * alpha, lw)


def weight(params: JainParams, alpha: float, k: int) -> float:
    """w(k, alpha) for a single k >= 0."""
    _check_alpha(alpha)
    if k < 0:
        raise ParameterDomainError(f"k must be nonnegative, got {k}")
    if k == 0:
        return math.exp(-params.log_a * alpha)
    return float(np.exp(log_weights(params, alpha, k)))


def weights(params: JainParams, alpha: float, k) -> np.ndarray:
    """Vectorized ``weight`` over an array of k."""
    _check_alpha(alpha)
    return np.exp(log_weights(params, alpha, k))


def _initial_width(params: JainParams, alpha: np.ndarray) -> np.ndarray:
    return _gpd_width(alpha * params.log_a, params.theta)


def _gpd_width(lam, theta: float):
    """Guess for the last k needed by a generalized Poisson(lam, theta) sum.

    Only a starting point: the window is extended until the stopping rule holds.
    """
    mu = lam / (1.0 - theta)
    sd = np.sqrt(lam / (1.0 - theta) ** 3)
    extra = 16.0
    if theta > 0:
        # exponential right tail of the generalized Poisson law
        extra += 35.0 / (theta - 1.0 - math.log(theta))
    return mu + 10.0 * sd + extra


def _left_start(params: JainParams, alpha: np.ndarray, policy: TruncationPolicy) -> np.ndarray:
    """First k worth summing.

    The weights are unimodal, so the mass left of ``lo`` is at most
    ``lo * w(lo)``; a start is accepted when that is below abs_tol / 1000.
    """
    mu = params.mean(alpha)
    sd = np.sqrt(params.variance(alpha))
    lo = np.maximum(np.floor(mu - 10.0 * sd), 0.0).astype(np.int64)
    lw = log_weights(params, alpha, lo)
    with np.errstate(divide="ignore"):
        skipped = lw + np.log(np.maximum(lo, 1))
    ok = skipped < math.log(policy.abs_tol) - 7.0
    return np.where(ok, lo, 0)


@dataclass
class Window:
    """Per-row outcome of the stopping rule.

    ``values[i]`` holds the terms of row i for k = lo[i] .. k_used[i].
    """

    values: list
    lo: np.ndarray
    k_used: np.ndarray
    tail: np.ndarray

    def sums(self, compensated: bool = True) -> np.ndarray:
        if compensated:
            return np.array([math.fsum(v) for v in self.values])
        return np.array([v.sum() for v in self.values])


_GROUP = 16


def summation_window(term_fn, lo, mode, policy: TruncationPolicy, width0) -> Window:
    """Evaluate ``term_fn`` on k-blocks until every row meets the stopping rule.

    ``term_fn(rows, k)`` receives row indices and a 2-D int array
    (len(rows) x width) of k values and returns ``(values, magnitudes)``; the
    stopping rule is applied to the magnitudes.  Rows are processed in groups
    of similar width and a group's block is extended until all its rows stop.
    """
    lo = np.asarray(lo, dtype=np.int64)
    mode = np.asarray(mode, dtype=np.int64)
    need = np.broadcast_to(np.asarray(width0, dtype=float), lo.shape) - lo
    order = np.argsort(need, kind="stable")
    n_rows = lo.shape[0]
    values = [None] * n_rows
    k_used = np.empty(n_rows, dtype=np.int64)
    tail = np.empty(n_rows)
    for g in range(0, n_rows, _GROUP):
        rows = order[g:g + _GROUP]
        if int(lo[rows].min()) > policy.k_max:
            raise TruncationError(f"k_max={policy.k_max} lies left of the summation window")
        width = int(max(np.max(need[rows]), 4 * policy.consecutive_small, 16))
        vals, mags, done = [], [], 0
        while True:
            width = min(width, int(policy.k_max - lo[rows].min()) + 1)
            if width > done:
                k = lo[rows, None] + np.arange(done, width, dtype=np.int64)[None, :]
                v, m = term_fn(rows, k)
                vals.append(v)
                mags.append(m)
                done = width
            v_all = np.concatenate(vals, axis=1) if len(vals) > 1 else vals[0]
            m_all = np.concatenate(mags, axis=1) if len(mags) > 1 else mags[0]
            vals, mags = [v_all], [m_all]
            stop, found, partial_at, partial_last = _stopping_index(m_all, lo[rows], mode[rows], policy)
            if found.all():
                break
            if int(lo[rows].min()) + width - 1 >= policy.k_max:
                bad = int(np.argmin(found))
                raise TruncationError(
                    f"k_max={policy.k_max} reached before the stopping rule was met",
                    partial_sum=float(partial_last[bad]),
                    k_reached=int(lo[rows][bad] + width - 1),
                )
            width = int(width * 1.5) + 16
        for j, r in enumerate(rows):
            s = int(stop[j])
            values[r] = v_all[j, : s + 1]
            k_used[r] = lo[r] + s
            tail[r] = _tail_estimate(m_all[j], s, partial_at[j], policy)
    return Window(values=values, lo=lo, k_used=k_used, tail=tail)


def _stopping_index(mags, lo, mode, policy):
    """Column where each row's stopping rule first holds, whether it holds, and the partial sums there.

    A qualifying run of small terms starts at or after the mode, so only those
    columns are scanned; earlier columns enter through their sum.
    """
    cs = policy.consecutive_small
    j0 = int(np.clip((mode - lo).min(), 0, mags.shape[1]))
    if j0 == mags.shape[1]:
        none = np.zeros(mags.shape[0])
        return np.zeros(mags.shape[0], dtype=np.int64), none.astype(bool), none, mags.sum(axis=1)
    right = mags[:, j0:]
    partial = np.cumsum(right, axis=1)
    partial += mags[:, :j0].sum(axis=1)[:, None]
    small = right < np.maximum(policy.abs_tol, policy.rel_tol * partial)
    run = np.cumsum(small, axis=1, dtype=np.int64)
    if run.shape[1] > cs:
        run[:, cs:] = run[:, cs:] - run[:, :-cs].copy()
    j = np.arange(j0, mags.shape[1])[None, :]
    ok = (run == cs) & ((j - (cs - 1)) >= (mode - lo)[:, None]) & (lo[:, None] + j <= policy.k_max)
    stop = ok.argmax(axis=1)
    rows = np.arange(mags.shape[0])
    last = partial[:, -1] if partial.shape[1] else np.zeros(mags.shape[0])
    return j0 + stop, ok.any(axis=1), partial[rows, np.minimum(stop, partial.shape[1] - 1)], last


def _tail_estimate(mags, s, partial, policy):
    """Geometric extrapolation of the dropped terms, else cs * threshold."""
    last = mags[s]
    if last == 0:
        return 0.0
    prev = mags[s - 1] if s > 0 else 0.0
    ratio = last / prev if prev > 0 else 0.0
    if 0 < ratio < 1:
        return float(last * ratio / (1.0 - ratio))
    return float(policy.consecutive_small * max(policy.abs_tol, policy.rel_tol * partial))


def weight_sum(params: JainParams, alpha: float, policy: TruncationPolicy = DEFAULT_POLICY) -> WeightTail:
    """Truncated sum of w(k, alpha) over k = 0, 1, 2, ..."""
    _check_alpha(alpha)
    alpha_row = np.array([float(alpha)])

    def terms(rows, k):
        w = np.exp(log_weights(params, alpha_row[rows, None], k))
        return w, w

    win = summation_window(
        terms, np.zeros(1, np.int64), np.array([params.mode_estimate(alpha)]),
        policy, _initial_width(params, alpha_row),
    )
    total = float(win.sums()[0])
    return WeightTail(partial_sum=total, k_used=int(win.k_used[0]), tail_estimate=float(win.tail[0]))


def generating_identity_residual(
    params: JainParams, alpha: float, z: float, policy: TruncationPolicy = DEFAULT_POLICY
) -> float:
    """|a^(alpha z) - sum_k alpha (ln a)^k (alpha + beta k)^(k-1) u^k / k!| with u = z a^(-beta z).

    Only evaluated inside the window |beta z| < 1, |beta u| < 1/a where the
    Lagrange expansion is valid.
    """
    _check_alpha(alpha)
    beta, c = params.beta, params.log_a
    u = z * params.a ** (-beta * z)
    if not (abs(beta * z) < 1.0 and abs(beta * u) < 1.0 / params.a):
        raise ParameterDomainError(
            f"(beta={beta}, z={z}) outside the validity window |beta z| < 1, |beta u| < 1/a"
        )
    target = params.a ** (alpha * z)
    if u == 0.0:
        return abs(target - 1.0)
    # magnitudes follow a generalized Poisson law in an effective z' > 0
    cb = c * beta
    if cb > 0:
        z_eff = float(-lambertw(-cb * abs(u)).real / cb)
    else:
        z_eff = abs(u)
    mode = math.ceil(alpha * c * z_eff / (1.0 - cb * z_eff)) + 1
    width0 = _gpd_width(np.array([alpha * c * z_eff]), cb * z_eff)
    log_u = math.log(abs(u))
    negative = u < 0

    def terms(rows, k):
        with np.errstate(divide="ignore"):
            lt = math.log(alpha) + k * (math.log(c) + log_u) + (k - 1) * np.log(alpha + beta * k) - _log_factorial(k)
        mag = np.exp(np.where(k == 0, 0.0, lt))
        vals = np.where((k % 2 == 1) & negative, -mag, mag)
        return vals, mag

    win = summation_window(terms, np.zeros(1, np.int64), np.array([mode]), policy, width0)
    return abs(target - float(win.sums()[0]))


def s_series_sum(r: int, alpha: float, params: JainParams, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """S(r, alpha, beta, a) by direct truncated summation of its defining series.

    Each term is w(k, alpha) (alpha + k beta)^r / alpha.
    """
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    _check_alpha(alpha)
    alpha_row = np.array([float(alpha)])

    def terms(rows, k):
        lt = log_weights(params, alpha_row[rows, None], k) + r * np.log(alpha + params.beta * k) - math.log(alpha)
        t = np.exp(lt)
        return t, t

    win = summation_window(
        terms, np.zeros(1, np.int64), np.array([params.mode_estimate(alpha)]),
        policy, _initial_width(params, alpha_row) + 10 * r,
    )
    return float(win.sums()[0])


def _recursion_depth(r: int, alpha: float, params: JainParams, rel_tol: float, depth: int) -> int:
    """Outer terms needed so the geometric tail of every recursion level is below rel_tol."""
    theta, beta = params.theta, params.beta
    if theta == 0.0:
        return 0
    k = np.arange(depth + 2, dtype=float)
    growth = np.log1p(k * beta / alpha)
    log_t = k * math.log(theta) + r * growth
    log_rho = math.log(theta) + r * (growth[1:] - growth[:-1])
    with np.errstate(divide="ignore"):
        log_tail = log_t[1:] - np.log(-np.expm1(np.minimum(log_rho, -1e-300)))
    ok = (log_rho < 0) & (log_tail < math.log(rel_tol))
    if not ok.any():
        raise TruncationError(
            f"recursion depth {depth} too small for rel_tol={rel_tol} (beta ln a={theta})"
        )
    return int(np.argmax(ok))


def s_series_recursion(
    r: int, alpha: float, params: JainParams, depth: int = 10_000, rel_tol: float = DEFAULT_POLICY.rel_tol
) -> float:
    """S(r, alpha, beta, a) from the recursion

        S(r, alpha) = sum_k (beta ln a)^k (alpha + k beta) S(r-1, alpha + k beta),  S(0, alpha) = 1/alpha.

    Every argument that appears is alpha + m beta for an integer m, so the
    descent is memoized as one array per level over m.
    """
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    _check_alpha(alpha)
    if r == 0:
        return 1.0 / alpha
    K = _recursion_depth(r, alpha, params, rel_tol, depth)
    beta = params.beta
    ratio_powers = params.theta ** np.arange(K + 1, dtype=float)
    m = np.arange(r * K + 1, dtype=float)
    shifted = alpha + m * beta
    level = 1.0 / shifted
    for _ in range(r):
        g = shifted[: level.shape[0]] * level
        level = np.correlate(g, ratio_powers, mode="valid")
    return float(level[0])


def s_series_closed(r: int, alpha: float, params: JainParams) -> float:
    """The published closed forms of S(r, alpha, beta, a) for r = 1..4, evaluated as printed."""
    b, c = params.beta, params.log_a
    d = 1.0 - b * c
    if r == 1:
        return 1.0 / d
    if r == 2:
        return alpha / d**2 + b**2 * c / d**3
    if r == 3:
        return alpha**2 / d**3 + 3 * alpha * b**2 * c / d**4 + (b**3 + 2 * b**4) * c / d**5
    if r == 4:
        return (
            alpha**3 / d**4
            + 6 * alpha**2 * b**2 * c / d**5
            + (2 * alpha * b**3 * (2 + b) * c + 9 * alpha * b**4 * c**2) / d**6
            + (b**4 * c + 2 * b**5 * (4 + b) * c**2 + 4 * b**6 * c**3) / d**7
        )
    raise UnsupportedOrderError(f"no closed form for r={r}; supported orders are 1..4")
