"""A small algebra of test functions with exact derivatives.

Members: polynomials, exponentials e^(r x), shifted absolute values |x - c|,
sines sin(w x + phase), and weighted sums of these.  The algebra is closed
under differentiation except for AbsShift, which exists to provide a
continuous but not C^1 witness.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.ndimage import maximum_filter1d, minimum_filter1d
from scipy.optimize import minimize_scalar

from .errors import NondifferentiableError

__all__ = [
    "Polynomial",
    "Exponential",
    "AbsShift",
    "Sine",
    "Sum",
    "FunctionSpec",
    "ModulusEstimate",
    "evaluate",
    "derivative",
    "is_smooth",
    "lipschitz_constant",
    "modulus_of_continuity",
    "parse_function",
    "format_function",
]


@dataclass(frozen=True)
class Polynomial:
    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    def _eval(self, x, order):
        c = np.asarray(self.coefficients)
        if order:
            c = npoly.polyder(c, order) if c.size > order else np.zeros(1)
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, c[-1])
        for coef in c[-2::-1]:
            out *= x
            out += coef
        return out


@dataclass(frozen=True)
class Exponential:
    rate: float

    def _eval(self, x, order):
        return self.rate**order * np.exp(self.rate * np.asarray(x, dtype=float))


@dataclass(frozen=True)
class AbsShift:
    center: float

    def _eval(self, x, order):
        x = np.asarray(x, dtype=float)
        if order == 0:
            return np.abs(x - self.center)
        if np.any(x == self.center):
            raise NondifferentiableError(f"|x - {self.center}| has no derivative at its center")
        return np.sign(x - self.center) if order == 1 else np.zeros_like(x)


@dataclass(frozen=True)
class Sine:
    frequency: float
    phase: float = 0.0

    def _eval(self, x, order):
        w = self.frequency
        return w**order * np.sin(w * np.asarray(x, dtype=float) + self.phase + order * math.pi / 2)


@dataclass(frozen=True)
class Sum:
    terms: tuple[tuple[float, "FunctionSpec"], ...]

    def __post_init__(self):
        terms = tuple((float(w), f) for w, f in self.terms)
        if not terms:
            raise ValueError("empty sum")
        object.__setattr__(self, "terms", terms)

    def _eval(self, x, order):
        return sum(w * f._eval(x, order) for w, f in self.terms)


FunctionSpec = Union[Polynomial, Exponential, AbsShift, Sine, Sum]


def evaluate(f: FunctionSpec, x, order: int = 0):
    """Exact value of the order-th derivative of f at x (scalar or array)."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    out = f._eval(x, order)
    return float(out) if np.ndim(out) == 0 else out


def derivative(f: FunctionSpec) -> FunctionSpec:
    """f' as a member of the algebra."""
    if isinstance(f, Polynomial):
        c = np.asarray(f.coefficients)
        return Polynomial(tuple(npoly.polyder(c)) if c.size > 1 else (0.0,))
    if isinstance(f, Exponential):
        return Sum(((f.rate, f),))
    if isinstance(f, Sine):
        return Sum(((f.frequency, Sine(f.frequency, f.phase + math.pi / 2)),))
    if isinstance(f, Sum):
        return Sum(tuple((w, derivative(g)) for w, g in f.terms))
    raise NondifferentiableError(f"{format_function(f)} is not differentiable everywhere")


def is_smooth(f: FunctionSpec) -> bool:
    """True when f is C^infinity (no AbsShift component)."""
    if isinstance(f, AbsShift):
        return False
    if isinstance(f, Sum):
        return all(is_smooth(g) for _, g in f.terms)
    return True


def _kinks(f: FunctionSpec) -> set[float]:
    if isinstance(f, AbsShift):
        return {f.center}
    if isinstance(f, Sum):
        return set().union(*(_kinks(g) for _, g in f.terms))
    return set()


def lipschitz_constant(f: FunctionSpec) -> float:
    """Global Lipschitz constant of f on [0, inf); ``inf`` when there is none."""
    if isinstance(f, Polynomial):
        c = f.coefficients
        if all(v == 0 for v in c[2:]):
            return abs(c[1]) if len(c) > 1 else 0.0
        return math.inf
    if isinstance(f, Exponential):
        return abs(f.rate) if f.rate <= 0 else math.inf
    if isinstance(f, AbsShift):
        return 1.0
    if isinstance(f, Sine):
        return abs(f.frequency)
    return sum(abs(w) * lipschitz_constant(g) for w, g in f.terms if w != 0)


@dataclass(frozen=True)
class ModulusEstimate:
    delta: float
    value: float
    grid_points: int
    refined: bool


def _golden_max(g, lo, hi):
    if hi <= lo:
        return lo, g(lo)
    res = minimize_scalar(lambda t: -g(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return res.x, -res.fun


def modulus_of_continuity(f: FunctionSpec, lam: float, delta: float, points: int = 4096) -> ModulusEstimate:
    """sup{|f(x'') - f(x')| : x', x'' in [0, lam], |x'' - x'| <= delta}.

    Grid search with step lam/points over all grid pairs within distance
    delta, plus pairs at distance exactly delta and pairs anchored at kinks,
    followed by bounded golden-section refinement around the best pairs.
    """
    if not lam > 0:
        raise ValueError(f"interval length must be positive, got {lam}")
    if not 0 < delta <= lam:
        raise ValueError(f"delta must lie in (0, {lam}], got {delta}")
    h = lam / points
    x = np.linspace(0.0, lam, points + 1)
    fx = np.asarray(evaluate(f, x), dtype=float)

    span = int(math.floor(delta / h + 1e-9))
    if span >= 1:
        # forward windows [i, i + span]
        size, origin = span + 1, -((span + 1) // 2)
        hi_win = maximum_filter1d(fx, size=size, mode="nearest", origin=origin)
        lo_win = minimum_filter1d(fx, size=size, mode="nearest", origin=origin)
        window = np.maximum(hi_win - fx, fx - lo_win)
        i = int(np.argmax(window))
        grid_value = raw_value = float(window[i])
        j = i + int(np.argmax(np.abs(fx[i : i + span + 1] - fx[i])))
        # extrema between grid points (e.g. a kink): refine the partner, then the anchor
        s, _ = _golden_max(lambda u: abs(float(evaluate(f, u)) - fx[i]),
                           max(x[j] - h, x[i]), min(x[j] + h, x[i] + delta, lam))
        fs = float(evaluate(f, s))
        _, within = _golden_max(lambda t: abs(fs - float(evaluate(f, t))), max(x[i] - h, s - delta, 0.0),
                                min(x[i] + h, s))
        grid_value = max(grid_value, within)
    else:
        grid_value = raw_value = 0.0
    # kinks are known exactly; pair each with the grid and its exact-distance partners
    for k in sorted(_kinks(f)):
        if 0.0 <= k <= lam:
            fk = float(evaluate(f, k))
            ts = np.concatenate([x[np.abs(x - k) <= delta], [t for t in (k - delta, k + delta) if 0.0 <= t <= lam]])
            grid_value = max(grid_value, float(np.abs(np.asarray(evaluate(f, ts), dtype=float) - fk).max()))

    def pair(t):
        return abs(float(evaluate(f, min(t + delta, lam))) - float(evaluate(f, t)))

    far = np.minimum(x + delta, lam)
    exact = np.abs(np.asarray(evaluate(f, far), dtype=float) - fx)
    i = int(np.argmax(exact))
    _, refined_value = _golden_max(pair, x[max(i - 1, 0)], x[min(i + 1, points)])
    coarse = max(raw_value, float(exact[i]))
    value = max(coarse, grid_value, refined_value)
    return ModulusEstimate(
        delta=float(delta), value=float(value), grid_points=points + 1, refined=bool(value - coarse > 1e-12)
    )


_KINDS = ("poly", "exp", "abs", "sin")
_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_TERM_SPLIT = re.compile(r"(?<![eE])\+(?=" + _NUM + r"\*(?:" + "|".join(_KINDS) + r"):)")


def parse_function(text: str) -> FunctionSpec:
    """Parse 'poly:c0,c1,...', 'exp:r', 'abs:c', 'sin:w[,phase]' or 'sum:w1*spec1+w2*spec2'."""
    kind, sep, body = text.strip().partition(":")
    if not sep:
        raise ValueError(f"function spec {text!r} lacks a 'kind:' prefix")
    try:
        if kind == "sum":
            terms = []
            for part in _TERM_SPLIT.split(body):
                w, star, spec = part.partition("*")
                if not star:
                    raise ValueError(f"sum term {part!r} is not of the form weight*spec")
                terms.append((float(w), parse_function(spec)))
            return Sum(tuple(terms))
        values = [float(v) for v in body.split(",")]
    except ValueError as exc:
        raise ValueError(f"cannot parse function spec {text!r}: {exc}") from None
    if kind == "poly":
        return Polynomial(tuple(values))
    if kind in ("exp", "abs") and len(values) == 1:
        return Exponential(values[0]) if kind == "exp" else AbsShift(values[0])
    if kind == "sin" and len(values) in (1, 2):
        return Sine(*values)
    raise ValueError(f"cannot parse function spec {text!r}")


def format_function(f: FunctionSpec) -> str:
    """Inverse of ``parse_function``."""
    r = repr
    if isinstance(f, Polynomial):
        return "poly:" + ",".join(r(c) for c in f.coefficients)
    if isinstance(f, Exponential):
        return f"exp:{r(f.rate)}"
    if isinstance(f, AbsShift):
        return f"abs:{r(f.center)}"
    if isinstance(f, Sine):
        return f"sin:{r(f.frequency)}" + (f",{r(f.phase)}" if f.phase else "")
    parts = []
    for w, g in f.terms:
        if isinstance(g, Sum):
            raise ValueError("nested sums have no text form")
        parts.append(f"{r(w)}*{format_function(g)}")
    return "sum:" + "+".join(parts)
