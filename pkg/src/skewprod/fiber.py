"""Fiber maps on [0, 1]: concrete families, word calculus, hypothesis checks.

Points close to the boundary are carried around as ``(side, d)`` pairs, where
``side == 0`` means ``x = d`` and ``side == 1`` means ``x = 1 - d``.  Every map
implements :meth:`FiberMap.near` so that iterating near 0 or 1 never has to
form ``1 - d`` in floating point.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import NoUnitDerivativeCrossing, ValidationError

__all__ = [
    "FiberMap", "Reflection", "MobiusMap", "ArctanMap", "PLDMap", "QuarticMap",
    "GluedMap", "FiberModel", "HypothesisReport", "pld_model", "mobius_model",
    "arctan_model", "quartic_model", "glued_model", "to_near", "from_near",
    "eval_word", "eval_word_log", "eval_word_inverse", "check_hypotheses",
    "distortion", "commutation_defect", "PLD_DEFAULT_KNOTS",
]


def to_near(x: float):
    """Split x into (side, distance-to-that-side)."""
    if x <= 0.5:
        return 0, float(x)
    return 1, float(1.0 - x)


def from_near(side: int, d: float) -> float:
    return d if side == 0 else 1.0 - d


def _normalize(side, d):
    if d > 0.5:
        return 1 - side, 1.0 - d
    return side, d


class FiberMap:
    """A C^1 diffeomorphism of [0, 1] preserving {0, 1}.

    Subclasses provide vectorised ``__call__`` and ``deriv``.  ``inverse``
    falls back to bisection, ``near`` to plain evaluation.
    """

    orientation = 1

    def __call__(self, x):
        raise NotImplementedError

    def deriv(self, x):
        raise NotImplementedError

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        lo = np.zeros_like(y)
        hi = np.ones_like(y)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            v = self(mid)
            below = v < y if self.orientation > 0 else v > y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        return out if out.ndim else float(out)

    def near(self, side: int, d: float):
        y = float(self(from_near(side, d)))
        return to_near(y)

    def near_inverse(self, side: int, d: float):
        y = float(self.inverse(from_near(side, d)))
        return to_near(y)

    def log_deriv_near(self, side: int, d: float) -> float:
        return math.log(abs(float(self.deriv(from_near(side, d)))))


class Reflection(FiberMap):
    """f1(x) = 1 - x."""

    orientation = -1

    def __call__(self, x):
        return 1.0 - np.asarray(x, dtype=float) if np.ndim(x) else 1.0 - float(x)

    def deriv(self, x):
        return -np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else -1.0

    def inverse(self, y):
        return self(y)

    def near(self, side, d):
        return 1 - side, d

    near_inverse = near

    def log_deriv_near(self, side, d):
        return 0.0


class MobiusMap(FiberMap):
    """f0(x) = beta x / (1 + (beta - 1) x); a translation by log(beta) in logit coordinates."""

    def __init__(self, beta: float):
        if not beta > 0:
            raise ValidationError("beta must be positive")
        self.beta = float(beta)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.beta * x / (1.0 + (self.beta - 1.0) * x)
        return out if out.ndim else float(out)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        out = self.beta / (1.0 + (self.beta - 1.0) * x) ** 2
        return out if out.ndim else float(out)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        out = y / (self.beta - (self.beta - 1.0) * y)
        return out if out.ndim else float(out)

    def near(self, side, d):
        b = self.beta
        if side == 0:
            return _normalize(0, b * d / (1.0 + (b - 1.0) * d))
        return _normalize(1, d / (b - (b - 1.0) * d))

    def near_inverse(self, side, d):
        b = self.beta
        if side == 0:
            return _normalize(0, d / (b - (b - 1.0) * d))
        return _normalize(1, b * d / (1.0 + (b - 1.0) * d))

    def log_deriv_near(self, side, d):
        b = self.beta
        den = 1.0 + (b - 1.0) * d if side == 0 else b - (b - 1.0) * d
        return math.log(b) - 2.0 * math.log(den)


def _arctan_phi_near(y: float):
    # phi(y) = atan(y)/pi + 1/2, returned as (side, d) without cancellation
    if y < 0:
        return 0, math.atan2(1.0, -y) / math.pi
    return 1, math.atan2(1.0, y) / math.pi


def _arctan_phi_inv_near(side: int, d: float) -> float:
    if d == 0.0:
        return -math.inf if side == 0 else math.inf
    y = 1.0 / math.tan(math.pi * d)
    return -y if side == 0 else y


class ArctanMap(FiberMap):
    """f0 = phi o (y -> y + 1) o phi^-1 with phi(y) = atan(y)/pi + 1/2."""

    def __init__(self, shift: float = 1.0):
        self.shift = float(shift)

    @staticmethod
    def phi(y):
        return np.arctan(y) / np.pi + 0.5

    @staticmethod
    def phi_inv(x):
        with np.errstate(divide="ignore"):
            return np.tan(np.pi * (np.asarray(x, dtype=float) - 0.5))

    def _apply(self, x, s):
        x = np.asarray(x, dtype=float)
        inner = np.clip(x, 1e-300, 1 - 1e-16)
        out = self.phi(self.phi_inv(inner) + s)
        out = np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, out))
        return out if out.ndim else float(out)

    def __call__(self, x):
        return self._apply(x, self.shift)

    def inverse(self, y):
        return self._apply(y, -self.shift)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        y = self.phi_inv(np.clip(x, 1e-300, 1 - 1e-16))
        out = (1.0 + y * y) / (1.0 + (y + self.shift) ** 2)
        out = np.where((x <= 0.0) | (x >= 1.0), 1.0, out)
        return out if out.ndim else float(out)

    def near(self, side, d):
        if d == 0.0:
            return side, 0.0
        return _arctan_phi_near(_arctan_phi_inv_near(side, d) + self.shift)

    def near_inverse(self, side, d):
        if d == 0.0:
            return side, 0.0
        return _arctan_phi_near(_arctan_phi_inv_near(side, d) - self.shift)

    def log_deriv_near(self, side, d):
        if d == 0.0:
            return 0.0
        y = _arctan_phi_inv_near(side, d)
        s = self.shift
        if abs(y) > 1e150:
            return 0.0
        return math.log1p(y * y) - math.log1p((y + s) ** 2)


PLD_DEFAULT_KNOTS = ((0.0, 1.05), (0.35, 1.0499), (0.45, 0.996), (0.9, None), (1.0, 2.0 / 3.0))


class PLDMap(FiberMap):
    """Increasing map whose derivative is piecewise linear and strictly decreasing.

    ``knots`` is a sequence of ``(x, d)`` pairs with exactly one ``d`` left as
    ``None``; that value is solved by bisection so the derivative integrates
    to one over [0, 1].
    """

    def __init__(self, knots=PLD_DEFAULT_KNOTS, min_slope: float = 1e-4):
        xs = np.array([k[0] for k in knots], dtype=float)
        if xs[0] != 0.0 or xs[-1] != 1.0 or np.any(np.diff(xs) <= 0):
            raise ValidationError("PLD knots must start at 0, end at 1 and increase")
        free = [i for i, k in enumerate(knots) if k[1] is None]
        if len(free) != 1 or free[0] in (0, len(knots) - 1):
            raise ValidationError("exactly one interior knot value must be left free")
        self.free_index = free[0]
        ds = np.array([0.0 if k[1] is None else k[1] for k in knots], dtype=float)

        def excess(v):
            ds[self.free_index] = v
            return float(np.sum(np.diff(xs) * (ds[:-1] + ds[1:]) / 2.0)) - 1.0

        lo, hi = ds[self.free_index + 1], ds[self.free_index - 1]
        if excess(lo) * excess(hi) > 0:
            raise ValidationError("no admissible value for the free knot keeps f0' decreasing")
        ds[self.free_index] = optimize.bisect(excess, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=200)
        slopes = np.diff(ds) / np.diff(xs)
        if np.any(slopes > -min_slope):
            raise ValidationError("derivative knots are not strictly decreasing (slope > -%g)" % min_slope)
        self.xs, self.ds, self.slopes = xs, ds.copy(), slopes
        seg = np.diff(xs) * (ds[:-1] + ds[1:]) / 2.0
        self._left = np.concatenate([[0.0], np.cumsum(seg)])
        self._right = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        # plain-float copies for the scalar fast paths
        self._xl, self._dl, self._sl = xs.tolist(), ds.tolist(), slopes.tolist()
        self._ll, self._rl = self._left.tolist(), self._right.tolist()
        self._half = float(self(0.5))

    @property
    def beta(self):
        return float(self.ds[0])

    @property
    def lam(self):
        return float(self.ds[-1])

    def _seg(self, x):
        return np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, len(self.xs) - 2)

    def _iseg(self, x):
        return min(max(bisect.bisect_right(self._xl, x) - 1, 0), len(self._xl) - 2)

    def __call__(self, x):
        # evaluate the upper half through the tail integral so that f0(1) == 1 exactly
        if isinstance(x, float):
            if x > 0.5:
                return 1.0 - self._tail(1.0 - x)
            i = self._iseg(x)
            u = x - self._xl[i]
            return self._ll[i] + self._dl[i] * u + 0.5 * self._sl[i] * u * u
        x = np.asarray(x, dtype=float)
        i = self._seg(x)
        u = x - self.xs[i]
        low = self._left[i] + self.ds[i] * u + 0.5 * self.slopes[i] * u * u
        out = np.where(x <= 0.5, low, 1.0 - self._tail(1.0 - x))
        return out if out.ndim else float(out)

    def deriv(self, x):
        if isinstance(x, float):
            i = self._iseg(x)
            return self._dl[i] + self._sl[i] * (x - self._xl[i])
        x = np.asarray(x, dtype=float)
        i = self._seg(x)
        out = self.ds[i] + self.slopes[i] * (x - self.xs[i])
        return out if out.ndim else float(out)

    def inverse(self, y):
        if isinstance(y, float) and hasattr(self, "_half"):
            if y > self._half:
                return 1.0 - self._tail_inverse(1.0 - y)
            i = min(max(bisect.bisect_right(self._ll, y) - 1, 0), len(self._xl) - 2)
            r = y - self._ll[i]
            d, sl = self._dl[i], self._sl[i]
            return self._xl[i] + 2.0 * r / (d + math.sqrt(max(d * d + 2.0 * sl * r, 0.0)))
        y = np.asarray(y, dtype=float)
        i = np.clip(np.searchsorted(self._left, y, side="right") - 1, 0, len(self.xs) - 2)
        r = y - self._left[i]
        d, s = self.ds[i], self.slopes[i]
        u = 2.0 * r / (d + np.sqrt(np.maximum(d * d + 2.0 * s * r, 0.0)))
        low = self.xs[i] + u
        high = 1.0 - self._tail_inverse(1.0 - y)
        out = np.where(y <= float(self(0.5)), low, high)
        return out if out.ndim else float(out)

    def _tail(self, u):
        """Integral of f0' over [1 - u, 1]."""
        if isinstance(u, float):
            k = self._iseg(1.0 - u)
            v = u - (1.0 - self._xl[k + 1])
            return self._rl[k + 1] + self._dl[k + 1] * v - 0.5 * self._sl[k] * v * v
        u = np.asarray(u, dtype=float)
        k = self._seg(1.0 - u)
        v = u - (1.0 - self.xs[k + 1])
        out = self._right[k + 1] + self.ds[k + 1] * v - 0.5 * self.slopes[k] * v * v
        return out if out.ndim else float(out)

    def _tail_inverse(self, w):
        if isinstance(w, float):
            k = min(sum(1 for v in self._rl[1:] if v > w), len(self._xl) - 2)
            r = w - self._rl[k + 1]
            d, sl = self._dl[k + 1], -self._sl[k]
            return (1.0 - self._xl[k + 1]) + 2.0 * r / (d + math.sqrt(max(d * d + 2.0 * sl * r, 0.0)))
        w = np.asarray(w, dtype=float)
        k = np.minimum(np.sum(self._right[1:] > w[..., None], axis=-1), len(self.xs) - 2)
        r = w - self._right[k + 1]
        d, s = self.ds[k + 1], -self.slopes[k]
        v = 2.0 * r / (d + np.sqrt(np.maximum(d * d + 2.0 * s * r, 0.0)))
        out = (1.0 - self.xs[k + 1]) + v
        return out if out.ndim else float(out)

    def near(self, side, d):
        if side == 0:
            return _normalize(0, float(self(d)))
        return _normalize(1, self._tail(d))

    def near_inverse(self, side, d):
        if side == 0:
            return _normalize(0, float(self.inverse(d)))
        return _normalize(1, self._tail_inverse(d))


class QuarticMap(FiberMap):
    """f(x) = x + a x^2 (1 - x)^2: parabolic at both ends."""

    A_MAX = 3.0 * math.sqrt(3.0)

    def __init__(self, a: float = 2.0):
        if not 0.0 < a < self.A_MAX:
            raise ValidationError("quartic coefficient must lie in (0, 3*sqrt(3)) for a diffeomorphism")
        self.a = float(a)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = x + self.a * x * x * (1.0 - x) ** 2
        return out if out.ndim else float(out)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        out = 1.0 + 2.0 * self.a * x * (1.0 - x) * (1.0 - 2.0 * x)
        return out if out.ndim else float(out)

    def near(self, side, d):
        g = self.a * d * d * (1.0 - d) ** 2
        return _normalize(side, d + g if side == 0 else d - g)


class GluedMap(FiberMap):
    """A base map with its ends replaced by cubic Hermite pieces of unit end slope.

    On [w, 1 - w] the map agrees with ``base``.  Both end pieces are written in
    the distance-to-boundary coordinate so evaluation near 0 and 1 is exact.
    """

    def __init__(self, base: FiberMap, width: float = 0.05):
        if not 0.0 < width < 0.25:
            raise ValidationError("gluing width must lie in (0, 0.25)")
        self.base, self.w = base, float(width)
        w = self.w
        self._left = (0.0, 1.0, float(base(w)), float(base.deriv(w)))
        _, vr = base.near(1, w)
        self._right = (0.0, 1.0, vr, float(base.deriv(1.0 - w)))
        grid = np.linspace(0.0, 1.0, 20001)
        dv = self.deriv(grid)
        if np.any(dv <= 0):
            raise ValidationError("glued map is not monotone; shrink the gluing width")
        inner = grid[1:-1]
        if np.any(self(inner) <= inner):
            raise ValidationError("glued map has an interior fixed point")

    def _herm(self, coeffs, d, derivative=False):
        p0, m0, p1, m1 = coeffs
        w = self.w
        t = np.asarray(d, dtype=float) / w
        if derivative:
            return ((6 * t * t - 6 * t) * p0 + (3 * t * t - 4 * t + 1) * w * m0
                    + (-6 * t * t + 6 * t) * p1 + (3 * t * t - 2 * t) * w * m1) / w
        return ((2 * t ** 3 - 3 * t * t + 1) * p0 + (t ** 3 - 2 * t * t + t) * w * m0
                + (-2 * t ** 3 + 3 * t * t) * p1 + (t ** 3 - t * t) * w * m1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        mid = self.base(np.clip(x, self.w, 1 - self.w))
        out = np.where(x < self.w, self._herm(self._left, x),
                       np.where(x > 1 - self.w, 1.0 - self._herm(self._right, 1.0 - x), mid))
        return out if out.ndim else float(out)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        mid = self.base.deriv(np.clip(x, self.w, 1 - self.w))
        out = np.where(x < self.w, self._herm(self._left, x, True),
                       np.where(x > 1 - self.w, self._herm(self._right, 1.0 - x, True), mid))
        return out if out.ndim else float(out)

    def near(self, side, d):
        if d < self.w:
            coeffs = self._left if side == 0 else self._right
            return _normalize(side, float(self._herm(coeffs, d)))
        return super().near(side, d)


class Lift:
    """Conjugacy of (f0, f1) to (translation by ``shift``, negation) on the real line."""

    def __init__(self, kind: str, shift: float):
        self.kind, self.shift = kind, float(shift)

    def lift(self, side: int, d: float) -> float:
        if d == 0.0:
            return -math.inf if side == 0 else math.inf
        if self.kind == "logit":
            t = math.log(d) - math.log1p(-d)
        else:
            t = -1.0 / math.tan(math.pi * d)
        return t if side == 0 else -t

    def unlift(self, t: float):
        if self.kind == "logit":
            if t < 0:
                return 0, 1.0 / (1.0 + math.exp(-t)) if t > -700 else math.exp(t)
            return 1, 1.0 / (1.0 + math.exp(t)) if t < 700 else math.exp(-t)
        return _arctan_phi_near(t)

    def lift_x(self, x: float) -> float:
        return self.lift(*to_near(x))

    def unlift_x(self, t: float) -> float:
        return from_near(*self.unlift(t))

    def log_dxdt(self, t: float) -> float:
        """log of the derivative of unlift at t."""
        if self.kind == "logit":
            a = abs(t)
            return -a - 2.0 * math.log1p(math.exp(-a))
        return -math.log(math.pi) - math.log1p(t * t)


@dataclass
class FiberModel:
    """The pair (f0, f1) plus bookkeeping."""

    kind: str
    f0: FiberMap
    f1: FiberMap
    params: dict = field(default_factory=dict)
    lift: Optional[Lift] = None

    def map(self, symbol: int) -> FiberMap:
        return self.f0 if symbol == 0 else self.f1

    @property
    def maps(self):
        return (self.f0, self.f1)

    def endpoint_derivatives(self):
        """(f0'(0), f0'(1), |f1'(0)|, |f1'(1)|)."""
        return (float(self.f0.deriv(0.0)), float(self.f0.deriv(1.0)),
                abs(float(self.f1.deriv(0.0))), abs(float(self.f1.deriv(1.0))))

    def describe(self):
        return {"kind": self.kind, **self.params}


def pld_model(knots=PLD_DEFAULT_KNOTS) -> FiberModel:
    f0 = PLDMap(knots)
    params = {"knots": [[float(x), float(d)] for x, d in zip(f0.xs, f0.ds)]}
    return FiberModel("pld", f0, Reflection(), params)


def mobius_model(beta: float = 2.0) -> FiberModel:
    if not beta > 1:
        raise ValidationError("Mobius beta must exceed 1")
    return FiberModel("mobius", MobiusMap(beta), Reflection(), {"beta": float(beta)},
                      Lift("logit", math.log(beta)))


def arctan_model() -> FiberModel:
    return FiberModel("arctan", ArctanMap(1.0), Reflection(), {}, Lift("arctan", 1.0))


def quartic_model(a: float = 2.0) -> FiberModel:
    return FiberModel("quartic", QuarticMap(a), Reflection(), {"a": float(a)})


def glued_model(width: float = 0.05, base: Optional[PLDMap] = None) -> FiberModel:
    base = base if base is not None else PLDMap()
    return FiberModel("parabolic", GluedMap(base, width), Reflection(), {"width": float(width)})


# ---------------------------------------------------------------------------
# word calculus

def eval_word(model: FiberModel, word: Sequence[int], x):
    """Return (f_[w](x), (f_[w])'(x)); the first symbol acts first."""
    x = np.asarray(x, dtype=float)
    der = np.ones_like(x)
    for s in word:
        m = model.f0 if s == 0 else model.f1
        der = der * m.deriv(x)
        x = np.asarray(m(x), dtype=float)
    if x.ndim == 0:
        return float(x), float(der)
    return x, der


def eval_word_log(model: FiberModel, word: Sequence[int], x):
    """Like :func:`eval_word` but returns (value, log|derivative|, sign)."""
    x = np.asarray(x, dtype=float)
    logd = np.zeros_like(x)
    sign = 1
    for s in word:
        m = model.f0 if s == 0 else model.f1
        logd = logd + np.log(np.abs(m.deriv(x)))
        sign *= m.orientation
        x = np.asarray(m(x), dtype=float)
    if x.ndim == 0:
        return float(x), float(logd), sign
    return x, logd, sign


def eval_word_inverse(model: FiberModel, word: Sequence[int], y):
    for s in reversed(list(word)):
        y = model.map(s).inverse(y)
    return y


def commutation_defect(model: FiberModel, n: int = 1001) -> float:
    """max |f0(f1(x)) - f1(f0^-1(x))| over a uniform grid."""
    x = np.linspace(0.0, 1.0, n)
    lhs = model.f0(model.f1(x))
    rhs = model.f1(model.f0.inverse(x))
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# hypotheses

@dataclass
class HypothesisReport:
    beta: float
    lam: float
    kappa: Optional[float]
    c: Optional[float]
    upsilon: Optional[float]
    f0sq_c: Optional[float]
    h1: bool
    h2: bool
    h2_prime: bool
    h3: Optional[bool]
    h4: Optional[bool]
    commutation: bool
    parabolic: bool
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def unit_derivative_point(f0: FiberMap) -> float:
    g = lambda x: float(f0.deriv(x)) - 1.0
    grid = np.linspace(0.0, 1.0, 10001)
    vals = f0.deriv(grid) - 1.0
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if len(idx) == 0:
        zeros = np.nonzero(vals[1:-1] == 0)[0]
        if len(zeros):
            return float(grid[zeros[0] + 1])
        raise NoUnitDerivativeCrossing("f0' - 1 does not change sign on [0, 1]")
    i = idx[0]
    return optimize.brentq(g, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)


def check_hypotheses(model: FiberModel, grid_size: int = 10001) -> HypothesisReport:
    f0, f1 = model.f0, model.f1
    beta, lam = float(f0.deriv(0.0)), float(f0.deriv(1.0))
    grid = np.linspace(0.0, 1.0, grid_size)
    inner = grid[1:-1]
    notes = []
    parabolic = abs(beta - 1.0) < 1e-12 or abs(lam - 1.0) < 1e-12

    fixed_ends = abs(float(f0(0.0))) <= 1e-12 and abs(float(f0(1.0)) - 1.0) <= 1e-12
    diff = f0(inner) - inner
    two_fixed = bool(np.all(diff > 0) or np.all(diff < 0))
    h1 = bool(fixed_ends and two_fixed and beta > 1.0 and 0.0 < lam < 1.0)

    d1 = f1.deriv(grid)
    h2 = bool(np.all(d1 < 0) and float(f1(0.0)) == 1.0 and float(f1(1.0)) == 0.0)
    h2_prime = bool(np.max(np.abs(f1(grid) - (1.0 - grid))) <= 1e-15)

    kappa = c = upsilon = f0sq_c = None
    h3 = h4 = None
    if parabolic:
        notes.append("parabolic endpoint: (H3)/(H4) not applicable")
    else:
        kappa = lam * lam * (1.0 - lam) / (beta * (beta - 1.0))
        h4 = bool(kappa > 1.0)
        c = unit_derivative_point(f0)
        fc = float(f0(c))
        f0sq_c = float(f0(fc))
        upsilon = 1.0 / float(f0.deriv(fc))
        decreasing = bool(np.all(np.diff(f0.deriv(grid)) < 0))
        h3 = bool(decreasing and float(f1(f0sq_c)) > f0sq_c)
    comm = commutation_defect(model) <= 1e-10
    return HypothesisReport(beta, lam, kappa, c, upsilon, f0sq_c, h1, h2, h2_prime,
                            h3, h4, comm, parabolic, notes)


# ---------------------------------------------------------------------------
# distortion

def _sup_on(fun, a, b, n):
    z = np.linspace(a, b, n + 1)
    v = fun(z)
    k = int(np.argmax(v))
    best = float(v[k])
    lo, hi = z[max(k - 1, 0)], z[min(k + 1, n)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda t: -float(fun(np.array(t))), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    return best


def distortion(model: FiberModel, delta: float, n: int = 10000) -> float:
    """Largest log-ratio of |f_i'| to its endpoint value on delta-neighbourhoods of 0 and 1."""
    if not 0.0 < delta < 0.5:
        raise ValidationError("delta must lie in (0, 1/2)")
    best = 0.0
    for m in model.maps:
        r0, r1 = abs(float(m.deriv(0.0))), abs(float(m.deriv(1.0)))
        left = lambda z, m=m, r=r0: np.abs(np.log(np.abs(m.deriv(z)) / r))
        right = lambda z, m=m, r=r1: np.abs(np.log(np.abs(m.deriv(z)) / r))
        best = max(best, _sup_on(left, 0.0, delta, n), _sup_on(right, 1.0 - delta, 1.0, n))
    # bias upward by a few ulps: the sup may never be underestimated
    return best * (1.0 + 1e-13) + 1e-15 if best > 0 else 0.0
