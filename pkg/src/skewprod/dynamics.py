"""Orbits of the step skew product, Lyapunov exponents, periodic fiber points.

The skew product is F(xi, x) = (sigma xi, f_{xi_0}(x)).  Along a base word the
fiber coordinate is iterated either directly, in the boundary-safe
``(side, d)`` form, or in the exact lift for models conjugate to
translation/negation (Mobius, arctan).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import DegenerateRoot, ValidationError
from .fiber import FiberModel, eval_word, eval_word_log, from_near, to_near

HYPERBOLIC_TOL = 1e-9

ENGINES = ("auto", "direct", "near", "lifted")


@dataclass
class SkewSystem:
    model: FiberModel
    engine: str = "auto"

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValidationError(f"unknown engine {self.engine!r}")
        if self.engine == "lifted" and self.model.lift is None:
            raise ValidationError(f"model {self.model.kind!r} has no exact lift")

    @property
    def lifted(self) -> bool:
        return self.model.lift is not None and self.engine in ("auto", "lifted")

    def step(self, xi: Sequence[int], x: float):
        """One application of F to (xi, x); xi is a finite window."""
        return tuple(xi[1:]), float(self.model.map(xi[0])(x))


# ---------------------------------------------------------------------------
# boundary-safe and lifted word evaluation

def eval_word_near(model: FiberModel, word: Sequence[int], side: int, d: float):
    """Apply f_[w] to the point (side, d).

    Returns ``(side, d, log|f_[w]'|, sign)``.
    """
    logd = 0.0
    sign = 1
    for s in word:
        m = model.f0 if s == 0 else model.f1
        logd += m.log_deriv_near(side, d)
        sign *= m.orientation
        side, d = m.near(side, d)
    return side, d, logd, sign


def lift_translate(word: Sequence[int]):
    """(s, j) with f_[w] acting in the lift as t -> s t + j * shift."""
    s, j = 1, 0
    for sym in word:
        if sym == 0:
            j += 1
        else:
            s, j = -s, -j
    return s, j


def eval_word_lifted(model: FiberModel, word: Sequence[int], t: float):
    """Image of the lift coordinate t under f_[w] and log|f_[w]'| at the point."""
    lift = model.lift
    s, j = lift_translate(word)
    t1 = s * t + j * lift.shift
    if math.isinf(t):
        return t1, None
    # |f_w'(x)| = u'(t1)/u'(t) with u the unlift, since |u'| is even in t
    return t1, lift.log_dxdt(t1) - lift.log_dxdt(t)


def orbit_points(model: FiberModel, word: Sequence[int], x: float, near=None):
    """Fiber points x_0, ..., x_{|w|-1} of the orbit of x under the periodic word, as (side, d)."""
    side, d = near if near is not None else to_near(x)
    out = []
    for s in word:
        out.append((side, d))
        side, d = model.map(s).near(side, d)
    return out


# ---------------------------------------------------------------------------
# Lyapunov exponents

@dataclass
class ExponentSample:
    n: int
    x0: float
    prefix: str
    value: float

    def as_dict(self):
        return {"n": self.n, "x0": self.x0, "prefix": self.prefix, "value": self.value}


def _symbols(xi, n):
    if callable(xi):
        arr = np.asarray(xi(n), dtype=np.int64)
    else:
        arr = np.asarray(xi, dtype=np.int64)
        if len(arr) == 0:
            raise ValidationError("empty base word")
        if len(arr) < n:
            arr = np.resize(arr, n)  # periodic continuation
    if len(arr) < n:
        raise ValidationError("sampler returned fewer than n symbols")
    return arr[:n]


def _boundary_log_sum(model: FiberModel, xi: np.ndarray, side0: int):
    """Vectorised sum of log|f'| along an orbit in {0, 1}."""
    table = np.array([[math.log(abs(float(model.map(s).deriv(float(e))))) for e in (0, 1)]
                      for s in (0, 1)])
    flips = np.concatenate([[0], np.cumsum(xi[:-1] == 1)]) % 2
    sides = (side0 + flips) % 2
    return float(table[xi, sides].sum())


def lyapunov_finite(system: SkewSystem, xi, x0: float, n: int) -> ExponentSample:
    """(1/n) log|(f_xi^n)'(x0)|; xi is a word (continued periodically) or a callable n -> symbols."""
    if n < 1:
        raise ValidationError("n must be at least 1")
    sym = _symbols(xi, n)
    model = system.model
    prefix = "".join(map(str, sym[:32].tolist()))
    if x0 in (0.0, 1.0):
        total = _boundary_log_sum(model, sym, int(x0))
    elif system.lifted:
        _, total = eval_word_lifted(model, sym.tolist(), model.lift.lift_x(x0))
    elif system.engine == "direct":
        _, total, _ = eval_word_log(model, sym.tolist(), x0)
    else:
        side, d = to_near(x0)
        _, _, total, _ = eval_word_near(model, sym.tolist(), side, d)
    return ExponentSample(int(n), float(x0), prefix, float(total) / n)


def mme_ex_exponent(system_or_model) -> float:
    """Quarter sum of the log endpoint derivatives of f0 and f1."""
    model = getattr(system_or_model, "model", system_or_model)
    return 0.25 * sum(math.log(v) for v in model.endpoint_derivatives())


@dataclass
class MMESample:
    samples: int
    seed: int
    estimate: float
    formula: float
    start: str

    @property
    def error(self):
        return abs(self.estimate - self.formula)

    def as_dict(self):
        return {"samples": self.samples, "seed": self.seed, "estimate": self.estimate,
                "formula": self.formula, "error": self.error, "start": self.start}


def mme_monte_carlo(system: SkewSystem, samples: int = 100_000, seed: int = 0) -> MMESample:
    """Finite-time exponent along a Parry-distributed path of the exposed subshift."""
    from .symbolic import EX_NAMES, parry_measure, sample_path
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    path = sample_path(parry_measure(), samples, rng)
    xi = path % 2
    side0 = int(path[0] // 2)
    total = _boundary_log_sum(system.model, xi, side0)
    return MMESample(int(samples), int(seed), total / samples, mme_ex_exponent(system),
                     EX_NAMES[int(path[0])])


# ---------------------------------------------------------------------------
# periodic orbits

@dataclass
class PeriodicOrbit:
    word: tuple
    x: float
    chi: float
    klass: str
    location: str
    residual: float = 0.0
    near: Optional[tuple] = None       # (side, d) representation of x
    lift_t: Optional[float] = None     # lift coordinate when exact
    notes: list = field(default_factory=list)

    @property
    def period(self):
        return len(self.word)

    def as_dict(self):
        return {"word": "".join(map(str, self.word)), "x": self.x, "period": self.period,
                "chi": self.chi, "class": self.klass, "location": self.location,
                "residual": self.residual, "near": list(self.near) if self.near else None,
                "lift_t": self.lift_t}


def classify(chi: float, tol: float = HYPERBOLIC_TOL) -> str:
    if chi > tol:
        return "expanding"
    if chi < -tol:
        return "contracting"
    return "nonhyperbolic"


def make_orbit(system: SkewSystem, word, x: float, near=None, lift_t=None, residual=0.0):
    """Build a PeriodicOrbit at a known fixed point, computing its exponent."""
    model = system.model
    word = tuple(int(s) for s in word)
    side, d = near if near is not None else to_near(x)
    if d == 0.0:
        _, _, logd, _ = eval_word_near(model, word, side, d)
        location = "exposed"
    else:
        location = "core"
        if lift_t is None and system.lifted:
            lift_t = model.lift.lift(side, d)
        if lift_t is not None and system.lifted:
            _, logd = eval_word_lifted(model, word, lift_t)
        else:
            _, _, logd, _ = eval_word_near(model, word, side, d)
    chi = logd / len(word)
    return PeriodicOrbit(word, float(from_near(side, d)), float(chi), classify(chi), location,
                         float(residual), (int(side), float(d)), lift_t)


def _residual_near(model, word, side, d):
    s1, d1, _, _ = eval_word_near(model, word, side, d)
    return abs(from_near(s1, d1) - from_near(side, d)) if s1 != side else abs(d1 - d)


def fiber_fixed_points(system: SkewSystem, word, grid: float = 1e-4, interval=None):
    """All fixed points of f_[w] on [0, 1] (or on ``interval``).

    Sign-change scan on a uniform grid, refined by Brent's method; endpoint
    fixed points are detected exactly.  Raises DegenerateRoot when f_[w]
    agrees with the identity on a run of grid points.
    """
    word = tuple(int(s) for s in word)
    if not word:
        raise ValidationError("word must be non-empty")
    model = system.model
    a, b = (0.0, 1.0) if interval is None else (float(interval[0]), float(interval[1]))
    n = max(int(math.ceil((b - a) / grid)), 2)
    xs = np.linspace(a, b, n + 1)
    fx, _ = eval_word(model, word, xs)
    h = fx - xs
    orbits = []
    if interval is None:
        for e in (0, 1):
            s1, d1, _, _ = eval_word_near(model, word, e, 0.0)
            if s1 == e and d1 == 0.0:
                orbits.append(make_orbit(system, word, float(e), near=(e, 0.0)))
        inner = slice(1, n)
    else:
        inner = slice(0, n + 1)
    hi_ = h[inner]
    xi_ = xs[inner]
    small = np.abs(hi_) < 1e-12
    run = np.convolve(small.astype(int), np.ones(3, dtype=int), mode="valid")
    if np.any(run >= 3):
        k = int(np.argmax(run >= 3))
        raise DegenerateRoot(f"f_[w] is the identity near x={xi_[k]:.6g}",
                             interval=(float(xi_[k]), float(xi_[k + 2])))
    f = lambda x: float(eval_word(model, word, x)[0]) - x
    roots = []
    sg = np.sign(hi_)
    for k in np.nonzero(sg == 0)[0]:
        roots.append(float(xi_[k]))
    for k in np.nonzero(sg[:-1] * sg[1:] < 0)[0]:
        roots.append(optimize.brentq(f, xi_[k], xi_[k + 1], xtol=1e-16, rtol=4 * np.finfo(float).eps,
                                     maxiter=500))
    if interval is None:
        roots.extend(_boundary_layer_roots(model, word, xs[1]))
    for r in sorted(set(roots)):
        side, d = to_near(r)
        orbits.append(make_orbit(system, word, r, near=(side, d),
                                 residual=_residual_near(model, word, side, d)))
    orbits.sort(key=lambda o: o.x)
    return orbits


def _boundary_layer_roots(model, word, width):
    """Roots hiding between an endpoint fixed point and the first grid node."""
    out = []
    for e in (0, 1):
        s1, d1, logd, _ = eval_word_near(model, word, e, 0.0)
        if not (s1 == e and d1 == 0.0) or logd == 0.0:
            continue
        def g(u, e=e):
            s, dd, _, _ = eval_word_near(model, word, e, math.exp(u))
            return (dd if s == e else 1.0) / math.exp(u) - 1.0
        lo, hi = math.log(1e-300), math.log(width)
        glo, ghi = g(lo), g(hi)
        if glo * ghi < 0:
            u = optimize.brentq(g, lo, hi, xtol=1e-14)
            out.append(from_near(e, math.exp(u)))
    return out


def twin_pair(system: SkewSystem, word):
    """(orbit with chi >= 0, orbit with chi <= 0) over the same base word.

    Orientation-reversing words swap or fix nothing at the endpoints; their
    square is used so that both signs are present.
    """
    word = tuple(int(s) for s in word)
    if sum(word) % 2 == 1:
        word = word + word
    try:
        orbits = fiber_fixed_points(system, word)
    except DegenerateRoot:
        # f_[w] is the identity (e.g. w = 11): every point is fixed and the
        # endpoint orbits carry exponent 0, which serves both roles
        orbits = [make_orbit(system, word, float(e), near=(e, 0.0)) for e in (0, 1)]
    pos = [o for o in orbits if o.chi >= -HYPERBOLIC_TOL]
    neg = [o for o in orbits if o.chi <= HYPERBOLIC_TOL]
    if not pos or not neg:  # pragma: no cover - excluded by the intermediate value theorem
        raise DegenerateRoot("no twin pair found")
    return max(pos, key=lambda o: o.chi), min(neg, key=lambda o: o.chi)


def revalidate(system: SkewSystem, orbit: PeriodicOrbit, halfwidth: float = 1e-6):
    """Re-find an orbit's fixed point by an independent local scan."""
    if orbit.location == "exposed":
        e = int(round(orbit.x))
        s1, d1, _, _ = eval_word_near(system.model, orbit.word, e, 0.0)
        if (s1, d1) != (e, 0.0):
            raise DegenerateRoot("endpoint is not fixed by the word", interval=(orbit.x, orbit.x))
        return make_orbit(system, orbit.word, float(e), near=(e, 0.0))
    lo = max(orbit.x - halfwidth, 1e-300)
    hi = min(orbit.x + halfwidth, 1.0 - 1e-16)
    found = fiber_fixed_points(system, orbit.word, grid=(hi - lo) / 64, interval=(lo, hi))
    if not found:
        raise DegenerateRoot("orbit did not revalidate", interval=(lo, hi))
    return min(found, key=lambda o: abs(o.x - orbit.x))
