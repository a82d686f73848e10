"""Orbit measures, a weak* metric, and periodic approximation of boundary measures.

Measures are finite atom lists ((xi-window, x), weight).  The metric pairs
them against the functions g_{w,m}(xi, x) = [xi starts with w] * x^m.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .dynamics import (PeriodicOrbit, SkewSystem, _boundary_log_sum, eval_word_near,
                       lift_translate, lyapunov_finite, make_orbit, orbit_points)
from .errors import OrientationError, PrecisionLoss, ValidationError
from .fiber import distortion, from_near
from .symbolic import ExPeriodicPoint, encode_ex_orbit, mirror, parse_word, project_pi

WINDOW = 3


# ---------------------------------------------------------------------------
# test family and empirical measures

@dataclass(frozen=True)
class TestFamily:
    max_word: int = 3
    max_power: int = 3

    __test__ = False  # not a pytest class

    def members(self):
        words = [()] + [w for k in range(1, self.max_word + 1)
                        for w in itertools.product((0, 1), repeat=k)]
        out = [(w, m) for w in words for m in range(self.max_power + 1)]
        raw = np.array([2.0 ** -(len(w) + m) for w, m in out])
        return out, raw / raw.sum()


DEFAULT_FAMILY = TestFamily()


@dataclass
class EmpiricalMeasure:
    windows: np.ndarray   # (k, WINDOW) ints
    xs: np.ndarray        # (k,) fiber points
    weights: np.ndarray   # (k,) summing to one

    def __post_init__(self):
        self.windows = np.asarray(self.windows, dtype=np.int64).reshape(-1, WINDOW)
        self.xs = np.asarray(self.xs, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must sum to 1")
        if np.any(self.xs < 0) or np.any(self.xs > 1):
            raise ValidationError("atoms must lie in [0, 1]")

    @classmethod
    def uniform(cls, windows, xs):
        xs = np.asarray(xs, dtype=float)
        return cls(windows, xs, np.full(len(xs), 1.0 / len(xs)))

    def integrate(self, word, m: int) -> float:
        word = tuple(word)
        mask = np.ones(len(self.xs), dtype=bool)
        for i, s in enumerate(word):
            mask &= self.windows[:, i] == s
        vals = self.xs ** m if m else np.ones_like(self.xs)
        return float(np.sum(self.weights * mask * vals))

    def vector(self, family: TestFamily = DEFAULT_FAMILY):
        members, _ = family.members()
        return np.array([self.integrate(w, m) for w, m in members])

    def mass_between(self, a: float, b: float) -> float:
        return float(np.sum(self.weights[(self.xs >= a) & (self.xs <= b)]))

    def shifted(self, k: int = 1) -> "EmpiricalMeasure":
        """Cyclic relabelling of a periodic-orbit measure (push-forward by F)."""
        return EmpiricalMeasure(np.roll(self.windows, -k, axis=0), np.roll(self.xs, -k),
                                np.roll(self.weights, -k))

    def mix(self, other: "EmpiricalMeasure", t: float) -> "EmpiricalMeasure":
        return EmpiricalMeasure(np.vstack([self.windows, other.windows]),
                                np.concatenate([self.xs, other.xs]),
                                np.concatenate([(1 - t) * self.weights, t * other.weights]))


def weakstar_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                      family: TestFamily = DEFAULT_FAMILY) -> float:
    """Weighted l1 distance between the test-function integrals."""
    _, weights = family.members()
    return float(np.sum(weights * np.abs(mu.vector(family) - nu.vector(family))))


def _windows(word):
    L = len(word)
    return np.array([[word[(k + i) % L] for i in range(WINDOW)] for k in range(L)])


def periodic_measure(orbit, system: Optional[SkewSystem] = None) -> EmpiricalMeasure:
    """Uniform measure on the orbit of a PeriodicOrbit or an ExPeriodicPoint."""
    if isinstance(orbit, ExPeriodicPoint):
        xs = [float(side) for side in orbit.sides]
        return EmpiricalMeasure.uniform(_windows(orbit.xi), xs)
    word = orbit.word
    if system is not None and system.lifted and orbit.lift_t is not None:
        xs = lifted_orbit_points(system, word, orbit.lift_t)
    else:
        if system is None:
            raise ValidationError("a system is needed to follow the fiber orbit")
        xs = [from_near(s, d) for s, d in orbit_points(system.model, word, orbit.x, orbit.near)]
    return EmpiricalMeasure.uniform(_windows(word), xs)


def lifted_orbit_points(system: SkewSystem, word, t: float):
    lift = system.model.lift
    out = []
    for s in word:
        out.append(lift.unlift_x(t))
        t = t + lift.shift if s == 0 else -t
    return out


def dirac(window, x) -> EmpiricalMeasure:
    return EmpiricalMeasure(np.array([window]), np.array([x]), np.array([1.0]))


# ---------------------------------------------------------------------------
# periodic approximation of a zero-exponent boundary measure

@dataclass
class BoundaryApproxTrace:
    target_word: str
    n: int
    delta: float
    p_n: int
    q_n: int
    r_n: int
    s_n: int
    phi: float
    phi_check: float
    psi: float
    distortion: float
    delta_n: float
    N: int
    M: int
    N_lifted: Optional[int]
    eta: str
    y: float
    y_lift: Optional[float]
    chi: float
    klass: str
    min_boundary_distance: float
    max_regime_distance: float
    distance: float
    orientation_reversing: bool
    m_incremented: bool
    orbit: PeriodicOrbit = field(repr=False, default=None)
    measure: EmpiricalMeasure = field(repr=False, default=None)

    def as_dict(self):
        skip = {"orbit", "measure"}
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k not in skip}
        d["period"] = len(self.eta)
        d["ratio_NM_n"] = (self.N + self.M) / self.n
        return d

    def csv_row(self):
        return [self.n, self.distance, self.chi, self.N, self.M, self.delta_n]


CSV_COLUMNS = ["n", "distance", "chi", "N", "M", "delta_n"]


def traces_csv(traces) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for t in traces:
        w.writerow([repr(v) if isinstance(v, float) else v for v in t.csv_row()])
    return buf.getvalue()


def prefix_counters(xi: Sequence[int]):
    """(p, q, r, s, side-parity sequence): symbol 0/1 split by the parity of earlier 1s."""
    p = q = r = s = 0
    ones = 0
    for sym in xi:
        if sym == 0:
            if ones % 2 == 0:
                p += 1
            else:
                q += 1
        else:
            if ones % 2 == 0:
                r += 1
            else:
                s += 1
            ones += 1
    return p, q, r, s


def phi_sequence(model, xi: Sequence[int]) -> np.ndarray:
    """phi(i), i = 1..n: log|(f_xi^i)'(1)| accumulated from the counters."""
    b0, b1, a0, a1 = model.endpoint_derivatives()   # f0'(0), f0'(1), |f1'(0)|, |f1'(1)|
    logs = {(0, 0): math.log(b1), (0, 1): math.log(b0), (1, 0): math.log(a1), (1, 1): math.log(a0)}
    out = []
    tot = 0.0
    ones = 0
    for sym in xi:
        tot += logs[(sym, ones % 2)]
        ones += sym
        out.append(tot)
    return np.array(out)


def _target_point(target) -> ExPeriodicPoint:
    if isinstance(target, ExPeriodicPoint):
        return target
    return encode_ex_orbit(parse_word(target), 1)


def boundary_approx(system: SkewSystem, target="0101", delta: float = 0.1, n: int = 18,
                    family: TestFamily = DEFAULT_FAMILY) -> BoundaryApproxTrace:
    """Periodic core orbit shadowing a zero-exponent boundary orbit for n steps.

    The generic point is the target's base word continued periodically, at
    fiber point 1.  n is advanced until the prefix has an odd number of 1s.
    """
    if not 0.0 < delta < 0.5:
        raise ValidationError("delta must lie in (0, 1/2)")
    if n < 1:
        raise ValidationError("n must be at least 1")
    model = system.model
    tgt = _target_point(target)
    if tgt.x0 != 1:
        tgt = ExPeriodicPoint(mirror(tgt.word), tgt.xi, 1)
    chi_t = lyapunov_finite(system, tgt.xi, 1.0, len(tgt.xi)).value
    if abs(chi_t) > 1e-9:
        raise ValidationError(f"target exponent {chi_t:.3g} is not zero")
    L = len(tgt.xi)
    while sum(tgt.xi[i % L] for i in range(n)) % 2 == 0:
        n += 1
    xi = [tgt.xi[i % L] for i in range(n)]

    p_, q_, r_, s_ = prefix_counters(xi)
    phis = phi_sequence(model, xi)
    phi = float(phis[-1])
    phi_check = _boundary_log_sum(model, np.array(xi), 1)
    psi = float(np.max(np.abs(phis)))
    regime = delta * math.exp(-math.sqrt(n))
    dist_ = distortion(model, regime)
    delta_n = delta * math.exp(-2.0 * max(psi, math.sqrt(n))) * math.exp(-n * dist_)

    f0 = model.f0
    # N(n): first N >= 1 with f0^N(1/2) in [1 - delta(n), 1)
    side, d = 0, 0.5
    N = 0
    while True:
        side, d = f0.near(side, d)
        N += 1
        if side == 1 and 0.0 < d <= delta_n:
            break
        if d == 0.0 or N > 10**6:
            raise PrecisionLoss("f0 orbit of 1/2 reached the boundary before 1 - delta(n)")
    N_lift = None
    if system.lifted:
        lift = model.lift
        N_lift = max(1, math.ceil((lift.lift(1, delta_n) - lift.lift(0, 0.5)) / lift.shift - 1e-12))
    x0 = (side, d)

    # follow x_i = f_xi^i(x0) and certify the first-order regime
    side, d = x0
    worst = d
    for sym in xi:
        side, d = model.map(sym).near(side, d)
        worst = max(worst, d)
        if d == 0.0:
            raise PrecisionLoss("orbit underflowed to the boundary")
    if worst > regime:
        raise PrecisionLoss(f"orbit left the distortion regime ({worst:.3g} > {regime:.3g})")
    if side != 0:
        raise OrientationError("x_n is not near 0; the prefix parity is wrong")
    M = 0
    while True:
        side, d = f0.near(side, d)
        M += 1
        if side == 1 or d >= 0.5:
            break

    lo, hi = 0.5, float(f0(0.5))
    m_incremented = False
    for attempt in range(2):
        eta = (0,) * N + tuple(xi) + (0,) * M
        g = lambda y, eta=eta: _signed_residual(model, eta, y)
        glo, ghi = g(lo), g(hi)
        reversing = _orientation(model, eta) < 0
        if not reversing:
            raise OrientationError("g does not reverse orientation")
        if glo >= 0.0 >= ghi:
            break
        M += 1
        m_incremented = True
    else:
        raise OrientationError("fixed point of g not in [1/2, f0(1/2))")
    y_lift = None
    if system.lifted:
        s_, j = lift_translate(eta)
        y_lift = 0.5 * j * model.lift.shift
        y = model.lift.unlift_x(y_lift)
    else:
        y = optimize.brentq(g, lo, hi, xtol=1e-17, rtol=4 * np.finfo(float).eps, maxiter=500)
    orbit = make_orbit(system, eta, y, lift_t=y_lift, residual=abs(g(y)))
    if system.lifted:
        ts = _lifted_ts(model, eta, y_lift)
        min_bd = min(model.lift.unlift(t)[1] for t in ts)
        if not all(math.isfinite(t) for t in ts):
            raise PrecisionLoss("lifted orbit is not finite")
    else:
        min_bd = min(dd for _, dd in orbit_points(model, eta, y))
    if not min_bd > 0.0:
        raise PrecisionLoss("periodic orbit touches the boundary in floating point")
    mu = periodic_measure(orbit, system)
    dist = weakstar_distance(mu, periodic_measure(tgt), family)
    return BoundaryApproxTrace(
        "".join(map(str, tgt.xi)), n, delta, p_, q_, r_, s_, phi, phi_check, psi, dist_,
        delta_n, N, M, N_lift, "".join(map(str, eta)), float(y), y_lift, orbit.chi, orbit.klass,
        float(min_bd), float(worst), dist, True, m_incremented, orbit, mu)


def _lifted_ts(model, word, t):
    out = []
    for s in word:
        out.append(t)
        t = t + model.lift.shift if s == 0 else -t
    return out


def _orientation(model, word):
    sign = 1
    for s in word:
        sign *= model.map(s).orientation
    return sign


def _signed_residual(model, word, y):
    """g(y) - y in boundary-safe coordinates (y near the middle, image anywhere)."""
    s1, d1, _, _ = eval_word_near(model, word, 0 if y <= 0.5 else 1, y if y <= 0.5 else 1.0 - y)
    return from_near(s1, d1) - y


# ---------------------------------------------------------------------------
# exponent versus boundary mass

@dataclass
class BoundaryCheck:
    triples: list            # (|chi|, middle mass, Delta(delta))
    delta: float
    K1: Optional[float]
    K2: Optional[float]
    feasible: bool

    def as_dict(self):
        return {"delta": self.delta, "triples": [list(t) for t in self.triples],
                "K1": self.K1, "K2": self.K2, "feasible": self.feasible}


def exponent_boundary_check(system: SkewSystem, orbits, delta: float, k_max: float = 1e3) -> BoundaryCheck:
    """Fit the smallest K1 + K2 with |chi| <= K1 * mass[delta, 1 - delta] + K2 * Delta(delta)."""
    if not 0.0 < delta < 0.5:
        raise ValidationError("delta must lie in (0, 1/2)")
    D = distortion(system.model, delta)
    triples = []
    for o in orbits:
        if o.location != "core":
            raise ValidationError("exponent/boundary check takes core orbits only")
        mu = periodic_measure(o, system)
        triples.append((abs(o.chi), mu.mass_between(delta, 1.0 - delta), D))
    A = np.array([[-m, -dd] for _, m, dd in triples]) if triples else np.zeros((0, 2))
    b = np.array([-c for c, _, _ in triples]) if triples else np.zeros(0)
    res = optimize.linprog([1.0, 1.0], A_ub=A if len(b) else None, b_ub=b if len(b) else None,
                           bounds=[(0, k_max), (0, k_max)], method="highs")
    if res.status == 0:
        return BoundaryCheck(triples, delta, float(res.x[0]), float(res.x[1]), True)
    return BoundaryCheck(triples, delta, None, None, False)


# ---------------------------------------------------------------------------
# mirror relation on the exposed piece

@dataclass
class MirrorRelation:
    word: str
    chi: float
    chi_mirror: float
    lhs: float
    rhs: float
    freq0: float
    period: int
    pairs_match: bool

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def step_derivatives(model, point: ExPeriodicPoint):
    """|f_{xi_i}'(x_i)| along an exposed periodic orbit."""
    return [abs(float(model.map(i).deriv(float(s)))) for i, s in point.word]


def derivative_pairs(model, point: ExPeriodicPoint):
    """Multiset of unordered per-step pairs {|f'(x_i)|, |f'(1 - x_i)|}."""
    return sorted(tuple(sorted((abs(float(model.map(i).deriv(float(s)))),
                                abs(float(model.map(i).deriv(float(1 - s)))))))
                  for i, s in point.word)


def mirror_exponent_relation(system: SkewSystem, point) -> MirrorRelation:
    """chi(mu) + chi(mirror mu) against the symbol-frequency right-hand side."""
    model = system.model
    if not isinstance(point, ExPeriodicPoint):
        from .symbolic import ex_point_from_word
        point = ex_point_from_word(point)
    mpoint = ExPeriodicPoint(mirror(point.word), point.xi, 1 - point.x0)
    L = len(point.xi)
    chi = lyapunov_finite(system, point.xi, float(point.x0), L).value
    chib = lyapunov_finite(system, mpoint.xi, float(mpoint.x0), L).value
    b0, b1, a0, a1 = model.endpoint_derivatives()
    freq0 = sum(1 for s in point.xi if s == 0) / L
    rhs = freq0 * math.log(b0 * b1) + (1.0 - freq0) * math.log(a0 * a1)
    same = derivative_pairs(model, point) == derivative_pairs(model, mpoint)
    return MirrorRelation(" ".join(f"{i}{'LR'[s]}" for i, s in point.word), chi, chib,
                          chi + chib, rhs, freq0, L, bool(same and len(mpoint.word) == L))
