"""Itineraries that build hyperbolic periodic orbits in the core.

Two iterated function systems are used: the forward one generated by
(f0, f1) and the backward one generated by (g0, g1) = (f0^-1, f1).  Expanding
orbits come from covers in the forward system around the repelling end 0;
contracting ones from covers in the backward system around the point c where
f0' = 1.  A fixed point of a backward word u is a fixed point of the forward
word reversed(u), with reciprocal derivative.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .dynamics import PeriodicOrbit, SkewSystem, lift_translate, make_orbit, orbit_points
from .errors import (BudgetExhausted, IterationCap, MBoundExceeded, NoSolution, NotFound,
                     ValidationError)
from .fiber import FiberModel, check_hypotheses, from_near, to_near, unit_derivative_point

GRID = 10_000


# ---------------------------------------------------------------------------
# word application in either direction

def apply_word(model: FiberModel, word, x, forward: bool = True):
    """Vectorised (value, log|derivative|) of a word in the forward or backward system."""
    x = np.array(x, dtype=float, ndmin=1)
    logd = np.zeros_like(x)
    for s in word:
        if s == 1:
            x = 1.0 - x
        elif forward:
            logd += np.log(model.f0.deriv(x))
            x = np.asarray(model.f0(x), dtype=float)
        else:
            x = np.asarray(model.f0.inverse(x), dtype=float)
            logd -= np.log(model.f0.deriv(x))
    return x, logd


def _apply1(model, word, x, forward=True):
    # scalar loop: for one point, numpy per-call overhead dominates
    f0 = model.f0
    x = float(x)
    logd = 0.0
    for s in word:
        if s == 1:
            x = 1.0 - x
        elif forward:
            logd += math.log(f0.deriv(x))
            x = float(f0(x))
        else:
            x = float(f0.inverse(x))
            logd -= math.log(f0.deriv(x))
    return x, logd


def _image(model, word, H, forward):
    a, _ = _apply1(model, word, H[0], forward)
    b, _ = _apply1(model, word, H[1], forward)
    return min(a, b), max(a, b)


def _floor(model, word, H, forward, n=257):
    xs = np.linspace(H[0], H[1], n)
    _, l = apply_word(model, word, xs, forward)
    return float(np.exp(np.min(l)))


# ---------------------------------------------------------------------------
# fundamental domains

@dataclass
class FundamentalDomains:
    eps: float
    I0: tuple
    I1: tuple
    N: int
    kappa: float
    lam: float
    floor: float            # lambda^-1 kappa
    min_expansion: float    # min of (f0^N)' over a grid of I0
    delta_eps: float        # 1 - f0^2(1 - eps)
    strip: tuple            # f0^-1(I0)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _f0_power_near(f0, x, n):
    side, d = to_near(x)
    for _ in range(n):
        side, d = f0.near(side, d)
    return side, d


def fundamental_domains(model: FiberModel, eps0: float = 0.01, n_hint: Optional[int] = None,
                        grid: int = GRID) -> FundamentalDomains:
    """Solve f0^N(eps) = 1 - eps near eps0 with N minimal for eps0."""
    if not 0.0 < eps0 < 0.25:
        raise ValidationError("eps0 must lie in (0, 0.25)")
    f0 = model.f0
    z = np.linspace(0.0, eps0, 1001)
    if not (np.all(f0.deriv(z) > 1.0) and np.all(f0.deriv(1.0 - z) < 1.0)):
        raise ValidationError("eps0 too large: need f0' > 1 near 0 and f0' < 1 near 1")
    N = 0
    side, d = 0, eps0
    while not (side == 1 and d <= eps0):
        side, d = f0.near(side, d)
        N += 1
        if N > 10**6:
            raise NoSolution("f0 orbit of eps0 never reaches 1 - eps0")
    if n_hint is not None and n_hint != N:
        N = int(n_hint)

    def gap(e):
        s, dd = _f0_power_near(f0, e, N)
        # f0^N(e) - (1 - e) computed without forming 1 - small
        return (e - dd) if s == 1 else (from_near(s, dd) - 1.0 + e)

    lo, hi = float(f0.inverse(eps0)), eps0
    glo, ghi = gap(lo), gap(hi)
    if glo * ghi > 0:
        raise NoSolution(f"no sign change of f0^N(e) - (1 - e) on [{lo:.6g}, {hi:.6g}] "
                         f"(values {glo:.3g}, {ghi:.3g}; N={N})")
    eps = optimize.brentq(gap, lo, hi, xtol=1e-17, rtol=4 * np.finfo(float).eps, maxiter=500)
    beta, lam = float(f0.deriv(0.0)), float(f0.deriv(1.0))
    kappa = lam * lam * (1.0 - lam) / (beta * (beta - 1.0))
    I0 = (eps, float(f0(eps)))
    xs = np.linspace(I0[0], I0[1], grid)
    _, l = apply_word(model, (0,) * N, xs)
    s2, d2 = _f0_power_near(f0, 1.0 - eps, 2)
    delta_eps = d2 if s2 == 1 else 1.0 - from_near(s2, d2)
    return FundamentalDomains(eps, I0, (1.0 - eps, float(f0(1.0 - eps))), N, kappa, lam,
                              kappa / lam, float(np.exp(l.min())), float(delta_eps),
                              (float(f0.inverse(eps)), eps))


@dataclass
class ContractionData:
    c: float
    upsilon: float
    target: tuple     # [f0(c), f0^2(c)]
    lower: tuple      # [c, f0(c)]
    h3_margin: float  # f1(f0^2 c) - f0^2 c

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def contraction_data(model: FiberModel) -> ContractionData:
    f0 = model.f0
    c = unit_derivative_point(f0)
    fc = float(f0(c))
    f2c = float(f0(fc))
    return ContractionData(c, 1.0 / float(f0.deriv(fc)), (fc, f2c), (c, fc),
                           float(model.f1(f2c)) - f2c)


# ---------------------------------------------------------------------------
# successors and covers

@dataclass
class IntervalWord:
    H: tuple
    word: tuple
    floor: float
    image: tuple
    steps: int = 1
    m_values: list = field(default_factory=list)
    forward: bool = True

    def as_dict(self):
        return {"H": list(self.H), "word": "".join(map(str, self.word)), "floor": self.floor,
                "image": list(self.image), "steps": self.steps, "m_values": self.m_values,
                "direction": "forward" if self.forward else "backward"}


@dataclass
class _Frame:
    """Geometry for one direction: successor domain, landing test and cover target."""

    model: FiberModel
    forward: bool
    domain: tuple
    target: tuple
    lead_inside: int
    lead_outside: int
    lead_region: tuple
    growth: float     # floor expected per successor (kappa or upsilon)

    def lead(self, H):
        a, b = self.lead_region
        return self.lead_inside if (H[0] >= a and H[1] <= b) else self.lead_outside

    def landed(self, img):
        if self.forward:
            return img[1] > self.target[1]
        return img[0] <= self.target[0]

    def covers(self, img):
        return img[0] <= self.target[0] and img[1] >= self.target[1]


def expanding_frame(model: FiberModel, domains: FundamentalDomains) -> _Frame:
    eps, f0eps = domains.I0
    return _Frame(model, True, (domains.strip[0], f0eps), domains.strip,
                  domains.N, domains.N + 1, domains.I0, domains.kappa)


def contracting_frame(model: FiberModel, cdata: ContractionData) -> _Frame:
    return _Frame(model, False, (cdata.lower[0], cdata.target[1]), cdata.target,
                  1, 0, cdata.target, cdata.upsilon)


def _check_in_domain(frame, H, tol=1e-12):
    if not (H[0] < H[1]):
        raise ValidationError("interval must have positive length")
    lo, hi = frame.domain
    if H[0] < lo - tol or H[1] > hi + tol:
        raise ValidationError(f"interval [{H[0]:.6g}, {H[1]:.6g}] outside the successor "
                              f"domain [{lo:.6g}, {hi:.6g}]")


def _successor(frame: _Frame, H, m_max=10_000, check=True) -> IntervalWord:
    if check:
        _check_in_domain(frame, H)
    model = frame.model
    head = (0,) * frame.lead(H) + (1,)
    img = _image(model, head, H, frame.forward)
    m = 0
    while not frame.landed(img):
        img = _image(model, (0,), img, frame.forward)
        m += 1
        if m > m_max:
            raise MBoundExceeded(f"M(H) exceeded {m_max} for H=[{H[0]:.6g}, {H[1]:.6g}]")
    word = head + (0,) * m
    return IntervalWord(tuple(H), word, _floor(model, word, H, frame.forward), img, 1, [m],
                        frame.forward)


def _cover(frame: _Frame, H, cap=10_000, m_max=10_000) -> IntervalWord:
    _check_in_domain(frame, H)
    word = ()
    cur = tuple(H)
    ms = []
    steps = 0
    while not frame.covers(cur):
        if steps >= cap:
            raise IterationCap(f"cover not reached after {cap} successors")
        succ = _successor(frame, cur, m_max, check=False)
        word += succ.word
        ms += succ.m_values
        cur = succ.image
        steps += 1
    floor = _floor(frame.model, word, H, frame.forward) if word else 1.0
    return IntervalWord(tuple(H), word, floor, cur, steps, ms, frame.forward)


def expanding_successor(model, domains, H, m_max=10_000) -> IntervalWord:
    """Image of H under 0^N(H) 1 0^M(H), landing over (eps, f0(eps)]."""
    return _successor(expanding_frame(model, domains), H, m_max)


def expanding_cover(model, domains, H, cap=10_000, m_max=10_000) -> IntervalWord:
    """Concatenate expanding successors until the image contains f0^-1(I0)."""
    return _cover(expanding_frame(model, domains), H, cap, m_max)


def contracting_successor(model, cdata, H, m_max=10_000) -> IntervalWord:
    """Backward-system successor 0^{0|1} 1 0^i on [c, f0^2(c)]; floor at least upsilon."""
    return _successor(contracting_frame(model, cdata), H, m_max)


def contracting_cover(model, cdata, H, cap=10_000, m_max=10_000) -> IntervalWord:
    """Backward successors until the image contains [f0(c), f0^2(c)]."""
    return _cover(contracting_frame(model, cdata), H, cap, m_max)


# ---------------------------------------------------------------------------
# periodic orbits near a point

def _walk_to(model, x, forward, stop, limit=1000):
    """Apply h0 until stop(value); returns the number of steps."""
    k = 0
    while not stop(x):
        x, _ = _apply1(model, (0,), x, forward)
        k += 1
        if k > limit:
            return None, None
    return k, x


def _route_in(frame: _Frame, J):
    """Short word mapping J into the successor domain, or None."""
    model, fw = frame.model, frame.forward
    lo, hi = frame.domain
    p = 0.5 * (J[0] + J[1])
    inside = lambda v: lo <= v <= hi
    prefix = ()
    x = p
    if fw and p > hi:
        k, x = _walk_to(model, p, True, lambda v: v >= 1.0 - frame.target[1])
        if k is None:
            return None
        prefix = (0,) * k + (1,)
        x = 1.0 - x
    elif not fw and p < lo:
        prefix = (1,)
        x = 1.0 - p
    k, x = _walk_to(model, x, fw, inside)
    if k is None:
        return None
    for extra in (0, 1, -1):
        if k + extra < 0:
            continue
        word = prefix + (0,) * (k + extra)
        img = _image(model, word, J, fw)
        if img[0] >= lo and img[1] <= hi and img[1] > img[0]:
            return word, img
    return None


def _route_out(frame: _Frame, p, limit=2000):
    """Word v with p inside h_v(target), chosen with the largest margin.

    Candidates are (1?) 0^j (1?): the tiles h0^j(target) and their reflections,
    started from the target or from its reflection.
    """
    model, fw = frame.model, frame.forward
    best = None
    lo, hi = frame.target
    for pre in ((), (1,)):
        tile = (1.0 - hi, 1.0 - lo) if pre else (lo, hi)
        for j in range(limit):
            for post in ((), (1,)):
                t = (1.0 - tile[1], 1.0 - tile[0]) if post else tile
                if t[0] <= p <= t[1]:
                    margin = min(p - t[0], t[1] - p)
                    if best is None or margin > best[0] * 1.5:
                        best = (margin, pre + (0,) * j + post, t)
            tile = _image(model, (0,), tile, fw)
            if tile[1] - tile[0] < 1e-300:
                break
    if best is None:
        raise NotFound(f"no tile of the cover target contains p={p:.6g}")
    return best[1], best[2]


def _fixed_point_on(model, word, J, forward):
    h = lambda x: _apply1(model, word, x, forward)[0] - x
    ha, hb = h(J[0]), h(J[1])
    if ha == 0.0:
        return J[0]
    if hb == 0.0:
        return J[1]
    if ha * hb > 0:
        return None
    return optimize.brentq(h, J[0], J[1], xtol=1e-17, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass
class Synthesis:
    """Audit record of a periodic-near construction."""

    orbit: PeriodicOrbit
    p: float
    radius: float
    route_in: str
    cover: str
    route_out: str
    interval: tuple
    distance: float
    method: str

    def as_dict(self):
        d = {k: getattr(self, k) for k in ("p", "radius", "route_in", "cover", "route_out",
                                            "distance", "method")}
        d["interval"] = list(self.interval)
        d["orbit"] = self.orbit.as_dict()
        return d


def _orbit_distance(model, orbit, p):
    pts = orbit_points(model, orbit.word, orbit.x, orbit.near)
    return min(abs(from_near(s, d) - p) for s, d in pts)


def _periodic_near(system: SkewSystem, frame: _Frame, p, radius, max_shrink=40):
    model = frame.model
    v, tile = _route_out(frame, p)
    J = (max(p - radius, tile[0]), min(p + radius, tile[1]))
    for _ in range(max_shrink):
        if J[1] - J[0] <= 0:
            break
        r = _route_in(frame, J)
        if r is not None:
            rword, H = r
            cov = _cover(frame, H)
            W = rword + cov.word + v
            x = _fixed_point_on(model, W, J, frame.forward)
            if x is not None:
                _, logd = _apply1(model, W, x, frame.forward)
                if logd > 1e-9:
                    fword = W if frame.forward else tuple(reversed(W))
                    orbit = make_orbit(system, fword, x,
                                       residual=abs(near_residual(model, fword, x)))
                    dist = _orbit_distance(model, orbit, p)
                    return Synthesis(orbit, p, radius, _ws(rword), _ws(cov.word), _ws(v), J,
                                     dist, "cover")
        # shrink toward p, keeping p inside J
        J = (p - 0.5 * (p - J[0]), p + 0.5 * (J[1] - p))
    raise NotFound(f"no periodic orbit synthesised near p={p:.6g} (radius {radius:g})")


def _near_word(model, word, side, d):
    for s in word:
        side, d = model.map(s).near(side, d)
    return side, d


def _ws(word):
    return "".join(map(str, word))


def near_residual(model, word, x):
    """f_[w](x) - x evaluated in boundary-safe coordinates."""
    side, d = to_near(x)
    s1, d1 = _near_word(model, word, side, d)
    if s1 == side:
        return d1 - d if side == 0 else d - d1
    return from_near(s1, d1) - x


def _polish(model, word, x, width=1e-6):
    h = lambda y: near_residual(model, word, y)
    a, b = max(x - width, 0.0), min(x + width, 1.0)
    if h(a) * h(b) > 0:
        return x
    return optimize.brentq(h, a, b, xtol=1e-17, rtol=4 * np.finfo(float).eps, maxiter=500)


def _search_reversing(system: SkewSystem, p, radius, want: str, max_len=30):
    """Fallback: one-reflection words 0^a 1 0^b have a unique fixed point each."""
    model = system.model
    pairs = [(a, b) for a in range(max_len + 1) for b in range(max_len + 1)]
    A = np.array([q[0] for q in pairs])
    B = np.array([q[1] for q in pairs])
    lo = np.zeros(len(pairs))
    hi = np.ones(len(pairs))

    def fw(x):
        for k in range(A.max()):
            x = np.where(k < A, model.f0(x), x)
        x = 1.0 - x
        for k in range(B.max()):
            x = np.where(k < B, model.f0(x), x)
        return x

    for _ in range(60):
        mid = 0.5 * (lo + hi)
        pos = fw(mid) - mid > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    best = None
    for (a, b), x in zip(pairs, 0.5 * (lo + hi)):
        word = (0,) * a + (1,) + (0,) * b
        lift_t = None
        if system.lifted:
            # t -> -t + j*shift has the exact fixed point j*shift/2
            _, j = lift_translate(word)
            lift_t = 0.5 * j * model.lift.shift
            x = from_near(*model.lift.unlift(lift_t))
        else:
            x = _polish(model, word, x)
        orbit = make_orbit(system, word, x, lift_t=lift_t,
                           residual=abs(near_residual(model, word, x)))
        dist = _orbit_distance(model, orbit, p)
        if dist > radius:
            continue
        chi = orbit.chi if abs(orbit.chi) > 1e-9 else 0.0
        score = chi if want == "expanding" else -chi
        key = (score, -len(word), -dist)
        if best is None or key > best[0]:
            best = (key, orbit, dist)
    if best is None:
        raise NotFound(f"no one-reflection periodic orbit within {radius:g} of {p:.6g}")
    orbit, dist = best[1], best[2]
    return Synthesis(orbit, p, radius, "", "", "", (0.0, 1.0), dist, "reversing-search")


def expanding_periodic_near(system: SkewSystem, p: float, radius: float, eps0: float = 0.01,
                            domains: Optional[FundamentalDomains] = None) -> Synthesis:
    """Periodic orbit with positive exponent whose orbit passes within radius of p.

    Models failing the expansion hypothesis fall back to a search over
    one-reflection words and report whatever class the orbit has.
    """
    if not 0.0 < p < 1.0 or radius <= 0:
        raise ValidationError("need p in (0, 1) and radius > 0")
    model = system.model
    rep = check_hypotheses(model)
    if not rep.h4:
        return _search_reversing(system, p, radius, "expanding")
    domains = domains or fundamental_domains(model, eps0)
    return _periodic_near(system, expanding_frame(model, domains), p, radius)


def contracting_periodic_near(system: SkewSystem, p: float, radius: float) -> Synthesis:
    """Periodic orbit with negative exponent passing within radius of p."""
    if not 0.0 < p < 1.0 or radius <= 0:
        raise ValidationError("need p in (0, 1) and radius > 0")
    model = system.model
    rep = check_hypotheses(model)
    if not rep.h3:
        return _search_reversing(system, p, radius, "contracting")
    return _periodic_near(system, contracting_frame(model, contraction_data(model)), p, radius)


# ---------------------------------------------------------------------------
# density of IFS orbits

@dataclass
class DensityResult:
    max_gap: float
    gap_at: tuple
    visited: int
    nodes: int
    exhausted: bool
    points: np.ndarray

    def as_dict(self):
        return {"max_gap": self.max_gap, "gap_at": list(self.gap_at), "visited_cells": self.visited,
                "nodes": self.nodes, "budget_exhausted": self.exhausted}


def _max_gap(points):
    pts = np.concatenate([[0.0], np.sort(points), [1.0]])
    gaps = np.diff(pts)
    k = int(np.argmax(gaps))
    return float(gaps[k]), (float(pts[k]), float(pts[k + 1]))


def density_scan(model: FiberModel, x0: float, direction: str = "forward", mesh: float = 1e-2,
                 budget: int = 1_000_000) -> DensityResult:
    """Breadth-first orbit of x0 under the IFS with one representative per mesh/4 cell."""
    if not 0.0 < x0 < 1.0:
        raise ValidationError("x0 must lie in (0, 1)")
    if direction not in ("forward", "backward"):
        raise ValidationError("direction is 'forward' or 'backward'")
    if not 0.0 < mesh < 1.0:
        raise ValidationError("mesh must lie in (0, 1)")
    forward = direction == "forward"
    cell = mesh / 4.0
    seen = {int(x0 // cell): x0}
    frontier = deque([x0])
    nodes = 0
    while frontier:
        x = frontier.popleft()
        for s in (0, 1):
            y = 1.0 - x if s == 1 else (float(model.f0(x)) if forward else float(model.f0.inverse(x)))
            nodes += 1
            key = int(y // cell)
            if key not in seen:
                seen[key] = y
                frontier.append(y)
        if nodes >= budget:
            pts = np.array(list(seen.values()))
            gap, at = _max_gap(pts)
            raise BudgetExhausted(f"density scan hit the {budget}-node budget",
                                  partial=DensityResult(gap, at, len(seen), nodes, True, pts))
    pts = np.array(sorted(seen.values()))
    gap, at = _max_gap(pts)
    return DensityResult(gap, at, len(seen), nodes, False, pts)


# ---------------------------------------------------------------------------
# connecting words

def basin_radius(system: SkewSystem, orbit: PeriodicOrbit, iterations: int = 50,
                 rmax: float = 0.5) -> float:
    """Largest r (by halving) such that points at distance r from the orbit's fiber point
    are drawn back by `iterations` repetitions of its word (backward system for expanding)."""
    model = system.model
    forward = orbit.klass != "expanding"
    word = orbit.word if forward else tuple(reversed(orbit.word))
    x = orbit.x
    radii = rmax * 0.5 ** np.arange(30)   # down to ~1e-9 of rmax
    start = np.clip(np.concatenate([x - radii, x + radii]), 0.0, 1.0)
    y = start.copy()
    for _ in range(iterations):
        y, _ = apply_word(model, word, y, forward)
    back = np.abs(y - x)
    ok = (back < 0.5 * np.abs(start - x) + 1e-15) & (back < np.concatenate([radii, radii]))
    ok = ok[:30] & ok[30:]
    # largest radius from which every smaller radius also returns
    good = 0.0
    for r, flag in zip(radii[::-1], ok[::-1]):
        if not flag:
            break
        good = r
    return float(good)


@dataclass
class Connection:
    word: tuple
    start: float
    end: float
    target: tuple
    nodes: int
    forward: bool

    def as_dict(self):
        return {"word": _ws(self.word), "start": self.start, "end": self.end,
                "target": list(self.target), "nodes": self.nodes,
                "direction": "forward" if self.forward else "backward"}


def connecting_word(system: SkewSystem, source: PeriodicOrbit, target: PeriodicOrbit,
                    budget: int = 200_000) -> Connection:
    """Word carrying the source orbit's fiber point into the local stable (contracting
    target) or local unstable (expanding target) interval of the target orbit.

    Expanding targets are searched in the backward system; the returned word is
    then the backward word, whose reverse carries the target interval onto source.
    """
    if source.klass != target.klass:
        raise ValidationError("connecting words join orbits of the same hyperbolicity class")
    model = system.model
    forward = target.klass != "expanding"
    rad = 0.5 * basin_radius(system, target)
    if rad <= 0.0:
        raise NotFound("target orbit has no measurable local basin")
    box = (max(target.x - rad, 0.0), min(target.x + rad, 1.0))
    cell = max(rad / 4.0, 1e-12)
    start = source.x
    seen = {int(start // cell)}
    queue = deque([(start, ())])
    nodes = 0
    while queue:
        x, w = queue.popleft()
        if box[0] <= x <= box[1]:
            return Connection(w, start, x, box, nodes, forward)
        for s in (0, 1):
            y = 1.0 - x if s == 1 else (float(model.f0(x)) if forward else float(model.f0.inverse(x)))
            nodes += 1
            key = int(y // cell)
            if key not in seen:
                seen.add(key)
                queue.append((y, w + (s,)))
        if nodes >= budget:
            raise NotFound(f"no connecting word within {budget} nodes")
    raise NotFound("orbit of the source is finite and never enters the target interval")


@dataclass
class HomoclinicCertificate:
    forward_link: Connection
    backward_link: Connection

    def as_dict(self):
        return {"a_to_b": self.forward_link.as_dict(), "b_to_a": self.backward_link.as_dict()}


def homoclinic_certificate(system: SkewSystem, a: PeriodicOrbit, b: PeriodicOrbit,
                           budget: int = 200_000) -> HomoclinicCertificate:
    """Connecting words both ways; NotFound if either direction fails."""
    return HomoclinicCertificate(connecting_word(system, a, b, budget),
                                 connecting_word(system, b, a, budget))
