"""Random-walk side of the symmetric example f0 f1 = f1 f0^-1.

With the commutation identity every word collapses to x -> f0^j(x) or
x -> f0^j(1 - x).  In the lift where f0 is a unit translation, the fiber
orbit along random fair bits becomes a persistent random walk; the helpers
below simulate it and its induced walks S, U and V+.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import CommutationViolated, ValidationError
from .fiber import FiberModel, commutation_defect, eval_word

COMMUTATION_TOL = 1e-8


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator: identical streams on every platform."""
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


def fair_bits(seed: int, n: int) -> np.ndarray:
    return make_rng(seed).integers(0, 2, size=n, dtype=np.int8)


# ---------------------------------------------------------------------------
# word reduction

@dataclass(frozen=True)
class ReducedWord:
    s: int   # +1 or -1
    j: int

    def as_dict(self):
        return {"s": self.s, "j": self.j}


def reduce_word(word: Sequence[int]) -> ReducedWord:
    """Normal form of f_[w] under f1 f0^k = f0^-k f1.

    Appending 0 composes with f0 on the left, so j -> j + 1; appending 1
    pushes f1 through f0^j, giving f0^-j f1, so (s, j) -> (-s, -j).
    """
    s, j = 1, 0
    for sym in word:
        if sym == 0:
            j += 1
        elif sym == 1:
            s, j = -s, -j
        else:
            raise ValidationError("binary words only")
    return ReducedWord(s, j)


def f0_power(model: FiberModel, j: int, x):
    """f0^j(x) for any integer j (exact via the lift when the model has one)."""
    if model.lift is not None:
        lift = model.lift
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.array([lift.unlift_x(lift.lift_x(float(v)) + j * lift.shift) for v in xs])
        return out if np.ndim(x) else float(out[0])
    y = x
    step = model.f0 if j >= 0 else model.f0.inverse
    for _ in range(abs(j)):
        y = step(y)
    return y


def reduced_value(model: FiberModel, rw: ReducedWord, x):
    base = x if rw.s > 0 else 1.0 - np.asarray(x, dtype=float)
    return f0_power(model, rw.j, base)


def require_commutation(model: FiberModel, tol: float = COMMUTATION_TOL) -> float:
    defect = commutation_defect(model)
    if defect > tol:
        raise CommutationViolated(f"f0 f1 != f1 f0^-1 (defect {defect:.3g} > {tol:g})")
    return defect


@dataclass
class NontransitivityCertificate:
    x: float
    words_checked: int
    max_deviation: float
    closure_plus: np.ndarray
    closure_minus: np.ndarray
    max_gap: float
    gap_at: tuple
    commutation_defect: float

    def as_dict(self):
        return {"x": self.x, "words_checked": self.words_checked,
                "max_deviation": self.max_deviation, "max_gap": self.max_gap,
                "gap_at": list(self.gap_at), "commutation_defect": self.commutation_defect,
                "closure_plus": self.closure_plus.tolist(),
                "closure_minus": self.closure_minus.tolist()}


def orbit_closure(model: FiberModel, x: float, tol: float = 1e-12, max_points: int = 10_000):
    """{f0^j(x) : j in Z}, truncated within tol of the boundary or after max_points per side.

    Parabolic ends (arctan) approach 0 and 1 only like 1/j, hence the cap.
    """
    pts = [x]
    for direction in (1, -1):
        y = x
        for _ in range(max_points):
            y = float(f0_power(model, direction, y))
            if y < tol or y > 1.0 - tol:
                break
            pts.append(y)
    return np.sort(np.array(pts))


def nontransitivity_witness(model: FiberModel, x: float = 0.3, budget: int = 10_000,
                            max_len: int = 20, seed: int = 0) -> NontransitivityCertificate:
    """Check the reduced form on random words and measure the hole left by the two orbits."""
    if not 0.0 < x < 1.0:
        raise ValidationError("x must lie in (0, 1)")
    defect = require_commutation(model)
    rng = make_rng(seed)
    worst = 0.0
    lengths = rng.integers(1, max_len + 1, size=budget)
    for L in lengths:
        w = tuple(int(b) for b in rng.integers(0, 2, size=L))
        direct, _ = eval_word(model, w, x)
        worst = max(worst, abs(direct - float(reduced_value(model, reduce_word(w), x))))
    plus = orbit_closure(model, x)
    minus = orbit_closure(model, 1.0 - x)
    pts = np.concatenate([[0.0], plus, minus, [1.0]])
    pts.sort()
    gaps = np.diff(pts)
    k = int(np.argmax(gaps))
    return NontransitivityCertificate(x, int(budget), float(worst), plus, minus, float(gaps[k]),
                                      (float(pts[k]), float(pts[k + 1])), defect)


# ---------------------------------------------------------------------------
# gap statistics

@dataclass
class GapStats:
    n_gaps: int
    parity_even: float          # fraction of gaps with an even number of 1s between the 0s
    d_law: dict                 # d -> empirical probability
    p_d1: float
    p_d3: float
    correlation: float          # corr(d_i, parity_i)
    same_direction: float       # S-walk persistence

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def zero_positions(bits: np.ndarray) -> np.ndarray:
    return np.flatnonzero(bits == 0)


def gap_statistics(seed: int = 0, n_gaps: int = 1_000_000) -> GapStats:
    """Empirical law of the gaps between successive 0s in fair bits."""
    if n_gaps < 10_000:
        raise ValidationError("need at least 10^4 gaps")
    bits = fair_bits(seed, 2 * n_gaps + 200)
    pos = zero_positions(bits)
    while len(pos) < n_gaps + 1:  # pragma: no cover - astronomically unlikely
        bits = np.concatenate([bits, fair_bits(seed + len(bits), n_gaps)])
        pos = zero_positions(bits)
    gaps = np.diff(pos[: n_gaps + 1])          # n_i - n_{i-1}
    ones_between = gaps - 1
    even = ones_between % 2 == 0
    d = np.where(gaps % 2 == 1, gaps, gaps - 1)
    vals, counts = np.unique(d, return_counts=True)
    law = {int(v): float(c) / n_gaps for v, c in zip(vals, counts)}
    corr = float(np.corrcoef(d, even.astype(float))[0, 1])
    # S-walk direction is flipped by each odd gap; persistence = fraction of even gaps
    return GapStats(int(n_gaps), float(even.mean()), law, law.get(1, 0.0), law.get(3, 0.0), corr,
                    float(even.mean()))


def s_walk(bits: np.ndarray) -> np.ndarray:
    """Positions of the induced walk S at the successive 0s of the bit stream."""
    sign = 1 - 2 * (np.concatenate([[0], np.cumsum(bits[:-1] == 1)]) % 2)
    steps = sign[bits == 0]
    return np.cumsum(steps)


# ---------------------------------------------------------------------------
# V+ walk

def vplus_steps_direct(rng: np.random.Generator, n: int) -> np.ndarray:
    """+1 w.p. 2/3, otherwise -m with m geometric: P(-m) = 2^m / 3^(m+2)."""
    up = rng.random(n) < 2.0 / 3.0
    m = rng.geometric(1.0 / 3.0, size=n) - 1
    return np.where(up, 1, -m).astype(np.int64)


def vplus_steps_first_return(rng: np.random.Generator, n: int) -> np.ndarray:
    """Steps of U between successive visits to the +1 sheet."""
    out = np.empty(n, dtype=np.int64)
    filled = 0
    while filled < n:
        k = 4 * (n - filled) + 64
        flip = rng.random(k) < 1.0 / 3.0
        # U from sheet +1: sheet after each step, displacement = old sheet (stay) or -old sheet (flip)
        sheet = np.cumprod(np.where(flip, -1, 1))
        prev = np.concatenate([[1], sheet[:-1]])
        disp = np.where(flip, -prev, prev)
        pos = np.cumsum(disp)
        returns = np.flatnonzero(sheet == 1)
        if len(returns) == 0:
            continue
        marks = np.concatenate([[0], pos[returns]])
        steps = np.diff(marks)
        take = min(len(steps), n - filled)
        out[filled:filled + take] = steps[:take]
        filled += take
    return out


@dataclass
class WalkTrace:
    seed: int
    steps: int
    positions: np.ndarray = field(repr=False)
    step_values: np.ndarray = field(repr=False)
    mean_step: float = 0.0
    zero_visits: int = 0
    method: str = "direct"

    def as_dict(self):
        return {"seed": self.seed, "steps": self.steps, "mean_step": self.mean_step,
                "zero_visits": self.zero_visits, "method": self.method,
                "final_position": int(self.positions[-1])}


def vplus_walk(seed: int, steps: int, method: str = "direct") -> WalkTrace:
    if steps < 1:
        raise ValidationError("steps must be at least 1")
    rng = make_rng(seed)
    if method == "direct":
        st = vplus_steps_direct(rng, steps)
    elif method == "first-return":
        st = vplus_steps_first_return(rng, steps)
    else:
        raise ValidationError("method is 'direct' or 'first-return'")
    pos = np.cumsum(st)
    return WalkTrace(int(seed), int(steps), pos, st, float(st.mean()),
                     int(np.count_nonzero(pos == 0)), method)


def vplus_law(k_max: int = 60) -> dict:
    """Exact step law, truncated at -k_max."""
    law = {1: 2.0 / 3.0}
    for k in range(k_max + 1):
        law[-k] = law.get(-k, 0.0) + 2.0 ** k / 3.0 ** (k + 2)
    return law


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    return float(stats.ks_2samp(a, b).statistic)


def zero_occupation(seed: int, n: int) -> float:
    """Fraction of the first n V+ positions (started at 0) equal to 0."""
    tr = vplus_walk(seed, n)
    return tr.zero_visits / n


# ---------------------------------------------------------------------------
# occupation of (eps, 1 - eps) by the fiber orbit

@dataclass
class OccupationTable:
    model: str
    eps: float
    n_grid: list
    seeds: int
    mean_fraction: list
    stderr: list
    particles: int

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "mean_fraction", "stderr", "seeds"])
        for n, m, s in zip(self.n_grid, self.mean_fraction, self.stderr):
            w.writerow([n, repr(float(m)), repr(float(s)), self.seeds])
        return buf.getvalue()


def lift_walk(bits: np.ndarray) -> np.ndarray:
    """Integer walk W_i (i = 1..n) with t_i = s_i (t_0 + shift * W_i)."""
    sign = 1 - 2 * (np.concatenate([[0], np.cumsum(bits[:-1] == 1)]) % 2)
    return np.cumsum(np.where(bits == 0, sign, 0))


def occupation_decay(model: FiberModel, eps: float = 0.25, n_grid=(10_000, 100_000, 1_000_000),
                     seeds=50, x0: float = 0.5, particles: Optional[np.ndarray] = None,
                     seed0: int = 0) -> OccupationTable:
    """Mean fraction of times 1..n at which the fiber orbit sits in (eps, 1 - eps).

    Runs in the exact lift: t -> t + shift for f0, t -> -t for f1, and
    x in (eps, 1 - eps) iff |t| < lift(1 - eps).
    """
    if not 0.0 < eps < 0.5:
        raise ValidationError("eps must lie in (0, 1/2)")
    if model.lift is None:
        raise ValidationError("occupation decay needs a model with an exact lift (mobius, arctan)")
    require_commutation(model)
    n_grid = sorted(int(n) for n in n_grid)
    if n_grid[0] < 1:
        raise ValidationError("n must be at least 1")
    lift = model.lift
    T = lift.lift_x(1.0 - eps)
    pts = np.array([x0]) if particles is None else np.asarray(particles, dtype=float)
    t0 = np.array([lift.lift_x(float(p)) for p in pts])
    seed_list = list(range(seed0, seed0 + seeds)) if isinstance(seeds, int) else list(seeds)
    nmax = n_grid[-1]
    fractions = np.zeros((len(seed_list), len(n_grid)))
    for a, sd in enumerate(seed_list):
        W = lift_walk(fair_bits(sd, nmax))
        lo, hi = int(W.min()), int(W.max())
        w_vals = np.arange(lo, hi + 1)
        # share of particles inside for each integer walk value
        # ties |t| = T are boundary points in exact arithmetic (arctan: f0(1/2) = 3/4); the
        # margin keeps a rounded lift of 1 - eps from counting them as inside
        inside = (np.abs(t0[None, :] + lift.shift * w_vals[:, None]) < T - 1e-12 * max(1.0, T)
                  ).mean(axis=1)
        for b, n in enumerate(n_grid):
            counts = np.bincount(W[:n] - lo, minlength=len(w_vals))
            fractions[a, b] = float(counts @ inside) / n
    mean = fractions.mean(axis=0)
    se = fractions.std(axis=0, ddof=1) / math.sqrt(len(seed_list)) if len(seed_list) > 1 \
        else np.zeros(len(n_grid))
    return OccupationTable(model.kind, float(eps), n_grid, len(seed_list), mean.tolist(),
                           se.tolist(), int(len(pts)))
