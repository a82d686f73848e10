"""Binary words, the four-symbol exposed subshift, and its Parry measure.

Exposed symbols are pairs ``(symbol, side)`` with side 0 = L (fiber point 0)
and side 1 = R (fiber point 1).  Matrix index of ``(i, s)`` is ``i + 2 s``,
which reproduces the order (0_L, 1_L, 0_R, 1_R).
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NotPeriodic, ValidationError

EX_NAMES = ("0L", "1L", "0R", "1R")

TRANSITION_MATRIX = np.array([[1, 1, 0, 0],
                              [0, 0, 1, 1],
                              [0, 0, 1, 1],
                              [1, 1, 0, 0]], dtype=int)


# -- binary words -----------------------------------------------------------

def parse_word(text) -> tuple:
    """'0101' or '0 1 0 1' or a sequence of ints -> tuple of 0/1."""
    if isinstance(text, str):
        chars = [c for c in text if not c.isspace() and c not in ",_"]
        word = []
        for c in chars:
            if c not in "01":
                raise ValidationError(f"bad symbol {c!r} in word {text!r}")
            word.append(int(c))
        return tuple(word)
    word = tuple(int(s) for s in text)
    if any(s not in (0, 1) for s in word):
        raise ValidationError("binary words use symbols 0 and 1 only")
    return word


def word_str(word: Sequence[int]) -> str:
    return "".join(str(int(s)) for s in word)


def power(word, k: int) -> tuple:
    return tuple(word) * k


def count(word, symbol: int) -> int:
    return sum(1 for s in word if s == symbol)


def rotate(word, k: int) -> tuple:
    word = tuple(word)
    k %= len(word)
    return word[k:] + word[:k]


def canonical_rotation(word) -> tuple:
    word = tuple(word)
    return min(rotate(word, k) for k in range(len(word)))


def random_word(rng, length: int) -> tuple:
    return tuple(int(b) for b in rng.integers(0, 2, size=length))


# -- exposed symbols --------------------------------------------------------

def ex_index(sym) -> int:
    i, side = sym
    return i + 2 * side


def ex_symbol(index: int) -> tuple:
    return index % 2, index // 2


def parse_ex_word(text) -> tuple:
    """'0R 1R 0L 1L' -> ((0, 1), (1, 1), (0, 0), (1, 0))."""
    if not isinstance(text, str):
        return tuple((int(i), int(s)) for i, s in text)
    out = []
    for tok in text.replace(",", " ").split():
        tok = tok.replace("_", "").upper()
        if len(tok) != 2 or tok[0] not in "01" or tok[1] not in "LR":
            raise ValidationError(f"bad exposed symbol {tok!r}")
        out.append((int(tok[0]), 0 if tok[1] == "L" else 1))
    return tuple(out)


def ex_word_str(word) -> str:
    return " ".join(f"{i}{'LR'[s]}" for i, s in word)


def admissible(word, cyclic: bool = True, matrix=TRANSITION_MATRIX) -> bool:
    idx = [ex_index(s) for s in word]
    pairs = zip(idx, idx[1:] + idx[:1]) if cyclic else zip(idx, idx[1:])
    return all(matrix[a, b] == 1 for a, b in pairs)


def mirror(word) -> tuple:
    """Swap the side marker of every symbol."""
    return tuple((i, 1 - s) for i, s in word)


def project_pi(word) -> tuple:
    """Drop the side marker."""
    return tuple(i for i, _ in word)


@dataclass(frozen=True)
class ExPeriodicPoint:
    word: tuple          # exposed symbols
    xi: tuple            # projected binary word
    x0: int              # fiber coordinate of the base point, 0 or 1

    @property
    def period(self):
        return len(self.word)

    @property
    def sides(self):
        return tuple(s for _, s in self.word)


def encode_ex_orbit(xi, x0: int) -> ExPeriodicPoint:
    """Tag each symbol of xi with the side the fiber orbit of x0 sits on."""
    xi = parse_word(xi)
    if x0 not in (0, 1):
        raise ValidationError("exposed orbits start at fiber point 0 or 1")
    if not xi:
        raise ValidationError("word must be non-empty")
    side = int(x0)
    out = []
    for s in xi:
        out.append((s, side))
        if s == 1:
            side = 1 - side
    if side != x0:
        raise NotPeriodic(f"fiber orbit of {x0} under {word_str(xi)} has period {2 * len(xi)}")
    return ExPeriodicPoint(tuple(out), xi, int(x0))


def ex_point_from_word(word) -> ExPeriodicPoint:
    word = parse_ex_word(word)
    if not admissible(word):
        raise ValidationError(f"{ex_word_str(word)} is not admissible for A")
    return ExPeriodicPoint(word, project_pi(word), word[0][1])


def enumerate_admissible(max_period: int, matrix=TRANSITION_MATRIX):
    """All cyclically admissible exposed words of length 1..max_period, one per rotation class."""
    seen = set()
    n_sym = matrix.shape[0]
    for n in range(1, max_period + 1):
        for idx in itertools.product(range(n_sym), repeat=n):
            if not all(matrix[a, b] for a, b in zip(idx, idx[1:] + idx[:1])):
                continue
            key = min(idx[k:] + idx[:k] for k in range(n))
            if key in seen:
                continue
            seen.add(key)
            yield tuple(ex_symbol(i) for i in key)


# -- Markov chain / Parry measure ------------------------------------------

@dataclass
class MarkovChain:
    matrix: np.ndarray
    pi: np.ndarray
    P: np.ndarray
    perron: float
    entropy: float

    def as_dict(self):
        return {"matrix": self.matrix.tolist(), "pi": self.pi.tolist(), "P": self.P.tolist(),
                "perron_eigenvalue": self.perron, "entropy": self.entropy,
                "order": list(EX_NAMES)}


def _power_iteration(M, tol=1e-14, max_iter=100000):
    n = M.shape[0]
    # a lazy version (I + M)/2 has the same Perron vector and avoids periodicity issues
    L = 0.5 * (np.eye(n) + M)
    v = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        w = L @ v
        w /= w.sum()
        if np.max(np.abs(w - v)) < tol:
            v = w
            break
        v = w
    lam = float((M @ v).sum() / v.sum())
    return lam, v


def parry_measure(matrix=TRANSITION_MATRIX) -> MarkovChain:
    """Perron data of an irreducible 0/1 matrix and the associated Parry chain."""
    A = np.asarray(matrix, dtype=float)
    lam, right = _power_iteration(A)
    _, left = _power_iteration(A.T)
    pi = left * right
    pi /= pi.sum()
    P = A * right[None, :] / (lam * right[:, None])
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    entropy = float(-(pi[:, None] * terms).sum())
    return MarkovChain(np.asarray(matrix, dtype=int), pi, P, lam, entropy)


def sample_path(chain: MarkovChain, n: int, rng, start=None) -> np.ndarray:
    """Indices of a length-n stationary path of the chain."""
    k = len(chain.pi)
    cum = np.cumsum(chain.P, axis=1)
    cum[:, -1] = 1.0
    u = rng.random(n)
    out = np.empty(n, dtype=np.int64)
    state = int(np.searchsorted(np.cumsum(chain.pi), u[0], side="right")) if start is None else start
    state = min(state, k - 1)
    out[0] = state
    rows = [cum[i].tolist() for i in range(k)]
    path = [state]
    for ut in u[1:].tolist():
        state = bisect.bisect_right(rows[state], ut)
        path.append(state)
    out[:] = path
    return out


def block_frequencies(path: np.ndarray, k: int = 4):
    """Empirical one- and two-block frequencies of an index path."""
    single = np.bincount(path, minlength=k) / len(path)
    pairs = np.bincount(path[:-1] * k + path[1:], minlength=k * k).reshape(k, k) / (len(path) - 1)
    return single, pairs


def path_to_ex_word(path: Iterable[int]) -> tuple:
    return tuple(ex_symbol(int(i)) for i in path)


def entropy_rate(chain: MarkovChain) -> float:
    return chain.entropy


def max_entropy() -> float:
    return math.log(2.0)
