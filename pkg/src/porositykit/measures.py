"""Multiplicative cascade measures on [0, 1].

A cascade assigns, at every level ``i`` of the 2^k-adic tree, a probability
vector over the ``2^k`` digits.  The mass of a cube is the product of the
weights along its digit path, so every measure here is determined by a
``(max_depth, 2^k)`` weight table.

Queries are also available on the binary grid (``*_bits`` methods), which
lets porosity searches mix the measure's own arity with dyadic resolution.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .dyadic import CubeIndex, binary_index, format_cube, from_binary_index
from .errors import DegenerateBall, InvalidArgument

__all__ = [
    "CascadeMeasure",
    "MassBracket",
    "SamplePoint",
    "counterexample_measure",
    "bernoulli_cascade",
    "lebesgue",
    "comb_measure",
    "custom_measure",
    "counterexample_w",
    "mass_of_cube",
    "mass_of_ball",
    "sample_point",
    "sample_points",
    "write_masses_csv",
]

WEIGHT_SUM_TOL = 1e-12
LOG_DOMAIN_DEPTH = 64


@dataclass(frozen=True, eq=False)
class CascadeMeasure:
    arity_log: int
    weights: np.ndarray
    name: str = "custom"
    params: dict = field(default_factory=dict)
    log_domain: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[1] != 1 << self.arity_log or w.shape[0] < 1:
            raise InvalidArgument(
                f"weight table must have shape (max_depth, {1 << self.arity_log})")
        if (w < 0).any() or (w > 1).any():
            raise InvalidArgument("weights must lie in [0, 1]")
        bad = np.abs(w.sum(axis=1) - 1.0) > WEIGHT_SUM_TOL
        if bad.any():
            level = int(np.argmax(bad)) + 1
            raise InvalidArgument(f"weights at level {level} do not sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        with np.errstate(divide="ignore"):
            lw = np.log2(w)
        lw.setflags(write=False)
        object.__setattr__(self, "_log2w", lw)
        cum = np.cumsum(w, axis=1)
        cum[:, -1] = 1.0
        object.__setattr__(self, "_cum", cum)
        nonzero = np.where(w > 0, np.arange(w.shape[1]), -1)
        object.__setattr__(self, "_last_nonzero", nonzero.max(axis=1))

    @classmethod
    def from_rule(cls, arity_log: int, rule: Callable[[int, int], float],
                  max_depth: int, **kw) -> "CascadeMeasure":
        """Tabulate ``rule(level, digit)`` for levels 1..max_depth."""
        base = 1 << arity_log
        table = [[rule(i, j) for j in range(base)] for i in range(1, max_depth + 1)]
        return cls(arity_log, np.array(table, dtype=float), **kw)

    @property
    def max_depth(self) -> int:
        return self.weights.shape[0]

    @property
    def max_bits(self) -> int:
        return self.arity_log * self.max_depth

    def weight(self, level: int, digit: int) -> float:
        return float(self.weights[level - 1, digit])

    # -- binary-grid queries -------------------------------------------------

    def _check_bits(self, t: int):
        if not 0 <= t <= self.max_bits:
            raise InvalidArgument(
                f"depth {t} binary levels exceeds measure depth {self.max_bits}")

    def _split(self, t: int, idx: int):
        k = self.arity_log
        full, rem = divmod(t, k)
        top = idx >> rem
        part = idx & ((1 << rem) - 1)
        digits = [(top >> (k * (full - 1 - i))) & ((1 << k) - 1) for i in range(full)]
        return full, rem, digits, part

    def log2_mass_bits(self, t: int, idx: int) -> float:
        """log2 of the mass of the binary cube ``[idx, idx+1) * 2^-t``."""
        self._check_bits(t)
        full, rem, digits, part = self._split(t, idx)
        lw = self._log2w
        total = math.fsum(lw[i, d] for i, d in enumerate(digits)) if digits else 0.0
        if rem:
            span = 1 << (self.arity_log - rem)
            s = float(self.weights[full, part * span:(part + 1) * span].sum())
            total += math.log2(s) if s > 0 else -math.inf
        return total

    def mass_bits(self, t: int, idx: int) -> float:
        if self.log_domain or t > LOG_DOMAIN_DEPTH:
            return float(2.0 ** self.log2_mass_bits(t, idx))
        self._check_bits(t)
        full, rem, digits, part = self._split(t, idx)
        out = 1.0
        for i, d in enumerate(digits):
            out *= self.weights[i, d]
        if rem:
            span = 1 << (self.arity_log - rem)
            out *= float(self.weights[full, part * span:(part + 1) * span].sum())
        return float(out)

    def relative_masses(self, c: int, t: int) -> np.ndarray:
        """Masses of the depth-``t`` descendants of a depth-``c`` cube, divided
        by the mass of that cube.  ``c`` must sit on a digit boundary."""
        k = self.arity_log
        if c % k:
            raise InvalidArgument("relative_masses needs a digit-aligned start")
        self._check_bits(t)
        full_hi = -(-t // k)
        out = np.ones(1)
        for level in range(c // k, min(full_hi, self.max_depth)):
            out = np.multiply.outer(out, self.weights[level]).ravel()
        extra = full_hi * k - t
        if extra:
            out = out.reshape(-1, 1 << extra).sum(axis=1)
        return out

    def level_masses(self, t: int) -> np.ndarray:
        """Masses of all binary cubes at depth ``t`` in index order."""
        if t > 26:
            raise InvalidArgument(f"level_masses at depth {t} would need 2^{t} entries")
        return self.relative_masses(0, t)

    def leaf_masses(self, t: int, lo: int, hi: int) -> np.ndarray:
        """Masses of binary depth-``t`` cubes ``lo..hi-1``; zero outside [0, 1)."""
        self._check_bits(t)
        out = np.zeros(max(hi - lo, 0))
        a, b = max(lo, 0), min(hi, 1 << t)
        if a >= b:
            return out
        k = self.arity_log
        span = max((b - a - 1).bit_length(), 0)
        # coarse cubes on a digit boundary, rounded up so the relative table
        # stays near the window size; a few more coarse pieces are cheap
        c = -(-max(t - span - 1, 0) // k) * k
        if c > t:
            c = t - t % k
        shift = t - c
        rel = self.relative_masses(c, t)
        pieces = []
        for j in range(a >> shift, ((b - 1) >> shift) + 1):
            pieces.append(self.mass_bits(c, j) * rel)
        block = np.concatenate(pieces)
        start = (a >> shift) << shift
        out[a - lo:b - lo] = block[a - start:b - start]
        return out

    def log2_mass_many(self, t: int, idx) -> np.ndarray:
        """Vectorised :meth:`log2_mass_bits` for an array of depth-``t`` indices."""
        self._check_bits(t)
        if t > 62:
            raise InvalidArgument("vectorised lookups are limited to 62 binary levels")
        idx = np.asarray(idx, dtype=np.int64)
        k = self.arity_log
        full, rem = divmod(t, k)
        out = np.zeros(idx.shape)
        mask = (1 << k) - 1
        for i in range(full):
            digit = (idx >> (t - k * (i + 1))) & mask
            out += self._log2w[i, digit]
        if rem:
            span = 1 << (k - rem)
            part_w = self.weights[full].reshape(-1, span).sum(axis=1)
            with np.errstate(divide="ignore"):
                out += np.log2(part_w)[idx & ((1 << rem) - 1)]
        return out

    def interval_mass(self, t: int, lo: int, hi: int) -> float:
        """Mass of the union of binary depth-``t`` cubes ``lo..hi-1``."""
        lo, hi = max(lo, 0), min(hi, 1 << t)
        parts = []
        while lo < hi:
            size_log = (lo & -lo).bit_length() - 1 if lo else t
            while (1 << size_log) > hi - lo:
                size_log -= 1
            parts.append(self.mass_bits(t - size_log, lo >> size_log))
            lo += 1 << size_log
        return math.fsum(parts)

    def __repr__(self) -> str:
        return (f"CascadeMeasure(name={self.name!r}, arity_log={self.arity_log}, "
                f"max_depth={self.max_depth})")


@dataclass(frozen=True)
class MassBracket:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower < 0 or self.lower > self.upper:
            raise InvalidArgument("mass bracket needs 0 <= lower <= upper")

    @property
    def width(self) -> float:
        return self.upper - self.lower


# -- constructors -------------------------------------------------------------

def counterexample_w(i, log_base: float = math.e):
    """The slowly decaying hole weight ``1 / log(i + 2)``."""
    return 1.0 / (np.log(np.asarray(i, dtype=float) + 2.0) / math.log(log_base))


def counterexample_measure(log_base: float = math.e, max_depth: int = 256) -> CascadeMeasure:
    """Binary cascade whose heavy child alternates sides from level to level.

    Digit 0 at level ``i`` receives ``w(i)`` when ``i`` is odd and ``1 - w(i)``
    when ``i`` is even.
    """
    if log_base <= 1:
        raise InvalidArgument("log_base must exceed 1")
    levels = np.arange(1, max_depth + 1)
    w = counterexample_w(levels, log_base)
    if not (w[0] < 1):
        raise InvalidArgument("log_base gives w(1) >= 1")
    s = np.where(levels % 2 == 1, w, 1.0 - w)
    table = np.stack([s, 1.0 - s], axis=1)
    return CascadeMeasure(1, table, name="counterexample",
                          params={"log_base": float(log_base)})


def bernoulli_cascade(q: float, max_depth: int = 256) -> CascadeMeasure:
    if not 0 < q < 1:
        raise InvalidArgument("bernoulli_cascade needs 0 < q < 1")
    table = np.tile([q, 1.0 - q], (max_depth, 1))
    return CascadeMeasure(1, table, name="bernoulli", params={"q": float(q)})


def lebesgue(max_depth: int = 256) -> CascadeMeasure:
    m = bernoulli_cascade(0.5, max_depth)
    return CascadeMeasure(1, m.weights, name="lebesgue")


def comb_measure(arity_log: int, keep: Iterable[int], max_depth: int = 64) -> CascadeMeasure:
    """Uniform measure on the 2^k-adic comb that keeps the digits ``keep``."""
    keep = sorted(set(int(d) for d in keep))
    base = 1 << arity_log
    if not keep or keep[0] < 0 or keep[-1] >= base:
        raise InvalidArgument(f"keep must be a nonempty subset of [0, {base})")
    row = np.zeros(base)
    row[keep] = 1.0 / len(keep)
    return CascadeMeasure(arity_log, np.tile(row, (max_depth, 1)), name="comb",
                          params={"keep": keep})


def custom_measure(arity_log: int, table: Sequence[Sequence[float]],
                   max_depth: int) -> CascadeMeasure:
    """Per-level weight rows; levels past the table reuse its last row."""
    rows = [list(map(float, r)) for r in table]
    if not rows:
        raise InvalidArgument("custom measure needs at least one weight row")
    rows = rows[:max_depth] + [rows[-1]] * max(0, max_depth - len(rows))
    return CascadeMeasure(arity_log, np.array(rows), name="custom")


# -- queries -----------------------------------------------------------------

def mass_of_cube(m: CascadeMeasure, q: CubeIndex, log2: bool = False) -> float:
    t, idx = binary_index(q)
    if t > m.max_bits:
        raise InvalidArgument(f"cube depth {q.depth} exceeds measure depth")
    return m.log2_mass_bits(t, idx) if log2 else m.mass_bits(t, idx)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def mass_of_ball(m: CascadeMeasure, x, r, resolution_depth: int) -> MassBracket:
    """Bracket the mass of the closed ball ``[x - r, x + r]``.

    ``resolution_depth`` is in binary levels.  The lower value sums the
    resolution cubes contained in the ball, the upper value those meeting it.
    """
    x, r = Fraction(x), Fraction(r)
    n = resolution_depth
    if r <= 0 or Fraction(1, 1 << n) > r:
        raise InvalidArgument("resolution must be at least as fine as the radius")
    a, b = (x - r) * (1 << n), (x + r) * (1 << n)
    in_lo, in_hi = -_floor(-a), _floor(b)          # cubes in_lo..in_hi-1 inside
    hit_lo, hit_hi = _floor(a), _floor(b) + 1      # cubes meeting the ball
    lower = m.interval_mass(n, in_lo, in_hi) if in_hi > in_lo else 0.0
    upper = m.interval_mass(n, hit_lo, hit_hi)
    return MassBracket(min(lower, upper), upper)


# -- sampling ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SamplePoint:
    """A μ-random point known through its first ``depth`` digits."""

    arity_log: int
    digits: np.ndarray

    @property
    def depth(self) -> int:
        return len(self.digits)

    def index_bits(self, t: int) -> int:
        """Index of the binary depth-``t`` cube containing the point."""
        k = self.arity_log
        full, rem = divmod(t, k)
        if full + (1 if rem else 0) > self.depth:
            raise InvalidArgument(f"point known to {k * self.depth} binary levels only")
        idx = 0
        for d in self.digits[:full]:
            idx = (idx << k) | int(d)
        if rem:
            idx = (idx << rem) | (int(self.digits[full]) >> (k - rem))
        return idx

    def cube(self, depth: int) -> CubeIndex:
        return CubeIndex(self.arity_log, tuple(int(d) for d in self.digits[:depth]))

    @property
    def exact(self) -> Fraction:
        """Centre of the deepest known cube."""
        t = self.arity_log * self.depth
        return Fraction(2 * self.index_bits(t) + 1, 1 << (t + 1))

    @property
    def value(self) -> float:
        return float(self.exact)

    def label(self) -> str:
        return format_cube(self.cube(self.depth))


def _draw_digits(m: CascadeMeasure, rng: np.random.Generator, depth: int) -> np.ndarray:
    if depth > m.max_depth:
        raise InvalidArgument(f"sample depth {depth} exceeds measure depth {m.max_depth}")
    u = rng.random(depth)
    if m.arity_log == 1:
        digits = (u >= m.weights[:depth, 0]).astype(np.uint8)
    else:
        cum = m._cum[:depth, :-1]
        digits = (cum <= u[:, None]).sum(axis=1)
        digits = np.minimum(digits, m._last_nonzero[:depth]).astype(np.uint16)
    return digits


def sample_point(m: CascadeMeasure, seed: int, depth: int) -> SamplePoint:
    """Draw digits level by level from the measure's weights."""
    return SamplePoint(m.arity_log, _draw_digits(m, np.random.default_rng(seed), depth))


def sample_points(m: CascadeMeasure, seed: int, depth: int, n: int) -> list[SamplePoint]:
    """``n`` points; sample ``i`` uses its own generator seeded by ``(seed, i)``."""
    return [SamplePoint(m.arity_log,
                        _draw_digits(m, np.random.default_rng([seed, i]), depth))
            for i in range(n)]


def write_masses_csv(m: CascadeMeasure, depth: int, path) -> int:
    """Write ``cube_id, mass, log2_mass`` for every cube at ``depth`` (measure digits)."""
    t = m.arity_log * depth
    masses = m.level_masses(t)
    with np.errstate(divide="ignore"):
        logs = np.log2(masses)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["cube_id", "mass", "log2_mass"])
        for idx, (mass, lg) in enumerate(zip(masses, logs)):
            q = from_binary_index(t, idx, m.arity_log)
            out.writerow([format_cube(q), repr(float(mass)), repr(float(lg))])
    return len(masses)
