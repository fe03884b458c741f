"""Finite-depth dyadic sets built from per-block digit constraints.

Every set here is a product: the binary digit string is cut into consecutive
blocks, and each block independently takes one word from an allowed list.
The depth-``t`` survivors are the digit prefixes that extend to an allowed
string.  Comb sets, digit-constraint sets and the Cantor-type mean porous
construction all have this form.  Survivor lists are produced on demand, so
sets with millions of survivors can still be counted, probed and searched for
gaps.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .dyadic import CubeIndex, binary_index, format_cube, from_binary_index
from .errors import InstanceTooLarge, InvalidArgument

__all__ = [
    "Block",
    "DyadicSet",
    "PorousScaleSet",
    "comb_set",
    "full_set",
    "digit_constraint_set",
    "even_digits_zero",
    "example_set",
    "porous_scales",
    "has_m_hole",
    "write_survivors_csv",
]

MAX_EXAMPLE_DEPTH = 64
MAX_LISTED_SURVIVORS = 1 << 22


@dataclass(frozen=True, eq=False)
class Block:
    length: int
    words: np.ndarray  # sorted unique words, each < 2**length

    def __post_init__(self):
        w = np.unique(np.asarray(self.words, dtype=np.int64))
        if self.length < 1 or self.length > 62:
            raise InvalidArgument("block length must be in [1, 62]")
        if w.size == 0 or w[0] < 0 or w[-1] >= 1 << self.length:
            raise InvalidArgument("block words must be a nonempty subset of [0, 2^length)")
        object.__setattr__(self, "words", w)
        object.__setattr__(self, "prefixes",
                           [np.unique(w >> (self.length - q)) for q in range(self.length + 1)])

    def count_with_prefix(self, q: int, v: int, extra: int) -> int:
        """Number of distinct length-(q+extra) prefixes that start with ``v``."""
        arr = self.prefixes[q + extra]
        lo, hi = v << extra, (v + 1) << extra
        return int(np.searchsorted(arr, hi) - np.searchsorted(arr, lo))

    def allows(self, q: int, v: int) -> bool:
        arr = self.prefixes[q]
        i = np.searchsorted(arr, v)
        return bool(i < arr.size and arr[i] == v)


class DyadicSet:
    """Union of surviving dyadic intervals at each depth of a construction.

    ``arity_log`` is the natural grid of the construction (a 4-adic comb has
    ``arity_log=2``); depths passed to :meth:`count` and :meth:`survivors`
    count levels of that grid.  Everything else works in binary levels.
    """

    def __init__(self, blocks: Sequence[Block], rule: str, arity_log: int = 1,
                 params: dict | None = None):
        if not blocks:
            raise InvalidArgument("a set needs at least one block")
        self.blocks = tuple(blocks)
        self.rule = rule
        self.arity_log = arity_log
        self.params = dict(params or {})
        starts = np.cumsum([0] + [b.length for b in self.blocks])
        self._starts = [int(s) for s in starts]
        self.build_depth = self._starts[-1]
        self._summary_cache: dict[int, dict] = {}

    def __repr__(self) -> str:
        return f"DyadicSet(rule={self.rule!r}, build_depth={self.build_depth})"

    # -- automaton ------------------------------------------------------------

    def _locate(self, t: int) -> tuple[int, int]:
        """(block, offset) of binary level ``t`` (levels counted from 0)."""
        b = int(np.searchsorted(self._starts, t, side="right")) - 1
        return b, t - self._starts[b]

    def _check_depth(self, t: int):
        if not 0 <= t <= self.build_depth:
            raise InvalidArgument(f"depth {t} outside built range [0, {self.build_depth}]")

    def survives_bits(self, t: int, idx: int) -> bool:
        """True when the binary cube ``(t, idx)`` survives at depth ``t``."""
        self._check_depth(t)
        b, q = self._locate(t)
        for j in range(b):
            blk = self.blocks[j]
            shift = t - self._starts[j + 1]
            word = (idx >> shift) & ((1 << blk.length) - 1)
            if not blk.allows(blk.length, word):
                return False
        if q:
            return self.blocks[b].allows(q, idx & ((1 << q) - 1))
        return True

    def descendant_count_bits(self, t: int, idx: int, extra: int) -> int:
        """Surviving depth-``(t + extra)`` descendants of the cube ``(t, idx)``."""
        self._check_depth(t + extra)
        if not self.survives_bits(t, idx):
            return 0
        b, q = self._locate(t)
        v = idx & ((1 << q) - 1)
        total = 1
        while extra > 0:
            blk = self.blocks[b]
            avail = blk.length - q
            step = min(extra, avail)
            total *= blk.count_with_prefix(q, v, step)
            extra -= step
            b, q, v = b + 1, 0, 0
        return total

    def count_bits(self, t: int) -> int:
        return self.descendant_count_bits(0, 0, t)

    def count(self, depth: int) -> int:
        return self.count_bits(self.arity_log * depth)

    def survivors_bits(self, t: int) -> np.ndarray:
        self._check_depth(t)
        n = self.count_bits(t)
        if n > MAX_LISTED_SURVIVORS:
            raise InstanceTooLarge(f"{n} survivors at depth {t}; list them region by region")
        out = np.zeros(1, dtype=np.int64)
        for j, blk in enumerate(self.blocks):
            lo = self._starts[j]
            if lo >= t:
                break
            take = min(blk.length, t - lo)
            out = ((out[:, None] << take) | blk.prefixes[take][None, :]).ravel()
        return out

    def survivors(self, depth: int) -> list[CubeIndex]:
        t = self.arity_log * depth
        return [from_binary_index(t, int(i), self.arity_log) for i in self.survivors_bits(t)]

    def contains_cube(self, q: CubeIndex) -> bool:
        t, idx = binary_index(q)
        return self.survives_bits(t, idx)

    def sample_bits(self, seed: int, n: int, t: int | None = None) -> np.ndarray:
        """Indices of ``n`` random depth-``t`` survivors drawn from the natural
        (uniform-per-block) measure; each sample has its own generator."""
        t = self.build_depth if t is None else t
        self._check_depth(t)
        if t > 62:
            raise InstanceTooLarge("sampled indices are limited to 62 binary levels")
        out = np.zeros(n, dtype=np.int64)
        for i in range(n):
            rng = np.random.default_rng([seed, i])
            idx = 0
            for j, blk in enumerate(self.blocks):
                lo = self._starts[j]
                if lo >= t:
                    break
                word = int(blk.words[rng.integers(blk.words.size)])
                take = min(blk.length, t - lo)
                idx = (idx << take) | (word >> (blk.length - take))
            out[i] = idx
        return out

    # -- gap search -------------------------------------------------------------

    def _summary(self, n: int, t: int, b: int, q: int, v: int):
        """(first occupied leaf, last occupied leaf + 1, largest internal gap)
        of a surviving node, in depth-``n`` leaf units relative to the node."""
        cache = self._summary_cache.setdefault(n, {})
        key = (t, q, v) if t < self.build_depth else (t, 0, 0)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if t == n:
            res = (0, 1, 0)
        else:
            half = 1 << (n - t - 1)
            parts = []
            for c in (0, 1):
                nb, nq, nv = self._child_state(b, q, v, c)
                if nb is None:
                    continue
                s = self._summary(n, t + 1, nb, nq, nv)
                parts.append((c * half + s[0], c * half + s[1], s[2]))
            if len(parts) == 1:
                res = parts[0]
            else:
                (f0, l0, g0), (f1, l1, g1) = parts
                res = (f0, l1, max(g0, g1, f1 - l0))
        cache[key] = res
        return res

    def _child_state(self, b: int, q: int, v: int, c: int):
        blk = self.blocks[b]
        nv = (v << 1) | c
        if not blk.allows(q + 1, nv):
            return None, None, None
        if q + 1 == blk.length:
            return b + 1, 0, 0
        return b, q + 1, nv

    def largest_gap(self, lo, hi, n: int) -> Fraction:
        """Length of the longest subinterval of ``[lo, hi]`` missing every
        surviving depth-``n`` cube (binary levels)."""
        self._check_depth(n)
        lo, hi = Fraction(lo), Fraction(hi)
        if hi <= lo:
            return Fraction(0)
        scale = 1 << n
        a, bnd = lo * scale, hi * scale
        jlo = max(a.numerator // a.denominator, 0)
        jhi = min(bnd.numerator // bnd.denominator, scale - 1)
        state = {"prev": a, "best": Fraction(0)}

        def visit(t, b, q, v, left):
            size = 1 << (n - t)
            if left > jhi or left + size - 1 < jlo:
                return
            if jlo <= left and left + size - 1 <= jhi:
                first, last, inner = self._summary(n, t, b, q, v)
                gap = left + first - state["prev"]
                state["best"] = max(state["best"], gap, Fraction(inner))
                state["prev"] = max(state["prev"], Fraction(left + last))
                return
            for c in (0, 1):
                nb, nq, nv = self._child_state(b, q, v, c)
                if nb is not None:
                    visit(t + 1, nb, nq, nv, left + c * (size >> 1))

        if jlo <= jhi:
            visit(0, 0, 0, 0, 0)
        best = max(state["best"], bnd - state["prev"])
        return max(best, Fraction(0)) / scale


def _word_block(length: int, words: Iterable[int]) -> Block:
    return Block(length, np.fromiter(words, dtype=np.int64))


def full_set(depth: int) -> DyadicSet:
    return DyadicSet([_word_block(1, (0, 1))] * depth, "full")


def comb_set(arity_log: int, keep: Iterable[int], depth: int) -> DyadicSet:
    """Keep, at every 2^k-adic level, the cubes whose next digit is in ``keep``."""
    keep = sorted(set(int(d) for d in keep))
    if not keep or keep[0] < 0 or keep[-1] >= 1 << arity_log:
        raise InvalidArgument(f"keep must be a nonempty subset of [0, {1 << arity_log})")
    blk = _word_block(arity_log, keep)
    return DyadicSet([blk] * depth, "comb", arity_log,
                     {"arity_log": arity_log, "keep": keep, "depth": depth})


def digit_constraint_set(period: int, fixed: dict[int, int], depth: int) -> DyadicSet:
    """Binary digits at positions ``p`` (1-based) with ``p % period == r`` are
    forced to ``fixed[r]``; ``depth`` counts binary levels and is rounded up to
    whole periods."""
    if period < 1 or any(not 0 <= r < period for r in fixed) or \
            any(d not in (0, 1) for d in fixed.values()):
        raise InvalidArgument("fixed must map residues mod period to binary digits")
    words = []
    for w in range(1 << period):
        ok = True
        for r, d in fixed.items():
            pos = period if r == 0 else r        # 1-based position inside the period
            if (w >> (period - pos)) & 1 != d:
                ok = False
        if ok:
            words.append(w)
    if not words:
        raise InvalidArgument("constraints leave no admissible word")
    blk = _word_block(period, words)
    nblocks = -(-depth // period)
    return DyadicSet([blk] * nblocks, "digit-constraint", 1,
                     {"period": period, "fixed": dict(fixed), "depth": depth})


def even_digits_zero(depth: int) -> DyadicSet:
    """Points whose binary digits at even positions are all 0."""
    return digit_constraint_set(2, {0: 0}, depth)


def example_set(m: int, k: int, n: int, l_max: int) -> DyadicSet:
    """Cantor-type mean porous set, truncated after ``l_max`` blocks.

    Block ``l`` applies ``m*n*l`` two-ends Cantor maps of ratio ``2^-(n*k)``
    followed by one step keeping every other interval of length
    ``2^-((n*k - m*n)*n*k*l)``.
    """
    if not (0 < m < k) or n < 1 or l_max < 1:
        raise InvalidArgument("example_set needs 0 < m < k, n >= 1, l_max >= 1")
    nk = n * k
    depth = nk * nk * l_max * (l_max + 1) // 2
    if depth > MAX_EXAMPLE_DEPTH:
        raise InstanceTooLarge(f"example set needs {depth} binary levels "
                               f"(limit {MAX_EXAMPLE_DEPTH})")
    cantor = _word_block(nk, (0, (1 << nk) - 1))
    free, zero = _word_block(1, (0, 1)), _word_block(1, (0,))
    blocks: list[Block] = []
    for l in range(1, l_max + 1):
        blocks += [cantor] * (m * n * l)
        f_len = (nk - m * n) * nk * l
        blocks += [free] * (f_len - 1) + [zero]
    return DyadicSet(blocks, "example", 1, {"m": m, "k": k, "n": n, "l_max": l_max})


def example_dimension(m: int, k: int, n: int) -> float:
    """Hausdorff dimension claimed for the untruncated construction."""
    return 1 - m / k + m / (n * k * k)


# -- porous scales --------------------------------------------------------------

@dataclass(frozen=True)
class PorousScaleSet:
    """Scales ``s`` with ``s - (l^2+l)/2 (nk)^2`` in ``{0, ..., (mnl-1)nk - 1}``."""

    m: int
    k: int
    n: int
    l_max: int | None = None

    def block(self, l: int) -> range:
        nk = self.n * self.k
        start = (l * l + l) // 2 * nk * nk
        return range(start, start + max(self.m * self.n * l - 1, 0) * nk)

    def contains(self, s: int) -> bool:
        nk2 = (self.n * self.k) ** 2
        # largest l with (l^2+l)/2 nk^2 <= s; then test its block
        lo, hi = 0, 1
        while (hi * hi + hi) // 2 * nk2 <= s:
            hi *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if (mid * mid + mid) // 2 * nk2 <= s:
                lo = mid
            else:
                hi = mid
        if lo < 1 or (self.l_max is not None and lo > self.l_max):
            return False
        return s in self.block(lo)


def porous_scales(ps: PorousScaleSet, S: int) -> tuple[list[int], float]:
    """Scales ``1 <= s < S`` in the set and their density ``count / S``."""
    if S < 1:
        raise InvalidArgument("S must be at least 1")
    out: list[int] = []
    l = 1
    while True:
        if ps.l_max is not None and l > ps.l_max:
            break
        blk = ps.block(l)
        if blk.start >= S:
            break
        out.extend(s for s in blk if 1 <= s < S)
        l += 1
    return out, len(out) / S


# -- holes ------------------------------------------------------------------

def has_m_hole(E: DyadicSet, D: CubeIndex, m: int) -> bool:
    """True when some depth-(j+m) dyadic subinterval of ``D`` misses ``E``."""
    if m < 1:
        raise InvalidArgument("m must be a positive integer")
    t, idx = binary_index(D)
    if t + m > E.build_depth:
        raise InvalidArgument(f"hole test needs depth {t + m} > built {E.build_depth}")
    return E.descendant_count_bits(t, idx, m) < (1 << m)


def has_m_hole_bits(E: DyadicSet, t: int, idx: int, m: int) -> bool:
    if t + m > E.build_depth:
        raise InvalidArgument(f"hole test needs depth {t + m} > built {E.build_depth}")
    return E.descendant_count_bits(t, idx, m) < (1 << m)


def write_survivors_csv(E: DyadicSet, depths: Iterable[int], path) -> int:
    rows = 0
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["depth", "cube_id"])
        for depth in depths:
            t = E.arity_log * depth
            for idx in E.survivors_bits(t):
                out.writerow([depth, format_cube(from_binary_index(t, int(idx), E.arity_log))])
                rows += 1
    return rows
