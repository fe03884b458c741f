"""Half-open 2^k-adic cubes of [0,1)^d with exact dyadic geometry.

A cube at depth ``i`` is addressed by its digit path from the root.  Each
digit packs one k-bit coordinate per axis: ``digit = sum(c_a << (k*a))``.
All geometry is done with :class:`fractions.Fraction`, so boundary tests
on the half-open cubes are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidArgument

__all__ = [
    "CubeIndex",
    "Box",
    "root",
    "child_cubes",
    "ancestor",
    "magnify",
    "cube_containing",
    "format_cube",
    "parse_cube",
]


@dataclass(frozen=True)
class CubeIndex:
    arity_log: int
    digits: tuple[int, ...] = ()
    dim: int = 1

    def __post_init__(self):
        if self.arity_log < 1:
            raise InvalidArgument("arity_log must be a positive integer")
        if self.dim < 1:
            raise InvalidArgument("dim must be a positive integer")
        base = 1 << (self.arity_log * self.dim)
        digits = tuple(int(x) for x in self.digits)
        for x in digits:
            if not 0 <= x < base:
                raise InvalidArgument(f"digit {x} outside [0, {base})")
        object.__setattr__(self, "digits", digits)

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def side(self) -> Fraction:
        return Fraction(1, 1 << (self.arity_log * self.depth))

    def coords(self) -> tuple[int, ...]:
        """Integer lower corner per axis, in units of the side length."""
        k, mask = self.arity_log, (1 << self.arity_log) - 1
        out = [0] * self.dim
        for digit in self.digits:
            for a in range(self.dim):
                out[a] = (out[a] << k) | ((digit >> (k * a)) & mask)
        return tuple(out)

    def box(self) -> "Box":
        s = self.side
        return Box(tuple((c * s, (c + 1) * s) for c in self.coords()))

    def centre(self) -> tuple[Fraction, ...]:
        s = self.side
        return tuple((2 * c + 1) * s / 2 for c in self.coords())

    def contains_point(self, point) -> bool:
        return self.box().contains(point)

    def contains(self, other: "CubeIndex") -> bool:
        """True when ``other`` is a (non-strict) descendant of ``self``."""
        a, b = self.to_binary(), other.to_binary()
        return (a.dim == b.dim and a.depth <= b.depth
                and b.digits[:a.depth] == a.digits)

    def to_binary(self) -> "CubeIndex":
        """Same cube expressed on the dyadic (k=1) grid."""
        if self.arity_log == 1:
            return self
        coords, k = self.coords(), self.arity_log
        return _from_coords(1, self.dim, coords, k * self.depth)

    def to_arity(self, arity_log: int) -> "CubeIndex":
        """Re-express on the 2^arity_log-adic grid; depth must divide evenly."""
        if arity_log == self.arity_log:
            return self
        bits = self.arity_log * self.depth
        if bits % arity_log:
            raise InvalidArgument(
                f"cube of {bits} binary levels is not on the 2^{arity_log}-adic grid")
        return _from_coords(arity_log, self.dim, self.coords(), bits // arity_log)

    def __str__(self) -> str:
        return format_cube(self)


@dataclass(frozen=True)
class Box:
    """Axis-parallel box given by per-axis half-open intervals [lo, hi)."""

    bounds: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        bounds = tuple((Fraction(lo), Fraction(hi)) for lo, hi in self.bounds)
        for lo, hi in bounds:
            if not lo < hi:
                raise InvalidArgument("box needs lower < upper on every axis")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def contains(self, point) -> bool:
        point = _as_point(point, self.dim)
        return all(lo <= p < hi for p, (lo, hi) in zip(point, self.bounds))


def _as_point(point, dim: int) -> tuple[Fraction, ...]:
    if not isinstance(point, (tuple, list)):
        point = (point,)
    if len(point) != dim:
        raise InvalidArgument(f"expected a point in dimension {dim}")
    return tuple(Fraction(p) for p in point)


def _from_coords(k: int, dim: int, coords: Sequence[int], depth: int) -> CubeIndex:
    mask = (1 << k) - 1
    digits = []
    for level in range(depth):
        shift = k * (depth - 1 - level)
        digit = 0
        for a in range(dim):
            digit |= ((coords[a] >> shift) & mask) << (k * a)
        digits.append(digit)
    return CubeIndex(k, tuple(digits), dim)


def root(arity_log: int = 1, dim: int = 1) -> CubeIndex:
    return CubeIndex(arity_log, (), dim)


def child_cubes(q: CubeIndex) -> list[CubeIndex]:
    return [CubeIndex(q.arity_log, q.digits + (j,), q.dim)
            for j in range(1 << (q.arity_log * q.dim))]


def ancestor(q: CubeIndex, j: int) -> CubeIndex:
    if not 0 <= j <= q.depth:
        raise InvalidArgument(f"ancestor depth {j} not in [0, {q.depth}]")
    return CubeIndex(q.arity_log, q.digits[:j], q.dim)


def magnify(q: CubeIndex | Box, factor) -> Box:
    """Scale ``q`` about its centre.  Floats are converted exactly."""
    factor = Fraction(factor)
    if factor <= 0:
        raise InvalidArgument("magnification factor must be positive")
    box = q.box() if isinstance(q, CubeIndex) else q
    out = []
    for lo, hi in box.bounds:
        c, h = (lo + hi) / 2, (hi - lo) / 2
        out.append((c - factor * h, c + factor * h))
    return Box(tuple(out))


def cube_containing(point, depth: int, arity_log: int = 1) -> CubeIndex:
    """The depth-``depth`` cube whose half-open box contains ``point``."""
    if isinstance(point, (tuple, list)):
        pt = tuple(Fraction(p) for p in point)
    else:
        pt = (Fraction(point),)
    n = 1 << (arity_log * depth)
    coords = []
    for p in pt:
        if not 0 <= p < 1:
            raise InvalidArgument(f"point coordinate {p} outside [0, 1)")
        coords.append(int(p * n))  # floor for nonnegative p
    return _from_coords(arity_log, len(pt), coords, depth)


def format_cube(q: CubeIndex) -> str:
    return f"{q.arity_log}:{q.depth}:" + ".".join(str(x) for x in q.digits)


def parse_cube(text: str, dim: int = 1) -> CubeIndex:
    try:
        k, i, body = text.strip().split(":")
        digits = tuple(int(x) for x in body.split(".")) if body else ()
        k, i = int(k), int(i)
    except ValueError as exc:
        raise InvalidArgument(f"malformed cube id {text!r}") from exc
    if len(digits) != i:
        raise InvalidArgument(f"cube id {text!r}: depth {i} but {len(digits)} digits")
    return CubeIndex(k, digits, dim)


def binary_index(q: CubeIndex) -> tuple[int, int]:
    """(binary depth, integer index) of a 1-d cube."""
    if q.dim != 1:
        raise InvalidArgument("binary_index is defined for d = 1 only")
    return q.arity_log * q.depth, q.coords()[0]


def from_binary_index(depth: int, index: int, arity_log: int = 1) -> CubeIndex:
    """Inverse of :func:`binary_index`, re-expressed on the requested grid."""
    if not 0 <= index < (1 << depth):
        raise InvalidArgument(f"index {index} outside depth-{depth} range")
    return _from_coords(1, 1, (index,), depth).to_arity(arity_log)


def iter_depth(arity_log: int, depth: int, dim: int = 1) -> Iterable[CubeIndex]:
    """All cubes at ``depth`` in lexicographic digit order."""
    base = 1 << (arity_log * dim)
    total = base ** depth
    for n in range(total):
        digits = []
        for _ in range(depth):
            n, r = divmod(n, base)
            digits.append(r)
        yield CubeIndex(arity_log, tuple(reversed(digits)), dim)
