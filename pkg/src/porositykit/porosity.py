"""Porosity of sets and measures at finite dyadic resolution (d = 1).

Everything is measured on the binary grid of step ``h = 2^-n``.  A set's hole
is the longest gap between its depth-``n`` survivors.  A measure's hole is a
closed grid interval whose covering leaves carry little mass, which makes the
measure values certified lower estimates.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.ndimage import minimum_filter1d

from .errors import DegenerateBall, InvalidArgument
from .measures import CascadeMeasure, SamplePoint
from .sets import DyadicSet, has_m_hole_bits

__all__ = [
    "PorosityProfile",
    "por_set",
    "por_measure",
    "measure_hole",
    "porous_flags_at_points",
    "porosity_profile",
    "mean_porosity_fraction",
    "flag_matrix",
    "running_fractions",
    "m_hole_frequency",
    "select_offset",
    "write_profile_csv",
]

MAX_WINDOW_BITS = 22
DEFAULT_WINDOW_BITS = 12


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _as_point(x) -> Fraction:
    if isinstance(x, SamplePoint):
        return x.exact
    return Fraction(x)


def _check_resolution(r: Fraction, n: int):
    if r <= 0:
        raise InvalidArgument("radius must be positive")
    if n < 0 or Fraction(8, 1 << n) > r:
        raise InvalidArgument(f"resolution 2^-{n} is coarser than r/8")


# -- sets -------------------------------------------------------------------

def por_set(A: DyadicSet, x, r, resolution_depth: int | None = None) -> float:
    """Half the longest gap of ``A`` inside ``[x - r, x + r]``, divided by ``r``.

    The gap is measured against the depth-``resolution_depth`` survivors, so
    the value is within ``2^-resolution_depth / r`` of the true porosity.
    """
    x, r = _as_point(x), Fraction(r)
    n = A.build_depth if resolution_depth is None else min(resolution_depth, A.build_depth)
    _check_resolution(r, n)
    return float(A.largest_gap(x - r, x + r, n) / (2 * r))


# -- measures ---------------------------------------------------------------

@dataclass(frozen=True)
class MeasureHole:
    value: float          # alpha of the best certified hole
    slack: float          # grid error bound h / r
    ball_lower: float
    ball_upper: float
    hole_mass: float      # upper bracket of the chosen hole's mass
    hole: tuple[Fraction, Fraction] | None


def measure_hole(m: CascadeMeasure, x, r, eps: float, resolution_depth: int,
                 optimistic: bool = False) -> MeasureHole:
    """Best grid hole for ``por(m, x, r, eps)``; see :func:`por_measure`."""
    if not 0 < eps < 1:
        raise InvalidArgument("eps must lie in (0, 1)")
    x, r, n = _as_point(x), Fraction(r), resolution_depth
    _check_resolution(r, n)
    if n > m.max_bits:
        raise InvalidArgument(f"resolution {n} exceeds measure depth {m.max_bits}")
    scale = 1 << n
    a, b = (x - r) * scale, (x + r) * scale
    lo, hi = _ceil(a), _floor(b)               # admissible hole endpoints
    if hi - lo > 1 << MAX_WINDOW_BITS:
        raise InvalidArgument("ball spans too many resolution cells; lower the resolution")
    first = _floor(a)
    leaves = m.leaf_masses(n, first, hi + 1)   # leaves first..hi meet the ball
    P = np.concatenate(([0.0], np.cumsum(leaves)))
    ball_lower = float(P[hi - first] - P[lo - first])      # leaves lo..hi-1 inside
    ball_upper = float(P[-1])
    if ball_upper <= 0:
        raise DegenerateBall(f"ball around {float(x)} of radius {float(r)} has no mass")
    ball_lower = min(ball_lower, ball_upper)
    starts = np.arange(lo, hi + 1) - first
    thr = eps * (ball_upper if optimistic else ball_lower)
    top = np.searchsorted(P, P[starts] + thr, side="right") - 1    # largest t, P[t] <= target
    # the hole [i h, j h] meets leaves i..j; the optimistic variant charges
    # only the leaves i..j-1 lying inside it
    j = np.minimum(top if optimistic else top - 1, hi - first)
    length = j - starts
    ok = length >= 0
    if not ok.any():
        return MeasureHole(0.0, float(1 / (scale * r)), ball_lower, ball_upper, 0.0, None)
    length = np.where(ok, length, -1)
    best = int(np.argmax(length))
    L = int(length[best])
    i0 = int(starts[best]) + first
    mass = float(P[i0 + L + 1 - first] - P[i0 - first]) if L >= 0 else 0.0
    value = float(Fraction(L, scale) / (2 * r))
    return MeasureHole(min(value, 1.0), float(1 / (scale * r)), ball_lower, ball_upper,
                       mass, (Fraction(i0, scale), Fraction(i0 + L, scale)))


def por_measure(m: CascadeMeasure, x, r, eps: float, resolution_depth: int,
                optimistic: bool = False) -> float:
    """Certified lower estimate of ``por(m, x, r, eps)``.

    Holes are closed intervals with grid endpoints inside ``[x - r, x + r]``;
    a hole is accepted when the mass of the leaves meeting it is at most
    ``eps`` times the mass of the leaves inside the ball.  With
    ``optimistic=True`` the bracket roles swap and the value is an estimate
    from above instead.
    """
    return measure_hole(m, x, r, eps, resolution_depth, optimistic).value


def porous_flags_at_points(m: CascadeMeasure, grid_points: np.ndarray, n: int, s: int,
                           eps: float, alpha: float) -> np.ndarray:
    """Vectorised test of ``por(m, x, 2^-s, eps) >= alpha``.

    ``grid_points`` are integers ``g`` with ``x = g * 2^-n``.  A hole of
    ``ceil(2 alpha r / h)`` cells is required, so a True flag is certified
    without slack.
    """
    if n - s < 3:
        raise InvalidArgument("resolution must be at least 3 levels finer than the scale")
    if n - s > MAX_WINDOW_BITS:
        raise InvalidArgument("scale too coarse for the resolution")
    g = np.asarray(grid_points, dtype=np.int64)
    if g.size == 0:
        return np.zeros(0, dtype=bool)
    R = 1 << (n - s)                            # radius in cells
    Lh = math.ceil(2 * alpha * R - 1e-12)
    if 2 * R - Lh + 1 <= 0:
        return np.zeros(g.size, dtype=bool)
    # scattered points are handled in clusters so each leaf window stays small
    order = np.argsort(g, kind="stable")
    gs = g[order]
    out = np.zeros(g.size, dtype=bool)
    cap = max(1 << MAX_WINDOW_BITS, 4 * R)
    gaps = np.flatnonzero(np.diff(gs) > 2 * R) + 1
    for a, b in zip(np.r_[0, gaps], np.r_[gaps, gs.size]):
        while a < b:                       # split long runs of close points
            c = min(int(np.searchsorted(gs, gs[a] + cap, side="right")), b)
            out[order[a:c]] = _flags_cluster(m, gs[a:c], n, R, Lh, eps)
            a = c
    return out


def _flags_cluster(m: CascadeMeasure, g: np.ndarray, n: int, R: int, Lh: int,
                   eps: float) -> np.ndarray:
    lo, hi = int(g.min()) - R, int(g.max()) + R
    leaves = m.leaf_masses(n, lo, hi + 1)
    P = np.concatenate(([0.0], np.cumsum(leaves)))
    base = g - R - lo
    ball = P[base + 2 * R] - P[base]
    # hole starting at leaf i covers leaves i..i+Lh
    H = P[Lh + 1:] - P[:P.size - Lh - 1]
    W = 2 * R - Lh + 1
    # forward-looking window minimum: M[i] = min(H[i..i+W-1])
    M = minimum_filter1d(H, size=W, origin=-(W // 2), mode="constant", cval=np.inf)
    return M[base] <= eps * ball


# -- profiles -----------------------------------------------------------------

@dataclass
class PorosityProfile:
    x: Fraction
    offset: int
    arity_log: int
    scales: np.ndarray          # j = 1..i_max
    radius_log2: np.ndarray     # log2 r_j = -k j + t
    values: np.ndarray
    slack: np.ndarray
    resolution: np.ndarray      # binary resolution used per scale
    params: dict = field(default_factory=dict)
    point_id: str = ""

    def __post_init__(self):
        v = self.values
        if v.size and (v.min() < 0 or v.max() > 1):
            raise InvalidArgument("porosity values must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.values)

    def flags(self, alpha: float) -> np.ndarray:
        return self.values >= alpha - self.slack


def porosity_profile(target, x, i_max: int, offset: int = 0, arity_log: int = 1,
                     eps: float | None = None, resolution_depth: int | None = None,
                     window_bits: int = DEFAULT_WINDOW_BITS,
                     point_id: str = "") -> PorosityProfile:
    """Porosity at ``x`` for the radii ``r_j = 2^(-k j + t)``, ``j = 1..i_max``.

    For sets the resolution is ``resolution_depth`` (default: the build depth).
    For measures each scale uses ``min(resolution_depth, s + window_bits)``
    binary levels, ``s`` being the scale's binary exponent.
    """
    px = _as_point(x)
    k, t = arity_log, offset
    js = np.arange(1, i_max + 1)
    s_list = k * js - t
    values, slack, res = [], [], []
    if isinstance(target, DyadicSet):
        n = target.build_depth if resolution_depth is None else min(resolution_depth,
                                                                    target.build_depth)
        for s in s_list:
            r = Fraction(2) ** int(-s)
            values.append(por_set(target, px, r, n))
            slack.append(float(Fraction(1, 1 << n) / r))
            res.append(n)
        params = {"kind": "set", "rule": target.rule}
    elif isinstance(target, CascadeMeasure):
        if eps is None:
            raise InvalidArgument("measure profiles need eps")
        cap = target.max_bits if resolution_depth is None else resolution_depth
        if isinstance(x, SamplePoint):
            cap = min(cap, x.arity_log * x.depth)
        for s in s_list:
            n = min(cap, int(s) + window_bits)
            hole = measure_hole(target, px, Fraction(2) ** int(-s), eps, n)
            values.append(hole.value)
            slack.append(hole.slack)
            res.append(n)
        params = {"kind": "measure", "name": target.name, "eps": eps}
    else:
        raise InvalidArgument("target must be a DyadicSet or a CascadeMeasure")
    params.update(window_bits=window_bits)
    return PorosityProfile(px, t, k, js, -s_list.astype(float), np.array(values),
                           np.array(slack), np.array(res), params, point_id)


def mean_porosity_fraction(p: PorosityProfile | np.ndarray, alpha: float,
                           i: int | None = None) -> tuple[float, float]:
    """``#{j <= i : porous at scale j} / i`` and its minimum over ``[i/2, i]``.

    ``p`` is a profile (flags at ``alpha`` with its slack) or a boolean array.
    """
    flags = p.flags(alpha) if isinstance(p, PorosityProfile) else np.asarray(p, dtype=bool)
    i = len(flags) if i is None else i
    if not 1 <= i <= len(flags):
        raise InvalidArgument(f"i={i} outside profile length {len(flags)}")
    running = np.cumsum(flags[:i]) / np.arange(1, i + 1)
    lo = max((i + 1) // 2, 1)
    return float(running[-1]), float(running[lo - 1:].min())


def flag_matrix(m: CascadeMeasure, points: Sequence[SamplePoint], s_max: int,
                eps: float, alpha: float, window_bits: int = DEFAULT_WINDOW_BITS) -> np.ndarray:
    """Porous flags at binary scales ``1..s_max`` for many sample points.

    Row ``p``, column ``s-1`` is ``por(m, x_p, 2^-s, eps) >= alpha`` with the
    ball read at ``s + window_bits`` binary levels.
    """
    if s_max < 1:
        raise InvalidArgument("s_max must be positive")
    out = np.zeros((len(points), s_max), dtype=bool)
    for s in range(1, s_max + 1):
        n = min(s + window_bits, m.max_bits)
        g = np.array([pt.index_bits(n) for pt in points], dtype=np.int64)
        out[:, s - 1] = porous_flags_at_points(m, g, n, s, eps, alpha)
    return out


def running_fractions(flags: np.ndarray) -> np.ndarray:
    """Running mean of each row: entry ``[p, i-1]`` is the fraction of scales ``<= i``."""
    f = np.asarray(flags, dtype=float)
    return np.cumsum(f, axis=-1) / np.arange(1, f.shape[-1] + 1)


def select_offset(binary_flags: Sequence[bool], arity_log: int) -> tuple[int, int]:
    """Pick ``t`` in ``[0, k)`` whose scales ``s = k i - t`` carry most flags.

    ``binary_flags[s-1]`` is the flag at scale ``2^-s``.  Returns ``(t, count)``;
    by pigeonhole ``count >= total / k``.
    """
    f = np.asarray(binary_flags, dtype=bool)
    k = arity_log
    s = np.arange(1, f.size + 1)
    best_t, best = 0, -1
    for t in range(k):
        c = int(f[(s + t) % k == 0].sum())
        if c > best:
            best_t, best = t, c
    return best_t, best


def m_hole_frequency(E: DyadicSet, m: int, samples: Iterable[SamplePoint],
                     i: int) -> np.ndarray:
    """Per sample: the fraction of ``1 <= j <= i`` with an m-hole of ``E`` in ``D_x^j``."""
    if i + m > E.build_depth:
        raise InvalidArgument(f"needs E built to depth {i + m}, have {E.build_depth}")
    out = []
    for pt in samples:
        idx_full = pt.index_bits(i)
        hits = 0
        for j in range(1, i + 1):
            if has_m_hole_bits(E, j, idx_full >> (i - j), m):
                hits += 1
        out.append(hits / i)
    return np.array(out)


def write_profile_csv(profiles: Iterable[PorosityProfile], alpha: float, path) -> int:
    rows = 0
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["point_id", "offset_t", "scale_j", "radius_log2",
                      "porosity_value", "flag_at_alpha", "slack"])
        for prof in profiles:
            flags = prof.flags(alpha)
            for j, rl, v, fl, sl in zip(prof.scales, prof.radius_log2, prof.values,
                                        flags, prof.slack):
                out.writerow([prof.point_id, prof.offset, int(j), repr(float(rl)),
                              repr(float(v)), int(bool(fl)), repr(float(sl))])
                rows += 1
    return rows
