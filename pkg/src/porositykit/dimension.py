"""Finite-depth dimension estimates and the cube-sum dimension certificate.

Local dimension is read off the cubes containing a point: the ratio
``-log2 mu(Q_x^i) / (k i)``.  Upper and lower limits are replaced by the max
and min of window means over a depth range.

The certificate maximises ``sum r_Q^tau mu(Q)^(1 - tau/D)`` over disjoint
cube collections by a bottom-up tree recursion.  When the sum stays below
the total mass the packing dimension is at most ``D``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .dyadic import CubeIndex, format_cube, from_binary_index
from .errors import InstanceTooLarge, InvalidArgument, UndefinedAtPoint
from .measures import CascadeMeasure, SamplePoint, sample_points
from .sets import DyadicSet

__all__ = [
    "DimensionEstimate",
    "CertificateVerdict",
    "local_dimension",
    "packing_dimension_estimate",
    "box_dimension",
    "holder_step",
    "max_collection_sum",
    "antichain_sums",
    "dimension_certificate",
    "witness_sum",
    "write_witness_csv",
]

DEFAULT_WINDOW = 5
MAX_TREE_LEAVES = 1 << 22


@dataclass
class DimensionEstimate:
    depths: np.ndarray            # depths the ratios were taken at
    ratios: np.ndarray            # per-depth slope estimates
    window: int
    window_means: np.ndarray
    limsup: float                 # max window mean
    liminf: float                 # min window mean
    value: float                  # headline number (limsup, or a quantile of them)
    quantile: float | None = None
    samples: np.ndarray | None = None   # per-sample limsup envelopes

    def __post_init__(self):
        if not self.liminf <= self.limsup + 1e-15:
            raise InvalidArgument("liminf envelope exceeds limsup envelope")


def _envelopes(ratios: np.ndarray, window: int) -> tuple[np.ndarray, float, float]:
    w = max(1, min(window, ratios.size))
    means = np.convolve(ratios, np.ones(w) / w, mode="valid")
    return means, float(means.max()), float(means.min())


def _path_log2_masses(m: CascadeMeasure, digits: np.ndarray) -> np.ndarray:
    """log2 of mu(Q^i) for i = 1..len(digits)."""
    levels = np.arange(digits.size)
    return np.cumsum(m._log2w[levels, digits.astype(np.int64)])


def _digits_of(m: CascadeMeasure, x, depth: int) -> np.ndarray:
    if isinstance(x, SamplePoint):
        if x.arity_log != m.arity_log or x.depth < depth:
            raise InvalidArgument("sample point does not carry enough digits")
        return np.asarray(x.digits[:depth])
    x = Fraction(x)
    if not 0 <= x < 1:
        raise InvalidArgument("point must lie in [0, 1)")
    k = m.arity_log
    idx = math.floor(x * (1 << (k * depth)))
    return np.array([(idx >> (k * (depth - 1 - i))) & ((1 << k) - 1)
                     for i in range(depth)], dtype=np.int64)


def local_dimension(m: CascadeMeasure, x, depth_lo: int, depth_hi: int,
                    window: int = DEFAULT_WINDOW) -> DimensionEstimate:
    """Ratios ``-log2 mu(Q_x^i) / (k i)`` for ``depth_lo <= i <= depth_hi``."""
    if not 1 <= depth_lo <= depth_hi:
        raise InvalidArgument("need 1 <= depth_lo <= depth_hi")
    if depth_hi > m.max_depth:
        raise InvalidArgument(f"depth {depth_hi} exceeds measure depth {m.max_depth}")
    digits = _digits_of(m, x, depth_hi)
    logs = _path_log2_masses(m, digits)
    if not np.isfinite(logs[-1]):
        raise UndefinedAtPoint("the point sits in a cube of zero mass")
    depths = np.arange(depth_lo, depth_hi + 1)
    ratios = -logs[depth_lo - 1:] / (m.arity_log * depths)
    means, hi, lo = _envelopes(ratios, window)
    return DimensionEstimate(depths, ratios, window, means, hi, lo, hi)


def packing_dimension_estimate(m: CascadeMeasure, n_samples: int, depth: int,
                               quantile: float = 0.05, seed: int = 0,
                               window: int = DEFAULT_WINDOW,
                               depth_lo: int | None = None) -> DimensionEstimate:
    """Lower ``quantile`` of the limsup envelopes at ``n_samples`` random points.

    Envelopes are taken over ``[depth_lo, depth]`` (default the upper half).
    """
    if n_samples < 100:
        raise InvalidArgument("packing estimate needs at least 100 samples")
    if not 0 <= quantile <= 1:
        raise InvalidArgument("quantile must lie in [0, 1]")
    depth_lo = max(1, depth // 2) if depth_lo is None else depth_lo
    envs, lows, last = [], [], None
    for pt in sample_points(m, seed, depth, n_samples):
        est = local_dimension(m, pt, depth_lo, depth, window)
        envs.append(est.limsup)
        lows.append(est.liminf)
        last = est
    envs = np.array(envs)
    value = float(np.quantile(envs, quantile))
    lo = min(float(np.quantile(np.array(lows), quantile)), value)
    return DimensionEstimate(last.depths, last.ratios, window, last.window_means,
                             float(envs.max()), lo, value, quantile, envs)


def box_dimension(A: DyadicSet, depth_lo: int, depth_hi: int,
                  window: int = DEFAULT_WINDOW) -> DimensionEstimate:
    """Survivor-count slopes ``log2 N(i) / (k i)`` in the set's own grid."""
    k = A.arity_log
    if not 1 <= depth_lo <= depth_hi or k * depth_hi > A.build_depth:
        raise InvalidArgument("depth range outside the built range")
    depths = np.arange(depth_lo, depth_hi + 1)
    ratios = np.array([math.log2(A.count(int(i))) / (k * i) for i in depths])
    means, hi, lo = _envelopes(ratios, window)
    return DimensionEstimate(depths, ratios, window, means, hi, lo, hi)


def holder_step(masses: Sequence[float], r: float, tau: float, D: float,
                tol: float = 1e-12) -> tuple[float, float, bool]:
    """Both sides of ``sum r^tau mu_j^(1-tau/D) <= N^(tau/D) r^tau (sum mu_j)^(1-tau/D)``."""
    if not 0 < tau < D:
        raise InvalidArgument("need 0 < tau < D")
    mu = [float(v) for v in masses]
    if any(v < 0 or not math.isfinite(v) for v in mu):
        raise InvalidArgument("masses must be finite and nonnegative")
    e = 1 - tau / D
    rt = r ** tau
    lhs = rt * math.fsum(v ** e for v in mu)
    rhs = len(mu) ** (tau / D) * rt * math.fsum(mu) ** e
    return lhs, rhs, lhs <= rhs + tol


# -- max-collection recursion ---------------------------------------------------

def max_collection_sum(terms: Sequence[Sequence], branching: int, i_min: int = 0):
    """Largest sum of ``terms`` over disjoint collections of tree nodes.

    ``terms[i]`` lists the node values at depth ``i`` (``branching**i`` of
    them, in index order).  Only depths ``>= i_min`` may be used.  Works with
    floats or exact Fractions.  Returns ``(best, witness)`` where the witness
    lists ``(depth, index)`` pairs; ties keep the shallower node.
    """
    depth = len(terms) - 1
    if depth < i_min:
        raise InvalidArgument("no admissible depth in the tree")
    best = [None] * (depth + 1)
    take = [None] * (depth + 1)
    leaf = np.asarray(terms[depth], dtype=object if _is_exact(terms) else float)
    best[depth] = leaf
    take[depth] = np.ones(leaf.size, dtype=bool)
    for i in range(depth - 1, -1, -1):
        below = best[i + 1].reshape(-1, branching).sum(axis=1)
        if i >= i_min:
            own = np.asarray(terms[i], dtype=below.dtype)
            take[i] = own >= below
            best[i] = np.where(take[i], own, below)
        else:
            take[i] = np.zeros(below.size, dtype=bool)
            best[i] = below
    witness = []
    stack = [(0, 0)]
    while stack:
        i, j = stack.pop()
        if take[i][j]:
            witness.append((i, j))
        else:
            stack.extend((i + 1, j * branching + c) for c in range(branching - 1, -1, -1))
    return best[0][0], witness


def antichain_sums(terms: Sequence[Sequence], branching: int, i_min: int = 0) -> list:
    """Sums of ``terms`` over every antichain of the tree, by explicit enumeration.

    Exponential in the tree size; meant as a reference for small trees.
    """
    depth = len(terms) - 1

    def sums(i: int, j: int) -> list:
        if i == depth:
            below = [0]
        else:
            below = [0]
            for c in range(branching):
                sub = sums(i + 1, j * branching + c)
                below = [a + b for a in below for b in sub]
        return below + [terms[i][j]] if i >= i_min else below

    return sums(0, 0)


def _is_exact(terms) -> bool:
    for level in terms:
        for v in level:
            return isinstance(v, Fraction)
    return False


@dataclass
class CertificateVerdict:
    D: float
    tau_description: str
    s_star: float                 # max-collection sum
    log2_s_star: float
    total_mass: float
    full_cover_sum: float         # all cubes at depth_limit
    verdict: str                  # certified | refuted-at-depth | inconclusive
    i_min: int
    depth_limit: int
    witness_size: int
    witness_depths: list[int] = field(default_factory=list)
    witness: list[CubeIndex] | None = None   # listed when small enough

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    def as_dict(self) -> dict:
        return {"D": self.D, "tau": self.tau_description, "s_star": self.s_star,
                "log2_s_star": self.log2_s_star, "total_mass": self.total_mass,
                "full_cover_sum": self.full_cover_sum, "verdict": self.verdict,
                "i_min": self.i_min, "depth_limit": self.depth_limit,
                "witness_size": self.witness_size}


def _verdict(log2_s: float, log2_full: float, total: float) -> str:
    lt = math.log2(total)
    if log2_s < lt:
        return "certified"
    if log2_full >= lt:
        return "refuted-at-depth"
    return "inconclusive"


def _pow2(x: float) -> float:
    return math.inf if x > 1023 else 2.0 ** x


def dimension_certificate(m: CascadeMeasure, D: float,
                          tau_rule: float | Callable[[int, np.ndarray], np.ndarray],
                          i_min: int, depth_limit: int,
                          list_witness_up_to: int = 1 << 16) -> CertificateVerdict:
    """Max-collection test for cubes of depths ``i_min..depth_limit``.

    ``tau_rule`` is a constant or a function ``(depth, indices) -> tau`` on the
    measure's own grid.  A constant ``tau`` on a cascade makes every term a
    product of per-level factors, so the recursion collapses to one value
    per level and any depth is cheap.  Otherwise the full tree is built.
    """
    if D <= 0 or i_min < 1 or depth_limit < i_min:
        raise InvalidArgument("need D > 0 and 1 <= i_min <= depth_limit")
    if depth_limit > m.max_depth:
        raise InvalidArgument("depth_limit exceeds measure depth")
    k, total = m.arity_log, 1.0
    if not callable(tau_rule):
        return _certificate_constant(m, D, float(tau_rule), i_min, depth_limit,
                                     list_witness_up_to)
    b = 1 << k
    if b ** depth_limit > MAX_TREE_LEAVES:
        raise InstanceTooLarge("variable tau needs the whole tree; lower depth_limit")
    terms, masses = [], []
    for i in range(depth_limit + 1):
        mu = m.level_masses(k * i)
        tau = np.broadcast_to(np.asarray(tau_rule(i, np.arange(mu.size)), dtype=float), mu.shape)
        if i >= i_min and not ((tau > 0) & (tau < D)).all():
            raise InvalidArgument("tau_rule must return values in (0, D)")
        with np.errstate(divide="ignore"):
            t = np.where(mu > 0, 2.0 ** (-k * i * tau) * mu ** (1 - tau / D), 0.0)
        terms.append(t if i >= i_min else np.zeros_like(t))
        masses.append(mu)
    best, wit = max_collection_sum(terms, b, i_min)
    full = float(math.fsum(terms[depth_limit]))
    cubes = [from_binary_index(k * i, j, k) for i, j in wit]
    s = float(best)
    verdict = _verdict(math.log2(s) if s > 0 else -math.inf,
                       math.log2(full) if full > 0 else -math.inf, total)
    return CertificateVerdict(D, getattr(tau_rule, "__name__", "custom"), s,
                              math.log2(s) if s > 0 else -math.inf, total, full, verdict,
                              i_min, depth_limit, len(wit),
                              sorted({i for i, _ in wit}), cubes)


def _certificate_constant(m: CascadeMeasure, D: float, tau: float, i_min: int,
                          depth_limit: int, list_up_to: int) -> CertificateVerdict:
    if not 0 < tau < D:
        raise InvalidArgument("need 0 < tau < D")
    k, e = m.arity_log, 1 - tau / D
    # log2 of sum_c 2^(-k tau) w_{i,c}^e for levels 1..depth_limit
    with np.errstate(divide="ignore"):
        lf = np.log2(m.weights[:depth_limit])
    contrib = np.where(m.weights[:depth_limit] > 0, 2.0 ** (e * lf), 0.0)
    level = np.log2(contrib.sum(axis=1)) - k * tau
    # G[i] (log2): best sum below a depth-i cube, relative to that cube's term
    G = np.zeros(depth_limit + 1)
    stop = np.zeros(depth_limit + 1, dtype=bool)
    stop[depth_limit] = True
    for i in range(depth_limit - 1, -1, -1):
        below = level[i] + G[i + 1]
        if i >= i_min and 0.0 >= below:
            G[i], stop[i] = 0.0, True
        else:
            G[i] = below
    log2_s = float(G[0])
    log2_full = float(level.sum())
    i_star = int(np.argmax(stop))
    count = int(np.count_nonzero(m.weights[:i_star] > 0, axis=1).astype(float).prod()) \
        if i_star else 1
    witness = None
    if count <= list_up_to:
        witness = _support_cubes(m, i_star)
    verdict = _verdict(log2_s, log2_full, 1.0)
    return CertificateVerdict(D, f"constant {tau:g}", _pow2(log2_s), log2_s, 1.0,
                              _pow2(log2_full), verdict, i_min, depth_limit, count,
                              [i_star], witness)


def _support_cubes(m: CascadeMeasure, depth: int) -> list[CubeIndex]:
    out: list[tuple[int, ...]] = [()]
    for i in range(depth):
        nz = np.flatnonzero(m.weights[i] > 0)
        out = [d + (int(c),) for d in out for c in nz]
    return [CubeIndex(m.arity_log, d) for d in out]


def witness_sum(m: CascadeMeasure, cubes: Sequence[CubeIndex], D: float,
                tau: float | Callable[[int, np.ndarray], np.ndarray]) -> float:
    """Recompute the certificate sum over an explicit collection."""
    parts = []
    for q in cubes:
        t = float(tau) if not callable(tau) else float(
            np.asarray(tau(q.depth, np.array([q.coords()[0]]))).ravel()[0])
        ws = [m.weight(i + 1, d) for i, d in enumerate(q.digits)]
        if min(ws, default=1.0) == 0:
            continue
        lg = math.fsum(math.log2(w) for w in ws)
        parts.append(2.0 ** (-m.arity_log * q.depth * t + (1 - t / D) * lg))
    return math.fsum(parts)


def write_witness_csv(v: CertificateVerdict, path) -> int:
    if v.witness is None:
        raise InstanceTooLarge(f"witness has {v.witness_size} cubes and was not listed")
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["cube_id"])
        for q in v.witness:
            out.writerow([format_cube(q)])
    return len(v.witness)
