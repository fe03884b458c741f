"""Checks for the alternating cascade that no mean porous set can charge.

The mechanism: every cube that holds a hole of a reference set ``E`` gets a
weight ``eta < 1``.  Products of these weights along a descending chain tend
to zero, while the weighted masses of the cubes meeting ``E`` stay summable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import CubeIndex, binary_index
from .errors import InvalidArgument
from .measures import CascadeMeasure, SamplePoint, counterexample_w, sample_point
from .porosity import porous_flags_at_points
from .sets import DyadicSet

__all__ = [
    "EtaWeights",
    "eta",
    "eta_product",
    "c_bound",
    "chain_p_prime",
    "weighted_sum_check",
    "digit_equal_fraction",
    "digit_equal_expectation",
    "measure_of_set_approx",
    "porosity_flag_fraction",
]


@dataclass
class EtaWeights:
    """Weights ``eta(Q)`` for cubes at depths ``i (l + m)`` relative to ``E``."""

    l: int
    m: int
    E: DyadicSet
    log_base: float = math.e
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise InvalidArgument("l and m must be positive integers")

    @property
    def block(self) -> int:
        return self.l + self.m

    def hole_weight(self, i: int) -> float:
        """``1 - w(i b + 1) ... w((i + 1) b)``: the weight of a porous cube."""
        b = self.block
        t = np.arange(i * b + 1, (i + 1) * b + 1)
        return 1.0 - float(np.prod(counterexample_w(t, self.log_base)))

    def porous_bits(self, i: int, idx: int) -> bool:
        """True when some depth-(i+1)b subcube of cube ``idx`` misses ``E``."""
        b = self.block
        if (i + 1) * b > self.E.build_depth:
            raise InvalidArgument(f"E must be built to depth {(i + 1) * b}")
        key = (i, idx)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.E.descendant_count_bits(i * b, idx, b) < (1 << b)
            self._cache[key] = hit
        return hit

    def eta_bits(self, i: int, idx: int) -> float:
        return self.hole_weight(i) if self.porous_bits(i, idx) else 1.0


def _block_index(Q: CubeIndex, b: int) -> tuple[int, int]:
    t, idx = binary_index(Q)
    if t % b:
        raise InvalidArgument(f"cube depth {t} is not a multiple of l+m={b}")
    return t // b, idx


def eta(Q: CubeIndex, ew: EtaWeights) -> float:
    i, idx = _block_index(Q, ew.block)
    return ew.eta_bits(i, idx)


def c_bound(i: int, block: int, p_prime: float, log_base: float = math.e) -> float:
    """``exp(-sum_{q=1}^{floor(i p')} (log(q b / p' + 2))^(-b))`` with ``1/p'`` an integer."""
    if not 0 < p_prime <= 1:
        raise InvalidArgument("p' must lie in (0, 1]")
    P = round(1 / p_prime)
    if abs(P * p_prime - 1) > 1e-12:
        raise InvalidArgument("1/p' must be an integer")
    K = i // P
    q = np.arange(1, K + 1, dtype=float)
    terms = (np.log(q * block * P + 2) / math.log(log_base)) ** (-block)
    return math.exp(-math.fsum(terms.tolist()))


def chain_p_prime(porous: np.ndarray) -> float:
    """``1/P`` for the least integer ``P`` such that every prefix ``j < qP`` of
    the chain holds at least ``q`` porous cubes (``qP <= len``).  Returns 0 when
    no ``P`` works."""
    f = np.asarray(porous, dtype=bool)
    cum = np.concatenate(([0], np.cumsum(f)))
    for P in range(1, f.size + 1):
        qs = np.arange(1, f.size // P + 1)
        if (cum[qs * P] >= qs).all():
            return 1.0 / P
    return 0.0


def _chain_indices(x, ew: EtaWeights, i: int) -> list[int]:
    b = ew.block
    if isinstance(x, SamplePoint):
        top = x.index_bits(i * b)
    elif isinstance(x, CubeIndex):
        t, idx = binary_index(x)
        if t < i * b:
            raise InvalidArgument("cube is shallower than the chain")
        top = idx >> (t - i * b)
    else:
        raise InvalidArgument("chain start must be a SamplePoint or a CubeIndex")
    return [top >> ((i - j) * b) for j in range(i + 1)]


def eta_product(x, ew: EtaWeights, i: int, p_prime: float | None = None):
    """``prod_{j=0}^{i} eta(Q_j)`` along the chain of ``x`` and the matching ``c_bound``.

    ``p_prime`` defaults to the chain's own porous-block density (see
    :func:`chain_p_prime`).  Returns ``(product, c_bound, p_prime)``.
    """
    idxs = _chain_indices(x, ew, i)
    flags = np.array([ew.porous_bits(j, idx) for j, idx in enumerate(idxs)])
    weights = np.array([ew.hole_weight(j) if f else 1.0 for j, f in enumerate(flags)])
    prod = float(np.prod(weights))
    if p_prime is None:
        p_prime = chain_p_prime(flags[:i])
    bound = c_bound(i, ew.block, p_prime, ew.log_base) if p_prime > 0 else 1.0
    return prod, bound, p_prime


def weighted_sum_check(ew: EtaWeights, mu: CascadeMeasure, i: int,
                       tol: float = 1e-10) -> tuple[float, bool]:
    """``sum_{Q meets E} mu(Q) / prod_{j<i} eta(Q_j)`` over depth ``i (l+m)`` cubes."""
    if i < 1:
        raise InvalidArgument("i must be a positive integer")
    b = ew.block
    if i * b > ew.E.build_depth:
        raise InvalidArgument(f"E must be built to depth {i * b}")
    idx = ew.E.survivors_bits(i * b)
    log_inv = np.zeros(idx.size)
    for j in range(i):
        anc = idx >> ((i - j) * b)
        uniq, inv = np.unique(anc, return_inverse=True)
        porous = np.array([ew.porous_bits(j, int(a)) for a in uniq])
        w = ew.hole_weight(j)
        log_inv -= np.where(porous[inv], math.log2(w), 0.0)
    lm = mu.log2_mass_many(i * b, idx)
    total = math.fsum(np.exp2(lm + log_inv).tolist())
    return total, total <= 1 + tol


def digit_equal_expectation(m: CascadeMeasure, i: int) -> float:
    """Mean of ``P(x_j = x_{j+1})`` over ``1 <= j <= i`` for independent digits."""
    if m.arity_log != 1:
        raise InvalidArgument("digit statistics are defined for binary cascades")
    a = m.weights[:i + 1, 0]
    p = a[:-1] * a[1:] + (1 - a[:-1]) * (1 - a[1:])
    return math.fsum(p.tolist()) / i


def digit_equal_fraction(m: CascadeMeasure, seed: int, i: int,
                         checkpoints: tuple[int, ...] = ()) -> tuple[float, float] | dict:
    """Empirical ``#{j <= i : x_j = x_{j+1}} / i`` on one sampled point, and its
    expectation.  With ``checkpoints`` a dict ``{i': (empirical, expected)}``
    is returned for each prefix length, all from the same digit string."""
    if not 1 <= i <= 10 ** 7:
        raise InvalidArgument("i must lie in [1, 10^7]")
    if i + 1 > m.max_depth:
        raise InvalidArgument(f"measure must have depth >= {i + 1}")
    d = sample_point(m, seed, i + 1).digits
    eq = np.cumsum(d[:-1] == d[1:])
    if not checkpoints:
        return float(eq[i - 1]) / i, digit_equal_expectation(m, i)
    return {c: (float(eq[c - 1]) / c, digit_equal_expectation(m, c))
            for c in sorted(set(checkpoints) | {i})}


def measure_of_set_approx(mu: CascadeMeasure, E: DyadicSet, depth: int) -> float:
    """``mu`` of the union of ``E``'s binary depth-``depth`` survivors.

    For binary cascades the sum factorises over the set's digit blocks, so
    no survivor list is built.
    """
    if depth > E.build_depth or depth > mu.max_bits:
        raise InvalidArgument("depth exceeds the set or measure depth")
    if mu.arity_log != 1:
        idx = E.survivors_bits(depth)
        return math.fsum(np.exp2(mu.log2_mass_many(depth, idx)).tolist())
    total = 1.0
    for j, blk in enumerate(E.blocks):
        start = E._starts[j]
        if start >= depth:
            break
        take = min(blk.length, depth - start)
        words = blk.prefixes[take]
        mass = np.ones(words.size)
        for q in range(take):
            bit = (words >> (take - 1 - q)) & 1
            mass *= mu.weights[start + q, bit]
        total *= math.fsum(mass.tolist())
    return total


def porosity_flag_fraction(m: CascadeMeasure, seed: int, n_samples: int, scales,
                           eps: float, alpha: float = 0.125, window_bits: int = 12) -> float:
    """Fraction of (sample, scale) pairs with ``por(m, x, 2^-s, eps) >= alpha``."""
    scales = list(scales)
    depth = max(scales) + window_bits + 1
    pts = [sample_point(m, [seed, i], depth) for i in range(n_samples)]
    hits = 0
    for s in scales:
        n = s + window_bits
        g = np.array([(pt.index_bits(n)) for pt in pts], dtype=np.int64)
        hits += int(porous_flags_at_points(m, g, n, s, eps, alpha).sum())
    return hits / (n_samples * len(scales))
