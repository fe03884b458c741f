"""Explicit constants of the mean-porosity dimension bound, and checks of its
finite-depth inequalities.

Integer quantities (``l``, ``k``, the gain length ``n``) are found by exact
comparisons.  Real-valued constants are handled in log2 form and checked
against a direct linear evaluation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .dyadic import CubeIndex, binary_index
from .errors import InstanceTooLarge, InvalidArgument
from .measures import CascadeMeasure
from .porosity import porous_flags_at_points

__all__ = [
    "TheoremConstants",
    "constants",
    "smallest_l",
    "k_of_alpha",
    "kdef_holds",
    "beta",
    "epsilon0",
    "R_value",
    "porosity_gain",
    "gain_product",
    "dim_bound",
    "BoundReport",
    "classify_cubes",
    "Claim1Result",
    "verify_claim1",
    "verify_claim2",
]

ALPHA_MIN = Fraction(15, 32)
DEFAULT_C = 4


@dataclass(frozen=True)
class TheoremConstants:
    d: int
    alpha: float
    l: int
    k: int
    c: float
    C: float
    N: int
    theorem_valid: bool
    D: float | None = None
    p: float | None = None
    D0: float | None = None
    delta: float | None = None
    n: int | None = None
    K: float | None = None
    eps0: float | None = None

    def with_D(self, D: float) -> "TheoremConstants":
        return replace(self, D=float(D))

    @property
    def log2C(self) -> float:
        return math.log2(self.C)


def smallest_l(d: int) -> int:
    """Smallest ``l`` with ``4 sqrt(d) <= 2^l``, i.e. ``16 d <= 4^l``."""
    if d < 1:
        raise InvalidArgument("d must be a positive integer")
    l = 0
    while 4 ** l < 16 * d:
        l += 1
    return l


def kdef_holds(d: int, alpha, k: int, l: int | None = None) -> bool:
    """Exact test of ``sqrt(d) 2^(-k-1) <= (1 - 2 alpha) 2^l < sqrt(d) 2^(-k)``."""
    l = smallest_l(d) if l is None else l
    u = (1 - 2 * Fraction(alpha)) * Fraction(2) ** l
    if u <= 0:
        return False
    u2 = u * u                                   # compare squares, all positive
    return d * Fraction(1, 4) ** (k + 1) <= u2 < d * Fraction(1, 4) ** k


def k_of_alpha(d: int, alpha, l: int | None = None) -> int:
    l = smallest_l(d) if l is None else l
    a = Fraction(alpha)
    u = (1 - 2 * a) * Fraction(2) ** l
    if u <= 0:
        raise InvalidArgument("alpha must be below 1/2")
    guess = max(1, math.floor(-math.log2(float(u) / math.sqrt(d))))
    for k in range(max(1, guess - 2), guess + 3):
        if kdef_holds(d, a, k, l):
            return k
    raise InvalidArgument(f"no positive k satisfies the defining inequality at alpha={alpha}")


def constants(d: int, alpha, c_override: float | None = None, D: float | None = None,
              p: float | None = None) -> TheoremConstants:
    """Constants ``l, k, C, N`` for ``15/32 < alpha < 1/2``; optional ``D`` and ``p``.

    With ``p`` and ``D`` both given, the porosity-gain quantities
    ``D0, delta, n, K`` are filled in when ``D > D0``.
    """
    a = Fraction(alpha)
    if not ALPHA_MIN < a < Fraction(1, 2):
        raise InvalidArgument("alpha must lie in (15/32, 1/2)")
    l = smallest_l(d)
    k = k_of_alpha(d, a, l)
    c = DEFAULT_C if c_override is None else c_override
    if c <= 0:
        raise InvalidArgument("c must be positive")
    C = max(c, 2 * d * 2 ** l)
    valid = 2 ** k >= C                          # k >= log2 C without rounding
    tc = TheoremConstants(d, float(alpha), l, k, c, C, 2 ** (k * d), valid,
                          None if D is None else float(D))
    if p is not None:
        tc = replace(tc, p=float(p), D0=d - p + math.log2(9 * C) / k)
        if D is not None and D > tc.D0:
            n, K = porosity_gain(tc, p)
            delta = (1 / tc.D0 - 1 / D) * (d - p)
            tc = replace(tc, n=n, K=K, delta=delta)
    return tc


def _need_D(tc: TheoremConstants) -> float:
    if tc.D is None:
        raise InvalidArgument("this quantity needs a target dimension D")
    return tc.D


def log2_beta(porous: bool, tc: TheoremConstants) -> float:
    D, k, d = _need_D(tc), tc.k, tc.d
    if porous:
        return -math.log2(3) - 0.5 * tc.log2C - (k / 2) * (d - 1 - D)
    return -math.log2(3) - (k / 2) * (d - D)


def beta(porous: bool, tc: TheoremConstants) -> float:
    """Cube weight: ``C^-1/2 2^(-k/2 (d-1-D)) / 3`` if porous, else ``2^(-k/2 (d-D)) / 3``."""
    return 2.0 ** log2_beta(porous, tc)


def _log2_M(tc: TheoremConstants) -> float:
    return max(0.0, log2_beta(True, tc))


def log2_epsilon0(tc: TheoremConstants, n: int) -> float:
    if n < 2:
        raise InvalidArgument("n must be at least 2")
    D, k, d = _need_D(tc), tc.k, tc.d
    return (2 * math.log2(5 / (6 * (n - 1))) - k * d
            - 2 * k * (n - 1) * (d - D / 2) - 2 * (n - 1) * _log2_M(tc))


def epsilon0(tc: TheoremConstants, n: int, check: bool = True) -> float:
    """The ``eps`` solving ``R(eps, n) = (5/18) C^-1/2 2^(k/2)``, in closed form."""
    eps = 2.0 ** log2_epsilon0(tc, n)
    if check:
        target = R_target(tc)
        got = R_value(tc, eps, n)
        if abs(got - target) > 1e-12 * got:
            raise ArithmeticError(f"eps0 substitution residual {abs(got - target):.3e}")
    return eps


def R_value(tc: TheoremConstants, eps: float, n: int) -> float:
    """``R(eps, n)`` evaluated directly in linear arithmetic."""
    D, k, d = _need_D(tc), tc.k, tc.d
    M = max(1.0, beta(True, tc))
    return ((n - 1) / 3 * math.sqrt(eps * tc.N) * tc.C ** -0.5 * 2 ** (k / 2)
            * 2 ** (k * (n - 1) * (d - D / 2)) * M ** (n - 1))


def R_target(tc: TheoremConstants) -> float:
    return 5 / 18 * tc.C ** -0.5 * 2 ** (tc.k / 2)


def porosity_gain(tc: TheoremConstants, p: float) -> tuple[int, float]:
    """Least ``n`` with ``2^(k delta D n) > 2^k / C`` and ``K = (C 2^-k 2^(k delta D n))^(1/2)``."""
    if not 0 < p < 1:
        raise InvalidArgument("p must lie in (0, 1)")
    D, k, d = _need_D(tc), tc.k, tc.d
    D0 = d - p + math.log2(9 * tc.C) / k
    if D <= D0:
        raise InvalidArgument(f"D={D} must exceed D0={D0:.6f}")
    delta = (1 / D0 - 1 / D) * (d - p)
    x = k * delta * D
    target = k - tc.log2C
    n = max(1, math.floor(target / x) + 1)
    while n > 1 and x * (n - 1) > target:       # guard against rounding in the division
        n -= 1
    while not x * n > target:
        n += 1
    K = 2.0 ** ((tc.log2C - k + x * n) / 2)
    return n, K


def gain_product(tc: TheoremConstants, porous_flags, n: int) -> tuple[float, float, bool]:
    """log2 of ``prod_j C^1/2 2^-k/2 prod_i beta(Q^i)`` over ``L = len/n`` blocks,
    log2 of ``K^L``, and whether the product reaches ``K^L``."""
    f = np.asarray(porous_flags, dtype=bool)
    if f.size % n:
        raise InvalidArgument("classification length must be a multiple of n")
    if tc.p is None:
        raise InvalidArgument("bundle needs p")
    L = f.size // n
    _, K = porosity_gain(tc, tc.p)
    lp, ln = log2_beta(True, tc), log2_beta(False, tc)
    lhs = L * (0.5 * tc.log2C - tc.k / 2) + math.fsum(np.where(f, lp, ln))
    rhs = L * math.log2(K)
    return lhs, rhs, lhs >= rhs - 1e-12 * max(1.0, abs(rhs))


@dataclass(frozen=True)
class BoundReport:
    d: int
    p: float
    alpha: float
    l: int
    k: int
    C: float
    N: int
    bound: float            # d - p + log(9C) / (k log 2)
    coarse_bound: float     # d - p + C' / log(1 / (1 - 2 alpha))
    coarse_constant: float
    theorem_valid: bool

    @property
    def vacuous(self) -> bool:
        return self.bound >= self.d

    @property
    def effective(self) -> float:
        return min(self.bound, float(self.d))


def dim_bound(d: int, p: float, alpha, c_override: float | None = None) -> BoundReport:
    """Packing-dimension bound for mean ``(alpha, p)``-porous measures.

    The coarse form uses ``C' = (l + 2) log(9C)``, which dominates the sharp
    form for every admissible ``alpha`` because ``log2(1/(1-2 alpha)) <= k + l + 1``.
    """
    if not 0 <= p <= 1:
        raise InvalidArgument("p must lie in [0, 1]")
    tc = constants(d, alpha, c_override)
    sharp = d - p + math.log(9 * tc.C) / (tc.k * math.log(2))
    cprime = (tc.l + 2) * math.log(9 * tc.C)
    coarse = d - p + cprime / math.log(1 / (1 - 2 * float(alpha)))
    return BoundReport(d, p, float(alpha), tc.l, tc.k, tc.C, tc.N, sharp, coarse, cprime,
                       tc.theorem_valid)


# -- claim checks -------------------------------------------------------------

def classify_cubes(m: CascadeMeasure, tc: TheoremConstants, eps: float, depth: int,
                   first: int = 0, count: int | None = None,
                   extra_bits: int | None = None) -> np.ndarray:
    """Porosity flags for the 2^k-adic cubes ``first .. first+count-1`` at ``depth``.

    A depth-``e`` cube is porous when ``por(m, x, 2^(-k(e-1)+l), eps) >= alpha``
    at one of its witnesses: left endpoint, centre, last grid point.
    """
    if depth < 1:
        raise InvalidArgument("porosity is defined for cubes of depth >= 1")
    k, l = tc.k, tc.l
    count = (1 << (k * depth)) - first if count is None else count
    extra = 2 if extra_bits is None else extra_bits
    n_res = k * depth + extra
    s = k * (depth - 1) - l
    if n_res > m.max_bits:
        raise InstanceTooLarge(f"classification needs {n_res} binary levels of the measure")
    idx = np.arange(first, first + count, dtype=np.int64) << extra
    half = 1 << (extra - 1)
    flags = np.zeros(count, dtype=bool)
    for off in (0, half, 2 * half - 1):
        flags |= porous_flags_at_points(m, idx + off, n_res, s, eps, tc.alpha)
    return flags


@dataclass
class Claim1Result:
    lhs: float
    rhs: float
    holds: bool
    porous_counts: list[int] = field(default_factory=list)
    n: int = 0
    eps: float = 0.0


def _cube_range(Q: CubeIndex, k: int, depth: int) -> tuple[int, int]:
    t, idx = binary_index(Q)
    if t % k:
        raise InvalidArgument("Q must be a 2^k-adic cube")
    shift = k * depth - t
    return idx << shift, 1 << shift


def verify_claim1(m: CascadeMeasure, Q: CubeIndex, tc: TheoremConstants, n: int,
                  eps: float, extra_bits: int | None = None,
                  max_subcubes: int = 1 << 22) -> Claim1Result:
    """Both sides of the one-cube estimate over the ``n``-step descendants of ``Q``.

    ``lhs = sum_{Q' <_n Q} (prod_{j=1..n} beta(Q'_{i+j})) r_{Q'}^(D/2) mu(Q')^(1/2)``
    and ``rhs = C^-1/2 2^(k/2) r_Q^(D/2) mu(Q)^(1/2)``.
    """
    D, k = _need_D(tc), tc.k
    if n < 1:
        raise InvalidArgument("n must be positive")
    i = Q.to_arity(k).depth if Q.arity_log != k else Q.depth
    if (1 << (k * n)) > max_subcubes:
        raise InstanceTooLarge(f"2^{k * n} subcubes exceed the limit")
    t0, idx0 = binary_index(Q)
    muQ = m.mass_bits(t0, idx0)
    rhs_log = -0.5 * tc.log2C + k / 2 - (D / 2) * k * i
    if muQ == 0:
        return Claim1Result(0.0, 0.0, True, [0] * n, n, eps)
    rhs = 2.0 ** rhs_log * math.sqrt(muQ)
    log_beta = np.zeros(1)
    counts = []
    for j in range(1, n + 1):
        first, count = _cube_range(Q, k, i + j)
        flags = classify_cubes(m, tc, eps, i + j, first, count, extra_bits)
        counts.append(int(flags.sum()))
        lb = np.where(flags, log2_beta(True, tc), log2_beta(False, tc))
        log_beta = np.repeat(log_beta, 1 << k) + lb
    first, count = _cube_range(Q, k, i + n)
    mu = m.leaf_masses(k * (i + n), first, first + count)
    with np.errstate(divide="ignore"):
        lg = log_beta - (D / 2) * k * (i + n) + 0.5 * np.log2(mu)
    lhs = math.fsum(np.exp2(lg[mu > 0]).tolist())
    return Claim1Result(lhs, rhs, lhs <= rhs, counts, n, eps)


def verify_claim2(m: CascadeMeasure, tc: TheoremConstants, n: int, eps: float,
                  blocks: int, extra_bits: int | None = None) -> tuple[float, float, bool]:
    """Weighted sum over all 2^(kn)-adic cubes of generation ``blocks``, against
    ``r_[0,1]^(D/2) mu(R)^(1/2) = 1``."""
    D, k = _need_D(tc), tc.k
    depth = n * blocks
    if (1 << (k * depth)) > 1 << 22:
        raise InstanceTooLarge("too many cubes for the full collection")
    log_w = np.zeros(1)
    for e in range(1, depth + 1):
        flags = classify_cubes(m, tc, eps, e, extra_bits=extra_bits)
        lb = np.where(flags, log2_beta(True, tc), log2_beta(False, tc))
        log_w = np.repeat(log_w, 1 << k) + lb
        if e % n == 0:
            log_w = log_w + 0.5 * tc.log2C - k / 2
    mu = m.level_masses(k * depth)
    with np.errstate(divide="ignore"):
        lg = log_w - (D / 2) * k * depth + 0.5 * np.log2(mu)
    lhs = math.fsum(np.exp2(lg[mu > 0]).tolist())
    return lhs, 1.0, lhs <= 1.0
