from __future__ import annotations

import math
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from porositykit.dyadic import CubeIndex, root
from porositykit.errors import InvalidArgument
from porositykit.measures import comb_measure, counterexample_measure, lebesgue
from porositykit.theorem import (R_target, R_value, beta, constants, dim_bound, epsilon0,
                                 gain_product, k_of_alpha, kdef_holds, porosity_gain,
                                 smallest_l, verify_claim1, verify_claim2)

getcontext().prec = 60


def k_oracle(d, alpha):
    """floor(-log2(u / sqrt d)) with u = (1 - 2 alpha) 2^l, in 60-digit decimals."""
    l = 0
    while 2 ** l < 4 * Decimal(d).sqrt():
        l += 1
    u = (1 - 2 * Decimal(Fraction(alpha).numerator) / Decimal(Fraction(alpha).denominator)) * 2 ** l
    x = -(u / Decimal(d).sqrt()).ln() / Decimal(2).ln()
    return int(x.to_integral_value(rounding="ROUND_FLOOR"))


def test_examples_for_k():
    assert smallest_l(1) == 2 and smallest_l(2) == 3
    tc = constants(1, (1 - 2 ** -9) / 2)
    assert (tc.l, tc.k, tc.C, tc.theorem_valid) == (2, 6, 8, True)
    bad = constants(1, Fraction(31, 64))
    assert bad.k == 2 and not bad.theorem_valid
    assert constants(2, 0.49).k == 3
    with pytest.raises(InvalidArgument):
        constants(1, 0.5)
    with pytest.raises(InvalidArgument):
        constants(1, 0.4)


@given(st.integers(1, 4), st.floats(0.46876, 0.4999999))
def test_k_matches_decimal_oracle(d, alpha):
    k = k_of_alpha(d, alpha)
    assert k == k_oracle(d, alpha)
    assert kdef_holds(d, alpha, k) and not kdef_holds(d, alpha, k + 1)
    assert k == 1 or not kdef_holds(d, alpha, k - 1)


def test_k_grows_towards_half():
    alphas = 0.5 - 2.0 ** -np.linspace(6, 50, 200)
    ks = [k_of_alpha(1, a) for a in alphas]
    assert all(b >= a for a, b in zip(ks, ks[1:])) and ks[-1] >= 45


def test_beta_values():
    tc = constants(1, (1 - 2 ** -9) / 2, D=0.8)
    assert beta(True, tc) == pytest.approx(0.6221, abs=1e-4)
    assert beta(False, tc) == pytest.approx(0.2199, abs=1e-4)
    near = constants(1, (1 - 2 ** -9) / 2, D=1 - 1e-12)
    assert beta(False, near) == pytest.approx(1 / 3, rel=1e-9)


@given(st.floats(0.47, 0.4999), st.floats(0.05, 0.99))
def test_porous_weight_dominates(alpha, D):
    tc = constants(1, alpha, D=D)
    if tc.theorem_valid:                          # equal when 2^k = C
        assert beta(True, tc) >= beta(False, tc) * (1 - 1e-12)


def test_epsilon0():
    tc = constants(1, (1 - 2 ** -9) / 2, D=0.8)
    e = epsilon0(tc, 2)
    assert e == pytest.approx(7.38e-5, rel=1e-3)
    assert abs(R_value(tc, e, 2) - R_target(tc)) <= 1e-12 * R_target(tc)
    eps = [epsilon0(tc, n) for n in range(2, 11)]
    assert all(b < a for a, b in zip(eps, eps[1:]))
    for n in range(3, 11):
        e = epsilon0(tc, n)
        assert all(R_value(tc, e, i) < R_value(tc, e, n) for i in range(2, n))


def test_porosity_gain_example():
    tc = constants(1, (1 - 2 ** -13) / 2, D=1.2, p=0.5)
    assert tc.k == 10 and tc.C == 8
    assert tc.D0 == pytest.approx(1.11699, abs=1e-5) and tc.delta == pytest.approx(0.03097, abs=1e-5)
    n, K = porosity_gain(tc, 0.5)
    assert n == 19 and K == pytest.approx(1.02, abs=0.01)
    x = tc.k * tc.delta * 1.2
    assert 2 ** (x * n) > 2 ** tc.k / tc.C and not 2 ** (x * (n - 1)) > 2 ** tc.k / tc.C
    with pytest.raises(InvalidArgument):
        porosity_gain(constants(1, (1 - 2 ** -13) / 2, D=1.0), 0.5)


@given(st.floats(0.4922, 0.4999999), st.floats(0.05, 0.95), st.floats(0.01, 0.5))
def test_gain_is_tight(alpha, p, margin):
    base = constants(1, alpha, p=p)
    if not base.theorem_valid:
        return
    tc = constants(1, alpha, D=base.D0 + margin, p=p)
    n, K = porosity_gain(tc, p)
    x, target = tc.k * tc.delta * tc.D, tc.k - math.log2(tc.C)
    assert K > 1 and x * n > target and not x * (n - 1) > target


@given(st.integers(0, 2 ** 31), st.integers(1, 4))
def test_gain_product_reaches_K_power(seed, L):
    tc = constants(1, (1 - 2 ** -13) / 2, D=1.2, p=0.5)
    n, _ = porosity_gain(tc, 0.5)
    rng = np.random.default_rng(seed)
    flags = np.zeros(n * L, dtype=bool)
    need = math.ceil(0.5 * n * L)
    flags[rng.choice(n * L, size=need + int(rng.integers(0, n * L - need + 1)), replace=False)] = True
    lhs, rhs, ok = gain_product(tc, flags, n)
    assert ok and lhs >= rhs - 1e-9


def test_dim_bound():
    b = dim_bound(1, 1.0, (1 - 2 ** -13) / 2)
    assert b.k == 10 and b.bound == pytest.approx(math.log(72) / (10 * math.log(2)), rel=1e-12)
    assert b.bound == pytest.approx(0.617, abs=1e-3)
    assert b.coarse_bound >= b.bound
    assert dim_bound(1, 0.0, 0.49).vacuous
    alphas = np.linspace(0.47, 0.49999, 300)
    bounds = [dim_bound(1, 0.7, a).bound for a in alphas]
    assert all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))


def test_claim1_closed_form_when_nothing_is_porous():
    tc = constants(1, (1 - 2 ** -7) / 2, D=0.9, p=0.5)
    k, n = tc.k, 2
    eps = epsilon0(tc, n) / 2
    # the middle cube keeps every test ball inside [0, 1], so nothing is porous
    Q = CubeIndex(k, (1 << (k - 1),))
    res = verify_claim1(lebesgue(64), Q, tc, n, eps)
    assert res.porous_counts == [0, 0]
    bnp = (1 / 3) * 2 ** (-(k / 2) * (1 - 0.9))
    side = 2.0 ** (-k * (1 + n))
    want = 2 ** (k * n) * bnp ** n * side ** (0.9 / 2) * side ** 0.5
    assert res.lhs == pytest.approx(want, rel=1e-12)
    assert res.rhs == pytest.approx(tc.C ** -0.5 * 2 ** (k / 2) * 2.0 ** (-k * 0.9 / 2 - k / 2),
                                    rel=1e-12)
    assert res.holds


def test_claim1_zero_mass_cube():
    tc = constants(1, (1 - 2 ** -7) / 2, D=0.9)
    m = comb_measure(tc.k, (0, (1 << tc.k) - 1), 16)
    res = verify_claim1(m, CubeIndex(tc.k, (1,)), tc, 2, 1e-6)
    assert res.lhs == res.rhs == 0 and res.holds


def test_claim1_counterexample_root():
    tc = constants(1, (1 - 2 ** -9) / 2, D=0.8)
    res = verify_claim1(counterexample_measure(), root(6), tc, 2, epsilon0(tc, 2) / 2)
    assert res.holds and res.lhs <= res.rhs


def test_claim2_small_collection():
    tc = constants(1, (1 - 2 ** -7) / 2, D=0.9, p=0.5)
    lhs, rhs, ok = verify_claim2(counterexample_measure(max_depth=64), tc, 2,
                                 epsilon0(tc, 2) / 2, 1)
    assert ok and lhs <= rhs
