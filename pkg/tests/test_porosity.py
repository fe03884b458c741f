from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from porositykit.errors import InvalidArgument
from porositykit.measures import counterexample_measure, lebesgue, sample_points
from porositykit.porosity import (flag_matrix, m_hole_frequency, mean_porosity_fraction,
                                  measure_hole, por_measure, por_set, porosity_profile,
                                  porous_flags_at_points, running_fractions, select_offset)
from porositykit.sets import (PorousScaleSet, comb_set, digit_constraint_set,
                              even_digits_zero, example_set, full_set)


def brute_por(A, x_units, r_units, n):
    """Largest radius of a grid ball inside [x-r, x+r] missing A, over r.

    Units are 2^-n; candidate centres and radii run over the half-grid.
    """
    surv = set(A.survivors_bits(n).tolist())
    lo, hi = 2 * (x_units - r_units), 2 * (x_units + r_units)     # half-units
    # closed survivor cube j occupies [2j, 2j+2] in half-units
    blocked = np.zeros(hi - lo, dtype=bool)                         # open cell (u, u+1)
    for u in range(lo, hi):
        j = u // 2
        blocked[u - lo] = 0 <= j < (1 << n) and j in surv
    best = 0
    for y in range(lo, hi + 1):
        for rho in range(best + 1, min(y - lo, hi - y) + 1):
            if blocked[y - rho - lo:y + rho - lo].any():
                break
            best = rho
    return Fraction(best, 2 * r_units)          # rho / r with both in half-units... scaled


def test_brute_force_helper_sanity():
    A = comb_set(1, (0,), 8)
    assert brute_por(A, 0, 32, 8) == Fraction(1, 2)


SETS = {
    "comb": comb_set(2, (0, 3), 6),
    "comb3": comb_set(2, (0, 1, 3), 6),
    "even0": even_digits_zero(12),
    "digits": digit_constraint_set(3, {2: 1}, 12),
    "example": example_set(1, 2, 1, 1),
    "full": full_set(12),
}


@given(st.sampled_from(sorted(SETS)), st.integers(4, 12), st.data())
def test_por_set_matches_exhaustive_grid_search(name, n, data):
    A = SETS[name]
    n = min(n, A.build_depth)
    r_units = data.draw(st.integers(8, min(64, 1 << n)))
    x_units = data.draw(st.integers(0, (1 << n) - 1))
    x, r = Fraction(x_units, 1 << n), Fraction(r_units, 1 << n)
    assert Fraction(por_set(A, x, r, n)).limit_denominator(1 << 20) == brute_por(A, x_units, r_units, n)


def test_por_set_examples():
    assert por_set(full_set(20), Fraction(1, 2), Fraction(1, 4), 20) == 0.0
    single = comb_set(1, (0,), 24)
    assert por_set(single, 0, 1, 24) == pytest.approx(0.5, abs=2.0 ** -20)
    comb = comb_set(2, (0, 3), 10)
    for j in range(1, 6):
        r = Fraction(1, 4 ** j)
        assert por_set(comb, 0, r, 20) >= 0.25 - float(2.0 ** -20 / r)


@given(st.integers(0, (1 << 12) - 1), st.integers(1, 8))
def test_nested_sets_have_smaller_porosity(x_units, s):
    small, big = comb_set(2, (0, 3), 6), comb_set(2, (0, 1, 3), 6)
    x, r = Fraction(x_units, 1 << 12), Fraction(1, 1 << s)
    assert por_set(big, x, r, 12) <= por_set(small, x, r, 12)


@given(st.integers(0, 1000), st.integers(1, 20))
def test_porosity_of_points_in_set_at_most_half(seed, s):
    E = example_set(1, 2, 1, 3)
    b = int(E.sample_bits(seed, 1, 24)[0])
    x = Fraction(2 * b + 1, 1 << 25)
    assert 0 <= por_set(E, x, Fraction(1, 1 << s), 24) <= 0.5 + 2.0 ** (s - 24)


def test_lebesgue_hole_tracks_eps():
    v = por_measure(lebesgue(40), Fraction(1, 2), Fraction(1, 8), 0.25, 24)
    assert v == pytest.approx(0.25, abs=2.0 ** -18)


@pytest.mark.parametrize("j", [2, 4, 6, 8])
def test_counterexample_light_half_is_a_hole(j):
    m = counterexample_measure(max_depth=64)
    light = 1 - 1 / np.log(j + 3)                  # relative mass of the right child
    hole = measure_hole(m, 0, Fraction(1, 1 << j), light + 0.01, j + 16)
    assert hole.value >= 0.25 - hole.slack


@given(st.integers(0, (1 << 20) - 1), st.integers(2, 10),
       st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_eps_monotone(g, s, e1, e2):
    m = counterexample_measure(max_depth=40)
    x, r = Fraction(g, 1 << 20), Fraction(1, 1 << s)
    lo, hi = sorted((e1, e2))
    assert por_measure(m, x, r, lo, 20) <= por_measure(m, x, r, hi, 20)


@given(st.integers(0, (1 << 18) - 1), st.integers(2, 8), st.floats(0.01, 0.5))
def test_refinement_loses_at_most_slack(g, s, eps):
    m = counterexample_measure(max_depth=40)
    x, r = Fraction(g, 1 << 18), Fraction(1, 1 << s)
    coarse = measure_hole(m, x, r, eps, 18)
    fine = measure_hole(m, x, r, eps, 19)
    assert fine.value >= coarse.value - coarse.slack


@given(st.integers(0, 2 ** 31), st.integers(1, 8), st.integers(3, 8),
       st.floats(0.05, 0.45), st.floats(0.01, 0.5))
def test_batch_flags_match_single_evaluation(seed, s, extra, alpha, eps):
    m = counterexample_measure(max_depth=40)
    n = s + extra
    g = np.random.default_rng(seed).integers(0, 1 << n, size=6)
    flags = porous_flags_at_points(m, g, n, s, eps, alpha)
    for gi, fl in zip(g, flags):
        v = por_measure(m, Fraction(int(gi), 1 << n), Fraction(1, 1 << s), eps, n)
        assert (v >= alpha - 1e-12) == fl


def test_profiles():
    # balls around 1/2 of radius <= 1/2 stay inside [0, 1], where nothing is missing
    prof = porosity_profile(full_set(30), Fraction(1, 2), 20)
    assert not prof.values.any()
    # near the boundary the outside of [0, 1] is a hole
    assert porosity_profile(full_set(30), Fraction(1, 3), 1).values[0] == pytest.approx(1 / 6)
    E = example_set(1, 2, 1, 4)
    ps = PorousScaleSet(1, 2, 1, 4)
    b = int(E.sample_bits(1, 1, 40)[0])
    prof = porosity_profile(E, Fraction(2 * b + 1, 1 << 41), 27, resolution_depth=30)
    flags = prof.flags(0.25)
    for j, f in zip(prof.scales, flags):
        if ps.contains(int(j)):
            assert f                                # analytic porous scales are porous
    with pytest.raises(InvalidArgument):
        porosity_profile(counterexample_measure(), Fraction(1, 3), 5)


def test_measure_profile_uses_sample_depth():
    m = counterexample_measure(max_depth=64)
    pt = sample_points(m, 0, 40, 1)[0]
    prof = porosity_profile(m, pt, 10, eps=0.1)
    assert len(prof) == 10 and (prof.resolution <= 40).all()


def test_mean_porosity_fraction_extremes():
    assert mean_porosity_fraction(np.zeros(10, bool), 0.3) == (0.0, 0.0)
    assert mean_porosity_fraction(np.ones(10, bool), 0.3) == (1.0, 1.0)
    frac, low = mean_porosity_fraction(np.array([1, 0, 1, 0, 0, 0], bool), 0.3)
    assert frac == pytest.approx(1 / 3) and low == pytest.approx(1 / 3)


@given(st.lists(st.booleans(), min_size=1, max_size=60), st.integers(1, 4))
def test_offset_choice_pigeonhole(flags, k):
    t, count = select_offset(flags, k)
    assert 0 <= t < k and count * k >= sum(flags)
    s = np.arange(1, len(flags) + 1)
    assert count == int(np.asarray(flags)[(s + t) % k == 0].sum())


def test_m_hole_frequency():
    m = counterexample_measure(max_depth=260)
    pts = sample_points(m, 0, 220, 40)
    assert not m_hole_frequency(full_set(220), 2, pts, 200).any()
    single = comb_set(1, (0,), 220)
    leb_pts = sample_points(lebesgue(220), 0, 220, 20)
    assert (m_hole_frequency(single, 2, leb_pts, 200) == 1).all()
    freq = m_hole_frequency(even_digits_zero(220), 2, pts, 200)
    assert np.median(freq) > 1 / 8


def test_flag_matrix_running_fractions():
    m = counterexample_measure(max_depth=64)
    pts = sample_points(m, 2, 40, 10)
    F = flag_matrix(m, pts, 12, 0.3, 0.125)
    assert F.shape == (10, 12)
    R = running_fractions(F)
    assert np.allclose(R[:, -1], F.mean(axis=1))
