from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from porositykit.dyadic import (Box, CubeIndex, ancestor, binary_index, child_cubes,
                                cube_containing, format_cube, from_binary_index,
                                iter_depth, magnify, parse_cube, root)
from porositykit.errors import InvalidArgument


def test_binary_children():
    kids = child_cubes(root(1))
    assert [q.box().bounds for q in kids] == [((0, Fraction(1, 2)),), ((Fraction(1, 2), 1),)]


def test_four_adic_children_have_side_quarter():
    kids = child_cubes(root(2))
    assert len(kids) == 4 and all(q.side == Fraction(1, 4) for q in kids)


def test_planar_children_are_quadrants():
    kids = child_cubes(root(1, dim=2))
    corners = sorted(tuple(lo for lo, _ in q.box().bounds) for q in kids)
    h = Fraction(1, 2)
    assert corners == [(0, 0), (0, h), (h, 0), (h, h)]


def test_ancestor_examples():
    q = cube_containing(Fraction(3, 8), 3)          # [3/8, 1/2)
    assert q.box().bounds == ((Fraction(3, 8), Fraction(1, 2)),)
    assert ancestor(q, 2).box().bounds == ((Fraction(1, 4), Fraction(1, 2)),)
    assert ancestor(q, 3) == q
    assert ancestor(q, 0) == root(1)
    p = CubeIndex(1, (0, 1, 1, 0, 1))
    assert ancestor(p, 5) == p


def test_magnify_examples():
    assert magnify(root(1), 1).bounds == ((0, 1),)
    q = cube_containing(Fraction(1, 4), 2)          # [1/4, 1/2)
    assert magnify(q, 3).bounds == ((0, Fraction(3, 4)),)
    assert magnify(root(1), 9).bounds == ((-4, 5),)


def test_cube_id_round_trip():
    q = CubeIndex(2, (3, 0, 1))
    assert format_cube(q) == "2:3:3.0.1"
    assert parse_cube(format_cube(q)) == q
    assert parse_cube("1:0:") == root(1)
    with pytest.raises(InvalidArgument):
        parse_cube("1:2:0")


def test_invalid_digits_rejected():
    with pytest.raises(InvalidArgument):
        CubeIndex(1, (2,))
    with pytest.raises(InvalidArgument):
        cube_containing(Fraction(1), 3)


def test_iter_depth_lexicographic():
    cubes = list(iter_depth(1, 3))
    assert [binary_index(q)[1] for q in cubes] == list(range(8))


@given(st.integers(1, 3), st.integers(0, 6), st.fractions(0, 1).filter(lambda x: x < 1))
def test_depth_partition(k, depth, x):
    hits = [q for q in iter_depth(k, min(depth, 3)) if q.contains_point(x)]
    assert len(hits) == 1
    assert hits[0] == cube_containing(x, min(depth, 3), k)


@given(st.lists(st.integers(0, 3), max_size=8), st.data())
def test_ancestors_nest(digits, data):
    q = CubeIndex(2, tuple(digits))
    j = data.draw(st.integers(0, q.depth))
    jj = data.draw(st.integers(j, q.depth))
    outer, inner = ancestor(q, j).box().bounds[0], ancestor(q, jj).box().bounds[0]
    assert outer[0] <= inner[0] and inner[1] <= outer[1]
    assert ancestor(q, j).contains(ancestor(q, jj))


@given(st.lists(st.integers(0, 1), max_size=10),
       st.fractions(Fraction(1, 8), 8), st.fractions(Fraction(1, 8), 8))
def test_magnify_composes(digits, a, b):
    q = CubeIndex(1, tuple(digits))
    assert magnify(magnify(q, a), b) == magnify(q, a * b)


@given(st.integers(1, 4), st.integers(0, 5), st.data())
def test_binary_index_round_trip(k, depth, data):
    idx = data.draw(st.integers(0, (1 << (k * depth)) - 1))
    q = from_binary_index(k * depth, idx, k)
    assert q.arity_log == k and binary_index(q) == (k * depth, idx)


def test_box_requires_order():
    with pytest.raises(InvalidArgument):
        Box(((1, 0),))
