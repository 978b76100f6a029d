import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gqcodes import linalg as la
from gqcodes.codegraph import (Code, CodeError, classify, counting_check, distance_partition,
                               incidence_graph, min_distance, perfect_size_identity,
                               perfect_size_scan, perfect_size_simplified)
from gqcodes.constructions import hyperbolic_line_code, regular_spread, spread_minus_line


def _oracle_distance(model, a, b):
    """Distances from linear algebra alone: rank of joined subspaces."""
    F = model.field
    npts = len(model.points)
    if a == b:
        return 0
    rows = lambda v: [model.points[v].coords] if v < npts else list(model.lines[v - npts].basis)
    ra, rb = rows(a), rows(b)
    joined = la.rank(F, ra + rb)
    if a < npts and b < npts:
        return 2 if model.gram(ra[0], rb[0]) == 0 else 4
    if a >= npts and b >= npts:
        return 2 if joined == 3 else 4
    return 1 if joined == 2 else 3


@pytest.mark.parametrize("q", [2, 3])
def test_distances_match_linear_algebra(q):
    g = incidence_graph(q)
    table = g.distance_table
    for a in range(g.n):
        for b in range(a, g.n):
            assert table[a, b] == _oracle_distance(g.model, a, b)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_graph_shape(q):
    g = incidence_graph(q)
    assert g.n == 2 * (q + 1) * (q * q + 1)
    assert (g.diameter, g.girth) == (4, 8)
    assert {len(x) for x in g.neighbours} == {q + 1}
    d = g.distance_table
    assert np.array_equal(d, d.T)
    assert set(np.unique(d).tolist()) == {0, 1, 2, 3, 4}


def test_graph_cached():
    assert incidence_graph(3) is incidence_graph(3)


def test_bfs_without_table():
    g = incidence_graph(7)
    dist = g.bfs([0])
    assert dist.max() == 4
    assert g.distance(0, int(np.nonzero(dist == 3)[0][0])) == 3


def test_code_validation(graph2):
    with pytest.raises(CodeError):
        Code(graph2, (0, 30))
    with pytest.raises(CodeError):
        min_distance(Code(graph2, (0,)))
    with pytest.raises(CodeError):
        distance_partition(Code(graph2, ()))
    c = Code(graph2, (5, 1, 5))
    assert c.members == (1, 5) and c.side == "points"
    assert Code.from_lines(graph2, [0]).members == (15,)
    assert Code(graph2, (0, 15)).side == "mixed"


members2 = st.sets(st.integers(0, 29), min_size=1, max_size=12)


@settings(max_examples=150, deadline=None)
@given(members2)
def test_partition_coverage(members):
    g = incidence_graph(2)
    code = Code(g, tuple(members))
    part = distance_partition(code)
    allv = np.concatenate(part.cells)
    assert sorted(allv.tolist()) == list(range(g.n))
    expect = g.distance_table[list(members)].min(axis=0)
    assert np.array_equal(part.labels, expect)
    assert part.rho == expect.max()
    assert part.cells[0].tolist() == sorted(members)


@settings(max_examples=150, deadline=None)
@given(st.sets(st.integers(0, 79), min_size=2, max_size=10))
def test_min_distance_brute_force(members):
    g = incidence_graph(3)
    code = Code(g, tuple(members))
    brute = min(g.distance(a, b) for a, b in itertools.combinations(members, 2))
    assert min_distance(code) == brute


def _brute_classify_points(g, pts):
    model = g.model
    pts = set(pts)
    on = [len(pts & set(row.tolist())) for row in model.line_points]
    partial = max(on) <= 1
    if not partial:
        return "points code"
    complete = min(on) == 1
    addable = [p for p in range(g.num_points) if p not in pts
               and all(len((pts | {p}) & set(row.tolist())) <= 1 for row in model.line_points)]
    if complete:
        return "ovoid"
    return "partial ovoid" if addable else "maximal partial ovoid"


@settings(max_examples=150, deadline=None)
@given(st.sets(st.integers(0, 14), min_size=2, max_size=6))
def test_classify_points_brute_force(pts):
    g = incidence_graph(2)
    assert classify(Code(g, tuple(pts))).name == _brute_classify_points(g, pts)


@settings(max_examples=100, deadline=None)
@given(st.sets(st.integers(0, 14), min_size=2, max_size=6))
def test_classify_lines_brute_force(lines):
    g = incidence_graph(2)
    code = Code.from_lines(g, lines)
    covered = [p for li in lines for p in g.model.line_points[li].tolist()]
    partial = len(covered) == len(set(covered))
    name = classify(code).name
    if not partial:
        assert name == "lines code"
    elif len(covered) == g.num_points:
        assert name == "spread"
    else:
        cov = set(covered)
        addable = any(not cov & set(row.tolist()) for row in g.model.line_points)
        assert name == ("partial spread" if addable else "maximal partial spread")


def test_known_classifications():
    assert classify(regular_spread(3).code).name == "spread"
    assert classify(spread_minus_line(3).code).name == "partial spread"
    assert classify(hyperbolic_line_code(3).code).name == "maximal partial ovoid"
    g = incidence_graph(2)
    assert classify(Code(g, (0, 20))).name == "mixed"
    assert classify(Code(g, (0,))).side == "points"
    assert classify(Code(g, (0,))).to_json()["partial"] is True


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_counting_identities_on_spreads(q):
    for code in (regular_spread(q).code, spread_minus_line(q).code, hyperbolic_line_code(q).code):
        report = counting_check(code)
        assert report.ok, report.to_json()


def test_counting_needs_distance_four(graph2):
    with pytest.raises(CodeError):
        counting_check(Code(graph2, (0, 15)))


def test_perfect_size_scan():
    scan = perfect_size_scan(1000)
    # s = -2 mod (s+2) gives (s+2) | 10 and, per side, (s+2) | 5
    assert scan.integral_total == tuple(d - 2 for d in (5, 10))
    assert scan.integral_per_side == (3,)
    assert scan.closed_form_mismatches == 1000
    for s in (1, 2, 3, 10, 999):
        assert perfect_size_identity(s) - perfect_size_simplified(s) == 4 - Fraction(8, s + 2)
    with pytest.raises(ValueError):
        perfect_size_identity(0)
