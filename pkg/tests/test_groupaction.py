import numpy as np
import pytest
from sympy.combinatorics import Permutation, PermutationGroup

from gqcodes import linalg as la
from gqcodes.codegraph import Code, CodeError, incidence_graph
from gqcodes.constructions import hyperbolic_line_code, regular_spread, spread_minus_line
from gqcodes.field import gf
from gqcodes.geometry import alternate_gram, standard_gram
from gqcodes.groupaction import (CertificationError, NotSimilitudeError, SemilinearMap, VertexPerm,
                                 action_on_code, automorphism_group, certify_nt, decide_nt,
                                 divisibility_check, find_duality, induce_permutation,
                                 is_symmetric_action, local_nt_check, plucker_duality,
                                 psgammasp4_order, side_preserving, sp4_generators,
                                 verify_full_group)
from gqcodes.permgroup import GroupCapError, PermGroup

IDENT = la.identity(4)


def test_identity_induces_identity(graph3):
    perm = induce_permutation(SemilinearMap(gf(3), IDENT), graph3)
    assert np.array_equal(perm.images, np.arange(graph3.n))
    assert not perm.swaps_sides


def test_non_similitude_rejected(graph3):
    # e1 -> e1 + e3 breaks f(e1, e4) = 0
    m = ((1, 0, 1, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))
    smap = SemilinearMap(gf(3), m)
    assert smap.similitude_factor(standard_gram(3)) is None
    with pytest.raises(NotSimilitudeError) as err:
        induce_permutation(smap, graph3)
    assert err.value.witness is not None


def test_singular_matrix_rejected(graph3):
    with pytest.raises(NotSimilitudeError):
        induce_permutation(SemilinearMap(gf(3), ((0,) * 4,) * 4), graph3)


def test_similitude_factor():
    F = gf(5)
    two = ((2, 0, 0, 0), (0, 2, 0, 0), (0, 0, 2, 0), (0, 0, 0, 2))
    assert SemilinearMap(F, two).similitude_factor(standard_gram(F)) == 4


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_generators_preserve_distance(q):
    g = incidence_graph(q)
    for smap in sp4_generators(q):
        img = induce_permutation(smap, g).images
        for v in range(0, g.n, max(1, g.n // 25)):
            # d(img v, img u) == d(v, u) for every u
            assert np.array_equal(g.bfs([int(img[v])])[img], g.bfs([v]))


def test_generator_json_round_trip():
    F = gf(9)
    for smap in sp4_generators(9):
        assert SemilinearMap.from_json(F, smap.to_json()) == smap


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_induced_group_order(q):
    g = incidence_graph(q)
    G = PermGroup([induce_permutation(m, g).images for m in sp4_generators(q)], g.n)
    assert G.order() == psgammasp4_order(q)
    assert psgammasp4_order(q) == {2: 720, 3: 51840, 4: 1958400, 5: 9360000}[q]


def test_group_order_matches_sympy(graph2, group2):
    S = PermutationGroup([Permutation(g.tolist()) for g in group2.generators])
    assert S.order() == group2.order() == 1440


def test_alternate_form_generators():
    g = incidence_graph(3, alternate_gram(3))
    G = PermGroup([induce_permutation(m, g).images for m in sp4_generators(3, alternate_gram(3))], g.n)
    assert G.order() == 51840


@pytest.mark.parametrize("q", [2, 4])
def test_duality_even(q):
    g = incidence_graph(q)
    d = find_duality(g)
    assert d is not None and d.swaps_sides
    assert np.array_equal(d.images, plucker_duality(g).images)
    # the square of the duality preserves sides
    assert not (d * d).swaps_sides


def test_no_duality_odd(graph3):
    assert find_duality(graph3) is None


def test_duality_cap():
    with pytest.raises(GroupCapError):
        find_duality(incidence_graph(7))


def test_plucker_needs_even():
    with pytest.raises(ValueError):
        plucker_duality(incidence_graph(3))


def test_automorphism_group_orders(group2, group3):
    assert group2.order() == 2 * 720
    assert group3.order() == 51840
    assert side_preserving(group2, incidence_graph(2)).order() == 720
    assert side_preserving(group3, incidence_graph(3)) is group3


def test_full_group_verified_q2(graph2, group2):
    assert verify_full_group(graph2, group2) == 1440


@pytest.mark.slow
def test_full_group_verified_q3(graph3, group3):
    assert verify_full_group(graph3, group3) == 51840


def test_vertex_perm_validation(graph2):
    with pytest.raises(ValueError):
        VertexPerm(np.zeros(graph2.n, dtype=int), graph2)
    bad = np.arange(graph2.n)
    bad[[0, 1]] = bad[[1, 0]]
    with pytest.raises(ValueError, match="adjacency"):
        VertexPerm(bad, graph2)
    ident = VertexPerm(np.arange(graph2.n), graph2)
    assert ident.inverse() == ident
    assert ident.to_json()["perm"][:3] == [0, 1, 2]


def test_certificates():
    r = regular_spread(3)
    cert = certify_nt(r.code, r.nt_generators, 1)
    assert cert.success and cert.orbit_counts == [1, 1] and cert.replay()
    with pytest.raises(CertificationError):
        certify_nt(r.code, r.nt_generators, 3)
    # generators that move the code are refused
    foreign = spread_minus_line(3)
    with pytest.raises(CertificationError):
        certify_nt(foreign.code, sp4_generators(3), 1)


def test_certificate_fails_for_too_small_group():
    r = regular_spread(3)
    cert = certify_nt(r.code, r.nt_generators[:1], 1)
    assert not cert.success


def test_decide_nt_known_codes(group3):
    assert decide_nt(regular_spread(3).code, group=group3).is_nt
    r = hyperbolic_line_code(3)
    d = decide_nt(r.code, group=group3)
    assert d.is_nt and d.orbit_counts == [1, 1]


def test_decide_nt_negative(graph3, group3):
    # two collinear points and a third collinear with neither: codewords differ
    d = graph3.distance_table
    p1 = int(np.nonzero(d[0, :graph3.num_points] == 2)[0][0])
    p2 = int(np.nonzero((d[0, :graph3.num_points] == 4) & (d[p1, :graph3.num_points] == 4))[0][0])
    result = decide_nt(Code(graph3, (0, p1, p2)), group=group3)
    assert not result.is_nt
    assert result.orbit_counts[0] == 2


def test_decide_nt_cap():
    code = hyperbolic_line_code(7).code
    with pytest.raises(GroupCapError):
        decide_nt(code)


def test_local_criterion(group2):
    r = regular_spread(2)
    stab = group2.setwise_stabiliser(r.code.members)
    assert local_nt_check(r.code, stab)
    trivial = PermGroup([], r.code.graph.n)
    assert not local_nt_check(r.code, trivial)
    with pytest.raises(CertificationError):
        local_nt_check(r.code, group2)
    with pytest.raises(CodeError):
        local_nt_check(Code(r.code.graph, (0,)), trivial)


def test_symmetric_action(group3):
    from gqcodes.constructions import w33_five_code

    code = w33_five_code().code
    stab = group3.setwise_stabiliser(code.members)
    assert action_on_code(stab, code) == (120, 120)
    assert is_symmetric_action(stab, code)


def test_divisibility_check():
    assert not divisibility_check(25, 5, 2016)
    assert 2016 % ((5 + 1) * (25 * 5 + 1)) != 0
    assert divisibility_check(3, 3, 51840)
    with pytest.raises(ValueError):
        divisibility_check(0, 1, 1)
