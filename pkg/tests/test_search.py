import itertools
import json

import numpy as np
import pytest

from gqcodes import constructions as cons
from gqcodes.codegraph import Code, classify, distance_partition, incidence_graph, min_distance
from gqcodes.permgroup import GroupCapError
from gqcodes.search import (SearchError, SearchSpec, _equivalence_group, canonical_form,
                            completing_line, default_workers, enumerate_codes,
                            enumerate_nt_maximal, equivalent, max_delta3_code,
                            spread_completion_preset)


def _naive_count(graph, side, size, delta):
    npts = graph.num_points
    # the mixed side draws from every vertex
    pool = {"points": range(npts), "lines": range(npts, graph.n), "mixed": range(graph.n)}[side]
    d = graph.distance_table
    count = 0
    for s in itertools.combinations(pool, size):
        if all(d[a, b] >= delta for a, b in itertools.combinations(s, 2)):
            count += 1
    return count


@pytest.mark.parametrize("side,delta,sizes", [
    ("lines", 4, range(1, 6)), ("points", 4, range(1, 6)), ("mixed", 3, range(2, 5)),
])
def test_double_count_q2(side, delta, sizes):
    g = incidence_graph(2)
    group = _equivalence_group(g, side)
    for size in sizes:
        rep = enumerate_codes(SearchSpec(2, side, size, size, delta), analyse=False)
        total = sum(group.order() // group.setwise_stabiliser(c.members).order()
                    for c in rep.representatives)
        assert total == _naive_count(g, side, size, delta), (side, size)


def test_representatives_pairwise_inequivalent():
    g = incidence_graph(2)
    group = _equivalence_group(g, "lines")
    rep = enumerate_codes(SearchSpec(2, "lines", 1, 5, 4), analyse=False)
    forms = [canonical_form(group, c.members) for c in rep.representatives]
    assert len(forms) == len(set(forms))


@pytest.mark.parametrize("seed", [1, 7, 123])
def test_relabelling_invariance(seed):
    base = enumerate_codes(SearchSpec(3, "lines", 4, 4, 4), analyse=False)
    moved = enumerate_codes(SearchSpec(3, "lines", 4, 4, 4, relabel_seed=seed), analyse=False)
    g = incidence_graph(3)
    group = _equivalence_group(g, "lines")
    key = lambda rep: sorted(canonical_form(group, c.members) for c in rep.representatives)
    assert key(base) == key(moved)


def test_workers_do_not_change_results():
    spec = SearchSpec(3, "lines", 1, 6, 4, maximal=False)
    one = enumerate_codes(spec, workers=1, analyse=False)
    two = enumerate_codes(spec, workers=2, analyse=False)
    assert [c.members for c in one.representatives] == [c.members for c in two.representatives]
    assert one.nodes == two.nodes


def test_checkpoint_resume(tmp_path):
    spec = SearchSpec(3, "lines", 3, 5, 4)
    ck = tmp_path / "run.json"
    full = enumerate_codes(spec, checkpoint=str(ck), analyse=False)
    state = json.loads(ck.read_text())
    assert len(state["done"]) == state["units"]
    # drop half of the finished branches and resume
    keep = dict(list(state["done"].items())[: len(state["done"]) // 2])
    state["done"] = keep
    ck.write_text(json.dumps(state))
    resumed = enumerate_codes(spec, checkpoint=str(ck), analyse=False)
    assert [c.members for c in resumed.representatives] == [c.members for c in full.representatives]
    assert resumed.nodes == full.nodes
    other = SearchSpec(3, "lines", 3, 4, 4)
    with pytest.raises(SearchError):
        enumerate_codes(other, checkpoint=str(ck))


def test_spec_validation():
    with pytest.raises(SearchError):
        SearchSpec(2, "mixed", 2, 3, 4)
    with pytest.raises(SearchError):
        SearchSpec(2, "planes")
    with pytest.raises(SearchError):
        SearchSpec(2, "lines", 4, 3)
    with pytest.raises(SearchError):
        SearchSpec(2, "lines", 1, 2, delta_min=2)
    with pytest.raises(GroupCapError):
        SearchSpec(7, "lines")


def test_filters():
    rep = enumerate_codes(SearchSpec(3, "lines", 1, 10, 4, maximal=True))
    assert rep.representatives
    for c, info in zip(rep.representatives, rep.analyses):
        assert classify(c).maximal
        assert info["delta"] in (None, 4)
    rep = enumerate_codes(SearchSpec(3, "lines", 10, 10, 4, rho=2))
    assert len(rep) == len(enumerate_codes(SearchSpec(3, "lines", 10, 10, 4)))
    assert all(distance_partition(c).rho == 2 for c in rep.representatives)


def test_equivalence_helpers(group3):
    code = cons.regular_spread(3).code
    g = group3.generators[0]
    moved = code.image(g)
    assert equivalent(code, moved)
    assert not equivalent(code, cons.spread_minus_line(3).code)
    cf = canonical_form(group3, code.members)
    assert canonical_form(group3, cf) == cf


def test_completing_line():
    r = cons.spread_minus_line(3)
    g = r.code.graph
    li = completing_line(r.code)
    assert li is not None
    full = Code(g, r.code.members + (g.num_points + li,))
    assert classify(full).name == "spread"
    assert completing_line(cons.subgroup_partial_spread(3).code) is None


def test_spread_completion_q2():
    rep = spread_completion_preset(2)
    assert len(rep) == 1 and rep.extra["non_regular"] == 0
    with pytest.raises(GroupCapError):
        spread_completion_preset(4)


def test_nt_maximal_q2():
    rep = enumerate_nt_maximal(2)
    assert rep.extra["unmatched"] == 0
    assert {a["match"] for a in rep.analyses} <= set(rep.extra["catalogue"])
    with pytest.raises(GroupCapError):
        enumerate_nt_maximal(4)


def _bron_kerbosch_max(adj):
    best = set()

    def bk(r, p, x):
        nonlocal best
        if not p and not x:
            if len(r) > len(best):
                best = set(r)
            return
        if len(r) + len(p) <= len(best):
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in list(p - adj[pivot]):
            bk(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bk(set(), set(adj), set())
    return best


def test_max_delta3_q2_matches_clique_oracle():
    g = incidence_graph(2)
    d = g.distance_table
    adj = {v: {u for u in range(g.n) if d[v, u] >= 3} for v in range(g.n)}
    rep = max_delta3_code(2)
    assert rep.extra["maximum"] == len(_bron_kerbosch_max(adj)) == 6
    assert min_distance(rep.representatives[0]) >= 3
    assert rep.extra["maximum"] >= rep.extra["greedy"]
    mixed = rep.representatives[1]
    assert mixed.side == "mixed" and min_distance(mixed) == 3


def test_max_delta3_limits():
    with pytest.raises(SearchError):
        max_delta3_code(4)


def test_default_workers(monkeypatch):
    monkeypatch.setenv("GQCODES_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("GQCODES_WORKERS")
    assert default_workers() >= 1


def test_summary_is_json():
    rep = enumerate_codes(SearchSpec(2, "points", 2, 2, 4))
    summary = json.loads(json.dumps(rep.summary()))
    assert summary["classes"] == len(rep)
