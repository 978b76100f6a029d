"""Isomorph-free enumeration of codes in W(3, q) and related exhaustive searches.

Codes are generated in an orderly fashion: a set is only ever extended by
vertices larger than its maximum, and it is kept only if it is the
lexicographically least member of its orbit under the equivalence group.
Least members are closed under removing the largest element, so every
equivalence class is met exactly once.
"""

from __future__ import annotations

import json
import logging
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .codegraph import Code, CodeError, classify, distance_partition, incidence_graph, min_distance
from .groupaction import automorphism_group, decide_nt, side_preserving
from .permgroup import ELEMENT_CAP, GroupCapError, PermGroup, invert

log = logging.getLogger(__name__)

SEARCH_MAX_Q = 5
EXACT_MAX_Q = 3
SIDES = ("points", "lines", "mixed")


class SearchError(ValueError):
    pass


@dataclass
class SearchSpec:
    q: int
    side: str = "lines"
    min_size: int = 1
    max_size: int | None = None
    delta_min: int = 4
    nt_filter: bool = False
    maximal: bool = False
    rho: int | None = None
    relabel_seed: int | None = None

    def __post_init__(self):
        if self.side not in SIDES:
            raise SearchError(f"side must be one of {SIDES}")
        if self.delta_min not in (3, 4):
            raise SearchError("delta_min must be 3 or 4")
        if self.side == "mixed" and self.delta_min == 4:
            raise SearchError("a mixed code has a point and a line at odd distance, so delta 4 is impossible")
        if self.q > SEARCH_MAX_Q:
            raise GroupCapError(f"search unsupported for q = {self.q}")
        if self.max_size is None:
            self.max_size = self.min_size
        if self.max_size < self.min_size:
            raise SearchError("max_size below min_size")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class SearchReport:
    spec: SearchSpec
    representatives: list[Code]
    analyses: list[dict]
    nodes: int
    elapsed: float
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.representatives)

    def summary(self) -> dict:
        return {"spec": self.spec.to_json(), "classes": len(self.representatives),
                "nodes": self.nodes, "elapsed": round(self.elapsed, 3), **self.extra}


# --- orbit-minimality ----------------------------------------------------------

class _Engine:
    """Distance data and the minimality test for one search."""

    def __init__(self, dist: np.ndarray, npts: int, group: PermGroup, side: str, delta_min: int):
        self.dist = dist
        self.n = len(dist)
        self.npts = npts
        self.delta_min = delta_min
        if side == "points":
            self.lo, self.hi = 0, npts
        elif side == "lines":
            self.lo, self.hi = npts, self.n
        else:
            self.lo, self.hi = 0, self.n
        self.compat = dist >= delta_min
        self.side_mask = np.zeros(self.n, dtype=bool)
        self.side_mask[self.lo:self.hi] = True
        self.orbit_id = np.full(self.n, -1, dtype=np.int64)
        self.orbit_min = np.full(self.n, -1, dtype=np.int64)
        self.stab: dict[int, np.ndarray] = {}
        self.to_min: dict[int, np.ndarray] = {}
        for k, orb in enumerate(group.orbits(range(self.lo, self.hi))):
            m = orb[0]
            self.orbit_id[orb] = k
            self.orbit_min[orb] = m
            chain = group.chain((m,))
            size = chain.order() // max(len(orb), 1)
            if size > ELEMENT_CAP:
                raise GroupCapError(f"point stabiliser of order {size} exceeds the cap")
            self.stab[m] = chain.elements_from(1, dtype=np.int16 if self.n < 2**15 else np.int32)
            top = chain.levels[0]
            for t in orb:
                self.to_min[t] = top.inv_reps[t]

    def is_canonical(self, s: tuple[int, ...]) -> bool:
        first = s[0]
        if self.orbit_min[first] != first:
            return False
        arr = np.asarray(s, dtype=np.int64)
        if (self.orbit_min[arr] < first).any():
            return False
        target = np.asarray(s)
        h = self.stab[first]
        for t in s:
            if self.orbit_id[t] != self.orbit_id[first]:
                continue
            images = np.sort(h[:, self.to_min[t][arr]], axis=1)
            diff = images != target
            rows = diff.any(axis=1)
            if not rows.any():
                continue
            pos = diff.argmax(axis=1)
            if (images[np.arange(len(images)), pos] < target[pos])[rows].any():
                return False
        return True


# --- generation -----------------------------------------------------------------

@dataclass
class _Stats:
    nodes: int = 0


def _accept(engine: _Engine, spec: SearchSpec, s: tuple, ok: np.ndarray) -> bool:
    if not spec.min_size <= len(s) <= spec.max_size:
        return False
    if spec.maximal and ok.any():
        return False
    if spec.rho is not None:
        mask = engine.dist[list(s)].min(axis=0)
        if int(mask.max()) != spec.rho:
            return False
    return True


def _dfs(engine: _Engine, spec: SearchSpec, s: tuple, ok: np.ndarray, out: list, stats: _Stats):
    stats.nodes += 1
    if _accept(engine, spec, s, ok):
        out.append(s)
    if len(s) >= spec.max_size:
        return
    start = s[-1] + 1 if s else engine.lo
    for v in (np.nonzero(ok[start:engine.hi])[0] + start).tolist():
        child = s + (v,)
        if engine.is_canonical(child):
            _dfs(engine, spec, child, ok & engine.compat[v], out, stats)


def _units(engine: _Engine, spec: SearchSpec, depth: int):
    """Canonical sets of size ``depth`` plus accepted shallower ones."""
    shallow, stats = [], _Stats()
    level = [((), engine.side_mask.copy())]
    for _ in range(depth):
        nxt = []
        for s, ok in level:
            stats.nodes += 1
            if _accept(engine, spec, s, ok) and s:
                shallow.append(s)
            if len(s) >= spec.max_size:
                continue
            start = s[-1] + 1 if s else engine.lo
            for v in (np.nonzero(ok[start:engine.hi])[0] + start).tolist():
                child = s + (v,)
                if engine.is_canonical(child):
                    nxt.append((child, ok & engine.compat[v]))
        level = nxt
    return shallow, level, stats.nodes


_WORKER: dict = {}


def _run_unit(args):
    idx, s = args
    engine, spec = _WORKER["engine"], _WORKER["spec"]
    ok = engine.side_mask.copy()
    for v in s:
        ok &= engine.compat[v]
    out, stats = [], _Stats()
    _dfs(engine, spec, tuple(s), ok, out, stats)
    return idx, out, stats.nodes


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("GQCODES_WORKERS", "1")))
    except ValueError:
        return 1


def _equivalence_group(graph, side: str) -> PermGroup:
    full = automorphism_group(graph)
    return full if side == "mixed" else side_preserving(full, graph)


def _relabelling(graph, seed: int) -> np.ndarray:
    """A random permutation keeping points and lines on their sides."""
    rng = np.random.default_rng(seed)
    npts = graph.num_points
    return np.concatenate([rng.permutation(npts), npts + rng.permutation(graph.n - npts)])


def enumerate_codes(spec: SearchSpec, workers: int | None = None, checkpoint: str | None = None,
                    analyse: bool = True, split_depth: int = 2) -> SearchReport:
    """One representative per equivalence class of codes meeting ``spec``."""
    t0 = time.perf_counter()
    graph = incidence_graph(spec.q)
    group = _equivalence_group(graph, spec.side)
    dist = graph.distance_table.astype(np.int64)
    perm = None
    if spec.relabel_seed is not None:
        perm = _relabelling(graph, spec.relabel_seed)
        pinv = invert(perm)
        dist = dist[np.ix_(pinv, pinv)]
        group = PermGroup([perm[g[pinv]] for g in group.generators], graph.n)
    engine = _Engine(dist, graph.num_points, group, spec.side, spec.delta_min)

    shallow, units, nodes = _units(engine, spec, split_depth)
    unit_sets = [s for s, _ in units]
    done: dict[int, tuple[list, int]] = {}
    if checkpoint and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            state = json.load(fh)
        if state.get("spec") != spec.to_json():
            raise SearchError("checkpoint belongs to a different search")
        done = {int(k): ([tuple(x) for x in v["reps"]], v["nodes"]) for k, v in state["done"].items()}
        log.info("resuming with %d of %d branches done", len(done), len(unit_sets))

    def save():
        if checkpoint:
            state = {"format": 1, "spec": spec.to_json(), "units": len(unit_sets),
                     "done": {str(k): {"reps": [list(r) for r in v[0]], "nodes": v[1]}
                              for k, v in sorted(done.items())}}
            tmp = checkpoint + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(state, fh)
            os.replace(tmp, checkpoint)

    todo = [(i, s) for i, s in enumerate(unit_sets) if i not in done]
    workers = default_workers() if workers is None else workers
    _WORKER["engine"], _WORKER["spec"] = engine, spec
    try:
        if workers > 1 and len(todo) > 1:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                for idx, out, n in pool.map(_run_unit, todo):
                    done[idx] = (out, n)
                    save()
        else:
            for item in todo:
                idx, out, n = _run_unit(item)
                done[idx] = (out, n)
                save()
    finally:
        _WORKER.clear()

    found = list(shallow)
    for idx in sorted(done):
        found.extend(done[idx][0])
        nodes += done[idx][1]
    if perm is not None:
        pinv = invert(perm)
        found = [tuple(sorted(int(pinv[v]) for v in s)) for s in found]
    found = sorted(set(found), key=lambda s: (len(s), s))

    reps, analyses = [], []
    full = automorphism_group(graph)
    for s in found:
        code = Code(graph, s)
        info = analyse_code(code, group=full) if (analyse or spec.nt_filter) else {}
        if spec.nt_filter and not info["nt"]:
            continue
        reps.append(code)
        analyses.append(info)
    return SearchReport(spec, reps, analyses, nodes, time.perf_counter() - t0)


def analyse_code(code: Code, group: PermGroup | None = None, nt: bool = True) -> dict:
    """Recompute the metrics of a code from scratch, with the NT verdict if asked."""
    part = distance_partition(code)
    info = {"size": len(code), "members": list(code.members),
            "delta": min_distance(code) if len(code) >= 2 else None,
            "rho": part.rho, "cells": part.sizes(), "classification": classify(code).name}
    if nt:
        decision = decide_nt(code, group=group)
        info["nt"] = decision.is_nt
        info["stabiliser_order"] = decision.order
    return info


# --- equivalence ---------------------------------------------------------------

def canonical_form(group: PermGroup, members) -> tuple[int, ...]:
    """Lexicographically least sorted image of ``members`` under ``group``."""
    members = np.asarray(sorted(int(m) for m in members), dtype=np.int64)
    best = None
    for _, block in group.iter_element_blocks():
        images = np.sort(block[:, members], axis=1)
        row = images[np.lexsort(images.T[::-1])[0]]
        cand = tuple(int(x) for x in row)
        if best is None or cand < best:
            best = cand
    return best


def equivalent(a: Code, b: Code, group: PermGroup | None = None) -> bool:
    if len(a) != len(b):
        return False
    group = automorphism_group(a.graph) if group is None else group
    return canonical_form(group, a.members) == canonical_form(group, b.members)


# --- classification checks -------------------------------------------------------

def catalogue(q: int) -> list[tuple[str, Code]]:
    """Known neighbour-transitive maximal partial ovoids and spreads."""
    from . import constructions as cons

    out = [("regular-spread", cons.regular_spread(q).code),
           ("hyperbolic-line", cons.hyperbolic_line_code(q).code)]
    if q <= cons.SHARPLY_TRANSITIVE_MAX_Q:
        for i, g in enumerate(cons.sharply_transitive_subgroups(q)):
            out.append((f"subgroup-spread[{g.label}#{i}]", cons.subgroup_partial_spread(q, g).code))
    if q == 3:
        out.append(("w33-five", cons.w33_five_code().code))
    return out


def enumerate_nt_maximal(q: int, workers: int | None = None) -> SearchReport:
    """All NT maximal partial ovoids and spreads, each matched against :func:`catalogue`."""
    if q > EXACT_MAX_Q:
        raise GroupCapError(f"exact maximal-code classification unsupported for q = {q}")
    t0 = time.perf_counter()
    graph = incidence_graph(q)
    full = automorphism_group(graph)
    known = {}
    for name, code in catalogue(q):
        known.setdefault(canonical_form(full, code.members), name)
    reps, analyses, nodes = [], [], 0
    spec = None
    for side in ("points", "lines"):
        spec = SearchSpec(q, side, 1, q * q + 1, 4, nt_filter=True, maximal=True)
        rep = enumerate_codes(spec, workers=workers)
        nodes += rep.nodes
        for code, info in zip(rep.representatives, rep.analyses):
            info = dict(info, side=side, match=known.get(canonical_form(full, code.members)))
            reps.append(code)
            analyses.append(info)
    unmatched = [a for a in analyses if a["match"] is None]
    extra = {"unmatched": len(unmatched), "catalogue": sorted(set(known.values()))}
    return SearchReport(spec, reps, analyses, nodes, time.perf_counter() - t0, extra)


def completing_line(code: Code) -> int | None:
    """The line through the points a size-q^2 partial spread leaves uncovered."""
    g = code.graph
    model = g.model
    covered = np.zeros(g.num_points, dtype=bool)
    for v in code.members:
        covered[model.line_points[v - g.num_points]] = True
    free = np.nonzero(~covered)[0]
    if len(free) != g.q + 1:
        return None
    li = model.line_through(int(free[0]), int(free[1]))
    if li is None or sorted(model.line_points[li].tolist()) != free.tolist():
        return None
    return li


def spread_completion_preset(q: int, workers: int | None = None) -> SearchReport:
    """NT partial spreads of size q^2 and whether their completion is regular."""
    from .constructions import regular_spread

    if q > EXACT_MAX_Q:
        raise GroupCapError(f"preset unsupported for q = {q}")
    graph = incidence_graph(q)
    full = automorphism_group(graph)
    spec = SearchSpec(q, "lines", q * q, q * q, 4, nt_filter=True)
    rep = enumerate_codes(spec, workers=workers)
    regular = regular_spread(q).code
    reg_canon = canonical_form(full, regular.members)
    reg_order = full.setwise_stabiliser(regular.members).order()
    for code, info in zip(rep.representatives, rep.analyses):
        li = completing_line(code)
        info["completion"] = li
        if li is None:
            info["completed_regular"] = False
            continue
        completed = Code(graph, code.members + (graph.num_points + li,))
        info["completed_stabiliser_order"] = full.setwise_stabiliser(completed.members).order()
        info["completed_regular"] = canonical_form(full, completed.members) == reg_canon
    rep.extra = {"regular_stabiliser_order": reg_order,
                 "non_regular": sum(1 for a in rep.analyses if not a["completed_regular"])}
    return rep


# --- maximum codes with minimum distance at least 3 ----------------------------------

def _colour_sort(adj: list[int], p: int):
    order, bounds = [], []
    colour, u = 0, p
    while u:
        colour += 1
        avail = u
        while avail:
            v = (avail & -avail).bit_length() - 1
            avail &= ~adj[v] & ~(1 << v)
            u &= ~(1 << v)
            order.append(v)
            bounds.append(colour)
    return order, bounds


def _max_clique(adj: list[int], seed: list[int], cand: int, best: list[int]) -> list[int]:
    """Largest clique containing ``seed`` inside ``cand`` (branch and bound)."""
    stats = [0]

    def expand(r: list[int], p: int):
        nonlocal best
        stats[0] += 1
        order, bounds = _colour_sort(adj, p)
        for v, b in zip(reversed(order), reversed(bounds)):
            if len(r) + b <= len(best):
                return
            r2 = r + [v]
            p2 = p & adj[v]
            if p2:
                expand(r2, p2)
            elif len(r2) > len(best):
                best = r2
            p &= ~(1 << v)

    if len(seed) > len(best):
        best = list(seed)
    if cand:
        expand(list(seed), cand)
    return best


def _greedy(adj: list[int], n: int) -> list[int]:
    chosen, avail = [], (1 << n) - 1
    while avail:
        v = (avail & -avail).bit_length() - 1
        chosen.append(v)
        avail &= adj[v]
    return chosen


def max_delta3_code(q: int) -> SearchReport:
    """Exact maximum size of codes with minimum distance at least 3.

    The mixed maximum (codes with both points and lines, hence minimum
    distance exactly 3) is reported separately.
    """
    if q not in (2, 3):
        raise SearchError("maximum-code search supports q = 2 and 3")
    t0 = time.perf_counter()
    graph = incidence_graph(q)
    n, npts = graph.n, graph.num_points
    dist = graph.distance_table
    adj = [0] * n
    for v in range(n):
        for u in np.nonzero(dist[v] >= 3)[0].tolist():
            adj[v] |= 1 << u
    full = automorphism_group(graph)
    allowed = (1 << n) - 1
    best: list[int] = []
    for orb in full.orbits():
        r = orb[0]
        best = _max_clique(adj, [r], adj[r] & allowed, best)
        for v in orb:
            allowed &= ~(1 << v)
    # mixed: a point and a line at distance 3 up to symmetry
    stab = side_preserving(full, graph).stabiliser(0)
    far_lines = [int(v) for v in np.nonzero(dist[0] == 3)[0]]
    mixed: list[int] = []
    for orb in stab.orbits(far_lines):
        r = orb[0]
        mixed = _max_clique(adj, [0, r], adj[0] & adj[r], mixed)
    bound = 2 * (q * q - q + 1)
    witness = Code(graph, best)
    mixed_code = Code(graph, mixed)
    extra = {"maximum": len(best), "maximum_mixed": len(mixed), "bound": bound,
             "attains_bound": len(best) >= bound, "mixed_attains_bound": len(mixed) >= bound,
             "greedy": len(_greedy(adj, n)),
             "witness": list(witness.members), "mixed_witness": list(mixed_code.members),
             "witness_delta": min_distance(witness), "mixed_delta": min_distance(mixed_code)}
    spec = SearchSpec(q, "mixed", 1, n, 3)
    info = [analyse_code(witness, nt=False), analyse_code(mixed_code, nt=False)]
    return SearchReport(spec, [witness, mixed_code], info, 0, time.perf_counter() - t0, extra)
