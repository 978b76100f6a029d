"""Symmetries of W(3, q) acting on the incidence graph, and transitivity tests."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import linalg as la
from .codegraph import Code, CodeError, IncidenceGraph, distance_partition, incidence_graph, min_distance
from .field import FieldSpec
from .geometry import GramMatrix, hyperbolic_basis, standard_gram
from .permgroup import ELEMENT_CAP, GroupCapError, PermGroup, invert, is_identity

DUALITY_MAX_Q = 5


class NotSimilitudeError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CertificationError(ValueError):
    pass


@dataclass(frozen=True)
class SemilinearMap:
    """``x -> x^(p^frob) @ matrix`` on row vectors of GF(q)^4."""

    field: FieldSpec
    matrix: la.Matrix
    frob: int = 0

    def __post_init__(self):
        object.__setattr__(self, "matrix", la.as_matrix(self.matrix))
        object.__setattr__(self, "frob", self.frob % self.field.k)

    def apply(self, x) -> tuple[int, ...]:
        F = self.field
        return la.vec_mat(F, [F.frob(c, self.frob) for c in x], self.matrix)

    def similitude_factor(self, gram: GramMatrix) -> int | None:
        """``lam`` with ``A G A^T == lam * G^sigma``, or ``None``."""
        return self._check(gram)[0]

    def _check(self, gram: GramMatrix):
        F = self.field
        a = self.matrix
        lhs = la.mat_mul(F, la.mat_mul(F, a, gram.entries), la.transpose(a))
        rhs = la.frob_matrix(F, gram.entries, self.frob)
        lam = None
        for i in range(4):
            for j in range(4):
                if rhs[i][j]:
                    lam = F.div(lhs[i][j], rhs[i][j])
                    break
            if lam is not None:
                break
        if lam == 0 or la.det(F, a) == 0:
            return None, (0, 1)
        for i in range(4):
            for j in range(4):
                if lhs[i][j] != F.mul(lam, rhs[i][j]):
                    return None, (i, j)
        return lam, None

    def to_json(self) -> dict:
        F = self.field
        return {"matrix": [[F.serialize(x) for x in row] for row in self.matrix], "frob": self.frob}

    @classmethod
    def from_json(cls, F: FieldSpec, data) -> "SemilinearMap":
        return cls(F, [[F.deserialize(x) for x in row] for row in data["matrix"]], int(data.get("frob", 0)))


@dataclass(frozen=True, eq=False)
class VertexPerm:
    """A permutation of incidence-graph vertices that preserves adjacency."""

    images: np.ndarray
    graph: IncidenceGraph | None = field(default=None, repr=False)

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.int64)
        object.__setattr__(self, "images", images)
        if self.graph is not None:
            validate_automorphism(self.graph, images)

    def __getitem__(self, v):
        return self.images[v]

    def __len__(self):
        return len(self.images)

    def __eq__(self, other):
        return isinstance(other, VertexPerm) and np.array_equal(self.images, other.images)

    def __mul__(self, other: "VertexPerm") -> "VertexPerm":
        return VertexPerm(other.images[self.images], self.graph)

    def inverse(self) -> "VertexPerm":
        return VertexPerm(invert(self.images), self.graph)

    @property
    def swaps_sides(self) -> bool:
        if self.graph is None:
            raise ValueError("side information needs the graph")
        return bool(self.images[0] >= self.graph.num_points)

    def to_json(self) -> dict:
        return {"perm": self.images.tolist()}


def validate_automorphism(graph: IncidenceGraph, images: np.ndarray):
    n = graph.n
    if len(images) != n or not np.array_equal(np.sort(images), np.arange(n)):
        raise ValueError("not a permutation of the vertex set")
    if graph.adj is None:
        raise ValueError("adjacency check needs a regular graph")
    mapped = np.sort(images[graph.adj], axis=1)
    if not np.array_equal(mapped, graph.adj[images]):
        bad = int(np.nonzero((mapped != graph.adj[images]).any(axis=1))[0][0])
        raise ValueError(f"adjacency not preserved at vertex {bad}")
    npts = graph.num_points
    pts = images[:npts]
    if not ((pts < npts).all() or (pts >= npts).all()):
        raise ValueError("permutation mixes the two sides")


def _apply_rows(F: FieldSpec, X: np.ndarray, A, frob: int) -> np.ndarray:
    mul, add = F.mul_table, F.add_table
    if frob % F.k:
        table = np.array([F.frob(a, frob) for a in range(F.q)])
        X = table[X]
    A = np.asarray(A, dtype=np.int64)
    out = np.zeros_like(X)
    for i in range(X.shape[1]):
        out = add[out, mul[X[:, i][:, None], A[i][None, :]]]
    return out


def _normalize_rows(F: FieldSpec, X: np.ndarray) -> np.ndarray:
    inv = np.array([0] + [F.inv(a) for a in range(1, F.q)])
    lead = X[np.arange(len(X)), (X != 0).argmax(axis=1)]
    return F.mul_table[inv[lead][:, None], X]


def induce_permutation(smap: SemilinearMap, graph: IncidenceGraph) -> VertexPerm:
    """Vertex permutation of ``graph`` induced by a semilinear similitude."""
    model = graph.model
    F = model.field
    if smap.field != F:
        raise NotSimilitudeError("map is over a different field")
    lam, bad = smap._check(model.gram)
    if lam is None:
        i, j = bad
        e = la.identity(4)
        raise NotSimilitudeError(
            f"map does not preserve the form up to a scalar: basis pair (e{i + 1}, e{j + 1})",
            witness=(e[i], e[j]))
    pts = _normalize_rows(F, _apply_rows(F, model.point_coords, smap.matrix, smap.frob))
    pimg = model.point_key_index(pts)
    lp = model.line_points
    a, b = pimg[lp[:, 0]], pimg[lp[:, 1]]
    limg = np.array([model.line_through(int(x), int(y)) for x, y in zip(a, b)], dtype=np.int64)
    npts = graph.num_points
    images = np.concatenate([pimg, npts + limg])
    return VertexPerm(images, graph)


def _unit(F: FieldSpec, i: int) -> int:
    return F.p**i


def sp4_generators(q: int, gram: GramMatrix | None = None) -> list[SemilinearMap]:
    """Generators of the semilinear similitude group of the form.

    Transvections ``x -> x + c f(x, v) v`` for ``v`` among the basis vectors
    and their pairwise sums and ``c`` over a prime-field basis of GF(q), one
    similitude with a primitive multiplier, and the Frobenius map when q is
    not prime.
    """
    if gram is None:
        gram = standard_gram(q)
    F = gram.field
    if F.q != q:
        raise ValueError("form is over a different field")
    G = gram.entries
    vecs = [tuple(1 if k == i else 0 for k in range(4)) for i in range(4)]
    vecs += [tuple(1 if k in (i, j) else 0 for k in range(4)) for i in range(4) for j in range(i + 1, 4)]
    gens = []
    for v in vecs:
        col = la.mat_mul(F, G, la.transpose((v,)))
        outer = la.mat_mul(F, col, (v,))
        for i in range(F.k):
            c = _unit(F, i)
            m = tuple(tuple(F.add(1 if r == s else 0, F.mul(c, outer[r][s])) for s in range(4))
                      for r in range(4))
            gens.append(SemilinearMap(F, m))
    b = hyperbolic_basis(gram)
    b_inv = la.inverse(F, b)
    mu = F.generator()
    if F.q > 2:
        d0 = ((1, 0, 0, 0), (0, mu, 0, 0), (0, 0, 1, 0), (0, 0, 0, mu))
        gens.append(SemilinearMap(F, la.mat_mul(F, la.mat_mul(F, b_inv, d0), b)))
    if F.k > 1:
        b_sig = la.frob_matrix(F, b, 1)
        gens.append(SemilinearMap(F, la.mat_mul(F, la.inverse(F, b_sig), b), 1))
    return gens


def psgammasp4_order(q: int) -> int:
    """``q^4 (q^2 - 1)(q^4 - 1) k`` for ``q = p^k``."""
    from .field import prime_power

    k = prime_power(q)[1]
    return q**4 * (q * q - 1) * (q**4 - 1) * k


# --- duality --------------------------------------------------------------

def _vertex_invariants(graph: IncidenceGraph) -> list[tuple]:
    """For each vertex, the multiset of hyperbolic-line sizes through it."""
    dist = graph.distance_table.astype(np.int64)
    near = (dist == 2) | (dist == 0)
    out = []
    for v in range(graph.n):
        far = np.nonzero(dist[v] == 4)[0]
        sizes = Counter()
        dv2 = dist[v] == 2
        for w in far:
            trace = np.nonzero(dv2 & (dist[w] == 2))[0]
            sizes[int(near[trace].all(axis=0).sum())] += 1
        out.append(tuple(sorted(sizes.items())))
    return out


def plucker_duality(graph: IncidenceGraph) -> VertexPerm:
    """Explicit duality for even q.

    A line goes to its Plucker coordinates; the lines of the quadrangle land
    on a parabolic quadric in PG(4, q), and projecting from the nucleus of
    that quadric (which exists in characteristic 2) gives a point of PG(3, q).
    Points go to the line formed by the images of the lines through them.
    """
    model = graph.model
    F = model.field
    if F.p != 2:
        raise ValueError("the Plucker duality needs characteristic 2")
    b = hyperbolic_basis(model.gram)
    to_std = la.inverse(F, b)
    add, mul = F.add_table, F.mul_table
    rows = model.line_rows
    s0 = _apply_rows(F, rows[:, 0, :], to_std, 0)
    s1 = _apply_rows(F, rows[:, 1, :], to_std, 0)

    def pl(i, j):
        return add[mul[s0[:, i], s1[:, j]], mul[s0[:, j], s1[:, i]]]

    z = np.stack([pl(0, 2), pl(1, 3), pl(0, 3), pl(1, 2)], axis=1)
    z = _normalize_rows(F, _apply_rows(F, z, b, 0))
    limg = model.point_key_index(z)
    pimg = []
    for lines in model.point_lines:
        pimg.append(model.line_through(int(limg[lines[0]]), int(limg[lines[1]])))
    npts = graph.num_points
    images = np.concatenate([npts + np.array(pimg, dtype=np.int64), limg])
    return VertexPerm(images, graph)


def find_duality(graph: IncidenceGraph) -> VertexPerm | None:
    """A side-swapping automorphism, or ``None`` when none exists.

    Even q uses :func:`plucker_duality`.  Otherwise an exhaustive
    backtracking search runs, pruned by distances and by a vertex invariant
    that every automorphism (side-swapping or not) preserves.
    """
    if graph.q % 2 == 0 and graph.adj is not None:
        return plucker_duality(graph)
    if graph.q > DUALITY_MAX_Q:
        raise GroupCapError("duality search unsupported for this q")
    npts = graph.num_points
    return next(_extensions(graph, {0: range(npts, graph.n)}), None)


def verify_full_group(graph: IncidenceGraph, group: PermGroup) -> int:
    """Order of the full automorphism group of ``graph``, found by search.

    ``group`` must consist of automorphisms.  Along a base of ``group`` the
    search decides, one orbit of the known point stabiliser at a time,
    whether some automorphism fixing the earlier base points moves the next
    base point there; the product of the resulting orbit lengths is exact
    once the pointwise stabiliser of the whole base is shown to be trivial.
    """
    if graph.q > DUALITY_MAX_Q:
        raise GroupCapError("automorphism search unsupported for this q")
    chain = group.chain()
    order = 1
    fixed: dict[int, list[int]] = {}
    for i, lev in enumerate(chain.levels):
        b = lev.base
        sub = PermGroup(lev.gens, graph.n) if lev.gens else PermGroup([], graph.n)
        orbit = set(sub.orbit(b))
        for o in sub.orbits():
            if b in o or o[0] in orbit:
                continue
            trial = dict(fixed)
            trial[b] = [o[0]]
            if next(_extensions(graph, trial), None) is not None:
                orbit.update(o)
        order *= len(orbit)
        fixed[b] = [b]
    if len(chain.levels) == 0:
        fixed[0] = [0]
    count = sum(1 for _ in _extensions(graph, fixed))
    if count != 1:  # pragma: no cover - would mean the base is not a base of Aut
        raise RuntimeError("pointwise stabiliser of the base is not trivial")
    return order


def _extensions(graph: IncidenceGraph, prescribed: dict):
    """Yield every automorphism respecting ``prescribed`` (vertex -> allowed images).

    Prescribed vertices are assigned first, then the rest in breadth-first
    order; each candidate must be a neighbour of its parent's image, share
    the vertex invariant, and preserve distances to everything assigned.
    """
    n = graph.n
    dist = graph.distance_table.astype(np.int64)
    inv = _vertex_invariants(graph)
    classes = {c: i for i, c in enumerate(sorted(set(inv)))}
    inv_id = np.array([classes[c] for c in inv])

    order = list(prescribed)
    parent = {v: -1 for v in order}
    seen = set(order)
    for v in order:
        for w in graph.neighbours[v]:
            if w not in seen:
                seen.add(w)
                parent[w] = v
                order.append(w)
    order_arr = np.array(order, dtype=np.int64)

    phi = np.full(n, -1, dtype=np.int64)
    used = np.zeros(n, dtype=bool)

    def candidates(idx: int) -> list[int]:
        v = order[idx]
        pool = prescribed[v] if v in prescribed else graph.neighbours[phi[parent[v]]]
        done = order_arr[:idx]
        out = []
        for c in pool:
            if used[c] or inv_id[c] != inv_id[v]:
                continue
            if idx and not np.array_equal(dist[v, done], dist[c, phi[done]]):
                continue
            out.append(int(c))
        return out

    stack = [candidates(0)]
    while stack:
        idx = len(stack) - 1
        v = order[idx]
        if phi[v] >= 0:
            used[phi[v]] = False
            phi[v] = -1
        if not stack[-1]:
            stack.pop()
            continue
        c = stack[-1].pop(0)
        phi[v] = c
        used[c] = True
        if idx + 1 == n:
            yield VertexPerm(phi.copy(), graph)
            continue
        stack.append(candidates(idx + 1))


# --- groups of the graph ----------------------------------------------------

_AUT_CACHE: dict[int, PermGroup] = {}


def automorphism_group(graph: IncidenceGraph) -> PermGroup:
    """Induced semilinear similitudes, plus a duality when one exists (even q)."""
    key = id(graph)
    if key not in _AUT_CACHE:
        gens = [induce_permutation(g, graph).images
                for g in sp4_generators(graph.q, graph.model.gram)]
        if graph.q % 2 == 0:
            gens.append(plucker_duality(graph).images)
        _AUT_CACHE[key] = PermGroup(gens, graph.n)
    return _AUT_CACHE[key]


def full_automorphism_group(q: int) -> PermGroup:
    return automorphism_group(incidence_graph(q))


def side_preserving(group: PermGroup, graph: IncidenceGraph) -> PermGroup:
    """Subgroup of index at most 2 fixing the point set."""
    npts = graph.num_points
    swaps = [g for g in group.generators if g[0] >= npts]
    if not swaps:
        return group
    reps = {0: np.arange(graph.n), 1: swaps[0]}
    inv = {k: invert(v) for k, v in reps.items()}
    gens, seen = [], set()
    for t in reps.values():
        for g in group.generators:
            tg = g[t]
            side = int(tg[0] >= npts)
            sch = inv[side][tg]
            key = sch.tobytes()
            if key not in seen and not is_identity(sch):
                seen.add(key)
                gens.append(sch)
    return PermGroup(gens, graph.n)


def _as_perm(gen, graph: IncidenceGraph) -> np.ndarray:
    if isinstance(gen, SemilinearMap):
        return induce_permutation(gen, graph).images
    if isinstance(gen, VertexPerm):
        return gen.images
    return np.asarray(gen, dtype=np.int64)


# --- certification --------------------------------------------------------

@dataclass
class NTCertificate:
    code: Code
    level: int
    generators: list
    orbit_counts: list[int]
    preserved: list[bool]

    @property
    def success(self) -> bool:
        return all(c == 1 for c in self.orbit_counts) and all(self.preserved)

    def replay(self) -> bool:
        """Recompute everything from the stored code and generators."""
        again = certify_nt(self.code, self.generators, self.level)
        return again.orbit_counts == self.orbit_counts and again.preserved == self.preserved


def _check_preserves(code: Code, perms) -> list[bool]:
    members = list(code.members)
    return [bool(code.mask[p[members]].all()) for p in perms]


def certify_nt(code: Code, gens, level: int = 1) -> NTCertificate:
    """Orbit counts of ``<gens>`` on ``C, C_1, ..., C_level``."""
    graph = code.graph
    perms = [_as_perm(g, graph) for g in gens]
    preserved = _check_preserves(code, perms)
    if not all(preserved):
        bad = preserved.index(False)
        raise CertificationError(f"generator {bad} does not preserve the code")
    part = distance_partition(code)
    if not 1 <= level <= max(part.rho, 1):
        raise CertificationError(f"level {level} outside 1..{part.rho}")
    group = PermGroup(perms, graph.n)
    counts = [len(group.orbits(part.cells[i])) for i in range(level + 1)]
    return NTCertificate(code, level, list(gens), counts, preserved)


@dataclass
class NTDecision:
    is_nt: bool
    stabiliser: PermGroup
    orbit_counts: list[int]

    @property
    def order(self) -> int:
        return self.stabiliser.order()


def automorphism_group_of_code(code: Code, cap: int = ELEMENT_CAP) -> PermGroup:
    return automorphism_group(code.graph).setwise_stabiliser(code.members, cap=cap)


def decide_nt(code: Code, cap: int = ELEMENT_CAP, group: PermGroup | None = None) -> NTDecision:
    """Exact neighbour-transitivity test through the full code stabiliser."""
    if group is None:
        group = automorphism_group(code.graph)
    stab = group.setwise_stabiliser(code.members, cap=cap)
    part = distance_partition(code)
    cells = part.cells[:2] if part.rho >= 1 else part.cells[:1]
    counts = [len(stab.orbits(c)) for c in cells]
    return NTDecision(all(c == 1 for c in counts), stab, counts)


def local_nt_check(code: Code, group: PermGroup, codeword: int | None = None) -> bool:
    """Transitive on C and a codeword stabiliser transitive on its neighbours."""
    if len(code) < 2:
        raise CodeError("local criterion needs at least two codewords")
    delta = min_distance(code)
    if delta not in (3, 4):
        raise CodeError(f"local criterion needs minimum distance 3 or 4, got {delta}")
    if not all(_check_preserves(code, group.generators)):
        raise CertificationError("group does not preserve the code")
    members = list(code.members)
    if group.orbit(members[0]) != members:
        return False
    alpha = members[0] if codeword is None else codeword
    nbrs = code.graph.neighbours[alpha]
    return group.stabiliser(alpha).orbit(nbrs[0]) == sorted(nbrs)


def action_on_code(group: PermGroup, code: Code) -> tuple[int, int]:
    """``(|group|, size of the induced permutation group on the codewords)``."""
    members = list(code.members)
    pos = {v: i for i, v in enumerate(members)}
    elems = group.elements()
    induced = {tuple(pos[int(v)] for v in row) for row in elems[:, members]}
    return len(elems), len(induced)


def divisibility_check(s: int, t: int, group_order: int) -> bool:
    """Whether ``(t+1)(st+1)`` divides ``group_order``."""
    if min(s, t, group_order) < 1:
        raise ValueError("positive integers required")
    return group_order % ((t + 1) * (s * t + 1)) == 0


def is_symmetric_action(group: PermGroup, code: Code) -> bool:
    order, induced = action_on_code(group, code)
    return order == induced == math.factorial(len(code))
