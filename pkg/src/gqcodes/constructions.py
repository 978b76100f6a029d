"""Explicit neighbour-transitive codes in W(3, q) with witnessing generators."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import linalg as la
from .codegraph import Code, incidence_graph
from .field import FieldSpec, embed_code, gf, prime_power
from .geometry import (GeometryError, GramMatrix, ProjLine, alternate_gram, build_w3,
                       find_invariant_form, is_totally_isotropic, standard_gram,
                       symplectic_transport, transport_rows)
from .groupaction import SemilinearMap

SHARPLY_TRANSITIVE_MAX_Q = 11

# Labels for the sharply transitive subgroups by order.
GROUP_LABELS = {3: "GL1(4)", 8: "Q8", 24: "2.A4", 48: "2.S4", 120: "SL(2,5)"}

W33_FIVE_LINES = (
    ((1, 0, 1, 0), (1, 1, 2, 2)),
    ((1, 0, 0, 1), (1, 1, 1, 2)),
    ((1, 0, 2, 1), (1, 1, 0, 1)),
    ((1, 0, 1, 2), (1, 1, 1, 1)),
    ((1, 0, 2, 2), (1, 1, 2, 0)),
)


class ConstructionError(ValueError):
    pass


@dataclass
class ConstructionResult:
    code: Code
    claimed: dict
    nt_generators: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def q(self) -> int:
        return self.code.graph.q


def _claimed(delta, rho, size, classification) -> dict:
    return {"delta": delta, "rho": rho, "size": size, "classification": classification}


def _check_maps(maps, gram: GramMatrix):
    for i, m in enumerate(maps):
        if m.similitude_factor(gram) is None:  # pragma: no cover - construction bug
            raise ConstructionError(f"generator {i} is not a similitude")


class _Transport:
    """Change of coordinates from a form ``gram`` to the standard one."""

    def __init__(self, gram: GramMatrix):
        F = gram.field
        self.field = F
        self.row = transport_rows(F, symplectic_transport(gram, standard_gram(F)))
        self.row_inv = la.inverse(F, self.row)

    def rows(self, rows) -> la.Matrix:
        return tuple(la.vec_mat(self.field, r, self.row) for r in rows)

    def conjugate(self, a, frob: int = 0) -> SemilinearMap:
        F = self.field
        left = la.frob_matrix(F, self.row_inv, frob)
        return SemilinearMap(F, la.mat_mul(F, la.mat_mul(F, left, la.as_matrix(a)), self.row), frob)


def _line_code(q: int, rows_list) -> Code:
    model = build_w3(q)
    graph = incidence_graph(model)
    return Code.from_lines(graph, [model.index_of_line(r) for r in rows_list])


def _block(F: FieldSpec, x, y) -> la.Matrix:
    """``diag(X, Y)`` for 2x2 blocks."""
    return (tuple(x[0]) + (0, 0), tuple(x[1]) + (0, 0), (0, 0) + tuple(y[0]), (0, 0) + tuple(y[1]))


def sl2_elementary(F: FieldSpec) -> list[la.Matrix]:
    """Root elements over a prime-field basis; they generate SL(2, F)."""
    out = []
    for i in range(F.k):
        a = F.p**i
        out.append(((1, a), (0, 1)))
        out.append(((1, 0), (a, 1)))
    return out


# --- field reduction ---------------------------------------------------------

class _FieldReduction:
    """GF(q^2)^2 viewed as GF(q)^4 via the basis ``{1, w}`` of GF(q^2)."""

    def __init__(self, q: int):
        self.small = gf(q)
        self.big = gf(q * q)
        big = self.big
        self.emb = [embed_code(self.small, big, a) for a in range(q)]
        self.omega = big.generator()
        self.coord = {}
        for a0 in range(q):
            for a1 in range(q):
                z = big.add(self.emb[a0], big.mul(self.emb[a1], self.omega))
                self.coord[z] = (a0, a1)
        if len(self.coord) != q * q:  # pragma: no cover
            raise ConstructionError("{1, w} is not a basis")

    def vec(self, x: int, y: int) -> tuple[int, ...]:
        return self.coord[x] + self.coord[y]

    def line_rows(self, x: int, y: int) -> la.Matrix:
        B = self.big
        w = self.omega
        return (self.vec(x, y), self.vec(B.mul(w, x), B.mul(w, y)))

    def projective_line(self) -> list[tuple[int, int]]:
        return [(1, z) for z in range(self.big.q)] + [(0, 1)]

    def basis(self) -> list[tuple[int, int]]:
        w = self.omega
        return [(1, 0), (w, 0), (0, 1), (0, w)]

    def linear(self, g) -> la.Matrix:
        """Matrix over GF(q) of ``(x, y) -> (x, y) g`` for ``g`` in GL(2, q^2)."""
        B = self.big
        rows = []
        for x, y in self.basis():
            rows.append(self.vec(B.add(B.mul(x, g[0][0]), B.mul(y, g[1][0])),
                                 B.add(B.mul(x, g[0][1]), B.mul(y, g[1][1]))))
        return tuple(rows)

    def frobenius(self, c: int) -> la.Matrix:
        """Matrix of ``(x, y) -> (c x^q, c y^q)``."""
        B = self.big
        rows = []
        for x, y in self.basis():
            rows.append(self.vec(B.mul(c, B.frob(x, self.small.k)), B.mul(c, B.frob(y, self.small.k))))
        return tuple(rows)


@lru_cache(maxsize=16)
def _regular_spread_data(q: int):
    fr = _FieldReduction(q)
    F, B = fr.small, fr.big
    pts = fr.projective_line()
    raw = [fr.line_rows(x, y) for x, y in pts]
    gram = find_invariant_form(F, [ProjLine.span(F, r) for r in raw])
    if gram is None:  # pragma: no cover - excluded by the tests
        raise ConstructionError("no invariant symplectic form for the field-reduced spread")
    tr = _Transport(gram)
    model = build_w3(q)
    indices = [model.index_of_line(tr.rows(r)) for r in raw]

    mu = fr.emb[F.generator()] if q > 2 else 1
    big_gens = [((1, a), (0, 1)) for a in (B.p**i for i in range(B.k))]
    big_gens += [((1, 0), (a, 1)) for a in (B.p**i for i in range(B.k))]
    if q > 2:
        big_gens.append(((mu, 0), (0, 1)))
    maps = [tr.conjugate(fr.linear(g)) for g in big_gens]
    frob = None
    for c in range(1, B.q):
        m = tr.conjugate(fr.frobenius(c))
        if m.similitude_factor(standard_gram(F)) is not None:
            frob = (c, m)
            break
    if frob is not None:
        maps.append(frob[1])
    _check_maps(maps, standard_gram(F))
    return fr, tr, pts, indices, maps, (frob[0] if frob else None)


def regular_spread(q: int) -> ConstructionResult:
    """The Desarguesian spread obtained from PG(1, q^2) by field reduction."""
    fr, tr, pts, indices, maps, frob_c = _regular_spread_data(q)
    graph = incidence_graph(q)
    code = Code.from_lines(graph, indices)
    prov = {"name": "regular-spread", "q": q,
            "generators": "SL(2, q^2) root elements, diag(mu, 1) with mu primitive in GF(q)"
                          + (", Frobenius scaled by a GF(q^2) constant" if frob_c else "")}
    return ConstructionResult(code, _claimed(4, 2, q * q + 1, "spread"), maps, prov)


def spread_minus_line(q: int) -> ConstructionResult:
    """A regular spread with its lowest-indexed line removed."""
    fr, tr, pts, indices, maps, _ = _regular_spread_data(q)
    B = fr.big
    graph = incidence_graph(q)
    pos = int(np.argmin(indices))
    x, y = pts[pos]
    if x:
        b0 = ((x, y), (0, B.inv(x)))
    else:
        b0 = ((0, y), (B.neg(B.inv(y)), 0))
    b0_inv = ((b0[1][1], B.neg(b0[0][1])), (B.neg(b0[1][0]), b0[0][0]))  # determinant 1

    def mul2(a, b):
        return tuple(tuple(B.add(B.mul(a[i][0], b[0][j]), B.mul(a[i][1], b[1][j])) for j in range(2))
                     for i in range(2))

    prim = B.generator()
    stab = [((prim, 0), (0, B.inv(prim)))]
    stab += [((1, 0), (a, 1)) for a in (B.p**i for i in range(B.k))]
    if q > 2:
        mu = fr.emb[fr.small.generator()]
        stab.append(((mu, 0), (0, 1)))
    gens = [tr.conjugate(fr.linear(mul2(mul2(b0_inv, g), b0))) for g in stab]
    _check_maps(gens, standard_gram(fr.small))
    removed = indices[pos]
    code = Code.from_lines(graph, [i for i in indices if i != removed])
    prov = {"name": "spread-minus-line", "q": q, "removed_line": removed,
            "generators": "stabiliser of the removed line: torus, unipotent radical, GF(q) scalar"}
    return ConstructionResult(code, _claimed(4, 4, q * q, "partial spread"), gens, prov)


# --- hyperbolic line and pairs -------------------------------------------------

def hyperbolic_line_code(q: int) -> ConstructionResult:
    """The points of the non-degenerate 2-space spanned by ``e1`` and ``e2``."""
    F = gf(q)
    model = build_w3(q)
    graph = incidence_graph(model)
    pts = [(1, a, 0, 0) for a in range(q)] + [(0, 1, 0, 0)]
    code = Code.from_points(graph, [model.index_of_point(v) for v in pts])
    ident = la.identity(2)
    gens = [SemilinearMap(F, _block(F, x, ident)) for x in sl2_elementary(F)]
    gens += [SemilinearMap(F, _block(F, ident, y)) for y in sl2_elementary(F)]
    _check_maps(gens, model.gram)
    prov = {"name": "hyperbolic-line", "q": q, "generators": "SL(2, q) x SL(2, q) on W + W^perp"}
    return ConstructionResult(code, _claimed(4, 3, q + 1, "maximal partial ovoid"), gens, prov)


def pair_code(q: int, side: str = "points") -> ConstructionResult:
    """Two non-collinear points or two disjoint lines."""
    F = gf(q)
    model = build_w3(q)
    graph = incidence_graph(model)
    ident = la.identity(2)
    swap2 = ((0, 1), (1, 0))
    if side == "points":
        code = Code.from_points(graph, [model.index_of_point((1, 0, 0, 0)),
                                        model.index_of_point((0, 1, 0, 0))])
        gens = [SemilinearMap(F, _block(F, ident, y)) for y in sl2_elementary(F)]
        gens.append(SemilinearMap(F, _block(F, swap2, swap2)))
        cls = "partial ovoid"
    elif side == "lines":
        code = Code.from_lines(graph, [model.index_of_line(((1, 0, 0, 0), (0, 0, 1, 0))),
                                       model.index_of_line(((0, 1, 0, 0), (0, 0, 0, 1)))])
        mats = list(sl2_elementary(F))
        if q > 2:
            mats.append(((F.generator(), 0), (0, 1)))
        gens = [SemilinearMap(F, _split_action(F, a)) for a in mats]
        gens.append(SemilinearMap(F, ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0))))
        cls = "partial spread"
    else:
        raise ConstructionError(f"side must be 'points' or 'lines', got {side!r}")
    _check_maps(gens, model.gram)
    prov = {"name": "pair", "q": q, "side": side}
    return ConstructionResult(code, _claimed(4, 4, 2, cls), gens, prov)


def _split_action(F: FieldSpec, a) -> la.Matrix:
    """``A`` on coordinates (1, 3) and ``A^-T`` on coordinates (2, 4)."""
    a = la.as_matrix(a)
    b = la.transpose(la.inverse(F, a))
    m = [[0] * 4 for _ in range(4)]
    u, v = (0, 2), (1, 3)
    for i in range(2):
        for j in range(2):
            m[u[i]][u[j]] = a[i][j]
            m[v[i]][v[j]] = b[i][j]
    return la.as_matrix(m)


# --- sharply transitive subgroups of SL(2, q) ----------------------------------

@dataclass(frozen=True)
class SL2Subgroup:
    """A subgroup of SL(2, q) given by its element list."""

    q: int
    elements: tuple
    label: str | None = None

    def __post_init__(self):
        F = gf(self.q)
        elems = set(self.elements)
        if ((1, 0), (0, 1)) not in elems:
            raise ConstructionError("identity missing")
        for a in elems:
            if _det2(F, a) != 1:
                raise ConstructionError(f"{a} does not have determinant 1")
        for a in elems:
            for b in elems:
                if _mul2(F, a, b) not in elems:
                    raise ConstructionError("not closed under multiplication")

    @property
    def order(self) -> int:
        return len(self.elements)

    def is_sharply_transitive(self) -> bool:
        F = gf(self.q)
        if self.order != self.q * self.q - 1:
            return False
        return all(_fixed_point_free(F, a) for a in self.elements if a != ((1, 0), (0, 1)))

    def generators(self) -> list:
        """A small generating set chosen greedily."""
        F = gf(self.q)
        gens, span = [], {((1, 0), (0, 1))}
        for a in sorted(self.elements):
            if a in span:
                continue
            gens.append(a)
            span = _closure(F, gens)
            if len(span) == self.order:
                break
        return gens


def _det2(F, a) -> int:
    return F.sub(F.mul(a[0][0], a[1][1]), F.mul(a[0][1], a[1][0]))


def _mul2(F, a, b):
    return tuple(tuple(F.add(F.mul(a[i][0], b[0][j]), F.mul(a[i][1], b[1][j])) for j in range(2))
                 for i in range(2))


def _fixed_point_free(F, a) -> bool:
    """No eigenvalue 1, i.e. ``det(A - I) != 0``."""
    m = ((F.sub(a[0][0], 1), a[0][1]), (a[1][0], F.sub(a[1][1], 1)))
    return _det2(F, m) != 0


def _closure(F, gens) -> set:
    out = {((1, 0), (0, 1))}
    frontier = list(out)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _mul2(F, x, g)
                if y not in out:
                    out.add(y)
                    nxt.append(y)
        frontier = nxt
    return out


@lru_cache(maxsize=16)
def _sl2_tables(q: int):
    F = gf(q)
    add, mul = F.add_table, F.mul_table
    elems = []
    for a in range(q):
        for b in range(q):
            for c in range(q):
                for d in range(q):
                    if F.sub(F.mul(a, d), F.mul(b, c)) == 1:
                        elems.append((a, b, c, d))
    E = np.array(elems, dtype=np.int64)
    N = len(E)
    w = np.array([q**3, q**2, q, 1])
    lookup = np.full(q**4, -1, dtype=np.int64)
    lookup[E @ w] = np.arange(N)
    a, b, c, d = (E[:, i] for i in range(4))
    A, B_, C, D = (x[:, None] for x in (a, b, c, d))
    prod = np.stack([add[mul[A, a[None]], mul[B_, c[None]]], add[mul[A, b[None]], mul[B_, d[None]]],
                     add[mul[C, a[None]], mul[D, c[None]]], add[mul[C, b[None]], mul[D, d[None]]]],
                    axis=-1)
    table = lookup[prod @ w]
    ident = int(lookup[np.array([1, 0, 0, 1]) @ w])
    inv = np.argmax(table == ident, axis=1)
    fpf = np.array([F.sub(F.mul(F.sub(x, 1), F.sub(y, 1)), F.mul(u, v)) != 0
                    for x, u, v, y in elems])
    fpf[ident] = False
    return E, table, inv, ident, fpf


def _element_orders(table, ident, members) -> Counter:
    out = Counter()
    for g in members:
        k, x = 1, g
        while x != ident:
            x = table[x, g]
            k += 1
        out[k] += 1
    return out


def sharply_transitive_subgroups(q: int) -> list[SL2Subgroup]:
    """Conjugacy-class representatives of fixed-point-free subgroups of order q^2 - 1.

    Every such subgroup is generated by two elements, so closures of pairs
    ``(a, b)`` with ``a`` running over class representatives of
    fixed-point-free elements and ``b`` over all of them cover every case.
    """
    return list(_sharply_transitive(q))


@lru_cache(maxsize=16)
def _sharply_transitive(q: int) -> tuple:
    if q > SHARPLY_TRANSITIVE_MAX_Q:
        raise ConstructionError(f"subgroup search unsupported for q = {q}")
    prime_power(q)
    target = q * q - 1
    E, table, inv, ident, fpf = _sl2_tables(q)
    N = len(E)
    conj = table[table[inv, :], np.arange(N)[:, None]]  # conj[h, g] = h^-1 g h
    reps, seen = [], np.zeros(N, dtype=bool)
    for g in np.nonzero(fpf)[0]:
        if not seen[g]:
            reps.append(int(g))
            seen[conj[:, g]] = True
    fpf_list = np.nonzero(fpf)[0].tolist()
    found: dict[tuple, np.ndarray] = {}
    for a in reps:
        for b in fpf_list:
            members = _closure_indices(table, ident, fpf, (a, b), target)
            if members is None or len(members) != target:
                continue
            canon = min(tuple(r) for r in np.sort(conj[:, members], axis=1).tolist())
            if canon not in found:
                found[canon] = np.array(canon)
    out = []
    for canon in sorted(found):
        idx = found[canon]
        elements = tuple(((int(E[i, 0]), int(E[i, 1])), (int(E[i, 2]), int(E[i, 3]))) for i in idx)
        label = GROUP_LABELS.get(target, f"order {target}")
        out.append(SL2Subgroup(q, elements, label))
    return tuple(out)


def _closure_indices(table, ident, fpf, gens, limit):
    members = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = int(table[x, g])
                if y not in members:
                    if not fpf[y] or len(members) >= limit:
                        return None
                    members.add(y)
                    nxt.append(y)
        frontier = nxt
    return np.array(sorted(members), dtype=np.int64)


def subgroup_signature(group: SL2Subgroup) -> tuple:
    """Sorted ``(element order, count)`` pairs."""
    E, table, inv, ident, fpf = _sl2_tables(group.q)
    q = group.q
    w = np.array([q**3, q**2, q, 1])
    lookup = {int(np.dot(e, w)): i for i, e in enumerate(E)}
    idx = [lookup[(a[0][0] * q**3 + a[0][1] * q**2 + a[1][0] * q + a[1][1])] for a in group.elements]
    return tuple(sorted(_element_orders(table, ident, idx).items()))


def default_subgroup(q: int, label: str | None = None) -> SL2Subgroup:
    groups = sharply_transitive_subgroups(q)
    if label is not None:
        groups = [g for g in groups if g.label == label]
    if not groups:
        raise ConstructionError(f"no sharply transitive subgroup of SL(2, {q})"
                                + (f" labelled {label}" if label else ""))
    return groups[0]


def subgroup_partial_spread(q: int, group: SL2Subgroup | None = None,
                            generators: str = "full") -> ConstructionResult:
    """Lines ``[I | A]`` for ``A`` in a sharply transitive subgroup of SL(2, q).

    The lines are written for the alternate form and moved to the standard
    model.  ``generators="full"`` attaches ``diag(X, I)``, ``diag(I, Y)`` for
    ``X, Y`` generating the subgroup together with the block swap;
    ``generators="right"`` attaches only the ``diag(I, Y)`` maps.
    """
    if group is None:
        group = default_subgroup(q)
    if group.q != q:
        raise ConstructionError("subgroup is over a different field")
    if not group.is_sharply_transitive():
        raise ConstructionError("subgroup is not sharply transitive on nonzero vectors")
    F = gf(q)
    alt = alternate_gram(F)
    raw = [((1, 0) + tuple(a[0]), (0, 1) + tuple(a[1])) for a in group.elements]
    for rows in raw:
        if not is_totally_isotropic(ProjLine.span(F, rows), alt):  # pragma: no cover
            raise ConstructionError("line [I|A] is not totally isotropic")
    tr = _Transport(alt)
    code = _line_code(q, [tr.rows(r) for r in raw])
    ident = la.identity(2)
    gens_g = group.generators()
    local = [_block(F, ident, y) for y in gens_g]
    if generators == "full":
        local = [_block(F, x, ident) for x in gens_g] + local
        local.append(((0, 0, 1, 0), (0, 0, 0, 1), (1, 0, 0, 0), (0, 1, 0, 0)))
    elif generators != "right":
        raise ConstructionError(f"unknown generator set {generators!r}")
    maps = [tr.conjugate(m) for m in local]
    _check_maps(maps, standard_gram(F))
    prov = {"name": "subgroup-spread", "q": q, "subgroup": group.label, "generators": generators}
    return ConstructionResult(code, _claimed(4, 3, q * q - 1, "maximal partial spread"), maps, prov)


def w33_five_code() -> ConstructionResult:
    """Five pairwise disjoint lines of W(3, 3) with automorphism group S5."""
    F = gf(3)
    gram = standard_gram(F)
    for rows in W33_FIVE_LINES:
        if not is_totally_isotropic(ProjLine.span(F, rows), gram):  # pragma: no cover
            raise GeometryError("stored line is not totally isotropic")
    code = _line_code(3, W33_FIVE_LINES)
    prov = {"name": "w33-five", "q": 3}
    return ConstructionResult(code, _claimed(4, 3, 5, "maximal partial spread"), [], prov)


CATALOGUE = ("regular-spread", "spread-minus-line", "hyperbolic-line", "subgroup-spread", "w33-five", "pair")


def construct(name: str, q: int | None = None, **params) -> ConstructionResult:
    """Dispatch by construction name."""
    if name == "w33-five":
        return w33_five_code()
    if q is None:
        raise ConstructionError(f"{name} needs q")
    if name == "regular-spread":
        return regular_spread(q)
    if name == "spread-minus-line":
        return spread_minus_line(q)
    if name == "hyperbolic-line":
        return hyperbolic_line_code(q)
    if name == "subgroup-spread":
        label = params.get("subgroup")
        return subgroup_partial_spread(q, default_subgroup(q, label))
    if name == "pair":
        return pair_code(q, params.get("side", "points"))
    raise ConstructionError(f"unknown construction {name!r}")
