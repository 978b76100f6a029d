"""Alternating forms on GF(q)^4 and the symplectic quadrangle W(3, q)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg as la
from .field import FieldSpec, gf


class GeometryError(ValueError):
    pass


class GQAxiomError(GeometryError):
    """An incidence structure failed a quadrangle axiom."""

    def __init__(self, axiom: int, message: str, witness=None):
        super().__init__(f"axiom {axiom}: {message}")
        self.axiom = axiom
        self.witness = witness


@dataclass(frozen=True, order=True)
class ProjPoint:
    """A 1-subspace of GF(q)^4, stored with first nonzero coordinate 1."""

    coords: tuple[int, ...]

    @classmethod
    def of(cls, F: FieldSpec, vector) -> "ProjPoint":
        return cls(la.normalize(F, tuple(vector)))


@dataclass(frozen=True, order=True)
class ProjLine:
    """A 2-subspace of GF(q)^4 stored by its reduced row echelon basis."""

    basis: la.Matrix

    @classmethod
    def span(cls, F: FieldSpec, rows) -> "ProjLine":
        red, _ = la.rref(F, rows)
        if len(red) != 2:
            raise GeometryError(f"rows span a subspace of rank {len(red)}, not 2")
        return cls(red)

    def flat(self) -> tuple[int, ...]:
        return self.basis[0] + self.basis[1]


@dataclass(frozen=True)
class GramMatrix:
    """Gram matrix of a nondegenerate alternating form, ``f(x, y) = x G y^T``."""

    field: FieldSpec
    entries: la.Matrix

    def __post_init__(self):
        F, g = self.field, la.as_matrix(self.entries)
        object.__setattr__(self, "entries", g)
        if len(g) != 4 or any(len(r) != 4 for r in g):
            raise GeometryError("Gram matrix must be 4x4")
        if any(not 0 <= x < F.q for r in g for x in r):
            raise GeometryError("Gram entries must be field element codes")
        # in characteristic 2 antisymmetry alone does not force a zero diagonal
        if any(g[i][i] for i in range(4)):
            raise GeometryError("form is not alternating: nonzero diagonal")
        if any(g[i][j] != F.neg(g[j][i]) for i in range(4) for j in range(4)):
            raise GeometryError("form is not alternating: G^T != -G")
        if la.det(F, g) == 0:
            raise GeometryError("form is degenerate")

    def __call__(self, x, y) -> int:
        return la.bilinear(self.field, x, self.entries, y)

    def scaled(self, c: int) -> "GramMatrix":
        F = self.field
        return GramMatrix(F, tuple(tuple(F.mul(c, x) for x in r) for r in self.entries))

    def to_json(self):
        return [[self.field.serialize(x) for x in row] for row in self.entries]

    @classmethod
    def from_json(cls, F: FieldSpec, data) -> "GramMatrix":
        return cls(F, tuple(tuple(F.deserialize(x) for x in row) for row in data))


def _sign_gram(F: FieldSpec, s: int) -> GramMatrix:
    one, m1 = 1, F.neg(1)
    s1, sm1 = (one, m1) if s > 0 else (m1, one)
    return GramMatrix(F, ((0, one, 0, 0), (m1, 0, 0, 0), (0, 0, 0, s1), (0, 0, sm1, 0)))


def standard_gram(q: int | FieldSpec) -> GramMatrix:
    """``f(x, y) = x1 y2 - x2 y1 + x3 y4 - x4 y3``."""
    F = q if isinstance(q, FieldSpec) else gf(q)
    return _sign_gram(F, 1)


def alternate_gram(q: int | FieldSpec) -> GramMatrix:
    """``f(x, y) = x1 y2 - x2 y1 - x3 y4 + x4 y3``."""
    F = q if isinstance(q, FieldSpec) else gf(q)
    return _sign_gram(F, -1)


def is_totally_isotropic(line: ProjLine, gram: GramMatrix) -> bool:
    # f(b1, b2) = 0 suffices: f is bilinear and f(x, x) = 0
    return gram(line.basis[0], line.basis[1]) == 0


def all_points(F: FieldSpec) -> list[ProjPoint]:
    q = F.q
    pts = []
    for lead in range(4):
        for tail in itertools.product(range(q), repeat=3 - lead):
            pts.append(ProjPoint((0,) * lead + (1,) + tail))
    pts.sort()
    return pts


def all_2_subspaces(F: FieldSpec) -> list[ProjLine]:
    """Every 2-subspace of GF(q)^4 in canonical (lexicographic) order."""
    q = F.q
    out = []
    for i, j in itertools.combinations(range(4), 2):
        free1 = [c for c in range(i + 1, 4) if c != j]
        free2 = list(range(j + 1, 4))
        for v1 in itertools.product(range(q), repeat=len(free1)):
            r1 = [0] * 4
            r1[i] = 1
            for c, x in zip(free1, v1):
                r1[c] = x
            for v2 in itertools.product(range(q), repeat=len(free2)):
                r2 = [0] * 4
                r2[j] = 1
                for c, x in zip(free2, v2):
                    r2[c] = x
                out.append(ProjLine((tuple(r1), tuple(r2))))
    out.sort()
    return out


class GQModel:
    """A point-line incidence structure on PG(3, q).

    :func:`build_w3` produces the symplectic quadrangle; the constructor itself
    does not check any axioms so broken structures can be fed to
    :func:`verify_gq_axioms`.
    """

    def __init__(self, field: FieldSpec, gram: GramMatrix, points, lines):
        self.field = field
        self.q = field.q
        self.gram = gram
        self.points: list[ProjPoint] = list(points)
        self.lines: list[ProjLine] = list(lines)
        self.point_index = {p: i for i, p in enumerate(self.points)}
        self.line_index = {ln: i for i, ln in enumerate(self.lines)}
        self._build_arrays()

    def _build_arrays(self):
        F, q = self.field, self.q
        self.point_coords = np.array([p.coords for p in self.points], dtype=np.int64)
        w = q ** np.arange(3, -1, -1)
        keys = self.point_coords @ w
        self._key_to_point = np.full(q**4, -1, dtype=np.int64)
        self._key_to_point[keys] = np.arange(len(self.points))
        if self.lines:
            rows = np.array([ln.basis for ln in self.lines], dtype=np.int64)
        else:
            rows = np.zeros((0, 2, 4), dtype=np.int64)
        self.line_rows = rows
        add, mul = F.add_table, F.mul_table
        r1, r2 = rows[:, 0, :], rows[:, 1, :]
        members = [self._key_to_point[r2 @ w]]
        for b in range(q):
            members.append(self._key_to_point[add[r1, mul[b, r2]] @ w])
        lp = np.sort(np.stack(members, axis=1), axis=1) if len(rows) else np.zeros((0, q + 1), dtype=np.int64)
        if (lp < 0).any():
            raise GeometryError("line contains a vector outside the point list")
        self.line_points = lp
        pl = [[] for _ in self.points]
        for li, row in enumerate(lp.tolist()):
            for p in row:
                pl[p].append(li)
        self.point_lines = pl
        self._pair_line = {}
        for li, row in enumerate(lp.tolist()):
            for a, b in itertools.combinations(row, 2):
                self._pair_line[(a, b)] = li

    def point_key_index(self, coords: np.ndarray) -> np.ndarray:
        """Indices of normalised coordinate rows (vectorised lookup)."""
        w = self.q ** np.arange(3, -1, -1)
        return self._key_to_point[coords @ w]

    def index_of_point(self, vector) -> int:
        return self.point_index[ProjPoint.of(self.field, vector)]

    def index_of_line(self, rows) -> int:
        return self.line_index[ProjLine.span(self.field, rows)]

    def line_through(self, a: int, b: int) -> int | None:
        """Index of the line joining two point indices, if they are collinear."""
        if a > b:
            a, b = b, a
        return self._pair_line.get((a, b))

    def without_line(self, index: int) -> "GQModel":
        lines = self.lines[:index] + self.lines[index + 1:]
        return GQModel(self.field, self.gram, self.points, lines)

    @property
    def order(self) -> tuple[int, int]:
        return self.q, self.q

    def __repr__(self):
        return f"GQModel(q={self.q}, points={len(self.points)}, lines={len(self.lines)})"


def _gram_key(gram: GramMatrix | None, q: int):
    if gram is None:
        return None
    if gram.field.q != q:
        raise GeometryError("Gram matrix is over a different field")
    return gram.entries


@lru_cache(maxsize=32)
def _build_w3_cached(q: int, entries) -> GQModel:
    F = gf(q)
    gram = standard_gram(F) if entries is None else GramMatrix(F, entries)
    lines = [ln for ln in all_2_subspaces(F) if is_totally_isotropic(ln, gram)]
    return GQModel(F, gram, all_points(F), lines)


def build_w3(q: int, gram: GramMatrix | None = None) -> GQModel:
    """The quadrangle W(3, q) for the given form (default: :func:`standard_gram`)."""
    if gram is not None and gram == standard_gram(gram.field):
        gram = None
    model = _build_w3_cached(q, _gram_key(gram, q))
    n = (q + 1) * (q * q + 1)
    if len(model.points) != n or len(model.lines) != n:  # pragma: no cover
        raise GeometryError("wrong number of points or lines")
    return model


def verify_gq_axioms(model: GQModel) -> tuple[int, int]:
    """Check the three quadrangle axioms and return the order ``(s, t)``."""
    npts, nlines = len(model.points), len(model.lines)
    inc = np.zeros((npts, nlines), dtype=np.float64)
    for li, row in enumerate(model.line_points):
        inc[row, li] = 1.0

    point_deg = inc.sum(axis=1).astype(int)
    values, counts = np.unique(point_deg, return_counts=True)
    t1 = int(values[np.argmax(counts)])
    bad = np.nonzero(point_deg != t1)[0]
    if len(bad) or t1 < 2:
        w = int(bad[0]) if len(bad) else 0
        raise GQAxiomError(1, f"point {w} lies on {point_deg[w]} lines, expected {t1}",
                           witness=("point", w, int(point_deg[w])))
    common = inc @ inc.T
    np.fill_diagonal(common, 0)
    if common.max(initial=0) > 1:
        a, b = map(int, np.argwhere(common > 1)[0])
        raise GQAxiomError(1, f"points {a} and {b} share {int(common[a, b])} lines",
                           witness=("points", a, b))

    line_deg = inc.sum(axis=0).astype(int)
    values, counts = np.unique(line_deg, return_counts=True)
    s1 = int(values[np.argmax(counts)])
    bad = np.nonzero(line_deg != s1)[0]
    if len(bad) or s1 < 2:
        w = int(bad[0]) if len(bad) else 0
        raise GQAxiomError(2, f"line {w} carries {line_deg[w]} points, expected {s1}",
                           witness=("line", w, int(line_deg[w])))
    common = inc.T @ inc
    np.fill_diagonal(common, 0)
    if common.max(initial=0) > 1:
        a, b = map(int, np.argwhere(common > 1)[0])
        raise GQAxiomError(2, f"lines {a} and {b} share {int(common[a, b])} points",
                           witness=("lines", a, b))

    # for p not on L: #points of L collinear with p == #pairs (q', M) with p I M I q' I L
    collinear = (inc @ inc.T > 0).astype(np.float64)
    np.fill_diagonal(collinear, 0)
    count = collinear @ inc
    bad = np.argwhere((inc == 0) & (count != 1))
    if len(bad):
        p, li = map(int, bad[0])
        raise GQAxiomError(3, f"point {p} and line {li} have {int(count[p, li])} connecting flags",
                           witness=("antiflag", p, li))
    return s1 - 1, t1 - 1


# --- change of form -------------------------------------------------------

def hyperbolic_basis(gram: GramMatrix) -> la.Matrix:
    """Rows ``B`` with ``B G B^T`` equal to the standard form's Gram matrix."""
    F = gram.field
    f = gram
    remaining = list(la.identity(4))
    basis = []
    while remaining:
        e = remaining.pop(0)
        idx = next((i for i, v in enumerate(remaining) if f(e, v)), None)
        if idx is None:  # pragma: no cover - impossible for nondegenerate forms
            raise GeometryError("form is degenerate")
        h = remaining.pop(idx)
        h = la.scale(F, F.inv(f(e, h)), h)
        basis += [e, h]
        projected = []
        for v in remaining:
            a, b = F.neg(f(v, h)), f(v, e)
            projected.append(la.vec_add(F, la.vec_add(F, v, la.scale(F, a, e)), la.scale(F, b, h)))
        remaining = [v for v in projected if any(v)]
        # keep a basis of the complement
        red, _ = la.rref(F, remaining) if remaining else ((), ())
        remaining = list(red)
    return tuple(basis)


def symplectic_transport(g1: GramMatrix, g2: GramMatrix) -> la.Matrix:
    """Matrix ``M`` with ``M^T g1 M = g2``."""
    F = g1.field
    if g2.field != F:
        raise GeometryError("forms over different fields")
    b1, b2 = hyperbolic_basis(g1), hyperbolic_basis(g2)
    return la.mat_mul(F, la.transpose(b1), la.inverse(F, la.transpose(b2)))


def transport_rows(F: FieldSpec, m: la.Matrix) -> la.Matrix:
    """Row action ``x -> x T`` carrying g1-isotropic subspaces to g2-isotropic ones."""
    return la.transpose(la.inverse(F, m))


def transport_line(F: FieldSpec, line: ProjLine, m: la.Matrix) -> ProjLine:
    t = transport_rows(F, m)
    return ProjLine.span(F, [la.vec_mat(F, r, t) for r in line.basis])


def transport_point(F: FieldSpec, point: ProjPoint, m: la.Matrix) -> ProjPoint:
    return ProjPoint.of(F, la.vec_mat(F, point.coords, transport_rows(F, m)))


_PAIRS = list(itertools.combinations(range(4), 2))


def find_invariant_form(F: FieldSpec, lines) -> GramMatrix | None:
    """A nondegenerate alternating form making every line totally isotropic.

    Returns ``None`` when no such form exists.
    """
    lines = list(lines)
    if not lines:
        raise GeometryError("need at least one subspace")
    rows = []
    for ln in lines:
        u, v = ln.basis
        rows.append(tuple(F.sub(F.mul(u[i], v[j]), F.mul(u[j], v[i])) for i, j in _PAIRS))
    kernel = la.nullspace(F, la.rref(F, rows)[0], ncols=6)
    for coeffs in itertools.product(range(F.q), repeat=len(kernel)):
        if not any(coeffs):
            continue
        vec = [0] * 6
        for c, b in zip(coeffs, kernel):
            vec = [F.add(x, F.mul(c, y)) for x, y in zip(vec, b)]
        g12, g13, g14, g23, g24, g34 = vec
        pf = F.add(F.sub(F.mul(g12, g34), F.mul(g13, g24)), F.mul(g14, g23))
        if pf == 0:
            continue
        g = [[0] * 4 for _ in range(4)]
        for (i, j), x in zip(_PAIRS, vec):
            g[i][j], g[j][i] = x, F.neg(x)
        return GramMatrix(F, g)
    return None
