"""Small dense linear algebra over GF(q) on integer element codes.

Matrices are tuples of row tuples.  Vectors are row vectors and maps act on the
right (``x -> x @ M``), matching how subspaces are written as row spaces.
"""

from __future__ import annotations

from .field import FieldSpec

Matrix = tuple[tuple[int, ...], ...]


def as_matrix(rows) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def mat_mul(F: FieldSpec, a: Matrix, b: Matrix) -> Matrix:
    add, mul = F._add, F._mul
    cols = transpose(b)
    out = []
    for row in a:
        new = []
        for col in cols:
            acc = 0
            for x, y in zip(row, col):
                if x and y:
                    acc = add[acc][mul[x][y]]
            new.append(acc)
        out.append(tuple(new))
    return tuple(out)


def vec_mat(F: FieldSpec, v, m: Matrix) -> tuple[int, ...]:
    add, mul = F._add, F._mul
    out = [0] * len(m[0])
    for x, row in zip(v, m):
        if x:
            for j, y in enumerate(row):
                if y:
                    out[j] = add[out[j]][mul[x][y]]
    return tuple(out)


def bilinear(F: FieldSpec, x, g: Matrix, y) -> int:
    """``x G y^T``."""
    add, mul = F._add, F._mul
    acc = 0
    for i, xi in enumerate(x):
        if not xi:
            continue
        for j, yj in enumerate(y):
            gij = g[i][j]
            if gij and yj:
                acc = add[acc][mul[xi][mul[gij][yj]]]
    return acc


def scale(F: FieldSpec, c: int, v) -> tuple[int, ...]:
    return tuple(F._mul[c][x] for x in v)


def vec_add(F: FieldSpec, u, v) -> tuple[int, ...]:
    return tuple(F._add[a][b] for a, b in zip(u, v))


def normalize(F: FieldSpec, v) -> tuple[int, ...]:
    """Scale so the first nonzero coordinate is 1."""
    for x in v:
        if x:
            return scale(F, F.inv(x), v)
    raise ValueError("zero vector has no projective normal form")


def rref(F: FieldSpec, rows) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form with zero rows dropped, plus pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return (), ()
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        m[r] = list(scale(F, F.inv(m[r][c]), m[r]))
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = F.neg(m[i][c])
                m[i] = [F._add[a][F._mul[f][b]] for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return tuple(tuple(row) for row in m[:r]), tuple(pivots)


def rank(F: FieldSpec, rows) -> int:
    return len(rref(F, rows)[0])


def det(F: FieldSpec, a: Matrix) -> int:
    m = [list(r) for r in a]
    n = len(m)
    d = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = F.neg(d)
        d = F.mul(d, m[c][c])
        inv = F.inv(m[c][c])
        for i in range(c + 1, n):
            if m[i][c]:
                f = F.neg(F.mul(m[i][c], inv))
                m[i] = [F._add[x][F._mul[f][y]] for x, y in zip(m[i], m[c])]
    return d


def inverse(F: FieldSpec, a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + list(e) for row, e in zip(a, identity(n))]
    red, piv = rref(F, aug)
    if len(red) < n or piv[n - 1] != n - 1:
        raise ZeroDivisionError("singular matrix")
    return tuple(tuple(row[n:]) for row in red)


def nullspace(F: FieldSpec, a: Matrix, ncols: int | None = None) -> Matrix:
    """Basis of ``{x : A x^T = 0}`` (right kernel)."""
    if ncols is None:
        ncols = len(a[0])
    red, piv = rref(F, a) if a else ((), ())
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for row, p in zip(red, piv):
            x[p] = F.neg(row[f])
        basis.append(tuple(x))
    return tuple(basis)


def frob_matrix(F: FieldSpec, a: Matrix, e: int) -> Matrix:
    if e % F.k == 0:
        return a
    return tuple(tuple(F.frob(x, e) for x in row) for row in a)
