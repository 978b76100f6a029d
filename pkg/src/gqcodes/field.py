"""Exact arithmetic in small finite fields GF(p^k).

Elements are stored as little-endian coordinate tuples in the power basis of a
fixed monic irreducible modulus.  Internally every element also has an integer
code ``sum(c_i * p**i)``; the rest of the package works with those codes and the
precomputed addition/multiplication tables of :class:`FieldSpec`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_ORDER = 169

# One modulus per (p, k), little-endian and monic (Conway polynomials).
MODULI: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (7, 2): (3, 6, 1),
    (11, 2): (2, 7, 1),
    (13, 2): (2, 12, 1),
}


class FieldError(ValueError):
    """Raised for invalid field parameters or illegal operations."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, k)`` with ``q == p**k`` or raise :class:`FieldError`."""
    for p in range(2, q + 1):
        if q % p == 0:
            k, r = 0, q
            while r % p == 0:
                r //= p
                k += 1
            if r != 1 or not is_prime(p):
                raise FieldError(f"{q} is not a prime power")
            return p, k
    raise FieldError(f"{q} is not a prime power")


def _poly_mulmod(a, b, modulus, p):
    k = len(modulus) - 1
    prod = [0] * (2 * k - 1 if k > 0 else 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for d in range(len(prod) - 1, k - 1, -1):
        c = prod[d]
        if c:
            for j in range(k + 1):
                prod[d - k + j] = (prod[d - k + j] - c * modulus[j]) % p
    return tuple(prod[:k])


def _poly_rem(a: list[int], b: list[int], p: int) -> list[int]:
    a = list(a)
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        for j, y in enumerate(b):
            a[shift + j] = (a[shift + j] - c * y) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def is_irreducible(modulus: tuple[int, ...], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= k/2."""
    k = len(modulus) - 1
    if k == 1:
        return True
    for d in range(1, k // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            if not _poly_rem(list(modulus), list(tail) + [1], p):
                return False
    return True


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """GF(p^k) with an explicit modulus polynomial.

    ``modulus`` is little-endian and monic of degree ``k``; when omitted the
    entry of :data:`MODULI` is used (``x`` for prime fields).
    """

    p: int
    k: int = 1
    modulus: tuple[int, ...] | None = None
    add_table: np.ndarray = field(init=False, repr=False)
    mul_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p, k = self.p, self.k
        if not is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if k < 1:
            raise FieldError("exponent must be positive")
        if p**k > MAX_ORDER:
            raise FieldError(f"GF({p}^{k}) exceeds the supported order {MAX_ORDER}")
        modulus = self.modulus
        if modulus is None:
            modulus = (0, 1) if k == 1 else MODULI.get((p, k))
            if modulus is None:
                raise FieldError(f"no modulus on record for GF({p}^{k})")
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != k + 1 or modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree k")
        if not is_irreducible(modulus, p):
            raise FieldError(f"modulus {modulus} is reducible over GF({p})")
        object.__setattr__(self, "modulus", modulus)

        q = p**k
        coords = [self._coords_of(i) for i in range(q)]
        add = np.empty((q, q), dtype=np.int32)
        mul = np.empty((q, q), dtype=np.int32)
        for a in range(q):
            for b in range(a, q):
                s = self._code_of(tuple((x + y) % p for x, y in zip(coords[a], coords[b])))
                m = self._code_of(_poly_mulmod(coords[a], coords[b], modulus, p))
                add[a, b] = add[b, a] = s
                mul[a, b] = mul[b, a] = m
        add.setflags(write=False)
        mul.setflags(write=False)
        object.__setattr__(self, "add_table", add)
        object.__setattr__(self, "mul_table", mul)
        neg = [int(np.where(add[a] == 0)[0][0]) for a in range(q)]
        inv = [0] + [int(np.where(mul[a] == 1)[0][0]) for a in range(1, q)]
        object.__setattr__(self, "_neg", neg)
        object.__setattr__(self, "_inv", inv)
        object.__setattr__(self, "_add", add.tolist())
        object.__setattr__(self, "_mul", mul.tolist())

    @property
    def q(self) -> int:
        return self.p**self.k

    def _coords_of(self, code: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.k):
            out.append(code % self.p)
            code //= self.p
        return tuple(out)

    def _code_of(self, coords) -> int:
        return sum(c * self.p**i for i, c in enumerate(coords))

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus)
        )

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))

    def __repr__(self):
        return f"FieldSpec(p={self.p}, k={self.k}, modulus={self.modulus})"

    # integer-code arithmetic used throughout the package
    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        return self._add[a][self._neg[b]]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self._inv[a]

    def div(self, a: int, b: int) -> int:
        return self._mul[a][self.inv(b)]

    def power(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 1
        while e:
            if e & 1:
                result = self._mul[result][a]
            a = self._mul[a][a]
            e >>= 1
        return result

    def frob(self, a: int, e: int = 1) -> int:
        """The ``p**e``-power automorphism on codes."""
        return self.power(a, self.p ** (e % self.k)) if self.k > 1 else a

    def from_int(self, n: int) -> int:
        """Code of the prime-field element ``n mod p`` (handles negatives)."""
        return n % self.p

    def elements(self) -> list["FieldElement"]:
        return [FieldElement(self._coords_of(i), self) for i in range(self.q)]

    def element(self, coords) -> "FieldElement":
        if isinstance(coords, int):
            return FieldElement(self._coords_of(coords % self.q) if self.k > 1
                                else (coords % self.p,), self)
        return FieldElement(tuple(coords), self)

    def code(self, x: "FieldElement") -> int:
        return self._code_of(x.coeffs)

    def generator(self) -> int:
        """Smallest code of a primitive element, found by brute force."""
        q = self.q
        for g in range(1, q):
            x, order = g, 1
            while x != 1:
                x = self._mul[x][g]
                order += 1
            if order == q - 1:
                return g
        raise FieldError("no primitive element")  # pragma: no cover

    def serialize(self, a: int):
        """JSON form of a code: a bare int for prime fields, else coordinates."""
        return a if self.k == 1 else list(self._coords_of(a))

    def deserialize(self, value) -> int:
        if isinstance(value, int):
            if self.k != 1:
                raise FieldError("expected a coordinate list for a non-prime field")
            return value % self.p
        if len(value) != self.k or any(not 0 <= int(c) < self.p for c in value):
            raise FieldError(f"bad field element coordinates {value!r}")
        return self._code_of(value)


@dataclass(frozen=True)
class FieldElement:
    coeffs: tuple[int, ...]
    spec: FieldSpec

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) != self.spec.k or any(not 0 <= c < self.spec.p for c in coeffs):
            raise FieldError(f"invalid coordinates {self.coeffs!r} for {self.spec!r}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def code(self) -> int:
        return self.spec._code_of(self.coeffs)

    def _wrap(self, code: int) -> "FieldElement":
        return FieldElement(self.spec._coords_of(code), self.spec)

    def _other(self, other) -> int:
        if isinstance(other, int):
            return self.spec.from_int(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.spec != self.spec:
            raise FieldError("operands belong to different fields")
        return other.code

    def __add__(self, other):
        return arith(self, other, "add")

    def __sub__(self, other):
        return arith(self, other, "sub")

    def __mul__(self, other):
        return arith(self, other, "mul")

    def __truediv__(self, other):
        return arith(self, other, "div")

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(self.spec.neg(self.code))

    def __pow__(self, e: int):
        return self._wrap(self.spec.power(self.code, e))

    def __bool__(self):
        return any(self.coeffs)

    def __repr__(self):
        return f"FieldElement({list(self.coeffs)}, GF({self.spec.q}))"


def arith(a: FieldElement, b: FieldElement | int, kind: str) -> FieldElement:
    """Apply ``kind`` in {"add", "sub", "mul", "div"} to two elements."""
    bc = a._other(b)
    if bc is NotImplemented:
        raise TypeError(f"cannot combine FieldElement with {type(b).__name__}")
    spec, ac = a.spec, a.code
    if kind == "add":
        r = spec.add(ac, bc)
    elif kind == "sub":
        r = spec.sub(ac, bc)
    elif kind == "mul":
        r = spec.mul(ac, bc)
    elif kind == "div":
        if bc == 0:
            raise ZeroDivisionError("division by zero in a finite field")
        r = spec.div(ac, bc)
    else:
        raise ValueError(f"unknown operation {kind!r}")
    return a._wrap(r)


def frobenius(a: FieldElement, e: int) -> FieldElement:
    """Image of ``a`` under ``x -> x**(p**e)``."""
    if e < 0:
        raise FieldError("Frobenius exponent must be non-negative")
    return a._wrap(a.spec.frob(a.code, e))


@lru_cache(maxsize=None)
def _embedding(small: FieldSpec, big: FieldSpec) -> tuple[int, ...]:
    if small.p != big.p or big.k != 2 * small.k:
        raise FieldError(f"GF({big.q}) is not a quadratic extension of GF({small.q})")
    if small.k == 1:
        return tuple(range(small.q))
    # send x to the smallest root of the small modulus in the big field
    coeffs = [c % small.p for c in small.modulus]
    for w in range(big.q):
        acc, xp = 0, 1
        for c in coeffs:
            acc = big.add(acc, big.mul(c, xp))
            xp = big.mul(xp, w)
        if acc == 0:
            break
    else:  # pragma: no cover - an irreducible polynomial always splits here
        raise FieldError("no root of the subfield modulus")
    table = []
    for code in range(small.q):
        acc, wp = 0, 1
        for c in small._coords_of(code):
            acc = big.add(acc, big.mul(c, wp))
            wp = big.mul(wp, w)
        table.append(acc)
    return tuple(table)


def embed(a: FieldElement, spec2: FieldSpec) -> FieldElement:
    """Embed an element of GF(q) into GF(q^2) as a ring homomorphism."""
    return FieldElement(spec2._coords_of(_embedding(a.spec, spec2)[a.code]), spec2)


def embed_code(small: FieldSpec, big: FieldSpec, code: int) -> int:
    return _embedding(small, big)[code]


@lru_cache(maxsize=None)
def gf(q: int) -> FieldSpec:
    """The field of order ``q`` with the default modulus (cached)."""
    if q > MAX_ORDER:
        raise FieldError(f"q = {q} exceeds the supported order {MAX_ORDER}")
    p, k = prime_power(q)
    return FieldSpec(p, k)
