"""Permutation groups on ``range(n)`` given by generators.

Permutations are integer numpy arrays ``p`` with ``i -> p[i]``; products act
left to right, ``(a * b)[i] == b[a[i]]``.  Group orders and membership use a
deterministic Schreier-Sims stabiliser chain; element lists are produced from
the chain's transversals.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

ELEMENT_CAP = 10**7


class GroupCapError(RuntimeError):
    """The requested enumeration exceeds the configured cap."""


def identity(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a`` then ``b``."""
    return b[a]


def invert(a: np.ndarray) -> np.ndarray:
    inv = np.empty_like(a)
    inv[a] = np.arange(len(a), dtype=a.dtype)
    return inv


def is_identity(a: np.ndarray) -> bool:
    return bool((a == np.arange(len(a))).all())


def _key(a: np.ndarray) -> bytes:
    return np.asarray(a, dtype=np.int64).tobytes()


class _Level:
    __slots__ = ("base", "gens", "reps", "inv_reps", "checked")

    def __init__(self, base: int, n: int):
        self.base = base
        self.gens: list[np.ndarray] = []
        self.reps: dict[int, np.ndarray] = {base: identity(n)}
        self.inv_reps: dict[int, np.ndarray] = {base: identity(n)}
        self.checked: set[tuple[int, int]] = set()

    def add_gen(self, g: np.ndarray):
        self.gens.append(g)
        # grow the orbit keeping existing representatives
        frontier = list(self.reps)
        while frontier:
            nxt = []
            for beta in frontier:
                u = self.reps[beta]
                for x in self.gens:
                    gamma = int(x[beta])
                    if gamma not in self.reps:
                        rep = x[u]
                        self.reps[gamma] = rep
                        self.inv_reps[gamma] = invert(rep)
                        nxt.append(gamma)
            frontier = nxt


class StabChain:
    """Base and transversals of a permutation group (strong generating set)."""

    def __init__(self, gens, n: int, base_prefix=()):
        self.n = n
        self.levels: list[_Level] = []
        base = [int(b) for b in base_prefix]
        gens = [np.asarray(g, dtype=np.int64) for g in gens if not is_identity(g)]
        for g in gens:
            if all(g[b] == b for b in base):
                base.append(int(np.nonzero(g != np.arange(n))[0][0]))
        for b in base:
            self.levels.append(_Level(b, n))
        for g in gens:
            for lev in self.levels:
                lev.add_gen(g)
                if g[lev.base] != lev.base:
                    break
        self._complete()

    def _strip(self, g: np.ndarray, start: int):
        for j in range(start, len(self.levels)):
            lev = self.levels[j]
            beta = int(g[lev.base])
            if beta not in lev.reps:
                return g, j
            g = lev.inv_reps[beta][g]
        return g, len(self.levels)

    def _complete(self):
        i = len(self.levels) - 1
        while i >= 0:
            lev = self.levels[i]
            restart = False
            for beta in list(lev.reps):
                u = lev.reps[beta]
                for xi, x in enumerate(lev.gens):
                    if (beta, xi) in lev.checked:
                        continue
                    gamma = int(x[beta])
                    schreier = lev.inv_reps[gamma][x[u]]
                    lev.checked.add((beta, xi))
                    if is_identity(schreier):
                        continue
                    h, j = self._strip(schreier, i + 1)
                    if j == len(self.levels) and is_identity(h):
                        continue
                    if j == len(self.levels):
                        moved = int(np.nonzero(h != np.arange(self.n))[0][0])
                        self.levels.append(_Level(moved, self.n))
                    for lv in self.levels[i + 1 : j + 1]:
                        lv.add_gen(h)
                    lev.checked.discard((beta, xi))
                    i = j
                    restart = True
                    break
                if restart:
                    break
            if not restart:
                i -= 1

    @property
    def base(self) -> list[int]:
        return [lev.base for lev in self.levels]

    def order(self) -> int:
        out = 1
        for lev in self.levels:
            out *= len(lev.reps)
        return out

    def contains(self, g: np.ndarray) -> bool:
        h, j = self._strip(np.asarray(g, dtype=np.int64), 0)
        return j == len(self.levels) and is_identity(h)

    def transversal_arrays(self, start: int = 0) -> list[np.ndarray]:
        return [np.stack([lev.reps[b] for b in sorted(lev.reps)]) for lev in self.levels[start:]]

    def elements_from(self, start: int, dtype=np.int64) -> np.ndarray:
        """All elements of the stabiliser of the first ``start`` base points."""
        elems = identity(self.n).astype(dtype)[None, :]
        for lev in reversed(self.levels[start:]):
            reps = [lev.reps[b] for b in sorted(lev.reps)]
            elems = np.concatenate([u.astype(dtype)[elems] for u in reps])
        return elems


class PermGroup:
    """A permutation group of degree ``n`` with lazily built structure."""

    def __init__(self, generators, n: int | None = None, elements: np.ndarray | None = None):
        gens = [np.asarray(g, dtype=np.int64) for g in generators]
        if n is None:
            if not gens:
                raise ValueError("degree needed for a group without generators")
            n = len(gens[0])
        self.n = n
        self.generators = [g for g in gens if not is_identity(g)]
        self._elements = elements
        self._chains: dict[tuple, StabChain] = {}

    def __repr__(self):
        return f"PermGroup(degree={self.n}, generators={len(self.generators)})"

    def chain(self, base_prefix=()) -> StabChain:
        key = tuple(base_prefix)
        if key not in self._chains:
            self._chains[key] = StabChain(self.generators, self.n, key)
        return self._chains[key]

    @cached_property
    def _order(self) -> int:
        if self._elements is not None:
            return len(self._elements)
        return self.chain().order()

    def order(self) -> int:
        return self._order

    def contains(self, g) -> bool:
        return self.chain().contains(np.asarray(g))

    # orbits -----------------------------------------------------------
    def orbit(self, seed) -> list[int]:
        """Smallest generator-closed set containing ``seed`` (an int or iterable)."""
        seeds = [seed] if isinstance(seed, (int, np.integer)) else list(seed)
        mask = np.zeros(self.n, dtype=bool)
        frontier = np.unique(np.asarray(seeds, dtype=np.int64))
        mask[frontier] = True
        while len(frontier) and self.generators:
            imgs = np.concatenate([g[frontier] for g in self.generators])
            imgs = np.unique(imgs[~mask[imgs]])
            mask[imgs] = True
            frontier = imgs
        return np.nonzero(mask)[0].tolist()

    def orbits(self, points=None) -> list[list[int]]:
        """Orbit decomposition of an invariant set (default: everything)."""
        remaining = set(range(self.n) if points is None else (int(p) for p in points))
        out = []
        while remaining:
            orb = self.orbit(min(remaining))
            out.append(orb)
            remaining.difference_update(orb)
        return out

    def orbit_transversal(self, point: int) -> dict[int, np.ndarray]:
        reps = {point: identity(self.n)}
        frontier = [point]
        while frontier:
            nxt = []
            for beta in frontier:
                u = reps[beta]
                for g in self.generators:
                    gamma = int(g[beta])
                    if gamma not in reps:
                        reps[gamma] = g[u]
                        nxt.append(gamma)
            frontier = nxt
        return reps

    def stabiliser(self, point: int) -> "PermGroup":
        """Point stabiliser generated by Schreier generators."""
        reps = self.orbit_transversal(point)
        inv = {b: invert(u) for b, u in reps.items()}
        seen, gens = set(), []
        for beta, u in reps.items():
            for g in self.generators:
                s = inv[int(g[beta])][g[u]]
                k = _key(s)
                if k not in seen and not is_identity(s):
                    seen.add(k)
                    gens.append(s)
        return PermGroup(gens, self.n)

    # enumeration --------------------------------------------------------
    def elements(self, cap: int = ELEMENT_CAP) -> np.ndarray:
        if self._elements is None:
            order = self.order()
            if order > cap:
                raise GroupCapError(f"group of order {order} exceeds enumeration cap {cap}")
            dtype = np.int16 if self.n < 2**15 else np.int32
            self._elements = self.chain().elements_from(0, dtype=dtype)
        return self._elements

    def iter_element_blocks(self, cap: int = ELEMENT_CAP):
        """Yield ``(image_of_first_base_point, block)`` covering the group once."""
        order = self.order()
        if order > cap:
            raise GroupCapError(f"group of order {order} exceeds enumeration cap {cap}")
        if self._elements is not None:
            yield None, self._elements
            return
        ch = self.chain()
        if not ch.levels:
            yield None, identity(self.n)[None, :]
            return
        dtype = np.int16 if self.n < 2**15 else np.int32
        tail = ch.elements_from(1, dtype=dtype)
        top = ch.levels[0]
        for beta in sorted(top.reps):
            yield beta, top.reps[beta].astype(dtype)[tail]

    def setwise_stabiliser(self, members, cap: int = ELEMENT_CAP) -> "PermGroup":
        """Exact subgroup mapping ``members`` onto itself."""
        members = np.asarray(sorted({int(m) for m in members}), dtype=np.int64)
        inset = np.zeros(self.n, dtype=bool)
        inset[members] = True
        ch = self.chain() if self._elements is None else None
        base0 = ch.levels[0].base if ch is not None and ch.levels else None
        found = []
        for beta, block in self.iter_element_blocks(cap):
            if beta is not None and inset[base0] != inset[beta]:
                continue
            keep = inset[block[:, members]].all(axis=1) if len(members) else np.ones(len(block), bool)
            if keep.any():
                found.append(block[keep])
        elems = np.concatenate(found) if found else identity(self.n)[None, :]
        return PermGroup.from_elements(elems, self.n)

    @classmethod
    def from_elements(cls, elements: np.ndarray, n: int) -> "PermGroup":
        """Wrap a complete element list, choosing a small generating set."""
        elements = np.asarray(elements)
        gens: list[np.ndarray] = []
        chain, order = None, 1
        for row in elements:
            row = row.astype(np.int64)
            if chain is None:
                if is_identity(row):
                    continue
            elif chain.contains(row):
                continue
            gens.append(row)
            chain = StabChain(gens, n)
            order = chain.order()
            if order >= len(elements):
                break
        if order != len(elements):
            raise ValueError("element list is not a group")
        group = cls(gens, n, elements=elements)
        if chain is not None:
            group._chains[()] = chain
        return group

    def is_transitive_on(self, points) -> bool:
        points = sorted(int(p) for p in points)
        if not points:
            return True
        return self.orbit(points[0]) == points

