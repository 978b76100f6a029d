"""The point-line incidence graph of a quadrangle and metrics of codes in it."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .geometry import GQModel, GramMatrix, build_w3

TABLE_LIMIT = 312  # all-pairs distances are cached up to q = 5


class CodeError(ValueError):
    pass


class InconsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagreed."""


class IncidenceGraph:
    """Bipartite incidence graph; points are ``0..N-1``, lines ``N..2N-1``."""

    def __init__(self, model: GQModel):
        self.model = model
        self.num_points = len(model.points)
        self.num_lines = len(model.lines)
        self.n = self.num_points + self.num_lines
        npts = self.num_points
        point_nbrs = [[npts + li for li in lines] for lines in model.point_lines]
        line_nbrs = [list(row) for row in model.line_points.tolist()]
        nbrs = point_nbrs + line_nbrs
        self.neighbours: list[list[int]] = [sorted(x) for x in nbrs]
        degs = {len(x) for x in nbrs}
        if len(degs) == 1:
            self.adj = np.array(self.neighbours, dtype=np.int64)
        else:
            self.adj = None
        if self.n <= TABLE_LIMIT and self.adj is not None:
            self._check_diameter_girth()

    @property
    def q(self) -> int:
        return self.model.q

    def is_point(self, v: int) -> bool:
        return v < self.num_points

    def side_of(self, v: int) -> str:
        return "point" if v < self.num_points else "line"

    def bfs(self, sources, max_depth: int | None = None) -> np.ndarray:
        """Multi-source BFS distances (``-1`` where unreached)."""
        dist = np.full(self.n, -1, dtype=np.int64)
        frontier = np.unique(np.asarray(list(sources), dtype=np.int64))
        dist[frontier] = 0
        d = 0
        while len(frontier) and (max_depth is None or d < max_depth):
            if self.adj is not None:
                nb = self.adj[frontier].ravel()
            else:
                nb = np.array([u for v in frontier for u in self.neighbours[v]], dtype=np.int64)
            nb = np.unique(nb[dist[nb] < 0])
            d += 1
            dist[nb] = d
            frontier = nb
        return dist

    @cached_property
    def distance_table(self) -> np.ndarray:
        if self.n > TABLE_LIMIT:
            raise CodeError("distance table is only cached for small graphs")
        return np.stack([self.bfs([v]) for v in range(self.n)]).astype(np.int8)

    def distance(self, a: int, b: int) -> int:
        if self.n <= TABLE_LIMIT:
            return int(self.distance_table[a, b])
        return int(self.bfs([a])[b])

    def layers(self, v: int) -> list[np.ndarray]:
        """``[Gamma_0(v), ..., Gamma_4(v)]``."""
        dist = self.bfs([v])
        return [np.nonzero(dist == i)[0] for i in range(int(dist.max()) + 1)]

    def _check_diameter_girth(self):
        girth = None
        for root in range(self.n):
            dist = self.bfs([root])
            if dist.min() < 0:
                raise CodeError("incidence graph is disconnected")
            if dist.max() != 4:
                raise CodeError(f"diameter {dist.max()} != 4")
            # an even cycle through root closes where two shortest paths meet
            for u in range(self.n):
                parents = [w for w in self.neighbours[u] if dist[w] == dist[u] - 1]
                if len(parents) >= 2:
                    c = 2 * int(dist[u])
                    girth = c if girth is None else min(girth, c)
        if girth != 8:
            raise CodeError(f"girth {girth} != 8")
        self.diameter, self.girth = 4, 8

    def __repr__(self):
        return f"IncidenceGraph(q={self.q}, n={self.n})"


@lru_cache(maxsize=32)
def _graph_cached(model: GQModel) -> IncidenceGraph:
    return IncidenceGraph(model)


def incidence_graph(model_or_q, gram: GramMatrix | None = None) -> IncidenceGraph:
    """Cached incidence graph of a model, or of ``build_w3(q, gram)``."""
    if isinstance(model_or_q, GQModel):
        return _graph_cached(model_or_q)
    return _graph_cached(build_w3(model_or_q, gram))


@dataclass(frozen=True, eq=False)
class Code:
    graph: IncidenceGraph
    members: tuple[int, ...]
    mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        members = tuple(sorted({int(v) for v in self.members}))
        if members and not (0 <= members[0] and members[-1] < self.graph.n):
            raise CodeError("code contains an index outside the vertex set")
        object.__setattr__(self, "members", members)
        mask = np.zeros(self.graph.n, dtype=bool)
        mask[list(members)] = True
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return bool(self.mask[v])

    def __eq__(self, other):
        return isinstance(other, Code) and other.graph is self.graph and other.members == self.members

    def __hash__(self):
        return hash((id(self.graph), self.members))

    @property
    def side(self) -> str:
        npts = self.graph.num_points
        pts = any(v < npts for v in self.members)
        lines = any(v >= npts for v in self.members)
        if pts and lines:
            return "mixed"
        return "points" if pts else "lines"

    @property
    def nontrivial(self) -> bool:
        return 2 <= len(self.members) < self.graph.n

    @classmethod
    def from_points(cls, graph: IncidenceGraph, indices) -> "Code":
        return cls(graph, tuple(indices))

    @classmethod
    def from_lines(cls, graph: IncidenceGraph, indices) -> "Code":
        return cls(graph, tuple(graph.num_points + i for i in indices))

    def image(self, perm) -> "Code":
        perm = np.asarray(perm)
        return Code(self.graph, tuple(perm[list(self.members)].tolist()))


@dataclass(frozen=True)
class DistancePartition:
    cells: tuple[np.ndarray, ...]
    rho: int
    labels: np.ndarray

    def sizes(self) -> list[int]:
        return [len(c) for c in self.cells]


def distance(graph: IncidenceGraph, a: int, b: int) -> int:
    return graph.distance(a, b)


def min_distance(code: Code) -> int:
    if len(code) < 2:
        raise CodeError("minimum distance undefined for fewer than two codewords")
    g = code.graph
    members = list(code.members)
    best = 5
    if g.n <= TABLE_LIMIT:
        sub = g.distance_table[np.ix_(members, members)].astype(np.int64)
        np.fill_diagonal(sub, 99)
        return int(sub.min())
    for v in members:
        dist = g.bfs([v], max_depth=best - 1)
        d = dist[members]
        d = d[(d > 0)]
        if len(d):
            best = min(best, int(d.min()))
        if best == 1:
            break
    return best


def distance_partition(code: Code) -> DistancePartition:
    if len(code) == 0:
        raise CodeError("distance partition of the empty code")
    labels = code.graph.bfs(code.members)
    rho = int(labels.max())
    cells = tuple(np.nonzero(labels == i)[0] for i in range(rho + 1))
    return DistancePartition(cells, rho, labels)


@dataclass(frozen=True)
class Classification:
    side: str
    partial_ovoid_or_spread: bool | None
    maximal: bool | None
    ovoid_or_spread: bool | None

    @property
    def name(self) -> str:
        if self.side == "mixed":
            return "mixed"
        noun = "ovoid" if self.side == "points" else "spread"
        if self.ovoid_or_spread:
            return noun
        if self.maximal:
            return f"maximal partial {noun}"
        if self.partial_ovoid_or_spread:
            return f"partial {noun}"
        return f"{self.side} code"

    def to_json(self) -> dict:
        return {
            "side": self.side,
            "partial": self.partial_ovoid_or_spread,
            "maximal": self.maximal,
            "complete": self.ovoid_or_spread,
            "name": self.name,
        }


def _definitional(code: Code) -> tuple[bool, bool, bool]:
    g = code.graph
    if code.side == "points":
        counts = code.mask[g.model.line_points].sum(axis=1)
        partial = bool((counts <= 1).all())
        complete = bool((counts == 1).all())
        if not partial:
            return False, False, False
        covered = np.zeros(g.num_points, dtype=bool)
        for li in np.nonzero(counts == 1)[0]:
            covered[g.model.line_points[li]] = True
        maximal = bool(covered.all())
        return partial, maximal, complete
    line_mask = code.mask[g.num_points:]
    per_point = np.array([line_mask[lines].sum() for lines in g.model.point_lines])
    partial = bool((per_point <= 1).all())
    complete = bool((per_point == 1).all())
    if not partial:
        return False, False, False
    # a further line can be added iff some line misses every covered point
    covered = per_point == 1
    maximal = bool(covered[g.model.line_points].any(axis=1).all())
    return partial, maximal, complete


def classify(code: Code) -> Classification:
    """Partial/maximal/complete status, computed two ways that must agree."""
    if len(code) == 0:
        raise CodeError("cannot classify the empty code")
    side = code.side
    if side == "mixed":
        return Classification("mixed", None, None, None)
    direct = _definitional(code)
    rho = distance_partition(code).rho
    partial = len(code) < 2 or min_distance(code) >= 4
    via_metric = (partial, partial and rho <= 3, partial and rho == 2)
    if direct != via_metric:
        raise InconsistencyError(
            f"definitional classification {direct} disagrees with metric one {via_metric}")
    return Classification(side, *direct)


@dataclass(frozen=True)
class CountingReport:
    identities: tuple[tuple[str, int, int, bool], ...]

    @property
    def ok(self) -> bool:
        return all(row[3] for row in self.identities)

    def to_json(self) -> list[dict]:
        return [{"identity": n, "lhs": a, "rhs": b, "ok": ok} for n, a, b, ok in self.identities]


def counting_check(code: Code) -> CountingReport:
    """The three cell-size identities for a minimum-distance-4 code.

    For line codes the roles of ``s`` and ``t`` are exchanged.
    """
    if len(code) < 2 or min_distance(code) != 4:
        raise CodeError("identities require minimum distance 4")
    s, t = code.graph.model.order
    if code.side == "lines":
        s, t = t, s
    sizes = distance_partition(code).sizes() + [0] * 5
    c, c1, c2, c3, c4 = sizes[:5]
    rows = (
        ("|C1| = (t+1)|C|", c1, (t + 1) * c),
        ("|C|+|C2|+|C4| = (s+1)(st+1)", c + c2 + c4, (s + 1) * (s * t + 1)),
        ("|C1|+|C3| = (t+1)(st+1)", c1 + c3, (t + 1) * (s * t + 1)),
    )
    return CountingReport(tuple((n, a, b, a == b) for n, a, b in rows))


def perfect_size_identity(s: int) -> Fraction:
    """Size a perfect code would need in a self-dual quadrangle of order ``s``."""
    if s < 1:
        raise ValueError("order must be positive")
    return Fraction(2 * (s**3 + s**2 + s + 1), s + 2)


def perfect_size_simplified(s: int) -> Fraction:
    """The closed form ``2(s^2 - s + 1) - 2/(s + 2)``, kept for comparison with the exact quotient."""
    return 2 * (s * s - s + 1) - Fraction(2, s + 2)


@dataclass(frozen=True)
class PerfectCodeScan:
    limit: int
    integral_total: tuple[int, ...]
    integral_per_side: tuple[int, ...]
    closed_form_mismatches: int
    first_mismatch: tuple[int, Fraction, Fraction] | None


def perfect_size_scan(limit: int = 10**6) -> PerfectCodeScan:
    """Exact scan of ``1 <= s <= limit``.

    ``integral_total`` lists ``s`` where ``(s+2) | 2(s^3+s^2+s+1)``;
    ``integral_per_side`` those where each side's share
    ``(s^3+s^2+s+1)/(s+2)`` is integral, which a perfect code needs because
    it has equally many points and lines.
    """
    total, per_side = [], []
    mismatches, first = 0, None
    for s in range(1, limit + 1):
        n = s**3 + s**2 + s + 1
        if (2 * n) % (s + 2) == 0:
            total.append(s)
        if n % (s + 2) == 0:
            per_side.append(s)
        # both sides over the common denominator s + 2
        if 2 * n != 2 * (s * s - s + 1) * (s + 2) - 2:
            mismatches += 1
            if first is None:
                first = (s, perfect_size_identity(s), perfect_size_simplified(s))
    return PerfectCodeScan(limit, tuple(total), tuple(per_side), mismatches, first)
