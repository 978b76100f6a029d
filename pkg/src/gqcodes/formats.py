"""Versioned JSON formats for codes and their NT certificates."""

from __future__ import annotations

from .codegraph import Code, incidence_graph
from .field import gf
from .geometry import GramMatrix, alternate_gram, standard_gram
from .groupaction import NTCertificate, SemilinearMap, VertexPerm

FORMAT = 1
GRAM_NAMES = {"standard": standard_gram, "alternate": alternate_gram}


class FormatError(ValueError):
    """Malformed input; the message starts with the offending location."""


def _require(data, key, where):
    if not isinstance(data, dict) or key not in data:
        raise FormatError(f"{where}: missing key {key!r}")
    return data[key]


def gram_from_json(q: int, value, where: str = "gram") -> GramMatrix:
    F = gf(q)
    if value is None or isinstance(value, str):
        name = value or "standard"
        if name not in GRAM_NAMES:
            raise FormatError(f"{where}: unknown form {name!r}; expected one of {sorted(GRAM_NAMES)}")
        return GRAM_NAMES[name](F)
    try:
        return GramMatrix.from_json(F, value)
    except (ValueError, TypeError, IndexError, KeyError) as exc:
        raise FormatError(f"{where}: {exc}") from exc


def gram_to_json(gram: GramMatrix):
    for name, make in GRAM_NAMES.items():
        if gram == make(gram.field):
            return name
    return gram.to_json()


def code_to_json(code: Code) -> dict:
    model = code.graph.model
    F = model.field
    npts = code.graph.num_points
    members = []
    for v in code.members:
        if v < npts:
            members.append({"kind": "point", "coords": [F.serialize(x) for x in model.points[v].coords]})
        else:
            rows = model.lines[v - npts].basis
            members.append({"kind": "line", "matrix": [[F.serialize(x) for x in r] for r in rows]})
    return {"format": FORMAT, "q": model.q, "gram": gram_to_json(model.gram), "members": members}


def code_from_json(data) -> Code:
    if not isinstance(data, dict):
        raise FormatError("top level: expected an object")
    if "code" in data and "members" not in data:
        data = data["code"]
    fmt = data.get("format", FORMAT)
    if fmt != FORMAT:
        raise FormatError(f"format: unsupported version {fmt!r}")
    q = _require(data, "q", "top level")
    try:
        F = gf(int(q))
    except (ValueError, TypeError) as exc:
        raise FormatError(f"q: {exc}") from exc
    gram = gram_from_json(F.q, data.get("gram"))
    graph = incidence_graph(F.q, gram)
    model = graph.model
    raw = _require(data, "members", "top level")
    if not isinstance(raw, list) or not raw:
        raise FormatError("members: expected a non-empty list")
    out = []
    for i, m in enumerate(raw):
        where = f"members[{i}]"
        kind = _require(m, "kind", where)
        try:
            if kind == "point":
                vec = [F.deserialize(x) for x in _require(m, "coords", where)]
                if len(vec) != 4:
                    raise ValueError("expected 4 coordinates")
                out.append(model.index_of_point(vec))
            elif kind == "line":
                rows = [[F.deserialize(x) for x in r] for r in _require(m, "matrix", where)]
                if len(rows) != 2 or any(len(r) != 4 for r in rows):
                    raise ValueError("expected a 2x4 matrix")
                out.append(graph.num_points + model.index_of_line(rows))
            else:
                raise ValueError(f"unknown kind {kind!r}")
        except FormatError:
            raise
        except (KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"{where}: {exc or 'not a point or line of the quadrangle'}") from exc
    return Code(graph, tuple(out))


def generator_to_json(gen) -> dict:
    if isinstance(gen, SemilinearMap):
        return gen.to_json()
    if isinstance(gen, VertexPerm):
        return gen.to_json()
    return {"perm": [int(x) for x in gen]}


def generator_from_json(q: int, data, where: str = "generator"):
    if "perm" in data:
        return VertexPerm([int(x) for x in data["perm"]])
    if "matrix" in data:
        try:
            return SemilinearMap.from_json(gf(q), data)
        except (ValueError, TypeError, IndexError) as exc:
            raise FormatError(f"{where}: {exc}") from exc
    raise FormatError(f"{where}: expected 'matrix' or 'perm'")


def certificate_to_json(cert: NTCertificate) -> dict:
    return {"format": FORMAT, "level": cert.level,
            "generators": [generator_to_json(g) for g in cert.generators],
            "orbit_counts": list(cert.orbit_counts), "preserved": list(cert.preserved),
            "success": cert.success}
