"""Command-line interface: ``gqcodes <command> ...``.

Every command prints JSON.  Exit codes: 0 success, 1 a checked claim failed,
2 usage or input error, 3 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import constructions as cons
from .codegraph import CodeError, classify, counting_check, distance_partition, min_distance
from .formats import (FORMAT, FormatError, certificate_to_json, code_from_json, code_to_json,
                      generator_from_json, generator_to_json)
from .groupaction import (CertificationError, NotSimilitudeError, VertexPerm, certify_nt,
                          decide_nt)
from .permgroup import GroupCapError
from .search import (SearchSpec, analyse_code, default_workers, enumerate_codes,
                     enumerate_nt_maximal, max_delta3_code, spread_completion_preset)
from .verify import CLAIMS, run_claims

EXIT_OK, EXIT_CLAIM, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(obj, out=None):
    text = json.dumps(obj, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def metrics(code) -> dict:
    """The record a construction claims, recomputed from the code alone."""
    if len(code) < 2:
        raise CodeError("metrics need at least two codewords")
    return {"delta": min_distance(code), "rho": distance_partition(code).rho,
            "size": len(code), "classification": classify(code).name}


def cmd_construct(args) -> int:
    params = {}
    if args.subgroup:
        params["subgroup"] = args.subgroup
    if args.side:
        params["side"] = args.side
    try:
        result = cons.construct(args.name, args.q, **params)
    except cons.ConstructionError as exc:
        raise UsageError(str(exc)) from exc
    cert = certify_nt(result.code, result.nt_generators, 1) if result.nt_generators else None
    _emit({"format": FORMAT, "code": code_to_json(result.code), "claimed": result.claimed,
           "provenance": result.provenance,
           "certificate": certificate_to_json(cert) if cert else None}, args.output)
    return EXIT_OK if cert is None or cert.success else EXIT_CLAIM


def cmd_analyze(args) -> int:
    data = _load(args.file)
    code = code_from_json(data)
    report = {"format": FORMAT, "metrics": metrics(code),
              "cells": distance_partition(code).sizes()}
    if report["metrics"]["delta"] == 4:
        report["counting"] = counting_check(code).to_json()
    if args.nt:
        d = decide_nt(code)
        report["nt"] = d.is_nt
        report["stabiliser_order"] = d.order
    status = EXIT_OK
    if isinstance(data, dict) and "claimed" in data:
        report["matches_claimed"] = report["metrics"] == data["claimed"]
        status = EXIT_OK if report["matches_claimed"] else EXIT_CLAIM
    _emit(report, args.output)
    return status


def cmd_certify(args) -> int:
    data = _load(args.file)
    code = code_from_json(data)
    cert_data = data.get("certificate") if isinstance(data, dict) else None
    if not cert_data:
        raise UsageError(f"{args.file}: no certificate with generators found")
    gens = [generator_from_json(code.graph.q, g, f"certificate.generators[{i}]")
            for i, g in enumerate(cert_data.get("generators", []))]
    level = args.level or cert_data.get("level", 1)
    try:
        # permutations from a file are untrusted until checked against the graph
        gens = [VertexPerm(g.images, code.graph) if isinstance(g, VertexPerm) else g for g in gens]
        cert = certify_nt(code, gens, level)
    except (CertificationError, NotSimilitudeError, ValueError) as exc:
        _emit({"format": FORMAT, "success": False, "error": str(exc)}, args.output)
        return EXIT_CLAIM
    out = certificate_to_json(cert)
    out["replayed"] = (cert.orbit_counts == cert_data.get("orbit_counts")
                       if level == cert_data.get("level") else None)
    _emit(out, args.output)
    return EXIT_OK if cert.success and out["replayed"] is not False else EXIT_CLAIM


def cmd_decide(args) -> int:
    code = code_from_json(_load(args.file))
    d = decide_nt(code)
    _emit({"format": FORMAT, "is_nt": d.is_nt, "stabiliser_order": d.order,
           "orbit_counts": d.orbit_counts,
           "stabiliser_generators": [generator_to_json(g) for g in d.stabiliser.generators]},
          args.output)
    return EXIT_OK


def _stream(report, out):
    lines = []
    for code, info in zip(report.representatives, report.analyses):
        lines.append(json.dumps({"code": code_to_json(code), "analysis": info}, sort_keys=True))
    lines.append(json.dumps({"summary": report.summary()}, sort_keys=True))
    text = "\n".join(lines)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_search(args) -> int:
    workers = args.workers if args.workers else default_workers()
    if args.preset == "nt-maximal":
        report = enumerate_nt_maximal(args.q, workers=workers)
        _stream(report, args.output)
        return EXIT_OK if report.extra["unmatched"] == 0 else EXIT_CLAIM
    if args.preset == "spread-completion":
        _stream(spread_completion_preset(args.q, workers=workers), args.output)
        return EXIT_OK
    if args.preset == "max-delta3":
        _stream(max_delta3_code(args.q), args.output)
        return EXIT_OK
    if args.size is None and args.min_size is None:
        raise UsageError("search needs --size, --min-size/--max-size or --preset")
    lo = args.size if args.size is not None else args.min_size
    hi = args.size if args.size is not None else (args.max_size or lo)
    try:
        spec = SearchSpec(args.q, args.side, lo, hi, args.delta, nt_filter=args.nt,
                          maximal=args.maximal, rho=args.rho)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = enumerate_codes(spec, workers=workers, checkpoint=args.resume)
    _stream(report, args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.claims or list(CLAIMS)
    unknown = [n for n in names if n not in CLAIMS]
    if unknown:
        raise UsageError(f"unknown claims {unknown}; choose from {sorted(CLAIMS)}")
    rows = run_claims(names)
    _emit({"format": FORMAT, "claims": rows, "passed": sum(r["ok"] for r in rows),
           "total": len(rows)}, args.output)
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_CLAIM


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gqcodes", description="Codes in the symplectic quadrangle W(3, q).")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a known code with its generators")
    p.add_argument("name", choices=cons.CATALOGUE)
    p.add_argument("--q", type=int, help="field order")
    p.add_argument("--subgroup", help="subgroup label for the subgroup-spread family (e.g. Q8)")
    p.add_argument("--side", choices=("points", "lines"), help="side for the pair construction")
    p.add_argument("-o", "--output", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", help="minimum distance, covering radius, classification")
    p.add_argument("file", help="code JSON or construct output")
    p.add_argument("--nt", action="store_true", help="also decide neighbour-transitivity")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("certify", help="replay a neighbour-transitivity certificate")
    p.add_argument("file", help="construct output carrying a certificate")
    p.add_argument("--level", type=int, help="distance level to certify (default: stored level)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("decide", help="exact neighbour-transitivity via the full stabiliser")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("search", help="enumerate codes up to equivalence")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--side", choices=("points", "lines", "mixed"), default="lines")
    p.add_argument("--size", type=int)
    p.add_argument("--min-size", type=int)
    p.add_argument("--max-size", type=int)
    p.add_argument("--delta", type=int, choices=(3, 4), default=4)
    p.add_argument("--rho", type=int, help="keep only codes with this covering radius")
    p.add_argument("--nt", action="store_true", help="keep only neighbour-transitive codes")
    p.add_argument("--maximal", action="store_true", help="keep only non-extendable codes")
    p.add_argument("--preset", choices=("nt-maximal", "spread-completion", "max-delta3"))
    p.add_argument("--workers", type=int, help="worker processes (default: $GQCODES_WORKERS or 1)")
    p.add_argument("--resume", metavar="CHECKPOINT", help="checkpoint file to write and resume from")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="run the named result checks")
    p.add_argument("claims", nargs="*", help=f"subset of: {', '.join(CLAIMS)}")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, FormatError, CodeError) as exc:
        print(f"gqcodes: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GroupCapError as exc:
        print(f"gqcodes: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
