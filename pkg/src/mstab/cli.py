"""Command-line interface.

Exit codes form a stable contract: 0 for success (model valid, curve
stable, tail balanced, discrepancy feasible), 1 for a well-formed input
failing the requested check, 2 for malformed or invalid input.  Machine
output (JSON, or DOT with ``--format dot``) goes to standard output; a
one-line human summary goes to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import metadata

from . import decomposition, degeneration, enumeration, serialize, stability, tails
from .errors import (
    BoundExceededError,
    InvalidModelError,
    MalformedModelError,
    MstabError,
    ParseError,
    PreconditionError,
)
from .model import CurveModel, WeightVector, validate

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


def _version() -> str:
    try:
        return metadata.version("mstab")
    except metadata.PackageNotFoundError:
        return "0.0.0+unpackaged"


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _emit(payload, args) -> None:
    print(json.dumps(payload, indent=2))


def _summary(text: str) -> None:
    print(text, file=sys.stderr)


def _load_valid_model(path: str) -> CurveModel:
    model = serialize.parse_model(_read(path))
    problems = validate(model)
    if problems:
        raise InvalidModelError(problems)
    return model


def _load_weights(args, n: int) -> WeightVector:
    if getattr(args, "weights", None):
        weights = serialize.parse_weights(_read(args.weights))
        if len(weights) != n:
            raise PreconditionError(
                f"weight file has {len(weights)} entries, model has {n} markings"
            )
        return weights
    return WeightVector.unit(n)


def _maybe_dot_model(model: CurveModel, args) -> bool:
    if args.format == "dot":
        sys.stdout.write(serialize.emit_dot(model))
        return True
    return False


def cmd_validate(args) -> int:
    model = serialize.parse_model(_read(args.model))
    problems = validate(model)
    if not _maybe_dot_model(model, args):
        _emit({"valid": not problems, "violations": [v.as_dict() for v in problems]}, args)
    if problems:
        _summary(f"invalid: {len(problems)} violation(s)")
        return EXIT_CHECK_FAILED
    _summary("valid")
    return EXIT_OK


def cmd_decompose(args) -> int:
    model = _load_valid_model(args.model)
    dec = decomposition.decompose(model)
    if not _maybe_dot_model(model, args):
        _emit(serialize.decomposition_to_obj(dec), args)
    _summary(f"core kind {dec.z_kind}, {dec.attaching_count} tree(s)")
    return EXIT_OK


def cmd_level(args) -> int:
    model = _load_valid_model(args.model)
    lv = decomposition.level(model)
    if not _maybe_dot_model(model, args):
        _emit({"level": lv}, args)
    _summary(f"level {lv}")
    return EXIT_OK


def cmd_check(args) -> int:
    model = _load_valid_model(args.model)
    weights = _load_weights(args, model.n)
    report = stability.is_mA_stable(model, args.m, weights)
    if not _maybe_dot_model(model, args):
        _emit(report.as_dict(), args)
    if report.stable:
        _summary(f"stable for m={args.m}")
        return EXIT_OK
    _summary(f"unstable for m={args.m}: {len(report.failures)} failure(s)")
    return EXIT_CHECK_FAILED


def cmd_tail(args) -> int:
    tail = serialize.parse_tail(_read(args.tail))
    if args.discrepancy:
        solution = tails.discrepancy_solve(tail)
        if solution.feasible:
            payload = {
                "feasible": True,
                "discrepancy": solution.divisor.as_dict(),
            }
            if not _maybe_dot_model(tail.curve, args):
                _emit(payload, args)
            _summary("feasible")
            return EXIT_OK
        if not _maybe_dot_model(tail.curve, args):
            _emit({"feasible": False, "conflict": solution.conflict}, args)
        _summary(f"infeasible: {solution.conflict}")
        return EXIT_CHECK_FAILED
    balanced = tails.is_balanced(tail)
    if not _maybe_dot_model(tail.curve, args):
        _emit({"balanced": balanced}, args)
    _summary("balanced" if balanced else "unbalanced")
    return EXIT_OK if balanced else EXIT_CHECK_FAILED


def cmd_limit(args) -> int:
    model = serialize.parse_model(_read(args.model))
    start = degeneration.initial_model(model)
    result = degeneration.stable_limit(start, args.m)
    if args.trace:
        frames = []
        for i, (label, fiber) in enumerate(result.frames()):
            frames.append(serialize.emit_dot(fiber, name=f"frame {i}: {label}"))
        with open(args.trace, "w", encoding="utf-8") as handle:
            handle.write("".join(frames))
    if not _maybe_dot_model(result.fiber, args):
        sys.stdout.write(serialize.serialize_model(result.fiber))
    _summary(
        f"stable limit for m={args.m} after {len(result.frames()) - 1} move(s)"
    )
    return EXIT_OK


def cmd_reduce(args) -> int:
    model = serialize.parse_model(_read(args.model))
    weights = _load_weights(args, model.n)
    start = degeneration.from_stable_fiber(model)
    result = degeneration.weighted_reduce(start, args.m, weights)
    if not _maybe_dot_model(result.fiber, args):
        sys.stdout.write(serialize.serialize_model(result.fiber))
    _summary(f"weighted reduction done, {len(result.frames()) - 1} move(s)")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    weights = None
    if args.weights:
        weights = serialize.parse_weights(_read(args.weights))
    strata = enumeration.enumerate_strata(
        args.n, args.m, weights, bound=args.bound
    )
    edges = []
    if args.poset:
        edges = enumeration.build_poset(
            strata, args.m, search_bound=args.search_bound, weights=weights
        )
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as handle:
            handle.write(serialize.emit_dot_poset(strata, edges))
    if args.format == "dot":
        sys.stdout.write(serialize.emit_dot_poset(strata, edges))
    else:
        payload = {
            "n": args.n,
            "m": args.m,
            "strata": [
                {
                    "dimension": s.dimension,
                    "model": serialize.model_to_obj(s.representative),
                }
                for s in strata
            ],
        }
        if args.poset:
            index = {s.key: i for i, s in enumerate(strata)}
            payload["poset"] = {
                "certification": "witness-certified (sound, not claimed complete)",
                "edges": [
                    {"source": index[e.source.key], "target": index[e.target.key]}
                    for e in edges
                ],
            }
        _emit(payload, args)
    _summary(
        f"{len(strata)} strata" + (f", {len(edges)} edges" if args.poset else "")
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mstab",
        description="Combinatorics of stable pointed genus-one curves.",
    )
    parser.add_argument("--version", action="version", version=_version())
    parser.add_argument(
        "--format",
        choices=("json", "dot"),
        default="json",
        help="machine output format (default json)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check model invariants")
    p.add_argument("model", help="model JSON file, or - for stdin")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decompose", help="minimal elliptic subcurve and trees")
    p.add_argument("model")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("level", help="level of the pointed curve")
    p.add_argument("model")
    p.set_defaults(func=cmd_level)

    p = sub.add_parser("check", help="decide stability")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--weights", help="JSON array of rational weights")
    p.add_argument("model")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("tail", help="balance and discrepancy of a tail")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--check", action="store_true", help="balanced?")
    group.add_argument("--discrepancy", action="store_true", help="solve for the divisor")
    p.add_argument("tail", help="tail JSON file (model plus attach array)")
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser("limit", help="stable limit of a semistable fiber")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trace", help="write one DOT graph per pipeline frame")
    p.add_argument("model")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("reduce", help="weighted reduction of a stable fiber")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("model")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("enumerate", help="equisingular strata (and poset)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--weights")
    p.add_argument("--poset", action="store_true")
    p.add_argument("--dot", help="write the diagram to this file")
    p.add_argument("--bound", type=int, default=enumeration.DEFAULT_N_BOUND)
    p.add_argument("--search-bound", type=int, default=None)
    p.set_defaults(func=cmd_enumerate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, MalformedModelError, InvalidModelError) as exc:
        print(json.dumps({"error": str(exc)}))
        _summary(f"bad input: {exc}")
        return EXIT_BAD_INPUT
    except (PreconditionError, BoundExceededError) as exc:
        print(json.dumps({"error": str(exc)}))
        _summary(f"precondition: {exc}")
        return EXIT_BAD_INPUT
    except MstabError as exc:
        print(json.dumps({"error": str(exc)}))
        _summary(f"error: {exc}")
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
