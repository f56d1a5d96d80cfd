"""Command-line front-end for dimerlab.

Exit codes are uniform: 0 valid / consistent / nothing found, 1 inconsistent
or a counterexample found, 2 invalid input or any error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .consistency import cross_check
from .core import ModelSyntaxError, DimerModel, load_model, parse_model, serialize_model, validate_model
from .corpus import FIXTURE_NAMES, build_hexagonal, build_square, corpus, fixture
from .matchings import enumerate_perfect_matchings, is_non_degenerate
from .quiver import BOUND_ENV, BoundError, Quiver, find_first_consistency_counterexample
from .zigzag import trace_zigzags

SCHEMA = "dimerlab.report/1"
EXIT_OK, EXIT_INCONSISTENT, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    """An input problem reported with exit code 2."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


# --- loading -----------------------------------------------------------------------


def read_model(spec: str) -> DimerModel:
    """Load ``spec``: a file path, or ``fixture:NAME`` for a shipped fixture."""
    if spec.startswith("fixture:"):
        name = spec.split(":", 1)[1]
        if name not in FIXTURE_NAMES:
            raise CliError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")
        return fixture(name).model
    try:
        return load_model(spec)
    except OSError as exc:
        raise CliError(f"cannot read {spec}: {exc.strerror or exc}") from exc
    except ModelSyntaxError as exc:
        raise CliError(f"{spec}: parse error: {exc}", {"parse_error": {"message": str(exc), "line": exc.line, "column": exc.column}}) from exc


def model_info(m: DimerModel) -> dict:
    text = serialize_model(m)
    return {
        "name": m.name,
        "sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        **{k: v for k, v in m.summary().items() if k != "name"},
    }


def require_valid(m: DimerModel) -> None:
    report = validate_model(m)
    if not report.ok:
        first = report.failures()[0]
        raise CliError(f"invalid model: {first.name}: {first.message}", {"validation": report.to_dict()})


def _bound_from_env():
    raw = os.environ.get(BOUND_ENV)
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"{BOUND_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise CliError(f"{BOUND_ENV} must be non-negative")
    return value


def _check_bounds(args) -> None:
    _bound_from_env()
    for flag in ("bound", "omega_power", "search_length"):
        value = getattr(args, flag, None)
        if value is not None and value < 0:
            raise CliError(f"--{flag.replace('_', '-')} must be non-negative")


# --- output ----------------------------------------------------------------------------


def envelope(command: str, body: dict, started: float) -> dict:
    out = {"schema": SCHEMA, "tool": {"name": "dimerlab", "version": __version__}, "command": command}
    out.update(body)
    out["timing"] = {"seconds": round(time.perf_counter() - started, 6)}
    return out


def emit(args, command: str, body: dict, text: list[str], started: float) -> None:
    if args.json:
        print(json.dumps(envelope(command, body, started), indent=2, sort_keys=True, default=_jsonable))
    else:
        print("\n".join(text))


def _jsonable(x):
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, tuple):
        return list(x)
    if x == float("inf"):
        return "inf"
    raise TypeError(f"not serializable: {type(x).__name__}")


def _clean(x):
    """Recursively replace infinities so json output stays standard."""
    if isinstance(x, float) and x == float("inf"):
        return "inf"
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


# --- commands --------------------------------------------------------------------


def cmd_validate(args) -> int:
    started = time.perf_counter()
    m = read_model(args.model)
    report = validate_model(m)
    text = [f"{m.name or args.model}: {'valid' if report.ok else 'INVALID'}"]
    for c in report.checks:
        line = f"  {c.status:7} {c.name}"
        if c.message:
            line += f": {c.message}"
        text.append(line)
    emit(args, "validate", {"model": model_info(m), "validation": _clean(report.to_dict())}, text, started)
    return EXIT_OK if report.ok else EXIT_ERROR


def _search_args(args):
    bound = args.bound if args.bound is not None else _bound_from_env()
    return bound, args.omega_power, args.search_length


def _check_one(m: DimerModel, args) -> tuple[dict, list[str], int]:
    require_valid(m)
    bound, i_max, length = _search_args(args)
    try:
        r = cross_check(m, bound, i_max, length)
    except BoundError as exc:
        raise CliError(str(exc)) from exc
    body = {"model": model_info(m), **_clean(r.to_dict())}
    lines = [f"model {m.name}: {len(m.nodes)} nodes, {len(m.edges)} edges, {len(m.faces)} faces"]
    for verdict in (r.consistent, r.properly_ordered, r.ks_criterion):
        state = "yes" if verdict.ok else "no (failed clauses " + ", ".join(map(str, verdict.failed())) + ")"
        lines.append(f"  {verdict.condition:17} {state}")
        for k in verdict.failed():
            lines.append(f"    clause {k}: {verdict[k].message}")
    lines.append(f"  {'non_degenerate':17} {'yes' if r.non_degenerate else 'no'}")
    s = r.search
    if s.found:
        c = s.counterexample
        lines.append(f"  first consistency: counterexample {c.first} vs {c.second} (omega power {c.power})")
    else:
        lines.append(
            f"  first consistency: no counterexample within L={s.bound}, i_max={s.i_max}, length<={s.search_length}"
        )
        if s.note:
            lines.append(f"    note: {s.note}")
    lines.append(f"  cross-check: {r.expectation}{'' if r.agreement else ' (DISAGREEMENT)'}")
    return body, lines, EXIT_OK if r.consistent.ok else EXIT_INCONSISTENT


def cmd_check(args) -> int:
    started = time.perf_counter()
    _check_bounds(args)
    if args.all:
        if args.svg:
            raise CliError("--svg needs a single model")
        bodies, text, code = [], [], EXIT_OK
        for m in corpus(args.max_size):
            body, lines, rc = _check_one(m, args)
            bodies.append(body)
            text += lines
            code = max(code, rc)
        emit(args, "check", {"models": bodies}, text, started)
        return code
    if not args.model:
        raise CliError("check needs a model path or --all")
    m = read_model(args.model)
    body, text, code = _check_one(m, args)
    if args.svg:
        from .render import render_svg

        Path(args.svg).write_text(render_svg(m, window=args.window), encoding="utf-8")
        text.append(f"  svg written to {args.svg}")
    emit(args, "check", body, text, started)
    return code


def cmd_matchings(args) -> int:
    started = time.perf_counter()
    m = read_model(args.model)
    require_valid(m)
    ms = enumerate_perfect_matchings(m)
    nd = is_non_degenerate(m)
    body = {"model": model_info(m), "count": len(ms), "non_degenerate": nd.non_degenerate}
    if args.count_only:
        text = [str(len(ms))]
    else:
        body["matchings"] = [sorted(x) for x in ms]
        text = [f"{len(ms)} perfect matchings"] + ["  " + " ".join(sorted(x)) for x in ms]
        text.append(f"non-degenerate: {'yes' if nd.non_degenerate else 'no'}")
        if nd.uncovered():
            text.append("edges in no matching: " + " ".join(nd.uncovered()))
            body["uncovered_edges"] = nd.uncovered()
    emit(args, "matchings", body, text, started)
    return EXIT_OK


def cmd_zigzag(args) -> int:
    started = time.perf_counter()
    m = read_model(args.model)
    require_valid(m)
    zs = trace_zigzags(m)
    body = {"model": model_info(m), "count": len(zs), "zigzags": [z.to_dict() for z in zs]}
    text = [f"{len(zs)} zigzag paths"]
    for z in zs:
        text.append(f"  [{z.index}] class ({z.homology[0]}, {z.homology[1]}) length {z.period}: " + " ".join(z.edges))
    emit(args, "zigzag", body, text, started)
    return EXIT_OK


def cmd_quiver(args) -> int:
    started = time.perf_counter()
    m = read_model(args.model)
    require_valid(m)
    q = Quiver(m)
    arrows = [
        {"arrow": a.id, "source": a.source, "target": a.target, "offset": list(a.offset)} for a in q.arrows.values()
    ]
    rels = [{"arrow": a, "plus": ".".join(p), "minus": ".".join(n)} for a, p, n in q.relations()]
    body = {"model": model_info(m), "vertices": q.vertices, "arrows": arrows, "relations": rels}
    text = [f"{len(q.vertices)} vertices, {len(arrows)} arrows"]
    text += [f"  {x['arrow']}: {x['source']} -> {x['target']} offset {tuple(x['offset'])}" for x in arrows]
    text.append("relations:")
    text += [f"  {r['arrow']}: {r['plus']} = {r['minus']}" for r in rels]
    emit(args, "quiver", body, text, started)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    started = time.perf_counter()
    _check_bounds(args)
    m = read_model(args.model)
    require_valid(m)
    bound, i_max, length = _search_args(args)
    try:
        s = find_first_consistency_counterexample(m, bound, i_max, length)
    except BoundError as exc:
        raise CliError(str(exc)) from exc
    body = {"model": model_info(m), **_clean(s.to_dict())}
    if s.found:
        c = s.counterexample
        text = [f"counterexample: {c.first} and {c.second}", f"  weakly equivalent with omega power {c.power}"]
    else:
        text = [f"no counterexample within L={s.bound}, i_max={s.i_max}, length<={s.search_length}"]
        if s.note:
            text.append(f"  note: {s.note}")
    emit(args, "counterexample", body, text, started)
    return EXIT_INCONSISTENT if s.found else EXIT_OK


def cmd_corpus(args) -> int:
    started = time.perf_counter()
    if args.action == "list":
        rows = []
        for name in FIXTURE_NAMES:
            entry = fixture(name)
            rows.append({"name": name, "description": entry.description})
        emit(args, "corpus", {"fixtures": rows}, [f"{r['name']}: {r['description']}" for r in rows], started)
        return EXIT_OK
    if args.action == "show":
        if not args.args:
            raise CliError("corpus show needs a fixture name")
        m = read_model("fixture:" + args.args[0])
    else:
        if len(args.args) != 3 or args.args[0] not in ("hexagonal", "square"):
            raise CliError("corpus build needs: {hexagonal,square} M N")
        try:
            size = int(args.args[1]), int(args.args[2])
        except ValueError:
            raise CliError("corpus build sizes must be integers") from None
        if min(size) < 1:
            raise CliError("corpus build sizes must be positive")
        m = (build_hexagonal if args.args[0] == "hexagonal" else build_square)(*size)
    text = serialize_model(m)
    if args.json:
        emit(args, "corpus", {"model": model_info(m), "text": text}, [], started)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimerlab", description="Dimer models on the torus: quivers, zigzags, consistency.")
    p.add_argument("--version", action="version", version=f"dimerlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def model_cmd(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("model", help="path to a .dimer file, or fixture:NAME")
        sp.add_argument("--json", action="store_true", help="emit a JSON report")
        return sp

    def bounds(sp):
        sp.add_argument("--bound", type=int, default=None, help=f"path length bound L (default from {BOUND_ENV} or derived)")
        sp.add_argument("--omega-power", type=int, default=4, help="largest omega power tried (default 4)")
        sp.add_argument("--search-length", type=int, default=None, help="longest candidate path enumerated")

    model_cmd("validate", "check that a file describes a dimer model on the torus").set_defaults(func=cmd_validate)

    sp = sub.add_parser("check", help="run every consistency checker and the cross-check")
    sp.add_argument("model", nargs="?", help="path to a .dimer file, or fixture:NAME")
    sp.add_argument("--json", action="store_true", help="emit a JSON report")
    sp.add_argument("--svg", default=None, help="write an SVG drawing to this file")
    sp.add_argument("--window", type=int, default=1, help="k for a k x k block of fundamental domains in the SVG")
    sp.add_argument("--all", action="store_true", help="check the whole built-in corpus")
    sp.add_argument("--max-size", type=int, default=3, help="largest family size with --all")
    bounds(sp)
    sp.set_defaults(func=cmd_check)

    sp = model_cmd("matchings", "enumerate perfect matchings")
    sp.add_argument("--count-only", action="store_true", help="print only the number of matchings")
    sp.set_defaults(func=cmd_matchings)

    model_cmd("zigzag", "list zigzag paths with their homology classes").set_defaults(func=cmd_zigzag)
    model_cmd("quiver", "print the dual quiver and its relations").set_defaults(func=cmd_quiver)

    sp = model_cmd("counterexample", "search for weakly equivalent but inequivalent paths")
    bounds(sp)
    sp.set_defaults(func=cmd_counterexample)

    sp = sub.add_parser("corpus", help="list, show or build corpus models")
    sp.add_argument("action", choices=("list", "show", "build"))
    sp.add_argument("args", nargs="*", help="fixture name for show; family M N for build")
    sp.add_argument("--json", action="store_true", help="emit a JSON report")
    sp.set_defaults(func=cmd_corpus)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "window", 1) < 1:
        print("dimerlab: error: --window must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except CliError as exc:
        if getattr(args, "json", False):
            body = {"error": str(exc), **_clean(exc.report)}
            print(json.dumps(envelope(args.command, body, time.perf_counter()), indent=2, sort_keys=True))
        print(f"dimerlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, KeyError, OSError) as exc:
        print(f"dimerlab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
