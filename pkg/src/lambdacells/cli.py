"""Command-line front end.

Exit codes: 0 for a successful run with a positive outcome, 1 for a
successful run with a negative verdict (violations found, no filler, not
convertible or undecided, no normal form within budget), 2 for any error
while reading or constructing (syntax, ill-shaped cells, usage).
"""

from __future__ import annotations

import argparse
import sys

from .terms import ParseError, parse_term, print_term, term_key
from .reduction import normal_form, reduction_graph
from .cells import (
    CellError,
    Context,
    EMPTY,
    boundary,
    collapse,
    dim,
    parse_cell,
    parse_context,
    print_cell,
    well_formed,
)
from .theory import build_beta_square, build_eta_square, convertible, search_filler

__all__ = ["main"]


def _read_input(expr: str | None, path: str | None) -> str:
    if (expr is None) == (path is None):
        raise CellError("give exactly one input: -e EXPR or a file (use '-' for stdin)")
    if expr is not None:
        return expr
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _load_ctx(path: str | None) -> Context:
    if path is None:
        return EMPTY
    with open(path, encoding="utf-8") as handle:
        return parse_context(handle.read())


def _yesno(flag: bool) -> str:
    return "yes" if flag else "no"


def _cmd_parse(args) -> int:
    term = parse_term(_read_input(args.expr, args.file))
    if args.format == "keys":
        print(f"term: {print_term(term)}")
    else:
        print(print_term(term))
    return 0


def _cmd_normalize(args) -> int:
    term = parse_term(_read_input(args.expr, args.file))
    result = normal_form(term, max_steps=args.max_steps)
    if args.format == "keys":
        print(f"term: {print_term(result.term)}")
        print(f"steps: {result.steps}")
        print(f"complete: {_yesno(result.complete)}")
        return 0 if result.complete else 1
    if result.complete:
        print(print_term(result.term))
        return 0
    print(f"diverged after {result.steps} steps: {print_term(result.term)}")
    return 1


def _cmd_graph(args) -> int:
    term = parse_term(_read_input(args.expr, args.file))
    graph = reduction_graph(term, max_nodes=args.max_nodes, max_depth=args.max_depth)
    index = {term_key(node): i for i, node in enumerate(graph.nodes)}
    print(f"nodes: {len(graph.nodes)}")
    print(f"edges: {len(graph.edges)}")
    print(f"truncated: {_yesno(graph.truncated)}")
    node_label = "node-{}" if args.format == "keys" else "n{}"
    for i, node in enumerate(graph.nodes):
        print(f"{node_label.format(i)}: {print_term(node)}")
    for k, (s, pos, t) in enumerate(graph.edges):
        i, j = index[term_key(s)], index[term_key(t)]
        if args.format == "keys":
            print(f"edge-{k}: n{i} {pos} n{j}")
        else:
            print(f"n{i} -{pos}-> n{j}")
    return 0


def _cmd_check(args) -> int:
    ctx = _load_ctx(args.ctx)
    cell = parse_cell(_read_input(args.expr, args.file), ctx)
    violations = well_formed(cell, ctx)
    if args.format == "keys":
        print(f"ok: {_yesno(not violations)}")
        for k, v in enumerate(violations):
            print(f"violation-{k}: {v}")
    else:
        if not violations:
            print("ok")
        for v in violations:
            print(f"violation {v}")
    return 0 if not violations else 1


def _cmd_boundary(args) -> int:
    ctx = _load_ctx(args.ctx)
    cell = parse_cell(_read_input(args.expr, args.file), ctx)
    s, t = boundary(cell, ctx)
    print(f"src: {print_cell(collapse(s), ctx)}")
    print(f"tgt: {print_cell(collapse(t), ctx)}")
    return 0


def _cmd_square(args) -> int:
    ctx = _load_ctx(args.ctx)
    if args.kind == "beta":
        if args.term is None or args.var is None:
            raise CellError("square beta needs --term and --var")
        body = parse_cell(args.term, ctx)
        moving = parse_cell(args.path, ctx)
        info = ctx.lookup(args.var)
        bd = info[1] if info is not None else None
        spec, filler = build_beta_square(body, args.var, moving, ctx, binder_boundary=bd)
    else:
        if args.binder is None:
            raise CellError("square eta needs --binder")
        moving = parse_cell(args.path, ctx)
        spec, filler = build_eta_square(moving, args.binder, ctx)
    for label, cell in [
        ("top-left", spec.top_left), ("top-right", spec.top_right),
        ("bottom-left", spec.bottom_left), ("bottom-right", spec.bottom_right),
        ("top", spec.top), ("right", spec.right),
        ("left", spec.left), ("bottom", spec.bottom),
        ("filler", filler),
    ]:
        print(f"{label}: {print_cell(collapse(cell), ctx)}")
    return 0


def _cmd_fill(args) -> int:
    ctx = _load_ctx(args.ctx)
    a = parse_cell(args.src, ctx)
    b = parse_cell(args.tgt, ctx)
    report = search_filler(a, b, ctx, depth_bound=args.depth, size_bound=args.size)
    if args.format == "keys":
        print(f"found: {_yesno(report.found)}")
        print(f"depth: {report.depth}")
        if report.found:
            print(f"filler: {print_cell(collapse(report.filler), ctx)}")
        print(f"explored: {report.explored}")
    else:
        if report.found:
            print(f"found (depth {report.depth})")
            print(f"filler: {print_cell(collapse(report.filler), ctx)}")
        else:
            print(f"not found (depth {report.depth})")
        print(f"explored: {report.explored}")
    return 0 if report.found else 1


def _cmd_convert(args) -> int:
    texts = list(args.expr or [])
    for path in args.files:
        if path == "-":
            texts.append(sys.stdin.read())
        else:
            with open(path, encoding="utf-8") as handle:
                texts.append(handle.read())
    if len(texts) != 2:
        raise CellError("convert needs exactly two terms")
    m, n = parse_term(texts[0]), parse_term(texts[1])
    outcome = convertible(m, n, budget=args.budget)
    print(f"convertible: {outcome.verdict}")
    for w in outcome.witnesses:
        print(f"witness: {print_cell(collapse(w))}")
    return 0 if outcome.verdict == "yes" else 1


def _add_input_args(sub) -> None:
    sub.add_argument("-e", "--expr", metavar="EXPR", help="literal input text")
    sub.add_argument("file", nargs="?", help="input file, or '-' for stdin")
    sub.add_argument("--format", choices=("plain", "keys"), default="plain")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambdacells",
        description="lambda-terms, reduction, and dimension-indexed conversion cells",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("parse", help="parse a term and print it back")
    _add_input_args(p)
    p.set_defaults(run=_cmd_parse)

    p = subs.add_parser("normalize", help="reduce leftmost-outermost to normal form")
    _add_input_args(p)
    p.add_argument("--max-steps", type=int, default=200)
    p.set_defaults(run=_cmd_normalize)

    p = subs.add_parser("graph", help="breadth-first reduction graph of a term")
    _add_input_args(p)
    p.add_argument("--max-nodes", type=int, default=200)
    p.add_argument("--max-depth", type=int, default=30)
    p.set_defaults(run=_cmd_graph)

    p = subs.add_parser("check", help="list well-formedness violations of a cell")
    _add_input_args(p)
    p.add_argument("--ctx", metavar="FILE", help="path-variable declarations")
    p.set_defaults(run=_cmd_check)

    p = subs.add_parser("boundary", help="source and target of a cell")
    _add_input_args(p)
    p.add_argument("--ctx", metavar="FILE")
    p.set_defaults(run=_cmd_boundary)

    p = subs.add_parser("square", help="build an interchange square and its filler")
    p.add_argument("kind", choices=("beta", "eta"))
    p.add_argument("--term", metavar="CELL", help="abstraction body (beta)")
    p.add_argument("--var", metavar="NAME", help="abstraction binder (beta)")
    p.add_argument("--binder", metavar="NAME", help="expansion binder (eta)")
    p.add_argument("--path", metavar="CELL", required=True, help="the moving cell")
    p.add_argument("--ctx", metavar="FILE")
    p.add_argument("--format", choices=("plain", "keys"), default="plain")
    p.set_defaults(run=_cmd_square)

    p = subs.add_parser("fill", help="search for a filler between parallel cells")
    p.add_argument("--from", dest="src", metavar="CELL", required=True)
    p.add_argument("--to", dest="tgt", metavar="CELL", required=True)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--size", type=int, default=40)
    p.add_argument("--ctx", metavar="FILE")
    p.add_argument("--format", choices=("plain", "keys"), default="plain")
    p.set_defaults(run=_cmd_fill)

    p = subs.add_parser("convert", help="decide convertibility of two terms with witnesses")
    p.add_argument("-e", "--expr", action="append", metavar="TERM")
    p.add_argument("files", nargs="*", help="term files, or '-' for stdin")
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--format", choices=("plain", "keys"), default="plain")
    p.set_defaults(run=_cmd_convert)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    try:
        return args.run(args)
    except (ParseError, CellError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
