"""One-step and multi-step beta/eta reduction.

Positions address subterms by paths of ``fun``/``arg``/``body`` steps.
Redexes are listed in leftmost-outermost order, which makes every
operation here deterministic: normalisation always picks the first
redex, and the reduction graph explores breadth-first in that order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import Abs, App, Term, Var, free_vars, subst, term_key

__all__ = [
    "RedexPosition",
    "Normalization",
    "ReductionGraph",
    "RedexError",
    "redex_positions",
    "step_at",
    "normal_form",
    "reduction_graph",
    "joinable",
    "enumerate_terms",
]


@dataclass(frozen=True, slots=True)
class RedexPosition:
    """A redex occurrence: the path from the root plus the rule kind."""

    path: tuple[str, ...]
    kind: str  # "beta" | "eta"

    def __str__(self) -> str:
        at = ".".join(self.path) if self.path else "root"
        return f"{self.kind}@{at}"


class RedexError(ValueError):
    pass


def _is_eta(t: Term) -> bool:
    match t:
        case Abs(binder, App(fun, Var(name))):
            return name == binder and binder not in free_vars(fun)
    return False


def redex_positions(t: Term) -> list[RedexPosition]:
    """All redex occurrences in leftmost-outermost order.

    A node is visited before its children and the operator side before
    the operand side, so the head redex (if any) comes first.
    """
    out: list[RedexPosition] = []

    def walk(t: Term, path: tuple[str, ...]) -> None:
        match t:
            case App(fun, arg):
                if isinstance(fun, Abs):
                    out.append(RedexPosition(path, "beta"))
                walk(fun, path + ("fun",))
                walk(arg, path + ("arg",))
            case Abs(_, body):
                if _is_eta(t):
                    out.append(RedexPosition(path, "eta"))
                walk(body, path + ("body",))

    walk(t, ())
    return out


def step_at(t: Term, pos: RedexPosition) -> Term:
    """Contract the redex at ``pos``.  Raises :class:`RedexError` when the
    path does not lead to a redex of the stated kind."""

    def go(t: Term, i: int) -> Term:
        if i == len(pos.path):
            if pos.kind == "beta":
                match t:
                    case App(Abs(binder, body), arg):
                        return subst(body, binder, arg)
                raise RedexError(f"no beta-redex at {pos}")
            if pos.kind == "eta":
                if _is_eta(t):
                    return t.body.fun  # type: ignore[union-attr]
                raise RedexError(f"no eta-redex at {pos}")
            raise RedexError(f"unknown redex kind {pos.kind!r}")
        step = pos.path[i]
        match t, step:
            case App(fun, arg), "fun":
                return App(go(fun, i + 1), arg)
            case App(fun, arg), "arg":
                return App(fun, go(arg, i + 1))
            case Abs(binder, body), "body":
                return Abs(binder, go(body, i + 1))
        raise RedexError(f"position {pos} does not exist in the term")

    return go(t, 0)


@dataclass(frozen=True, slots=True)
class Normalization:
    """Outcome of normal-order evaluation.

    ``complete`` is False when the step budget ran out; ``term`` then
    holds the last term reached rather than a normal form.
    """

    term: Term
    steps: int
    complete: bool


def normal_form(t: Term, max_steps: int = 200) -> Normalization:
    """Normal-order (leftmost-outermost) normalisation under a step budget."""
    steps = 0
    while steps < max_steps:
        positions = redex_positions(t)
        if not positions:
            return Normalization(t, steps, True)
        t = step_at(t, positions[0])
        steps += 1
    if not redex_positions(t):
        return Normalization(t, steps, True)
    return Normalization(t, steps, False)


@dataclass(frozen=True, slots=True)
class ReductionGraph:
    """Closure of a term under one-step reduction, up to alpha.

    ``nodes`` holds one representative per alpha-class in discovery
    order (the root first).  ``edges`` are (source, position, target)
    triples over those representatives.  ``truncated`` is set when the
    node or depth budget cut the closure short.
    """

    root: Term
    nodes: tuple[Term, ...]
    edges: tuple[tuple[Term, RedexPosition, Term], ...]
    truncated: bool


def reduction_graph(t: Term, max_nodes: int = 200, max_depth: int = 30) -> ReductionGraph:
    seen: dict[object, Term] = {term_key(t): t}
    nodes: list[Term] = [t]
    edges: list[tuple[Term, RedexPosition, Term]] = []
    truncated = False
    frontier: list[Term] = [t]
    depth = 0
    while frontier:
        if depth >= max_depth:
            if any(redex_positions(u) for u in frontier):
                truncated = True
            break
        next_frontier: list[Term] = []
        for source in frontier:
            for pos in redex_positions(source):
                target = step_at(source, pos)
                key = term_key(target)
                rep = seen.get(key)
                if rep is None:
                    if len(nodes) >= max_nodes:
                        truncated = True
                        continue
                    seen[key] = target
                    nodes.append(target)
                    next_frontier.append(target)
                    rep = target
                edges.append((source, pos, rep))
        frontier = next_frontier
        depth += 1
    return ReductionGraph(t, tuple(nodes), tuple(edges), truncated)


def joinable(a: Term, b: Term, budget: int = 200) -> bool:
    """Whether ``a`` and ``b`` reduce to a common term within the budget
    (applied as both the node and depth limit of each reduction graph)."""
    ga = reduction_graph(a, max_nodes=budget, max_depth=budget)
    keys = {term_key(n) for n in ga.nodes}
    gb = reduction_graph(b, max_nodes=budget, max_depth=budget)
    return any(term_key(n) in keys for n in gb.nodes)


def _binder_name(depth: int, pool: tuple[str, ...]) -> str:
    name = f"v{depth}"
    while name in pool:
        name = "_" + name
    return name


def enumerate_terms(max_size: int, pool: list[str] | tuple[str, ...]):
    """Yield every term of size at most ``max_size`` over the given free
    variables, one representative per alpha-class, smallest first.

    Size counts variable occurrences and binders.  Binders are named by
    nesting depth, which is what makes the stream duplicate-free: two
    alpha-equal trees come out structurally identical.  The order is
    deterministic (size, then variables, abstractions, applications).
    """
    pool = tuple(pool)
    levels: dict[tuple[int, int], list[Term]] = {}

    def level(size: int, depth: int) -> list[Term]:
        got = levels.get((size, depth))
        if got is not None:
            return got
        out: list[Term] = []
        if size == 1:
            out.extend(Var(name) for name in pool)
            out.extend(Var(_binder_name(i, pool)) for i in range(depth))
        if size >= 2:
            binder = _binder_name(depth, pool)
            out.extend(Abs(binder, body) for body in level(size - 1, depth + 1))
            for left in range(1, size):
                for fun in level(left, depth):
                    out.extend(App(fun, arg) for arg in level(size - left, depth))
        levels[(size, depth)] = out
        return out

    for size in range(1, max_size + 1):
        yield from level(size, 0)
