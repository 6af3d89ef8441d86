"""Higher operations on conversion cells.

This module packages the step constructors into checked operations
(:func:`beta_contract`, :func:`eta_contract`), builds the interchange
squares that relate a reduction to a conversion moving through it,
normalises the groupoid layer of a cell (:func:`canonicalize`), searches
for a filler between two parallel cells, and decides term convertibility
with explicit cell witnesses.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .terms import Abs, App, Term, Var, term_key
from .reduction import RedexPosition, reduction_graph, step_at
from .cells import (
    Base,
    BetaStep,
    Boundary,
    Cell,
    CellAbs,
    CellApp,
    CellError,
    Concat,
    Context,
    Degen,
    EMPTY,
    EtaStep,
    Inv,
    PathVar,
    Refl,
    _binder_dim,
    _check_declared,
    _redex_parts,
    abs_cell,
    app_cell,
    boundary,
    cell_key,
    cell_size,
    collapse,
    dim,
    free_names,
    path_subst,
    src,
    tgt,
    well_formed,
)

__all__ = [
    "SquareSpec",
    "SearchReport",
    "Convertibility",
    "beta_contract",
    "eta_contract",
    "step_cell",
    "build_beta_square",
    "build_eta_square",
    "canonicalize",
    "search_filler",
    "convertible",
]


@dataclass(frozen=True, slots=True)
class SquareSpec:
    """The four corners and four edges of an interchange square.  The
    filler runs from ``top ; right`` to ``left ; bottom``."""

    top_left: Cell
    top_right: Cell
    bottom_left: Cell
    bottom_right: Cell
    top: Cell
    bottom: Cell
    left: Cell
    right: Cell


@dataclass(frozen=True, slots=True)
class SearchReport:
    """Outcome of a filler search.  When ``found``, the filler is a
    well-formed cell one dimension up whose endpoints are the two inputs
    up to canonical form.  ``explored`` counts the step applications that
    matched a frontier cell; ``depth`` is the discovery depth, or the
    exhausted bound."""

    found: bool
    filler: Cell | None
    explored: int
    depth: int


@dataclass(frozen=True, slots=True)
class Convertibility:
    """Verdict of a conversion search between two terms.  ``yes`` comes
    with every shortest witness cell; ``no`` is definitive (both
    reduction graphs were exhausted); ``unknown`` means a graph was
    truncated before the searches met."""

    verdict: str
    witnesses: tuple[Cell, ...]
    common: Term | None = None


def _require_well_formed(c: Cell, ctx: Context) -> None:
    vs = well_formed(c, ctx)
    if vs:
        raise CellError(str(vs[0]))


def beta_contract(app: Cell, ctx: Context = EMPTY) -> Cell:
    """The beta step contracting ``app``, which must apply an
    abstraction to an argument of the binder's own dimension."""
    _require_well_formed(app, ctx)
    _, _, declared, _, arg, k = _redex_parts(app, ctx)
    if k != 0:
        raise CellError("argument is one dimension above the binder; "
                        "a lifted redex makes a square, not a contraction")
    _check_declared(arg, declared, ctx)
    return BetaStep(app)


def eta_contract(body: Cell, binder: str, ctx: Context = EMPTY) -> Cell:
    """The eta step from ``lam binder. body binder`` to ``body``; the
    binder must be fresh for the body and the body must have the
    binder's dimension."""
    _require_well_formed(body, ctx)
    if binder in free_names(body):
        raise CellError(f"the body depends on the binder {binder}")
    info = ctx.lookup(binder)
    jt = info[0] if info is not None else 0
    if dim(body, ctx) != jt:
        raise CellError("body must have the binder's dimension; "
                        "a higher body makes a square, not a contraction")
    return EtaStep(body, binder)


def step_cell(t: Term, pos: RedexPosition) -> Cell:
    """The 1-cell performing one reduction of ``t`` at ``pos``,
    whiskered into place by application and abstraction congruences."""
    step_at(t, pos)  # validates the position

    def go(t: Term, i: int) -> Cell:
        if i == len(pos.path):
            if pos.kind == "beta":
                return BetaStep(Base(t))
            return EtaStep(Base(t.body.fun), t.binder)
        match pos.path[i]:
            case "fun":
                return app_cell(go(t.fun, i + 1), Base(t.arg))
            case "arg":
                return app_cell(Base(t.fun), go(t.arg, i + 1))
            case "body":
                return abs_cell(t.binder, None, go(t.body, i + 1))
        raise CellError(f"bad path segment {pos.path[i]!r}")

    return go(t, 0)


def build_beta_square(body: Term | Cell, binder: str, moving: Cell,
                      ctx: Context = EMPTY,
                      binder_boundary: Boundary | None = None) -> tuple[SquareSpec, Cell]:
    """Interchange square for beta: contracting ``(lam binder. body) m``
    commutes with moving ``m`` along the cell ``moving``.

    The filler's source is ``top ; right`` (contract first, then push the
    movement through the substitution) and its target is ``left ; bottom``
    (move inside the argument first, then contract).  With a dimension-0
    binder the argument endpoints are terms; with ``binder_boundary`` the
    same construction works one dimension up.
    """
    body_cell = Base(body) if isinstance(body, Term) else body
    j = _binder_dim(binder_boundary, ctx)
    if binder_boundary is not None:
        inner = ctx.declare(binder, binder_boundary)
        if dim(body_cell, inner) != j:
            raise CellError("abstraction body must have the binder's dimension")
    if dim(moving, ctx) != j + 1:
        raise CellError("the moving cell must be one dimension above the binder")
    lam = abs_cell(binder, binder_boundary, body_cell)
    filler = BetaStep(app_cell(lam, moving, ctx))
    _require_well_formed(filler, ctx)
    m1, m2 = boundary(moving, ctx)
    top = BetaStep(app_cell(lam, m1, ctx))
    bottom = BetaStep(app_cell(lam, m2, ctx))
    left = app_cell(lam, moving, ctx)
    right = path_subst(body_cell, binder, moving, ctx, binder_boundary)
    spec = SquareSpec(
        top_left=src(top, ctx), top_right=tgt(top, ctx),
        bottom_left=src(bottom, ctx), bottom_right=tgt(bottom, ctx),
        top=top, bottom=bottom, left=left, right=right,
    )
    return spec, filler


def build_eta_square(moving: Cell, binder: str, ctx: Context = EMPTY) -> tuple[SquareSpec, Cell]:
    """Interchange square for eta: expanding each endpoint of ``moving``
    by the fresh ``binder`` commutes with ``moving`` itself."""
    if binder in free_names(moving):
        raise CellError(f"the binder {binder} must not occur in the moving cell")
    info = ctx.lookup(binder)
    jt, bd = info if info is not None else (0, None)
    if dim(moving, ctx) != jt + 1:
        raise CellError("the moving cell must be one dimension above the binder")
    filler = EtaStep(moving, binder)
    _require_well_formed(filler, ctx)
    r1, r2 = boundary(moving, ctx)
    top = EtaStep(r1, binder)
    bottom = EtaStep(r2, binder)
    arg = PathVar(binder) if jt >= 1 else Base(Var(binder))
    left = abs_cell(binder, bd, app_cell(moving, arg, ctx))
    spec = SquareSpec(
        top_left=src(top, ctx), top_right=tgt(top, ctx),
        bottom_left=src(bottom, ctx), bottom_right=tgt(bottom, ctx),
        top=top, bottom=bottom, left=left, right=moving,
    )
    return spec, filler


# --- canonical form ---------------------------------------------------------


def _idof(c: Cell, ctx: Context) -> Cell | None:
    """The cell ``c`` is an identity on, or None.  Covers Refl and Degen
    wrappers and their closure under application, abstraction,
    concatenation and inverse."""
    match c:
        case Refl(on):
            return on
        case Degen(of):
            return of
        case Inv(of):
            return _idof(of, ctx)
        case CellApp(fun, arg):
            uf = _idof(fun, ctx)
            ua = _idof(arg, ctx)
            if uf is not None and ua is not None:
                return app_cell(uf, ua, ctx)
            return None
        case CellAbs(binder, declared, body):
            ub = _idof(body, ctx.declare(binder, declared))
            if ub is not None:
                return abs_cell(binder, declared, ub)
            return None
        case Concat(first, second):
            u1 = _idof(first, ctx)
            u2 = _idof(second, ctx)
            if u1 is not None and u2 is not None and cell_key(u1) == cell_key(u2):
                return u1
            return None
    return None


def _spine(c: Cell) -> list[Cell]:
    if isinstance(c, Concat):
        return _spine(c.first) + _spine(c.second)
    return [c]


def _cancels(a: Cell, b: Cell) -> bool:
    if isinstance(b, Inv) and cell_key(b.of) == cell_key(a):
        return True
    if isinstance(a, Inv) and cell_key(a.of) == cell_key(b):
        return True
    return False


def canonicalize(c: Cell, ctx: Context = EMPTY) -> Cell:
    """Normalise the groupoid layer of ``c``: concatenations are
    flattened to the right, identity-shaped segments are dropped, double
    inverses vanish, inverses distribute over concatenation, and adjacent
    mutually inverse segments cancel.  Step cells, applications and
    abstractions are left alone.  The boundary is preserved and the
    result is a fixed point."""
    match c:
        case Refl(on):
            return Refl(canonicalize(on, ctx))
        case Degen(of):
            return Degen(canonicalize(of, ctx))
        case Inv(of):
            p = canonicalize(of, ctx)
            if isinstance(p, Inv):
                return p.of
            if isinstance(p, Concat):
                return canonicalize(Concat(Inv(p.second), Inv(p.first)), ctx)
            if _idof(p, ctx) is not None:
                return p
            return Inv(p)
        case Concat(_, _):
            segs = [s for part in _spine(c) for s in _spine(canonicalize(part, ctx))]
            kept: list[Cell] = []
            for s in segs:
                if _idof(s, ctx) is not None:
                    continue
                if kept and _cancels(kept[-1], s):
                    kept.pop()
                    continue
                kept.append(s)
            if not kept:
                return Refl(canonicalize(src(c, ctx), ctx))
            out = kept[-1]
            for s in reversed(kept[:-1]):
                out = Concat(s, out)
            return out
        case _:
            return c


# --- filler search ----------------------------------------------------------


def _subterms(t: Term):
    yield t
    match t:
        case App(fun, arg):
            yield from _subterms(fun)
            yield from _subterms(arg)
        case Abs(_, body):
            yield from _subterms(body)


def _material(c: Cell):
    """Every subcell of ``c``, plus every subterm of every embedded term
    as a Base cell.  This is the stock the search builds its candidate
    steps from."""
    yield c
    match c:
        case Base(t):
            for s in _subterms(t):
                yield Base(s)
        case PathVar(_):
            pass
        case Refl(on):
            yield from _material(on)
        case Degen(of) | Inv(of):
            yield from _material(of)
        case Concat(first, second):
            yield from _material(first)
            yield from _material(second)
        case CellApp(fun, arg):
            yield from _material(fun)
            yield from _material(arg)
        case CellAbs(_, declared, body, ends):
            for bd in (declared, ends):
                if bd is not None:
                    yield from _material(bd.source)
                    yield from _material(bd.target)
            yield from _material(body)
        case BetaStep(redex):
            yield from _material(redex)
        case EtaStep(body, _):
            yield from _material(body)


def _abstraction_shaped(c: Cell) -> bool:
    cc = collapse(c)
    if isinstance(cc, Base):
        return isinstance(cc.term, Abs)
    return isinstance(cc, CellAbs)


def _atoms(cells: list[Cell], n: int, ctx: Context, size_bound: int) -> list[Cell]:
    """Candidate (n+1)-steps assembled from the given stock: beta steps
    over redex-shaped n-cells, beta steps over fresh applications of
    abstraction-shaped stock to n-cells, eta steps over n-cells, and the
    inverses of all of those."""
    stock: dict = {}
    for c in cells:
        try:
            stock.setdefault(cell_key(c), c)
        except CellError:
            continue
    items = list(stock.values())
    level = []
    for c in items:
        try:
            if dim(c, ctx) == n:
                level.append(c)
        except CellError:
            continue
    abstractions = [c for c in items if _abstraction_shaped(c)]

    fresh = "w"
    taken = set()
    for c in items:
        taken |= free_names(c)
    taken |= set(ctx.names())
    while fresh in taken:
        fresh = "_" + fresh

    candidates: list[Cell] = []
    for x in level:
        candidates.append(BetaStep(x))
    for a in abstractions:
        try:
            if dim(a, ctx) > n:
                continue
        except CellError:
            continue
        for m in level:
            candidates.append(BetaStep(app_cell(a, m, ctx)))
    binders = [fresh] + [name for name, d, _ in ctx.entries if d in (n - 1, n)]
    for e in level:
        for b in binders:
            if b in free_names(e):
                continue
            candidates.append(EtaStep(e, b))

    out: dict = {}
    for cand in candidates:
        if cell_size(cand) > size_bound:
            continue
        if well_formed(cand, ctx):
            continue
        out.setdefault(cell_key(cand), cand)
        inv = Inv(cand)
        if cell_size(inv) <= size_bound:
            out.setdefault(cell_key(inv), inv)
    atoms = list(out.values())
    atoms.sort(key=lambda c: (cell_size(c), repr(cell_key(c))))
    return atoms


def search_filler(a: Cell, b: Cell, ctx: Context = EMPTY,
                  depth_bound: int = 4, size_bound: int = 40) -> SearchReport:
    """Bounded search for a filler one dimension above the parallel cells
    ``a`` and ``b``.

    States are cells reached from ``a`` (or its canonical form) by
    whole-cell steps; each chain link matches its predecessor exactly, so
    a found filler is well-formed as written.  The goal is reaching ``b``
    up to canonical form.  For dimension-0 inputs this is conversion
    search between the two terms.
    """
    da, db = dim(a, ctx), dim(b, ctx)
    if da != db:
        raise CellError(f"cells of dimensions {da} and {db} are not parallel")
    if da >= 1:
        if not (cell_key(src(a, ctx)) == cell_key(src(b, ctx))
                and cell_key(tgt(a, ctx)) == cell_key(tgt(b, ctx))):
            raise CellError("cells are not parallel")
    _require_well_formed(a, ctx)
    _require_well_formed(b, ctx)

    if da == 0:
        ma, mb = collapse(a), collapse(b)
        conv = convertible(ma.term, mb.term)
        if conv.verdict == "yes":
            return SearchReport(True, conv.witnesses[0], 0, 0)
        return SearchReport(False, None, 0, depth_bound)

    ca = canonicalize(a, ctx)
    cb = canonicalize(b, ctx)
    goal = cell_key(cb)
    if cell_key(ca) == goal:
        filler = Refl(a if cell_key(a) == goal else ca)
        return SearchReport(True, filler, 0, 0)

    stock = list(_material(a)) + list(_material(b)) + list(_material(ca)) + list(_material(cb))
    atoms = _atoms(stock, da, ctx, size_bound)
    moves = []
    for at in atoms:
        s, t = boundary(at, ctx)
        moves.append((cell_key(s), at, cell_key(t), cell_key(canonicalize(t, ctx))))

    seeds = [a]
    if cell_key(ca) != cell_key(a):
        seeds.append(ca)
    frontier = [(cell_key(s), []) for s in seeds]
    visited = {k for k, _ in frontier}
    explored = 0
    for depth in range(1, depth_bound + 1):
        nxt = []
        for state_key, chain in frontier:
            for move_src, at, move_tgt, move_cano in moves:
                if move_src != state_key:
                    continue
                explored += 1
                new_chain = chain + [at]
                if move_cano == goal:
                    filler = new_chain[-1]
                    for seg in reversed(new_chain[:-1]):
                        filler = Concat(seg, filler)
                    return SearchReport(True, filler, explored, depth)
                if move_tgt not in visited:
                    visited.add(move_tgt)
                    nxt.append((move_tgt, new_chain))
        if not nxt:
            break
        frontier = nxt
    return SearchReport(False, None, explored, depth_bound)


# --- convertibility ---------------------------------------------------------

_WITNESS_CAP = 16
_PATHS_PER_SIDE = 8


def _shortest_paths(graph, target_key):
    """All shortest edge paths from the graph root to the node with the
    given key, in discovery order, capped."""
    keys = [term_key(n) for n in graph.nodes]
    index = {k: i for i, k in enumerate(keys)}
    adj: dict[int, list[tuple[RedexPosition, int]]] = {i: [] for i in range(len(keys))}
    for s, pos, t in graph.edges:
        adj[index[term_key(s)]].append((pos, index[term_key(t)]))
    dist = {0: 0}
    order = deque([0])
    while order:
        u = order.popleft()
        for _, v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                order.append(v)
    goal = index[target_key]
    if goal not in dist:
        return []
    paths: list[list[tuple[int, RedexPosition]]] = []

    def extend(u, acc):
        if len(paths) >= _PATHS_PER_SIDE:
            return
        if u == goal:
            paths.append(acc)
            return
        for pos, v in adj[u]:
            if v in dist and dist[v] == dist[u] + 1:
                extend(v, acc + [(u, pos)])

    extend(0, [])
    return [[(graph.nodes[u], pos) for u, pos in p] for p in paths]


def convertible(m: Term, n: Term, budget: int = 200) -> Convertibility:
    """Search both reduction graphs for a common reduct.  ``yes`` returns
    every shortest witness cell from ``m`` to ``n``; ``no`` is only
    reported when both graphs were fully explored."""
    ga = reduction_graph(m, max_nodes=budget, max_depth=budget)
    gb = reduction_graph(n, max_nodes=budget, max_depth=budget)
    gb_keys = {term_key(t) for t in gb.nodes}
    meet_key = None
    for node in ga.nodes:
        k = term_key(node)
        if k in gb_keys:
            meet_key = k
            break
    if meet_key is None:
        verdict = "unknown" if ga.truncated or gb.truncated else "no"
        return Convertibility(verdict, ())
    common = next(node for node in gb.nodes if term_key(node) == meet_key)

    fwd = _shortest_paths(ga, meet_key)
    bwd = _shortest_paths(gb, meet_key)
    witnesses: dict = {}
    for fp in fwd:
        for bp in bwd:
            parts = [step_cell(t, pos) for t, pos in fp]
            parts += [Inv(step_cell(t, pos)) for t, pos in reversed(bp)]
            if not parts:
                w: Cell = Refl(Base(m))
            else:
                w = parts[-1]
                for seg in reversed(parts[:-1]):
                    w = Concat(seg, w)
            witnesses.setdefault(cell_key(w), w)
            if len(witnesses) >= _WITNESS_CAP:
                break
        if len(witnesses) >= _WITNESS_CAP:
            break
    return Convertibility("yes", tuple(witnesses.values()), common)
