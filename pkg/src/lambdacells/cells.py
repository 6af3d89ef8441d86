"""Dimension-indexed conversion cells over lambda-terms.

A cell of dimension 0 wraps a plain term.  A cell of dimension n+1
relates two parallel n-cells, its source and target.  The constructors
are the syntax of conversions: single beta/eta steps, inverses,
concatenations, applications, abstractions over term or path variables,
and identity-shaped degeneracies.  This module computes dimensions and
boundaries, decides well-formedness, substitutes cells for variables,
and provides the concrete text syntax.

Boundary rules for the step constructors come in two flavours.  When a
redex ``(lam^j r. h) m`` applies an abstraction to an argument of the
binder's own dimension, the beta step runs from the redex to ``h`` with
``m`` substituted for ``r``.  When the argument is one dimension higher
(the abstraction is lifted with ``!``), the step is a square filler: its
source is "reduce at the argument's source, then substitute along the
argument", its target is "apply along the argument, then reduce at the
argument's target".  Arguments more than one dimension above the binder
are rejected: their would-be boundary is a composite the constructor set
cannot express.  Eta steps mirror the same two flavours.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    Abs,
    App,
    ParseError,
    Term,
    Var,
    free_vars,
    fresh_var,
    print_term,
    subst,
    term_key,
    term_size,
    tokenize,
)
from .terms import _TermParser, _print as _print_term_at

__all__ = [
    "Cell",
    "Base",
    "PathVar",
    "Refl",
    "Degen",
    "Inv",
    "Concat",
    "CellApp",
    "CellAbs",
    "BetaStep",
    "EtaStep",
    "Boundary",
    "Context",
    "EMPTY",
    "CellError",
    "BoundaryError",
    "Violation",
    "dim",
    "src",
    "tgt",
    "boundary",
    "degenerate",
    "var_cell",
    "app_cell",
    "abs_cell",
    "collapse",
    "cell_key",
    "cell_alpha_eq",
    "free_names",
    "cell_size",
    "path_subst",
    "well_formed",
    "parse_cell",
    "parse_context",
    "print_cell",
]


class CellError(ValueError):
    """A cell is ill-shaped for the requested operation."""


class BoundaryError(CellError):
    """Endpoints fail to match where the operation requires it."""


class Cell:
    """Marker base class for the cell shapes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Base(Cell):
    """A dimension-0 cell: a bare term."""

    term: Term


@dataclass(frozen=True, slots=True)
class PathVar(Cell):
    """A declared conversion variable; its dimension and boundary live in
    the context (or in the binder that introduced it)."""

    name: str


@dataclass(frozen=True, slots=True)
class Refl(Cell):
    """The empty conversion on a cell: source and target are the cell."""

    on: Cell


@dataclass(frozen=True, slots=True)
class Degen(Cell):
    """Degeneracy lift of a cell, written ``!c``.  Boundary behaviour is
    the same as Refl; the two are kept apart because one records an empty
    step sequence and the other a dimension adjustment."""

    of: Cell


@dataclass(frozen=True, slots=True)
class Inv(Cell):
    """The reversed conversion."""

    of: Cell


@dataclass(frozen=True, slots=True)
class Concat(Cell):
    """Sequential composition; the first cell's target must meet the
    second cell's source."""

    first: Cell
    second: Cell


@dataclass(frozen=True, slots=True)
class CellApp(Cell):
    """Application of cells.  Operands of unequal dimension are read as
    if the lower one were lifted with Degen; the smart constructor
    :func:`app_cell` materialises that lift."""

    fun: Cell
    arg: Cell


@dataclass(frozen=True, slots=True)
class Boundary:
    source: Cell
    target: Cell


@dataclass(frozen=True, slots=True)
class CellAbs(Cell):
    """Abstraction over a term variable (``declared`` is None) or over a
    path variable with the declared boundary.  ``ends`` optionally pins
    the abstraction's own endpoints, written ``as (a ~ b)``; it is only
    meaningful when the body has the binder's dimension and endpoint
    inference would otherwise have to guess."""

    binder: str
    declared: Boundary | None
    body: Cell
    ends: Boundary | None = None


@dataclass(frozen=True, slots=True)
class BetaStep(Cell):
    """One beta contraction; the subject must be a redex: an abstraction
    (possibly lifted) applied to an argument."""

    redex: Cell


@dataclass(frozen=True, slots=True)
class EtaStep(Cell):
    """One eta contraction: runs from ``lam binder. body binder`` to
    ``body``.  The binder must not occur in the body."""

    body: Cell
    binder: str


@dataclass(frozen=True, slots=True)
class Violation:
    """One well-formedness defect, located by a dotted field path."""

    where: str
    message: str

    def __str__(self) -> str:
        return f"at {self.where}: {self.message}"


@dataclass(frozen=True, slots=True)
class Context:
    """Ordered path-variable declarations.

    Each entry is (name, dimension, boundary); the boundary is None
    exactly for dimension-0 (term) declarations.  Extension returns a new
    context; later entries shadow earlier ones, which is how local
    binders are threaded through the checker.
    """

    entries: tuple[tuple[str, int, Boundary | None], ...] = ()

    def lookup(self, name: str) -> tuple[int, Boundary | None] | None:
        for entry, d, bd in reversed(self.entries):
            if entry == name:
                return d, bd
        return None

    def declare(self, name: str, bd: Boundary | None = None) -> "Context":
        d = 0 if bd is None else dim(bd.source, self) + 1
        return Context(self.entries + ((name, d, bd),))

    def names(self) -> tuple[str, ...]:
        return tuple(entry for entry, _, _ in self.entries)


EMPTY = Context()


def dim(c: Cell, ctx: Context = EMPTY) -> int:
    """Dimension of ``c``.  Raises :class:`CellError` on an unbound path
    variable."""
    match c:
        case Base(_):
            return 0
        case PathVar(name):
            info = ctx.lookup(name)
            if info is None:
                raise CellError(f"unbound path variable {name}")
            return info[0]
        case Refl(on):
            return dim(on, ctx) + 1
        case Degen(of):
            return dim(of, ctx) + 1
        case Inv(of):
            return dim(of, ctx)
        case Concat(first, second):
            return max(dim(first, ctx), dim(second, ctx))
        case CellApp(fun, arg):
            return max(dim(fun, ctx), dim(arg, ctx))
        case CellAbs(binder, declared, body):
            return dim(body, ctx.declare(binder, declared))
        case BetaStep(redex):
            return dim(redex, ctx) + 1
        case EtaStep(body, _):
            return dim(body, ctx) + 1
    raise TypeError(f"not a cell: {c!r}")


def free_names(c: Cell) -> frozenset[str]:
    """Free term variables and free path variables of ``c`` together.
    The two kinds share one namespace."""
    match c:
        case Base(t):
            return free_vars(t)
        case PathVar(name):
            return frozenset((name,))
        case Refl(on):
            return free_names(on)
        case Degen(of) | Inv(of):
            return free_names(of)
        case Concat(first, second):
            return free_names(first) | free_names(second)
        case CellApp(fun, arg):
            return free_names(fun) | free_names(arg)
        case CellAbs(binder, declared, body, ends):
            out = free_names(body) - {binder}
            for bd in (declared, ends):
                if bd is not None:
                    out |= free_names(bd.source) | free_names(bd.target)
            return out
        case BetaStep(redex):
            return free_names(redex)
        case EtaStep(body, binder):
            return free_names(body) - {binder}
    raise TypeError(f"not a cell: {c!r}")


def collapse(c: Cell) -> Cell:
    """Fold cells that are really terms back into Base: an application of
    two Base cells is a term application, an abstraction of a term binder
    over a Base body is a term abstraction.  Boundary computations return
    smart-constructed cells, so comparing through collapse makes term-level
    results meet their Base counterparts."""
    match c:
        case Base(_) | PathVar(_):
            return c
        case Refl(on):
            return Refl(collapse(on))
        case Degen(of):
            return Degen(collapse(of))
        case Inv(of):
            return Inv(collapse(of))
        case Concat(first, second):
            return Concat(collapse(first), collapse(second))
        case CellApp(fun, arg):
            cf, ca = collapse(fun), collapse(arg)
            if isinstance(cf, Base) and isinstance(ca, Base):
                return Base(App(cf.term, ca.term))
            return CellApp(cf, ca)
        case CellAbs(binder, declared, body, ends):
            cb = collapse(body)
            if declared is None and isinstance(cb, Base):
                return Base(Abs(binder, cb.term))
            cd = None if declared is None else Boundary(collapse(declared.source), collapse(declared.target))
            ce = None if ends is None else Boundary(collapse(ends.source), collapse(ends.target))
            return CellAbs(binder, cd, cb, ce)
        case BetaStep(redex):
            return BetaStep(collapse(redex))
        case EtaStep(body, binder):
            return EtaStep(collapse(body), binder)
    raise TypeError(f"not a cell: {c!r}")


def _key(c: Cell, env: dict[str, int], depth: int):
    match c:
        case Base(t):
            return ("base", term_key(t, env, depth))
        case PathVar(name):
            level = env.get(name)
            return ("pv", ("b", level)) if level is not None else ("pv", ("f", name))
        case Refl(on):
            return ("refl", _key(on, env, depth))
        case Degen(of):
            return ("degen", _key(of, env, depth))
        case Inv(of):
            return ("inv", _key(of, env, depth))
        case Concat(first, second):
            return ("concat", _key(first, env, depth), _key(second, env, depth))
        case CellApp(fun, arg):
            return ("capp", _key(fun, env, depth), _key(arg, env, depth))
        case CellAbs(binder, declared, body, ends):
            def bdkey(bd):
                if bd is None:
                    return None
                return (_key(bd.source, env, depth), _key(bd.target, env, depth))
            inner = {**env, binder: depth}
            return ("cabs", bdkey(declared), bdkey(ends), _key(body, inner, depth + 1))
        case BetaStep(redex):
            return ("bstep", _key(redex, env, depth))
        case EtaStep(body, binder):
            # The binder is bound (it may not occur in the body), so its
            # spelling does not matter for alpha comparison.
            return ("estep", _key(body, env, depth))
    raise TypeError(f"not a cell: {c!r}")


def cell_key(c: Cell):
    """Hashable form identical exactly for alpha-equal cells."""
    return _key(collapse(c), {}, 0)


def cell_alpha_eq(a: Cell, b: Cell) -> bool:
    return cell_key(a) == cell_key(b)


def cell_size(c: Cell) -> int:
    match c:
        case Base(t):
            return term_size(t)
        case PathVar(_):
            return 1
        case Refl(on):
            return 1 + cell_size(on)
        case Degen(of) | Inv(of):
            return 1 + cell_size(of)
        case Concat(first, second):
            return 1 + cell_size(first) + cell_size(second)
        case CellApp(fun, arg):
            return 1 + cell_size(fun) + cell_size(arg)
        case CellAbs(_, declared, body, ends):
            n = 1 + cell_size(body)
            for bd in (declared, ends):
                if bd is not None:
                    n += cell_size(bd.source) + cell_size(bd.target)
            return n
        case BetaStep(redex):
            return 1 + cell_size(redex)
        case EtaStep(body, _):
            return 1 + cell_size(body)
    raise TypeError(f"not a cell: {c!r}")


def _lift(c: Cell, k: int) -> Cell:
    for _ in range(k):
        c = Degen(c)
    return c


def _strip_lifts(c: Cell) -> tuple[Cell, int]:
    k = 0
    while isinstance(c, (Degen, Refl)):
        c = c.of if isinstance(c, Degen) else c.on
        k += 1
    return c, k


def var_cell(name: str, ctx: Context = EMPTY) -> Cell:
    """A variable as a cell: a path variable if declared at dimension
    at least 1, otherwise a term variable."""
    info = ctx.lookup(name)
    if info is not None and info[0] >= 1:
        return PathVar(name)
    return Base(Var(name))


def app_cell(fun: Cell, arg: Cell, ctx: Context = EMPTY) -> Cell:
    """Apply cells, materialising the degeneracy lift of the lower
    operand and folding term-level applications into Base."""
    if isinstance(fun, Base) and isinstance(arg, Base):
        return Base(App(fun.term, arg.term))
    df, da = dim(fun, ctx), dim(arg, ctx)
    if df < da:
        fun = _lift(fun, da - df)
    elif da < df:
        arg = _lift(arg, df - da)
    return CellApp(fun, arg)


def abs_cell(binder: str, declared: Boundary | None, body: Cell, ends: Boundary | None = None) -> Cell:
    """Abstract, folding a term binder over a Base body into Base."""
    if declared is None and ends is None and isinstance(body, Base):
        return Base(Abs(binder, body.term))
    return CellAbs(binder, declared, body, ends)


def degenerate(c: Cell) -> Cell:
    """The identity-shaped cell one dimension up: source and target are
    ``c`` itself."""
    return Degen(c)


def _rename_free(c: Cell, old: str, new: str) -> Cell:
    """Replace the free variable ``old`` (term or path) by ``new``.
    ``new`` must be fresh for ``c``."""
    match c:
        case Base(t):
            return Base(subst(t, old, Var(new)))
        case PathVar(name):
            return PathVar(new) if name == old else c
        case Refl(on):
            return Refl(_rename_free(on, old, new))
        case Degen(of):
            return Degen(_rename_free(of, old, new))
        case Inv(of):
            return Inv(_rename_free(of, old, new))
        case Concat(first, second):
            return Concat(_rename_free(first, old, new), _rename_free(second, old, new))
        case CellApp(fun, arg):
            return CellApp(_rename_free(fun, old, new), _rename_free(arg, old, new))
        case CellAbs(binder, declared, body, ends):
            def bdmap(bd):
                if bd is None:
                    return None
                return Boundary(_rename_free(bd.source, old, new), _rename_free(bd.target, old, new))
            if binder == old:
                return CellAbs(binder, bdmap(declared), body, bdmap(ends))
            return CellAbs(binder, bdmap(declared), _rename_free(body, old, new), bdmap(ends))
        case BetaStep(redex):
            return BetaStep(_rename_free(redex, old, new))
        case EtaStep(body, binder):
            if binder == old:
                return c
            return EtaStep(_rename_free(body, old, new), binder)
    raise TypeError(f"not a cell: {c!r}")


# --- boundaries ------------------------------------------------------------


def _binder_dim(declared: Boundary | None, ctx: Context) -> int:
    return 0 if declared is None else dim(declared.source, ctx) + 1


def _redex_parts(redex: Cell, ctx: Context):
    """Decompose a beta-step subject.

    Returns (abstraction, binder, declared, body, argument, mismatch)
    where mismatch is the argument's dimension minus the binder's.  For a
    dimension-0 subject the abstraction is the Base of the term lambda.
    Raises :class:`CellError` when the subject is not a redex or the
    mismatch is not 0 or 1.
    """
    rc = collapse(redex)
    if isinstance(rc, Base):
        t = rc.term
        if isinstance(t, App) and isinstance(t.fun, Abs):
            return Base(t.fun), t.fun.binder, None, Base(t.fun.body), Base(t.arg), 0
        raise CellError("subject of a beta step must be a redex")
    if not isinstance(rc, CellApp):
        raise CellError("subject of a beta step must be a redex")
    inner, _ = _strip_lifts(rc.fun)
    if isinstance(inner, Base) and isinstance(inner.term, Abs):
        binder, declared, body = inner.term.binder, None, Base(inner.term.body)
    elif isinstance(inner, CellAbs):
        binder, declared, body = inner.binder, inner.declared, inner.body
        j = _binder_dim(declared, ctx)
        if dim(body, ctx.declare(binder, declared)) != j:
            raise CellError("abstraction of a beta step must be uniform: "
                            "its body must have the binder's dimension")
    else:
        raise CellError("subject of a beta step must be a redex")
    j = _binder_dim(declared, ctx)
    k = dim(rc.arg, ctx) - j
    if k < 0:
        raise CellError("beta-step argument has lower dimension than the binder")
    if k > 1:
        raise CellError(f"beta-step argument exceeds the binder's dimension by {k}; "
                        "only 0 or 1 is expressible")
    return inner, binder, declared, body, rc.arg, k


def _check_declared(m: Cell, declared: Boundary | None, ctx: Context) -> None:
    if declared is None:
        return
    s, t = boundary(m, ctx)
    if not (cell_alpha_eq(s, declared.source) and cell_alpha_eq(t, declared.target)):
        raise BoundaryError("argument boundary does not match the binder's declaration")


def _infer_endpoint(side: Cell, want_arg: Cell, binder: str) -> Cell | None:
    s = collapse(side)
    if isinstance(s, CellApp):
        if cell_alpha_eq(s.arg, want_arg) and binder not in free_names(s.fun):
            return s.fun
        return None
    if isinstance(s, Base) and isinstance(s.term, App):
        w = collapse(want_arg)
        if isinstance(w, Base) and term_key(w.term) == term_key(s.term.arg) \
                and binder not in free_vars(s.term.fun):
            return Base(s.term.fun)
    return None


def boundary(c: Cell, ctx: Context = EMPTY) -> tuple[Cell, Cell]:
    """Source and target of ``c``.  Raises :class:`CellError` on a
    dimension-0 cell or an ill-shaped one."""
    match c:
        case Base(_):
            raise CellError("a dimension-0 cell has no boundary")
        case PathVar(name):
            info = ctx.lookup(name)
            if info is None:
                raise CellError(f"unbound path variable {name}")
            _, bd = info
            if bd is None:
                raise CellError(f"path variable {name} is declared at dimension 0")
            return bd.source, bd.target
        case Refl(on):
            return on, on
        case Degen(of):
            return of, of
        case Inv(of):
            s, t = boundary(of, ctx)
            return t, s
        case Concat(first, second):
            return boundary(first, ctx)[0], boundary(second, ctx)[1]
        case CellApp(fun, arg):
            n = max(dim(fun, ctx), dim(arg, ctx))
            if n == 0:
                raise CellError("a dimension-0 cell has no boundary")
            fun = _lift(fun, n - dim(fun, ctx))
            arg = _lift(arg, n - dim(arg, ctx))
            fs, ft = boundary(fun, ctx)
            xs, xt = boundary(arg, ctx)
            return app_cell(fs, xs, ctx), app_cell(ft, xt, ctx)
        case CellAbs(binder, declared, body, ends):
            inner = ctx.declare(binder, declared)
            db = dim(body, inner)
            j = _binder_dim(declared, ctx)
            if db == 0:
                raise CellError("a dimension-0 cell has no boundary")
            if db < j:
                raise CellError("abstraction body has lower dimension than the binder")
            if db > j:
                bs, bt = boundary(body, inner)
                return abs_cell(binder, declared, bs), abs_cell(binder, declared, bt)
            if ends is not None:
                return ends.source, ends.target
            bs, bt = boundary(body, inner)
            a = _infer_endpoint(bs, declared.source, binder)
            b = _infer_endpoint(bt, declared.target, binder)
            if a is None or b is None:
                raise CellError("cannot infer the abstraction's endpoints; "
                                "annotate with 'as (a ~ b)'")
            return a, b
        case BetaStep(redex):
            inner, binder, declared, body, arg, k = _redex_parts(redex, ctx)
            if k == 0:
                return redex, path_subst(body, binder, arg, ctx, declared)
            m1, m2 = boundary(arg, ctx)
            top = BetaStep(app_cell(inner, m1, ctx))
            bottom = BetaStep(app_cell(inner, m2, ctx))
            right = path_subst(body, binder, arg, ctx, declared)
            return Concat(top, right), Concat(redex, bottom)
        case EtaStep(body, binder):
            info = ctx.lookup(binder)
            jt, bd = info if info is not None else (0, None)
            de = dim(body, ctx)
            k = de - jt
            if k < 0:
                raise CellError("eta-step body has lower dimension than the binder")
            if k > 1:
                raise CellError(f"eta-step body exceeds the binder's dimension by {k}; "
                                "only 0 or 1 is expressible")
            arg = PathVar(binder) if jt >= 1 else Base(Var(binder))
            if k == 0:
                return abs_cell(binder, bd, app_cell(body, arg, ctx)), body
            e1, e2 = boundary(body, ctx)
            left = abs_cell(binder, bd, app_cell(body, arg, ctx))
            return Concat(EtaStep(e1, binder), body), Concat(left, EtaStep(e2, binder))
    raise TypeError(f"not a cell: {c!r}")


def src(c: Cell, ctx: Context = EMPTY) -> Cell:
    return boundary(c, ctx)[0]


def tgt(c: Cell, ctx: Context = EMPTY) -> Cell:
    return boundary(c, ctx)[1]


# --- path substitution -----------------------------------------------------


def path_subst(h: Cell, r: str, m: Cell, ctx: Context = EMPTY,
               declared: Boundary | None = None) -> Cell:
    """Substitute the cell ``m`` for the variable ``r`` in ``h``.

    ``declared`` is ``r``'s boundary (None for a term binder).  When
    ``m`` has exactly the declared dimension this is plain replacement,
    with the boundary checked against the declaration.  When ``m`` sits
    ``d`` dimensions higher, every occurrence of ``r`` becomes ``m`` and
    every maximal ``r``-free part is lifted ``d`` times, so the result is
    the congruence cell running along ``m``.
    """
    jr = _binder_dim(declared, ctx)
    dm = dim(m, ctx)
    d = dm - jr
    if d < 0:
        raise CellError("substituted cell has lower dimension than the variable")
    if d == 0:
        if declared is not None:
            _check_declared(m, declared, ctx)
            return _replace_path(h, r, m)
        mc = collapse(m)
        if not isinstance(mc, Base):
            raise CellError("dimension-0 substitution needs a term cell")
        return _subst_term_var(h, r, mc.term)
    if declared is not None:
        faces = [m]
        for _ in range(d):
            faces = [side for f in faces for side in boundary(f, ctx)]
        for f in faces:
            _check_declared(f, declared, ctx)
    return _congruence(h, r, m, d, ctx)


def _replace_path(h: Cell, r: str, m: Cell) -> Cell:
    avoid = free_names(m)
    match h:
        case PathVar(name):
            return m if name == r else h
        case Base(_):
            return h
        case Refl(on):
            return Refl(_replace_path(on, r, m))
        case Degen(of):
            return Degen(_replace_path(of, r, m))
        case Inv(of):
            return Inv(_replace_path(of, r, m))
        case Concat(first, second):
            return Concat(_replace_path(first, r, m), _replace_path(second, r, m))
        case CellApp(fun, arg):
            return CellApp(_replace_path(fun, r, m), _replace_path(arg, r, m))
        case CellAbs(binder, declared, body, ends):
            def bdmap(bd):
                if bd is None:
                    return None
                return Boundary(_replace_path(bd.source, r, m), _replace_path(bd.target, r, m))
            if binder == r:
                return CellAbs(binder, bdmap(declared), body, bdmap(ends))
            if binder in avoid and r in free_names(body):
                renamed = fresh_var(avoid | free_names(body) | {r}, binder)
                body = _rename_free(body, binder, renamed)
                binder = renamed
            return CellAbs(binder, bdmap(declared), _replace_path(body, r, m), bdmap(ends))
        case BetaStep(redex):
            return BetaStep(_replace_path(redex, r, m))
        case EtaStep(body, binder):
            if binder == r:
                return h
            if binder in avoid and r in free_names(body):
                renamed = fresh_var(avoid | free_names(body) | {r}, binder)
                return EtaStep(_replace_path(body, r, m), renamed)
            return EtaStep(_replace_path(body, r, m), binder)
    raise TypeError(f"not a cell: {h!r}")


def _subst_term_var(h: Cell, r: str, value: Term) -> Cell:
    match h:
        case Base(t):
            return Base(subst(t, r, value))
        case PathVar(_):
            return h
        case Refl(on):
            return Refl(_subst_term_var(on, r, value))
        case Degen(of):
            return Degen(_subst_term_var(of, r, value))
        case Inv(of):
            return Inv(_subst_term_var(of, r, value))
        case Concat(first, second):
            return Concat(_subst_term_var(first, r, value), _subst_term_var(second, r, value))
        case CellApp(fun, arg):
            return CellApp(_subst_term_var(fun, r, value), _subst_term_var(arg, r, value))
        case CellAbs(binder, declared, body, ends):
            def bdmap(bd):
                if bd is None:
                    return None
                return Boundary(_subst_term_var(bd.source, r, value), _subst_term_var(bd.target, r, value))
            if binder == r:
                return CellAbs(binder, bdmap(declared), body, bdmap(ends))
            if binder in free_vars(value) and r in free_names(body):
                renamed = fresh_var(free_vars(value) | free_names(body) | {r}, binder)
                body = _rename_free(body, binder, renamed)
                binder = renamed
            return CellAbs(binder, bdmap(declared), _subst_term_var(body, r, value), bdmap(ends))
        case BetaStep(redex):
            return BetaStep(_subst_term_var(redex, r, value))
        case EtaStep(body, binder):
            if binder == r:
                return h
            if binder in free_vars(value) and r in free_names(body):
                renamed = fresh_var(free_vars(value) | free_names(body) | {r}, binder)
                return EtaStep(_subst_term_var(body, r, value), renamed)
            return EtaStep(_subst_term_var(body, r, value), binder)
    raise TypeError(f"not a cell: {h!r}")


def _congruence(h: Cell, r: str, m: Cell, d: int, ctx: Context) -> Cell:
    avoid = free_names(m)

    def rec(c: Cell) -> Cell:
        if r not in free_names(c):
            return _lift(c, d)
        match c:
            case PathVar(name) if name == r:
                return m
            case Base(t):
                return rec_term(t)
            case Refl(on):
                return Refl(rec(on))
            case Degen(of):
                return Degen(rec(of))
            case Inv(of):
                return Inv(rec(of))
            case Concat(first, second):
                return Concat(rec(first), rec(second))
            case CellApp(fun, arg):
                return app_cell(rec(fun), rec(arg), ctx)
            case CellAbs(binder, declared, body, ends):
                for bd in (declared, ends):
                    if bd is not None and (r in free_names(bd.source) or r in free_names(bd.target)):
                        raise CellError("cannot lift a binder annotation along a substitution")
                if binder in avoid:
                    renamed = fresh_var(avoid | free_names(body) | {r}, binder)
                    body = _rename_free(body, binder, renamed)
                    binder = renamed
                return CellAbs(binder, declared, rec(body), None)
            case BetaStep(redex):
                return BetaStep(rec(redex))
            case EtaStep(body, binder):
                if binder in avoid:
                    renamed = fresh_var(avoid | free_names(body) | {r}, binder)
                    return EtaStep(rec(body), renamed)
                return EtaStep(rec(body), binder)
        raise TypeError(f"not a cell: {c!r}")

    def rec_term(t: Term) -> Cell:
        if r not in free_vars(t):
            return _lift(Base(t), d)
        match t:
            case Var(name) if name == r:
                return m
            case App(fun, arg):
                return app_cell(rec_term(fun), rec_term(arg), ctx)
            case Abs(binder, body):
                if binder in avoid:
                    renamed = fresh_var(avoid | free_vars(body) | {r}, binder)
                    body = subst(body, binder, Var(renamed))
                    binder = renamed
                return abs_cell(binder, None, rec_term(body))
        raise TypeError(f"not a term: {t!r}")

    return rec(h)


# --- well-formedness -------------------------------------------------------


def well_formed(c: Cell, ctx: Context = EMPTY) -> list[Violation]:
    """Every defect in ``c``, as data.  An empty list means the cell is
    well-formed: names resolve, concatenation endpoints meet, step
    subjects have the right shapes, declared boundaries match, and every
    cell of dimension 2 or more is globular."""
    out: list[Violation] = []

    def bad(where: str, message: str) -> None:
        out.append(Violation(where or "root", message))

    def walk(c: Cell, ctx: Context, where: str) -> bool:
        def sub(label: str) -> str:
            return f"{where}.{label}" if where else label

        ok = True
        match c:
            case Base(_):
                pass
            case PathVar(name):
                info = ctx.lookup(name)
                if info is None:
                    bad(where, f"unbound path variable {name}")
                    ok = False
                elif info[0] == 0:
                    bad(where, f"path variable {name} is declared at dimension 0")
                    ok = False
            case Refl(on):
                ok = walk(on, ctx, sub("of"))
            case Degen(of):
                ok = walk(of, ctx, sub("of"))
            case Inv(of):
                ok = walk(of, ctx, sub("of"))
                if ok and dim(of, ctx) == 0:
                    bad(where, "cannot reverse a dimension-0 cell")
                    ok = False
            case Concat(first, second):
                ok = walk(first, ctx, sub("first"))
                ok = walk(second, ctx, sub("second")) and ok
                if ok:
                    d1, d2 = dim(first, ctx), dim(second, ctx)
                    if d1 == 0 or d2 == 0:
                        bad(where, "cannot concatenate dimension-0 cells")
                        ok = False
                    elif d1 != d2:
                        bad(where, f"concatenation of unequal dimensions {d1} and {d2}")
                        ok = False
                    else:
                        try:
                            t1 = tgt(first, ctx)
                            s2 = src(second, ctx)
                        except CellError as e:
                            bad(where, str(e))
                            ok = False
                        else:
                            if not cell_alpha_eq(t1, s2):
                                bad(where, "endpoint mismatch: first ends at "
                                    f"{print_cell(collapse(t1), ctx)} but second starts at "
                                    f"{print_cell(collapse(s2), ctx)}")
                                ok = False
            case CellApp(fun, arg):
                ok = walk(fun, ctx, sub("fun"))
                ok = walk(arg, ctx, sub("arg")) and ok
            case CellAbs(binder, declared, body, ends):
                if declared is not None:
                    ok = walk(declared.source, ctx, sub("source"))
                    ok = walk(declared.target, ctx, sub("target")) and ok
                    if not ok:
                        return False
                    if not _parallel(declared.source, declared.target, ctx):
                        bad(where, "binder boundary is not a parallel pair")
                        return False
                inner = ctx.declare(binder, declared)
                ok = walk(body, inner, sub("body"))
                if ok:
                    j = _binder_dim(declared, ctx)
                    db = dim(body, inner)
                    if db < j:
                        bad(where, "abstraction body has lower dimension than the binder")
                        ok = False
                    elif db == j and j >= 1:
                        try:
                            bs, bt = boundary(body, inner)
                        except CellError as e:
                            bad(where, str(e))
                            return False
                        if ends is not None:
                            ok = walk(ends.source, ctx, sub("as-source"))
                            ok = walk(ends.target, ctx, sub("as-target")) and ok
                            if ok:
                                want_s = app_cell(ends.source, declared.source, ctx)
                                want_t = app_cell(ends.target, declared.target, ctx)
                                if not (cell_alpha_eq(bs, want_s) and cell_alpha_eq(bt, want_t)):
                                    bad(where, "'as' annotation does not match the body's endpoints")
                                    ok = False
                        else:
                            a = _infer_endpoint(bs, declared.source, binder)
                            b = _infer_endpoint(bt, declared.target, binder)
                            if a is None or b is None:
                                bad(where, "cannot infer the abstraction's endpoints; "
                                    "annotate with 'as (a ~ b)'")
                                ok = False
                    elif ends is not None:
                        bad(where, "'as' annotation requires a body of the binder's dimension")
                        ok = False
            case BetaStep(redex):
                ok = walk(redex, ctx, sub("redex"))
                if ok:
                    try:
                        _, binder, declared, body, arg, k = _redex_parts(redex, ctx)
                        if declared is not None:
                            faces = [arg]
                            for _ in range(k):
                                faces = [side for f in faces for side in boundary(f, ctx)]
                            for f in faces:
                                _check_declared(f, declared, ctx)
                    except CellError as e:
                        bad(where, str(e))
                        ok = False
            case EtaStep(body, binder):
                ok = walk(body, ctx, sub("body"))
                if ok:
                    if binder in free_names(body):
                        bad(where, f"the body depends on the binder {binder}")
                        ok = False
                    else:
                        info = ctx.lookup(binder)
                        jt = info[0] if info is not None else 0
                        k = dim(body, ctx) - jt
                        if k not in (0, 1):
                            bad(where, "eta-step body must have the binder's dimension "
                                "or exceed it by one")
                            ok = False
            case _:
                raise TypeError(f"not a cell: {c!r}")
        if ok and dim(c, ctx) >= 2:
            try:
                s, t = boundary(c, ctx)
                ss, st = boundary(s, ctx)
                ts, tt = boundary(t, ctx)
                if not (cell_alpha_eq(ss, ts) and cell_alpha_eq(st, tt)):
                    bad(where, "globularity violation: source and target are not parallel")
                    ok = False
            except CellError as e:
                bad(where, str(e))
                ok = False
        return ok

    def _parallel(a: Cell, b: Cell, ctx: Context) -> bool:
        da, db = dim(a, ctx), dim(b, ctx)
        if da != db:
            return False
        if da == 0:
            return True
        try:
            sa, ta = boundary(a, ctx)
            sb, tb = boundary(b, ctx)
        except CellError:
            return False
        return cell_alpha_eq(sa, sb) and cell_alpha_eq(ta, tb)

    walk(c, ctx, "")
    return out


# --- concrete syntax -------------------------------------------------------

_CELL_ATOM_STARTS = ("NAME", "LPAREN", "REFL", "BETA", "ETA")


class _CellParser(_TermParser):
    def cell(self, scope: Context) -> Cell:
        c = self.chain(scope)
        while self.peek().kind == "SEMI":
            self.next()
            c = Concat(c, self.chain(scope))
        return c

    def chain(self, scope: Context) -> Cell:
        c = self.bang(scope)
        while self.peek().kind == "AT":
            self.next()
            c = app_cell(c, self.bang(scope), scope)
        return c

    def bang(self, scope: Context) -> Cell:
        tok = self.peek()
        if tok.kind == "BANG":
            self.next()
            return Degen(self.bang(scope))
        if tok.kind in ("LAMBDA", "LAM", "LAMDIM"):
            return self.lamform(scope)
        return self.juxt(scope)

    def juxt(self, scope: Context) -> Cell:
        c = self.cell_postfix(scope)
        while self.peek().kind in _CELL_ATOM_STARTS:
            d = self.cell_postfix(scope)
            if isinstance(c, Base) and isinstance(d, Base):
                c = Base(App(c.term, d.term))
            else:
                c = app_cell(c, d, scope)
        return c

    def cell_postfix(self, scope: Context) -> Cell:
        c = self.cell_atom(scope)
        while self.peek().kind == "INV":
            self.next()
            c = Inv(c)
        return c

    def cell_atom(self, scope: Context) -> Cell:
        tok = self.peek()
        if tok.kind == "NAME":
            return var_cell(self.next().text, scope)
        if tok.kind == "LPAREN":
            self.next()
            c = self.cell(scope)
            self.expect("RPAREN", "')'")
            return c
        if tok.kind == "REFL":
            self.next()
            self.expect("LPAREN", "'('")
            c = self.cell(scope)
            self.expect("RPAREN", "')'")
            return Refl(c)
        if tok.kind == "BETA":
            self.next()
            self.expect("LBRACK", "'['")
            c = self.cell(scope)
            self.expect("RBRACK", "']'")
            return BetaStep(c)
        if tok.kind == "ETA":
            self.next()
            self.expect("LBRACK", "'['")
            binder = self.expect("NAME", "NAME").text
            self.expect("RBRACK", "']'")
            self.expect("LPAREN", "'('")
            c = self.cell(scope)
            self.expect("RPAREN", "')'")
            return EtaStep(c, binder)
        self.fail(("NAME", "'('", "'refl'", "'beta'", "'eta'", "'\\'", "'lam'", "'!'"))

    def lamform(self, scope: Context) -> Cell:
        tok = self.next()
        if tok.kind == "LAMDIM":
            n = int(tok.text[3:])
            binder = self.expect("NAME", "NAME").text
            self.expect("COLON", "':'")
            self.expect("LPAREN", "'('")
            s = self.cell(scope)
            self.expect("TILDE", "'~'")
            t = self.cell(scope)
            self.expect("RPAREN", "')'")
            bd = Boundary(s, t)
            if dim(s, scope) + 1 != n:
                raise CellError(f"lam{n} binder needs a dimension-{n - 1} boundary, "
                                f"got dimension {dim(s, scope)}")
            self.expect("DOT", "'.'")
            body = self.cell(scope.declare(binder, bd))
            ends = None
            if self.peek().kind == "AS":
                self.next()
                self.expect("LPAREN", "'('")
                a = self.cell(scope)
                self.expect("TILDE", "'~'")
                b = self.cell(scope)
                self.expect("RPAREN", "')'")
                ends = Boundary(a, b)
            return CellAbs(binder, bd, body, ends)
        binder = self.expect("NAME", "NAME").text
        self.expect("DOT", "'.'")
        body = self.cell(scope.declare(binder, None))
        return abs_cell(binder, None, body)


def parse_cell(text: str, ctx: Context = EMPTY) -> Cell:
    """Parse the cell grammar.  Names resolve against ``ctx``: a name
    declared with a boundary becomes a path variable, anything else a
    term variable."""
    parser = _CellParser(tokenize(text))
    c = parser.cell(ctx)
    if parser.peek().kind != "EOF":
        parser.fail(("EOF",))
    return c


def parse_context(text: str) -> Context:
    """Parse declaration lines: ``name : (cell ~ cell)`` for a path
    variable, ``name : term-var`` for a term variable.  Later lines may
    mention earlier names.  Comments start with '#'."""
    ctx = EMPTY
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name_part, sep, rest = line.partition(":")
        name = name_part.strip()
        if not sep or not name:
            raise CellError(f"line {lineno}: expected 'name : declaration'")
        if not (name[0].isalpha() or name[0] == "_") or not all(c.isalnum() or c == "_" for c in name):
            raise CellError(f"line {lineno}: bad name {name!r}")
        if ctx.lookup(name) is not None:
            raise CellError(f"line {lineno}: duplicate declaration of {name}")
        rest = rest.strip()
        if rest == "term-var":
            ctx = ctx.declare(name, None)
            continue
        parser = _CellParser(tokenize(rest))
        parser.expect("LPAREN", "'('")
        s = parser.cell(ctx)
        parser.expect("TILDE", "'~'")
        t = parser.cell(ctx)
        parser.expect("RPAREN", "')'")
        if parser.peek().kind != "EOF":
            parser.fail(("EOF",))
        for side, label in ((s, "source"), (t, "target")):
            vs = well_formed(side, ctx)
            if vs:
                raise CellError(f"line {lineno}: ill-formed {label}: {vs[0].message}")
        ds, dt = dim(s, ctx), dim(t, ctx)
        if ds != dt:
            raise CellError(f"line {lineno}: boundary sides have dimensions {ds} and {dt}")
        if ds >= 1:
            if not (cell_alpha_eq(src(s, ctx), src(t, ctx)) and cell_alpha_eq(tgt(s, ctx), tgt(t, ctx))):
                raise CellError(f"line {lineno}: boundary sides are not parallel")
        ctx = ctx.declare(name, Boundary(s, t))
    return ctx


# Printer levels, loosest first: 0 concatenation, 1 application ('@'),
# 2 lift ('!'), 3 juxtaposition, 4 inverse operand.  A construct is
# parenthesised when its own level is below the slot's.  Lambda-shaped
# cells and bare abstractions extend maximally right, so they print bare
# only in a trailing slot at level 2 or looser.

def _pc(c: Cell, level: int, tail: bool, scope: Context) -> str:
    match c:
        case Base(t):
            if isinstance(t, Var):
                return t.name
            if isinstance(t, App):
                s = _print_term_at(t, "top")
                return s if level <= 2 else f"({s})"
            s = _print_term_at(t, "top")
            return s if tail and level <= 2 else f"({s})"
        case PathVar(name):
            return name
        case Refl(on):
            return f"refl({_pc(on, 0, True, scope)})"
        case BetaStep(redex):
            return f"beta[{_pc(redex, 0, True, scope)}]"
        case EtaStep(body, binder):
            return f"eta[{binder}]({_pc(body, 0, True, scope)})"
        case Degen(of):
            s = f"!{_pc(of, 2, tail, scope)}"
            return s if level <= 2 else f"({s})"
        case Inv(of):
            return f"{_pc(of, 4, False, scope)}^-1"
        case Concat(first, second):
            s = f"{_pc(first, 0, False, scope)} ; {_pc(second, 1, tail, scope)}"
            return s if level == 0 else f"({s})"
        case CellApp(fun, arg):
            s = f"{_pc(fun, 1, False, scope)} @ {_pc(arg, 2, tail, scope)}"
            return s if level <= 1 else f"({s})"
        case CellAbs(binder, None, body, _):
            s = f"\\{binder}. {_pc(body, 0, True, scope.declare(binder, None))}"
            return s if tail and level <= 2 else f"({s})"
        case CellAbs(binder, declared, body, ends):
            j = dim(declared.source, scope) + 1
            head = (f"lam{j} {binder}:({_pc(declared.source, 0, True, scope)} ~ "
                    f"{_pc(declared.target, 0, True, scope)})")
            inner = scope.declare(binder, declared)
            if ends is None:
                s = f"{head}. {_pc(body, 0, True, inner)}"
            else:
                s = (f"{head}. {_pc(body, 1, False, inner)} "
                     f"as ({_pc(ends.source, 0, True, scope)} ~ {_pc(ends.target, 0, True, scope)})")
            return s if tail and level <= 2 else f"({s})"
    raise TypeError(f"not a cell: {c!r}")


def print_cell(c: Cell, ctx: Context = EMPTY) -> str:
    """Render a cell; reparsing against the same context restores it up
    to alpha.  ``ctx`` is needed to print the dimension marker of bound
    path variables whose boundary mentions declared names."""
    return _pc(c, 0, True, ctx)
