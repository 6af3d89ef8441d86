"""Lambda-calculus kernel with dimension-indexed conversion cells."""

from .terms import (
    Abs,
    App,
    ParseError,
    Term,
    Var,
    alpha_eq,
    free_vars,
    fresh_var,
    parse_term,
    print_term,
    subst,
    term_key,
    term_size,
)
from .reduction import (
    Normalization,
    RedexError,
    RedexPosition,
    ReductionGraph,
    enumerate_terms,
    joinable,
    normal_form,
    reduction_graph,
    redex_positions,
    step_at,
)
from .cells import (
    Base,
    BetaStep,
    Boundary,
    BoundaryError,
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
    Violation,
    abs_cell,
    app_cell,
    boundary,
    cell_alpha_eq,
    cell_key,
    cell_size,
    collapse,
    degenerate,
    dim,
    free_names,
    parse_cell,
    parse_context,
    path_subst,
    print_cell,
    src,
    tgt,
    var_cell,
    well_formed,
)
from .theory import (
    Convertibility,
    SearchReport,
    SquareSpec,
    beta_contract,
    build_beta_square,
    build_eta_square,
    canonicalize,
    convertible,
    eta_contract,
    search_filler,
    step_cell,
)

__all__ = [
    "Abs",
    "App",
    "Base",
    "BetaStep",
    "Boundary",
    "BoundaryError",
    "Cell",
    "CellAbs",
    "CellApp",
    "CellError",
    "Concat",
    "Context",
    "Convertibility",
    "Degen",
    "EMPTY",
    "EtaStep",
    "Inv",
    "Normalization",
    "ParseError",
    "PathVar",
    "RedexError",
    "RedexPosition",
    "ReductionGraph",
    "Refl",
    "SearchReport",
    "SquareSpec",
    "Term",
    "Var",
    "Violation",
    "abs_cell",
    "alpha_eq",
    "app_cell",
    "beta_contract",
    "boundary",
    "build_beta_square",
    "build_eta_square",
    "canonicalize",
    "cell_alpha_eq",
    "cell_key",
    "cell_size",
    "collapse",
    "convertible",
    "degenerate",
    "dim",
    "enumerate_terms",
    "eta_contract",
    "free_names",
    "free_vars",
    "fresh_var",
    "joinable",
    "normal_form",
    "parse_cell",
    "parse_context",
    "parse_term",
    "path_subst",
    "print_cell",
    "print_term",
    "reduction_graph",
    "redex_positions",
    "search_filler",
    "src",
    "step_at",
    "step_cell",
    "subst",
    "term_key",
    "term_size",
    "tgt",
    "var_cell",
    "well_formed",
]
