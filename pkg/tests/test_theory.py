"""Contractions, interchange squares, canonical forms, filler search, convertibility."""

import pytest

from lambdacells import (
    Base,
    BetaStep,
    Boundary,
    CellError,
    EMPTY,
    EtaStep,
    PathVar,
    RedexPosition,
    Refl,
    beta_contract,
    build_beta_square,
    build_eta_square,
    canonicalize,
    cell_alpha_eq,
    cell_key,
    convertible,
    dim,
    eta_contract,
    parse_cell,
    parse_context,
    parse_term,
    path_subst,
    print_cell,
    print_term,
    search_filler,
    src,
    step_cell,
    tgt,
    well_formed,
)


def t(s):
    return parse_term(s)


class TestBetaContract:
    def test_classical(self):
        step = beta_contract(Base(t("(\\x. x y) z")))
        assert step == BetaStep(Base(t("(\\x. x y) z")))
        assert tgt(step) == Base(t("z y"))

    def test_not_a_redex(self):
        with pytest.raises(CellError, match="must be a redex"):
            beta_contract(Base(t("x y")))

    def test_dimension_one_contraction(self):
        ctx = parse_context("s : (a ~ b)\nm : (c ~ d)")
        app = parse_cell("(lam1 r:(c ~ d). s @ r) @ m", ctx)
        step = beta_contract(app, ctx)
        assert dim(step, ctx) == 2
        # the target is an independent substitution of m for r
        body = parse_cell("s @ r", ctx.declare("r", Boundary(Base(t("c")), Base(t("d")))))
        want = path_subst(body, "r", PathVar("m"), ctx,
                          Boundary(Base(t("c")), Base(t("d"))))
        assert cell_alpha_eq(tgt(step, ctx), want)
        assert print_cell(tgt(step, ctx), ctx) == "s @ m"

    def test_lifted_argument_rejected(self):
        app = parse_cell("(\\r. u r) @ s", parse_context("s : (a ~ b)"))
        with pytest.raises(CellError, match="makes a square, not a contraction"):
            beta_contract(app, parse_context("s : (a ~ b)"))

    def test_boundary_mismatch_rejected(self):
        ctx = parse_context("s : (a ~ b)\nm : (c ~ d)")
        app = parse_cell("(lam1 r:(a ~ b). s @ r) @ m", ctx)
        with pytest.raises(CellError):
            beta_contract(app, ctx)


class TestEtaContract:
    def test_classical(self):
        step = eta_contract(Base(t("x")), "z")
        assert step == EtaStep(Base(t("x")), "z")
        assert src(step) == Base(t("\\z. x z"))
        assert tgt(step) == Base(t("x"))

    def test_freshness_required(self):
        with pytest.raises(CellError, match="binder z"):
            eta_contract(Base(t("x z")), "z")

    def test_dimension_one_contraction(self):
        ctx = parse_context("s : (a ~ b)\nr : (c ~ d)")
        step = eta_contract(PathVar("s"), "r", ctx)
        assert dim(step, ctx) == 2
        assert print_cell(src(step, ctx), ctx) == "lam1 r:(c ~ d). s @ r"
        assert tgt(step, ctx) == PathVar("s")

    def test_square_form_rejected(self):
        ctx = parse_context("s : (a ~ b)")
        with pytest.raises(CellError, match="makes a square, not a contraction"):
            eta_contract(PathVar("s"), "y", ctx)


class TestStepCell:
    def test_root_beta(self):
        c = step_cell(t("(\\x. x) y"), RedexPosition((), "beta"))
        assert c == BetaStep(Base(t("(\\x. x) y")))

    def test_inner_position_whiskers(self):
        c = step_cell(t("(\\x. u) ((\\y. v) z)"), RedexPosition(("arg",), "beta"))
        assert print_cell(c) == "!(\\x. u) @ beta[(\\y. v) z]"
        assert src(c) == Base(t("(\\x. u) ((\\y. v) z)"))
        assert tgt(c) == Base(t("(\\x. u) v"))

    def test_eta_under_binder(self):
        c = step_cell(t("\\w. \\x. y x"), RedexPosition(("body",), "eta"))
        assert print_cell(c) == "\\w. eta[x](y)"

    def test_bad_position_propagates(self):
        with pytest.raises(ValueError):
            step_cell(t("x"), RedexPosition((), "beta"))


class TestBuildBetaSquare:
    def test_collapsing_square(self):
        sq, filler = build_beta_square(t("u"), "x", parse_cell("beta[(\\y. v) z]"))
        assert print_cell(sq.top_left) == "(\\x. u) ((\\y. v) z)"
        assert print_cell(sq.top_right) == "u"
        assert print_cell(sq.bottom_left) == "(\\x. u) v"
        assert print_cell(sq.bottom_right) == "u"
        assert print_cell(sq.top) == "beta[(\\x. u) ((\\y. v) z)]"
        assert print_cell(sq.bottom) == "beta[(\\x. u) v]"
        assert print_cell(sq.left) == "!(\\x. u) @ beta[(\\y. v) z]"
        assert print_cell(sq.right) == "!u"
        assert print_cell(filler) == "beta[!(\\x. u) @ beta[(\\y. v) z]]"
        assert well_formed(filler) == []

    def test_filler_boundary_is_the_two_composites(self):
        sq, filler = build_beta_square(t("x w"), "x", parse_cell("beta[(\\y. y) f]"))
        s, g = src(filler), tgt(filler)
        assert cell_alpha_eq(s, parse_cell("beta[(\\x. x w) ((\\y. y) f)] ; beta[(\\y. y) f] @ !w"))
        assert cell_alpha_eq(g, parse_cell("!(\\x. x w) @ beta[(\\y. y) f] ; beta[(\\x. x w) f]"))
        assert well_formed(filler) == []

    def test_degenerate_moving_cell(self):
        sq, filler = build_beta_square(t("x"), "x", Refl(Base(t("m"))))
        assert well_formed(filler) == []
        assert print_cell(sq.top) == print_cell(sq.bottom) == "beta[(\\x. x) m]"

    def test_two_cell_moving_argument(self):
        # binder declared as a 1-cell, moving cell of dimension 2
        ctx = parse_context("s : (a ~ b)\nm : (a ~ b)")
        bd = Boundary(Base(t("a")), Base(t("b")))
        body = parse_cell("s @ r", ctx.declare("r", bd))
        sq, filler = build_beta_square(body, "r", Refl(PathVar("m")), ctx,
                                       binder_boundary=bd)
        assert dim(filler, ctx) == 3
        assert well_formed(filler, ctx) == []
        want_src = parse_cell("beta[(lam1 r:(a ~ b). s @ r) @ m] ; !s @ refl(m)", ctx)
        want_tgt = parse_cell(
            "!(lam1 r:(a ~ b). s @ r) @ refl(m) ; beta[(lam1 r:(a ~ b). s @ r) @ m]", ctx)
        assert cell_alpha_eq(src(filler, ctx), want_src)
        assert cell_alpha_eq(tgt(filler, ctx), want_tgt)


class TestBuildEtaSquare:
    def test_square_over_a_step(self):
        sq, filler = build_eta_square(parse_cell("beta[(\\x. x) w]"), "y")
        assert print_cell(sq.top_left) == "\\y. (\\x. x) w y"
        assert print_cell(sq.top_right) == "(\\x. x) w"
        assert print_cell(sq.bottom_left) == "\\y. w y"
        assert print_cell(sq.bottom_right) == "w"
        assert print_cell(sq.top) == "eta[y]((\\x. x) w)"
        assert print_cell(sq.bottom) == "eta[y](w)"
        assert print_cell(sq.left) == "\\y. beta[(\\x. x) w] @ !y"
        assert print_cell(sq.right) == "beta[(\\x. x) w]"
        assert print_cell(filler) == "eta[y](beta[(\\x. x) w])"
        assert well_formed(filler) == []

    def test_filler_boundary_is_the_two_composites(self):
        sq, filler = build_eta_square(parse_cell("beta[(\\x. x) w]"), "y")
        assert cell_alpha_eq(src(filler), parse_cell("eta[y]((\\x. x) w) ; beta[(\\x. x) w]"))
        assert cell_alpha_eq(
            tgt(filler), parse_cell("(\\y. beta[(\\x. x) w] @ !y) ; eta[y](w)"))

    def test_freshness(self):
        with pytest.raises(CellError, match="must not occur"):
            build_eta_square(parse_cell("beta[(\\x. x) y]"), "y")

    def test_two_cell_moving_argument(self):
        ctx = parse_context("s : (a ~ b)\nr : (c ~ d)")
        sq, filler = build_eta_square(Refl(PathVar("s")), "r", ctx)
        assert dim(filler, ctx) == 3
        assert well_formed(filler, ctx) == []
        want_src = parse_cell("eta[r](s) ; refl(s)", ctx)
        want_tgt = parse_cell("(lam1 r:(c ~ d). refl(s) @ !r) ; eta[r](s)", ctx)
        assert cell_alpha_eq(src(filler, ctx), want_src)
        assert cell_alpha_eq(tgt(filler, ctx), want_tgt)


class TestCanonicalize:
    CTX = parse_context("p : (a ~ b)\nq : (b ~ c)")

    CASES = [
        ("refl(a) ; p", "p"),
        ("p ; refl(b)", "p"),
        ("p^-1^-1", "p"),
        ("refl(a)^-1", "refl(a)"),
        ("p ; p^-1", "refl(a)"),
        ("p^-1 ; p", "refl(b)"),
        ("(p ; q)^-1", "q^-1 ; p^-1"),
        ("(refl(a) ; p) ; (q ; refl(c))", "p ; q"),
        ("p ; (p^-1 ; p)", "p"),
    ]

    def test_rewrites(self):
        for text, want in self.CASES:
            got = canonicalize(parse_cell(text, self.CTX), self.CTX)
            assert print_cell(got, self.CTX) == want, text

    def test_idempotent(self):
        for text, _ in self.CASES:
            once = canonicalize(parse_cell(text, self.CTX), self.CTX)
            again = canonicalize(once, self.CTX)
            assert cell_alpha_eq(once, again)

    def test_boundary_preserved(self):
        for text, _ in self.CASES:
            c = parse_cell(text, self.CTX)
            d = canonicalize(c, self.CTX)
            assert cell_alpha_eq(src(c, self.CTX), src(d, self.CTX))
            assert cell_alpha_eq(tgt(c, self.CTX), tgt(d, self.CTX))

    def test_degenerate_segments_dropped(self):
        c = parse_cell("beta[(\\x. x) y] ; !y", EMPTY)
        assert print_cell(canonicalize(c)) == "beta[(\\x. x) y]"

    def test_step_cells_left_alone(self):
        c = parse_cell("beta[(\\x. x) y]")
        assert canonicalize(c) is c or cell_alpha_eq(canonicalize(c), c)


class TestSearchFiller:
    def test_collapsing_square_found(self):
        a = parse_cell("beta[(\\x. u) ((\\y. v) z)] ; !u")
        b = parse_cell("!(\\x. u) @ beta[(\\y. v) z] ; beta[(\\x. u) v]")
        r = search_filler(a, b)
        assert r.found
        assert r.depth == 1
        assert print_cell(r.filler) == "beta[!(\\x. u) @ beta[(\\y. v) z]]"
        assert well_formed(r.filler) == []
        # endpoints agree with the inputs up to canonical form
        assert cell_key(canonicalize(src(r.filler))) == cell_key(canonicalize(a))
        assert cell_key(canonicalize(tgt(r.filler))) == cell_key(canonicalize(b))

    def test_equal_inputs_need_no_steps(self):
        a = parse_cell("beta[(\\x. u) ((\\y. v) z)] ; !u")
        r = search_filler(a, a)
        assert r.found and r.depth == 0
        assert print_cell(r.filler) == "refl(beta[(\\x. u) ((\\y. v) z)])"

    def test_inner_outer_paths_not_joined(self):
        a = parse_cell("beta[(\\x. (\\y. y x) z) v] ; beta[(\\y. y v) z]")
        b = parse_cell("(\\x. beta[(\\y. y x) z]) @ !v ; beta[(\\x. z x) v]")
        r = search_filler(a, b)
        assert not r.found
        assert r.filler is None
        assert r.depth == 4

    def test_beta_vs_eta_not_joined(self):
        a = parse_cell("beta[(\\z. x z) y]")
        b = parse_cell("eta[z](x) @ !y")
        r = search_filler(a, b)
        assert not r.found

    def test_non_parallel_rejected(self):
        with pytest.raises(CellError, match="not parallel"):
            search_filler(parse_cell("beta[(\\z. x z) y]"),
                          parse_cell("beta[(\\x. x) y]"))

    def test_dimension_zero_delegates_to_conversion(self):
        r = search_filler(parse_cell("(\\x. x) y"), parse_cell("y"))
        assert r.found
        assert print_cell(r.filler) == "beta[(\\x. x) y]"
        no = search_filler(parse_cell("x"), parse_cell("y"))
        assert not no.found


class TestConvertible:
    def test_two_step_chain(self):
        r = convertible(t("(\\x. (\\y. y x) z) v"), t("z v"))
        assert r.verdict == "yes"
        assert print_term(r.common) == "z v"
        printed = [print_cell(w) for w in r.witnesses]
        assert "beta[(\\x. (\\y. y x) z) v] ; beta[(\\y. y v) z]" in printed
        for w in r.witnesses:
            assert well_formed(w) == []
            assert src(w) == Base(t("(\\x. (\\y. y x) z) v"))
            assert tgt(w) == Base(t("z v"))

    def test_distinct_single_step_witnesses(self):
        r = convertible(t("(\\z. x z) y"), t("x y"))
        assert r.verdict == "yes"
        printed = sorted(print_cell(w) for w in r.witnesses)
        assert printed == ["beta[(\\z. x z) y]", "eta[z](x) @ !y"]

    def test_alpha_equal_terms(self):
        r = convertible(t("\\x. x"), t("\\y. y"))
        assert r.verdict == "yes"
        assert any(isinstance(w, Refl) for w in r.witnesses)

    def test_meeting_in_the_middle(self):
        r = convertible(t("(\\x. x) y"), t("(\\q. y) z"))
        assert r.verdict == "yes"
        for w in r.witnesses:
            assert src(w) == Base(t("(\\x. x) y"))
            assert tgt(w) == Base(t("(\\q. y) z"))

    def test_definitely_not(self):
        r = convertible(t("x"), t("y"))
        assert r.verdict == "no"
        assert r.witnesses == () and r.common is None

    def test_unknown_when_budget_exhausted(self):
        grower = t("(\\x. x x x) (\\x. x x x)")
        r = convertible(grower, t("y"), budget=50)
        assert r.verdict == "unknown"

    def test_divergent_loop_is_decidable(self):
        omega = t("(\\x. x x) (\\x. x x)")
        r = convertible(omega, t("y"))
        assert r.verdict == "no"
