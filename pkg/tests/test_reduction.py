"""Rewriting: redex positions, single steps, normalization, graphs, enumeration."""

import pytest

from lambdacells import (
    RedexPosition,
    alpha_eq,
    enumerate_terms,
    joinable,
    normal_form,
    parse_term,
    print_term,
    redex_positions,
    reduction_graph,
    step_at,
    term_key,
)


def t(src):
    return parse_term(src)


def graph_shape(g):
    """(sorted node strings, sorted edge triples) for order-insensitive compares."""
    nodes = sorted(print_term(n) for n in g.nodes)
    edges = sorted(
        (print_term(a), str(pos), print_term(b)) for a, pos, b in g.edges
    )
    return nodes, edges


class TestRedexPositions:
    def test_no_redex(self):
        assert redex_positions(t("x y")) == []

    def test_root_beta(self):
        assert redex_positions(t("(\\x. x) y")) == [RedexPosition((), "beta")]

    def test_eta(self):
        assert redex_positions(t("\\x. y x")) == [RedexPosition((), "eta")]

    def test_eta_blocked_by_free_occurrence(self):
        # \x. x x is not an eta redex: x occurs in the function part
        assert redex_positions(t("\\x. x x")) == []

    def test_preorder(self):
        term = t("(\\x. (\\y. y) x) ((\\z. z) w)")
        got = [str(p) for p in redex_positions(term)]
        assert got == ["beta@root", "eta@fun", "beta@fun.body", "beta@arg"]

    def test_str_forms(self):
        assert str(RedexPosition((), "beta")) == "beta@root"
        assert str(RedexPosition(("fun", "body"), "beta")) == "beta@fun.body"


class TestStepAt:
    def test_beta(self):
        got = step_at(t("(\\x. x y) z"), RedexPosition((), "beta"))
        assert alpha_eq(got, t("z y"))

    def test_eta(self):
        got = step_at(t("\\x. y x"), RedexPosition((), "eta"))
        assert got == t("y")

    def test_under_binder(self):
        got = step_at(t("\\w. (\\x. x) w"), RedexPosition(("body",), "beta"))
        assert alpha_eq(got, t("\\w. w"))

    def test_bad_position(self):
        with pytest.raises(ValueError):
            step_at(t("x y"), RedexPosition((), "beta"))


class TestNormalForm:
    def test_already_normal(self):
        r = normal_form(t("x y"))
        assert r.complete and r.steps == 0
        assert r.term == t("x y")

    def test_two_step_chain(self):
        r = normal_form(t("(\\x. (\\y. y x) z) v"))
        assert r.complete
        assert r.steps == 2
        assert print_term(r.term) == "z v"

    def test_eta_after_beta(self):
        r = normal_form(t("(\\w. \\x. w x) y"))
        assert r.complete and print_term(r.term) == "y"

    def test_divergence_reported(self):
        omega = t("(\\x. x x) (\\x. x x)")
        r = normal_form(omega, max_steps=50)
        assert not r.complete
        assert r.steps == 50
        assert alpha_eq(r.term, omega)


class TestReductionGraph:
    def test_collapsed_square(self):
        g = reduction_graph(t("(\\x. u) ((\\y. v) z)"))
        nodes, edges = graph_shape(g)
        assert not g.truncated
        assert nodes == ["(\\x. u) ((\\y. v) z)", "(\\x. u) v", "u"]
        assert edges == [
            ("(\\x. u) ((\\y. v) z)", "beta@arg", "(\\x. u) v"),
            ("(\\x. u) ((\\y. v) z)", "beta@root", "u"),
            ("(\\x. u) v", "beta@root", "u"),
        ]

    def test_inner_outer_diamond(self):
        g = reduction_graph(t("(\\x. (\\y. y x) z) v"))
        nodes, edges = graph_shape(g)
        assert not g.truncated
        assert nodes == [
            "(\\x. (\\y. y x) z) v",
            "(\\x. z x) v",
            "(\\y. y v) z",
            "z v",
        ]
        assert edges == [
            ("(\\x. (\\y. y x) z) v", "beta@fun.body", "(\\x. z x) v"),
            ("(\\x. (\\y. y x) z) v", "beta@root", "(\\y. y v) z"),
            ("(\\x. z x) v", "beta@root", "z v"),
            ("(\\x. z x) v", "eta@fun", "z v"),
            ("(\\y. y v) z", "beta@root", "z v"),
        ]

    def test_self_loop(self):
        g = reduction_graph(t("(\\x. x x) (\\x. x x)"))
        nodes, edges = graph_shape(g)
        assert not g.truncated
        assert len(nodes) == 1
        assert edges == [
            ("(\\x. x x) (\\x. x x)", "beta@root", "(\\x. x x) (\\x. x x)")
        ]

    def test_alpha_classes_merge(self):
        # both branches produce \a. a under different binder names
        g = reduction_graph(t("(\\x. \\y. y) ((\\z. z) w)"))
        keys = {term_key(n) for n in g.nodes}
        assert len(keys) == len(g.nodes)

    def test_node_cap(self):
        g = reduction_graph(t("(\\x. x x x) (\\x. x x x)"), max_nodes=10)
        assert g.truncated
        assert len(g.nodes) <= 10

    def test_depth_cap(self):
        g = reduction_graph(t("(\\x. (\\y. y x) z) v"), max_depth=1)
        assert g.truncated
        assert len(g.nodes) == 3  # root plus its two one-step successors

    def test_root_first(self):
        term = t("(\\x. u) ((\\y. v) z)")
        g = reduction_graph(term)
        assert g.nodes[0] == term == g.root

    def test_deterministic(self):
        term = t("(\\x. (\\y. y x) z) v")
        a = graph_shape(reduction_graph(term))
        b = graph_shape(reduction_graph(term))
        assert a == b


class TestJoinable:
    def test_joinable_pair(self):
        assert joinable(t("(\\y. y v) z"), t("(\\x. z x) v"))

    def test_distinct_normal_forms(self):
        assert not joinable(t("x"), t("y"))

    def test_reflexive(self):
        assert joinable(t("\\x. x"), t("\\y. y"))


class TestEnumerateTerms:
    def test_size_one(self):
        got = list(enumerate_terms(1, ["x"]))
        assert [print_term(u) for u in got] == ["x"]

    def test_size_two(self):
        got = sorted(print_term(u) for u in enumerate_terms(2, ["x"]))
        assert got == ["\\v0. v0", "\\v0. x", "x", "x x"]

    def test_size_three_count(self):
        assert sum(1 for _ in enumerate_terms(3, ["x"])) == 17

    def test_size_five_two_vars_count(self):
        assert sum(1 for _ in enumerate_terms(5, ["x", "y"])) == 3146

    def test_no_alpha_duplicates(self):
        got = list(enumerate_terms(4, ["x"]))
        keys = {term_key(u) for u in got}
        assert len(keys) == len(got)

    def test_sizes_respected(self):
        from lambdacells import term_size

        for u in enumerate_terms(4, ["x", "y"]):
            assert term_size(u) <= 4
