"""Untyped lambda-term syntax.

Terms are immutable trees built from variables, applications and
abstractions.  Everything downstream treats alpha-equivalent terms as
interchangeable, so the operations here (substitution, fresh names,
alpha comparison) are the real contract; the concrete binder names are
only kept around for printing.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "Term",
    "Var",
    "App",
    "Abs",
    "Token",
    "ParseError",
    "tokenize",
    "parse_term",
    "print_term",
    "free_vars",
    "fresh_var",
    "alpha_eq",
    "term_key",
    "subst",
    "term_size",
]


class Term:
    """Marker base class for the three term shapes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: str


@dataclass(frozen=True, slots=True)
class App(Term):
    fun: Term
    arg: Term


@dataclass(frozen=True, slots=True)
class Abs(Term):
    binder: str
    body: Term


def free_vars(t: Term) -> frozenset[str]:
    """Set of variable names occurring free in ``t``."""
    match t:
        case Var(name):
            return frozenset((name,))
        case App(fun, arg):
            return free_vars(fun) | free_vars(arg)
        case Abs(binder, body):
            return free_vars(body) - {binder}
    raise TypeError(f"not a term: {t!r}")


def fresh_var(avoid: frozenset[str] | set[str], hint: str = "x") -> str:
    """Pick a name not in ``avoid``: the hint itself, then hint1, hint2, ...

    Deterministic, so every caller that feeds the same avoid set gets the
    same name back.
    """
    if hint not in avoid:
        return hint
    k = 1
    while f"{hint}{k}" in avoid:
        k += 1
    return f"{hint}{k}"


def term_key(t: Term, env: dict[str, int] | None = None, depth: int = 0):
    """Hashable form that is identical exactly for alpha-equal terms.

    Bound variables are replaced by binder depth, free ones keep their
    name.  ``env`` lets cell-level binders participate when terms appear
    under them.
    """
    if env is None:
        env = {}
    match t:
        case Var(name):
            level = env.get(name)
            return ("b", level) if level is not None else ("f", name)
        case App(fun, arg):
            return ("a", term_key(fun, env, depth), term_key(arg, env, depth))
        case Abs(binder, body):
            return ("l", term_key(body, {**env, binder: depth}, depth + 1))
    raise TypeError(f"not a term: {t!r}")


def alpha_eq(a: Term, b: Term) -> bool:
    return term_key(a) == term_key(b)


def subst(t: Term, name: str, value: Term) -> Term:
    """Capture-avoiding substitution of ``value`` for free ``name`` in ``t``.

    Binders that would capture a free variable of ``value`` are renamed
    with :func:`fresh_var`, so the result is deterministic.
    """
    match t:
        case Var(n):
            return value if n == name else t
        case App(fun, arg):
            return App(subst(fun, name, value), subst(arg, name, value))
        case Abs(binder, body):
            if binder == name:
                return t
            if binder in free_vars(value) and name in free_vars(body):
                avoid = free_vars(value) | free_vars(body) | {name}
                renamed = fresh_var(avoid, binder)
                body = subst(body, binder, Var(renamed))
                return Abs(renamed, subst(body, name, value))
            return Abs(binder, subst(body, name, value))
    raise TypeError(f"not a term: {t!r}")


def term_size(t: Term) -> int:
    """Size used by the enumerator: variable occurrences plus binders."""
    match t:
        case Var(_):
            return 1
        case App(fun, arg):
            return term_size(fun) + term_size(arg)
        case Abs(_, body):
            return 1 + term_size(body)
    raise TypeError(f"not a term: {t!r}")


# --- concrete syntax -------------------------------------------------------

# The tokenizer covers the whole surface language (terms and cells); the
# term parser below only consumes the term subset.

_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACK",
    "]": "RBRACK",
    ".": "DOT",
    ";": "SEMI",
    ":": "COLON",
    "~": "TILDE",
    "@": "AT",
    "!": "BANG",
    "\\": "LAMBDA",
}

_KEYWORDS = {"lam": "LAM", "refl": "REFL", "beta": "BETA", "eta": "ETA", "as": "AS"}


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


class ParseError(ValueError):
    """Syntax error carrying position and the token kinds that were legal."""

    def __init__(self, line: int, col: int, expected: tuple[str, ...], found: str):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        want = " or ".join(expected)
        super().__init__(f"{line}:{col}: expected {want}; found {found}")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "^":
            if text[i : i + 3] == "^-1":
                tokens.append(Token("INV", "^-1", line, col))
                i += 3
                col += 3
                continue
            raise ParseError(line, col, ("'^-1'",), repr(text[i : i + 3]))
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word.startswith("lam") and word[3:].isdigit():
                tokens.append(Token("LAMDIM", word, line, col))
            elif word in _KEYWORDS:
                tokens.append(Token(_KEYWORDS[word], word, line, col))
            else:
                tokens.append(Token("NAME", word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(line, col, ("NAME", "punctuation"), repr(ch))
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _TermParser:
    _ATOM_STARTS = ("NAME", "'('", "'\\'", "'lam'")

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: tuple[str, ...]):
        tok = self.peek()
        found = tok.kind if tok.kind == "EOF" else repr(tok.text)
        raise ParseError(tok.line, tok.col, expected, found)

    def expect(self, kind: str, shown: str) -> Token:
        if self.peek().kind != kind:
            self.fail((shown,))
        return self.next()

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind in ("LAMBDA", "LAM"):
            self.next()
            binder = self.expect("NAME", "NAME").text
            self.expect("DOT", "'.'")
            return Abs(binder, self.term())
        return self.appseq()

    def appseq(self) -> Term:
        t = self.atom()
        while self.peek().kind in ("NAME", "LPAREN"):
            t = App(t, self.atom())
        return t

    def atom(self) -> Term:
        tok = self.peek()
        if tok.kind == "NAME":
            return Var(self.next().text)
        if tok.kind == "LPAREN":
            self.next()
            t = self.term()
            self.expect("RPAREN", "')'")
            return t
        self.fail(self._ATOM_STARTS)


def parse_term(text: str) -> Term:
    """Parse the term grammar: ``\\x. body``, juxtaposed application,
    parentheses, names.  ``lam`` is accepted as a spelling of ``\\``.
    Raises :class:`ParseError` with line/column on bad input.
    """
    parser = _TermParser(tokenize(text))
    t = parser.term()
    if parser.peek().kind != "EOF":
        parser.fail(("EOF",))
    return t


def _print(t: Term, where: str) -> str:
    match t:
        case Var(name):
            return name
        case Abs(binder, body):
            s = f"\\{binder}. {_print(body, 'top')}"
            return s if where == "top" else f"({s})"
        case App(fun, arg):
            s = f"{_print(fun, 'fun')} {_print(arg, 'arg')}"
            return s if where in ("top", "fun") else f"({s})"
    raise TypeError(f"not a term: {t!r}")


def print_term(t: Term) -> str:
    """Render with minimal parentheses.

    Application is left-associative juxtaposition and abstraction bodies
    extend as far right as possible, so ``parse_term(print_term(t))`` is
    alpha-equal to ``t`` (it is in fact structurally equal).
    """
    return _print(t, "top")
