"""Ground terms, fluent literals and their text form.

Everything downstream (states, ground rules, encodings) is built from two
immutable value types:

* ``Term`` -- a function symbol applied to ground argument terms.  Constants
  are zero-argument terms; integers are allowed as functors so time points
  and numeric objects render naturally.
* ``Literal`` -- a ground fluent atom or its negation.  A negative literal
  renders as ``-atom`` and can be embedded inside terms (it parses back as a
  unary ``-`` term), which is how literal-valued arguments travel through
  ground rules.
"""

from __future__ import annotations

import re
from typing import Iterator, NamedTuple, Union

NEG = "-"


class Term(NamedTuple):
    """A ground term: functor plus argument tuple."""

    functor: Union[str, int]
    args: tuple["Term", ...] = ()

    def render(self) -> str:
        if self.functor == NEG and len(self.args) == 1:
            return NEG + self.args[0].render()
        if not self.args:
            return str(self.functor)
        inner = ",".join(a.render() for a in self.args)
        return f"{self.functor}({inner})"

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.render()


def mk(functor: Union[str, int], *args: Term) -> Term:
    return Term(functor, tuple(args))


class Literal(NamedTuple):
    """A fluent literal: ground atom with a sign."""

    atom: Term
    positive: bool = True

    def complement(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def as_term(self) -> Term:
        """Literal as a term: the atom itself, or ``-(atom)`` when negative."""
        return self.atom if self.positive else Term(NEG, (self.atom,))

    def render(self) -> str:
        return self.atom.render() if self.positive else NEG + self.atom.render()

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.render()


def pos(atom: Term) -> Literal:
    return Literal(atom, True)


def neg(atom: Term) -> Literal:
    return Literal(atom, False)


def literal_from_term(term: Term) -> Literal:
    """Inverse of :meth:`Literal.as_term`."""
    if term.functor == NEG and len(term.args) == 1:
        return Literal(term.args[0], False)
    return Literal(term, True)


class TermSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at offset {position} in {text!r}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:(?P<int>-?\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),{};:-]))")


def tokenize_term(text: str) -> Iterator[tuple[str, str, int]]:
    pos_ = 0
    while pos_ < len(text):
        m = _TOKEN.match(text, pos_)
        if not m:
            if text[pos_:].strip() == "":
                return
            raise TermSyntaxError("unexpected character", text, pos_)
        pos_ = m.end()
        if m.lastgroup == "int":
            yield "int", m.group("int"), m.start()
        elif m.lastgroup == "name":
            yield "name", m.group("name"), m.start()
        else:
            yield m.group("punct"), m.group("punct"), m.start()


class _TermParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = list(tokenize_term(text))
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.text))

    def take(self, kind: str | None = None):
        tok = self.peek()
        if kind is not None and tok[0] != kind:
            raise TermSyntaxError(f"expected {kind}, found {tok[1]!r}", self.text, tok[2])
        self.i += 1
        return tok

    def term(self) -> Term:
        kind, value, at = self.peek()
        if kind == "int":
            self.take()
            return Term(int(value))
        if kind == "-":
            self.take()
            return Term(NEG, (self.term(),))
        if kind != "name":
            raise TermSyntaxError("expected a term", self.text, at)
        self.take()
        if self.peek()[0] != "(":
            return Term(value)
        self.take("(")
        args = [self.term()]
        while self.peek()[0] == ",":
            self.take(",")
            args.append(self.term())
        self.take(")")
        return Term(value, tuple(args))


def parse_term(text: str) -> Term:
    parser = _TermParser(text)
    term = parser.term()
    if parser.peek()[0] != "eof":
        raise TermSyntaxError("trailing input after term", text, parser.peek()[2])
    return term


def parse_literal(text: str) -> Literal:
    return literal_from_term(parse_term(text))


def cached_hash(cls):
    """Memoize a frozen dataclass's hash on the instance.

    AST nodes get hashed constantly (memo tables, caches); recomputing the
    structural hash each time is quadratic over deep trees.
    """
    base_hash = cls.__hash__

    def __hash__(self):
        try:
            return self._hash_cache
        except AttributeError:
            value = base_hash(self)
            object.__setattr__(self, "_hash_cache", value)
            return value

    cls.__hash__ = __hash__
    return cls


def is_variable_term(term: Term) -> bool:
    """Schematic convention: a zero-argument term with a capitalized name."""
    return (
        not term.args
        and isinstance(term.functor, str)
        and term.functor[:1].isupper()
    )


def term_variables(term: Term) -> set[str]:
    if is_variable_term(term):
        return {str(term.functor)}
    out: set[str] = set()
    for arg in term.args:
        out |= term_variables(arg)
    return out


def is_ground_term(term: Term) -> bool:
    return not term_variables(term)
