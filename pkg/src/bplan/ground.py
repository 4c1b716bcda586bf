"""Ground logic programs and their one-rule-per-line text format.

A program is a set of ground rules of three head shapes:

* a normal rule        ``head :- b1, ..., not c1, ... .``
* a constraint         ``:- b1, ..., not c1, ... .``
* a choice rule        ``L {a1; ...; ak} U :- body.`` with ``L <= 1, U = 1``
  and the restriction that no choice-head atom is the head of anything else.

Every rule carries a provenance family naming the rule schema that produced
it; hand-written rules parse with family ``input``.  The text format is the
interchange between the encoder and the solver: emission is canonical (rules
sorted by family then text, duplicates collapsed) so equal programs are
byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .terms import Term, TermSyntaxError, _TermParser

FORMAT_HEADER = "bplan ground v1."
FALSITY = None  # constraint head


@dataclass(frozen=True)
class ChoiceHead:
    lower: int
    upper: int
    atoms: tuple[Term, ...]

    def __post_init__(self):
        if not (0 <= self.lower <= 1 and self.upper == 1):
            raise ValueError("choice bounds restricted to lower in {0,1}, upper = 1")
        if not self.atoms:
            raise ValueError("choice head needs at least one atom")

    def render(self) -> str:
        inner = "; ".join(a.render() for a in self.atoms)
        return f"{self.lower} {{{inner}}} {self.upper}"


@dataclass(frozen=True)
class Rule:
    head: Term | ChoiceHead | None
    pos: tuple[Term, ...] = ()
    neg: tuple[Term, ...] = ()
    family: str = "input"

    def is_constraint(self) -> bool:
        return self.head is None

    def is_choice(self) -> bool:
        return isinstance(self.head, ChoiceHead)

    def is_fact(self) -> bool:
        return isinstance(self.head, Term) and not self.pos and not self.neg

    def render(self) -> str:
        body = [a.render() for a in self.pos] + [f"not {a.render()}" for a in self.neg]
        if self.head is None:
            head = ""
        elif isinstance(self.head, ChoiceHead):
            head = self.head.render()
        else:
            head = self.head.render()
        if not body:
            return f"{head}." if head else ":- ."
        sep = " :- " if head else ":- "
        return f"{head}{sep}{', '.join(body)}."

    def atoms(self) -> Iterator[Term]:
        if isinstance(self.head, ChoiceHead):
            yield from self.head.atoms
        elif isinstance(self.head, Term):
            yield self.head
        yield from self.pos
        yield from self.neg


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple[Rule, ...]

    @staticmethod
    def of(rules: Iterable[Rule], sort: bool = True) -> "GroundProgram":
        unique = list(dict.fromkeys(rules))
        if sort:
            unique.sort(key=lambda r: (r.family, r.render()))
        return GroundProgram(tuple(unique))

    def atoms(self) -> tuple[Term, ...]:
        seen: dict[Term, None] = {}
        for rule in self.rules:
            for atom in rule.atoms():
                seen.setdefault(atom)
        return tuple(sorted(seen, key=Term.render))

    def families(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for rule in self.rules:
            out[rule.family] = out.get(rule.family, 0) + 1
        return out

    def without_families(self, names: Iterable[str]) -> "GroundProgram":
        drop = set(names)
        return GroundProgram(tuple(r for r in self.rules if r.family not in drop))

    def extended(self, rules: Iterable[Rule]) -> "GroundProgram":
        return GroundProgram.of(tuple(self.rules) + tuple(rules))

    def render(self, provenance: bool = True) -> str:
        lines = [FORMAT_HEADER]
        for rule in self.rules:
            text = rule.render()
            if provenance:
                text = f"{text}  % {rule.family}"
            lines.append(text)
        return "\n".join(lines) + "\n"

    def __len__(self) -> int:
        return len(self.rules)


class ProgramSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _strip_comment(line: str) -> tuple[str, Optional[str]]:
    """Split off a trailing %-comment; '%' cannot occur inside atoms."""
    if "%" in line:
        code, comment = line.split("%", 1)
        return code.strip(), comment.strip() or None
    return line.strip(), None


def _parse_body(text: str, lineno: int) -> tuple[tuple[Term, ...], tuple[Term, ...]]:
    pos: list[Term] = []
    neg: list[Term] = []
    parser = _TermParser(text)
    first = True
    while parser.peek()[0] != "eof":
        if not first:
            if parser.peek()[0] != ",":
                raise ProgramSyntaxError(f"expected ',' in body, found {parser.peek()[1]!r}", lineno)
            parser.take(",")
        first = False
        negated = False
        if parser.peek()[0] == "name" and parser.peek()[1] == "not":
            parser.take()
            negated = True
        atom = parser.term()
        (neg if negated else pos).append(atom)
    return tuple(pos), tuple(neg)


def _parse_choice(text: str, lineno: int) -> ChoiceHead:
    open_brace = text.index("{")
    close_brace = text.rindex("}")
    lower_text = text[:open_brace].strip()
    upper_text = text[close_brace + 1 :].strip()
    try:
        lower = int(lower_text) if lower_text else 0
        upper = int(upper_text) if upper_text else 1
    except ValueError:
        raise ProgramSyntaxError("choice bounds must be integers", lineno) from None
    atoms = []
    for chunk in text[open_brace + 1 : close_brace].split(";"):
        chunk = chunk.strip()
        if not chunk:
            raise ProgramSyntaxError("empty atom in choice head", lineno)
        parser = _TermParser(chunk)
        atoms.append(parser.term())
        if parser.peek()[0] != "eof":
            raise ProgramSyntaxError(f"trailing input in choice atom {chunk!r}", lineno)
    try:
        return ChoiceHead(lower, upper, tuple(atoms))
    except ValueError as exc:
        raise ProgramSyntaxError(str(exc), lineno) from None


def parse_program(text: str, default_family: str = "input") -> GroundProgram:
    """Parse the text format back into a program, preserving rule order."""
    rules: list[Rule] = []
    lines = text.splitlines()
    start = 1 if lines and lines[0].strip() == FORMAT_HEADER else 0
    for lineno, raw in enumerate(lines[start:], start=start + 1):
        code, comment = _strip_comment(raw)
        if not code:
            continue
        if not code.endswith("."):
            raise ProgramSyntaxError("rule must end with '.'", lineno)
        code = code[:-1].strip()
        family = comment if comment else default_family
        if ":-" in code:
            head_text, body_text = code.split(":-", 1)
            head_text = head_text.strip()
            pos, neg = _parse_body(body_text.strip(), lineno)
        else:
            head_text, pos, neg = code, (), ()
        try:
            if not head_text:
                rules.append(Rule(None, pos, neg, family))
            elif "{" in head_text:
                rules.append(Rule(_parse_choice(head_text, lineno), pos, neg, family))
            else:
                parser = _TermParser(head_text)
                head = parser.term()
                if parser.peek()[0] != "eof":
                    raise ProgramSyntaxError("trailing input after head atom", lineno)
                rules.append(Rule(head, pos, neg, family))
        except TermSyntaxError as exc:
            raise ProgramSyntaxError(str(exc), lineno) from None
    return GroundProgram(tuple(rules))


def fact(atom: Term, family: str) -> Rule:
    return Rule(atom, (), (), family)


def constraint(pos: Sequence[Term], neg: Sequence[Term], family: str) -> Rule:
    return Rule(None, tuple(pos), tuple(neg), family)
