"""The problem file format: sorts, declarations, laws, goal and knowledge.

A problem file is a sequence of '.'-terminated statements:

    bplan problem v1.
    sort latch = {l1, l2}.
    fluent up(latch).          action open(latch).
    causes(open(L), up(L), {}).
    caused({-up(L)}, locked(s)).
    executable(open(l1), {holding(k1)}).
    initially(up(l1)).
    goal(-locked(s)).
    horizon(1).

Statements with capitalized variables are schemas; each variable's sort is
inferred from the declared argument positions it occupies and the statement
expands over all instantiations, filtered by an optional guard such as
``where M != N, M < N``.  Control knowledge is one of:

    temporal <constraint>.
    proc name(Vars) : <complex action>.   main <complex action>.
    main htn { programs { p: <body>. ... }
               constraints { lbl: order(p, q). precondition(f, p). ... } }.

Complex actions use ``;`` (sequence, binds tighter), ``|`` (choice),
``formula?`` (test), ``if c then u else u``, ``while c do u``,
``pick(V, {c, ...}, body)``, ``null``, and procedure calls.  Formulas are
prefix terms over ``and/or/negation/implies``, the temporal operators,
``goal(...)``, and ``exists/forall(V, {c, ...}, body)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .core import (
    DomainDescription,
    DynamicLaw,
    Executability,
    Signature,
    StaticLaw,
)
from .formulas import (
    Always,
    And,
    Eventually,
    Exists,
    Forall,
    Formula,
    Goal,
    Lit,
    Next,
    Not,
    Or,
    Until,
    implies,
)
from .planner import PlanningProblem, ProgramKnowledge, TemporalKnowledge
from .procedures import (
    Act,
    Alt,
    Call,
    ComplexAction,
    GeneralProgram,
    HTNNode,
    If,
    Maintain,
    NULL,
    Order,
    Pick,
    Postcondition,
    Precondition,
    Procedure,
    ProcedureTable,
    Seq,
    Test,
    While,
)
from .terms import Literal, Term, is_variable_term

PROBLEM_HEADER = "bplan problem v1."
PLAN_HEADER = "bplan plan v1."


class ProblemSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|[(){},.;:|?=<>-]|\[|\])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ProblemSyntaxError(f"unexpected character {text[i]!r}", line, col)
        chunk = m.group(0)
        kind = m.lastgroup or "op"
        if kind == "int" and chunk.startswith("-"):
            # Keep '-' as its own token so '-up(l1)' and 'M != -1' both work;
            # a bare integer never needs a signed lexeme here.
            tokens.append(Token("op", "-", line, col))
            tokens.append(Token("int", chunk[1:], line, col + 1))
        elif kind not in ("ws", "comment"):
            tokens.append(Token("int" if kind == "int" else ("name" if kind == "name" else "op"), chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rindex("\n")
        else:
            col += len(chunk)
        i = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass(frozen=True)
class Guard:
    left: Term
    op: str
    right: Term


@dataclass
class ProblemFile:
    """Parsed sections of a problem file, still schematic where written so."""

    sorts: dict[str, tuple[Term, ...]]
    signature: Signature
    domain: DomainDescription
    initial: frozenset[Literal]
    goal: Optional[frozenset[Literal]]
    horizon: Optional[int]
    temporal: Optional[Formula]
    program: Optional[GeneralProgram]

    def planning_problem(
        self,
        horizon: Optional[int] = None,
        max_fluents: int = 24,
    ) -> PlanningProblem:
        n = horizon if horizon is not None else self.horizon
        if n is None:
            raise ValueError("no horizon: give horizon(k) in the file or pass one explicitly")
        knowledge = None
        if self.temporal is not None:
            knowledge = TemporalKnowledge(self.temporal)
        elif self.program is not None:
            knowledge = ProgramKnowledge(self.program)
        return PlanningProblem(
            domain=self.domain,
            initial=self.initial,
            goal=self.goal,
            horizon=n,
            knowledge=knowledge,
            max_fluents=max_fluents,
        )


RESERVED_NAMES = frozenset(
    """
    and or negation implies exists forall until always eventually next goal
    null if then else while do pick main proc htn where not programs
    constraints sort caused causes executable initially horizon temporal
    fluent action seq alt sequence in choiceAction choiceArgs set order
    precondition postcondition maintain holds occ nocc possible time literal
    contrary hf hf_during trans begin end used not_used overlap nok between
    occurred formula no_choice
    """.split()
)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.sorts: dict[str, tuple[Term, ...]] = {}
        self.fluent_decls: dict[str, tuple[str, ...]] = {}
        self.action_decls: dict[str, tuple[str, ...]] = {}
        self.statics: list[StaticLaw] = []
        self.dynamics: list[DynamicLaw] = []
        self.executables: list[Executability] = []
        self.initial: set[Literal] = set()
        self.goal: Optional[set[Literal]] = None
        self.horizon: Optional[int] = None
        self.temporal: Optional[Formula] = None
        self.procs: list[tuple[str, tuple[str, ...], ComplexAction, Token]] = []
        self.main: Optional[ComplexAction] = None
        self.htn: Optional[HTNNode] = None
        self.auto_label = 0

    # -- token helpers -----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise ProblemSyntaxError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            self.error(f"expected {text!r}, found {tok.text!r}", tok)
        return tok

    def expect_name(self) -> Token:
        tok = self.next()
        if tok.kind != "name":
            self.error(f"expected a name, found {tok.text!r}", tok)
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text

    # -- terms ---------------------------------------------------------------

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "int":
            return Term(int(tok.text))
        if tok.text == "-":
            return Term("-", (self.term(),))
        if tok.kind != "name":
            self.error(f"expected a term, found {tok.text!r}", tok)
        if not self.at("("):
            return Term(tok.text)
        self.expect("(")
        args = [self.term()]
        while self.at(","):
            self.next()
            args.append(self.term())
        self.expect(")")
        return Term(tok.text, tuple(args))

    def literal(self) -> Literal:
        if self.at("-"):
            self.next()
            return Literal(self.term(), False)
        return Literal(self.term(), True)

    def literal_set(self) -> tuple[Literal, ...]:
        self.expect("{")
        lits: list[Literal] = []
        if not self.at("}"):
            lits.append(self.literal())
            while self.at(","):
                self.next()
                lits.append(self.literal())
        self.expect("}")
        return tuple(lits)

    def constant_list(self) -> tuple[Term, ...]:
        self.expect("{")
        out = [self.term()]
        while self.at(","):
            self.next()
            out.append(self.term())
        self.expect("}")
        return tuple(out)

    def guards(self) -> tuple[Guard, ...]:
        if not (self.peek().kind == "name" and self.peek().text == "where"):
            return ()
        self.next()
        out = []
        while True:
            left = self.term()
            op_tok = self.next()
            if op_tok.text not in ("=", "!=", "<", "<=", ">", ">="):
                self.error(f"expected a comparison operator, found {op_tok.text!r}", op_tok)
            right = self.term()
            out.append(Guard(left, op_tok.text, right))
            if self.at(","):
                self.next()
                continue
            break
        return tuple(out)

    # -- formulas --------------------------------------------------------------

    _BINARY = {"and": And, "or": Or, "until": Until}
    _UNARY = {"negation": Not, "always": Always, "eventually": Eventually,
              "next": Next, "goal": Goal}

    def formula(self) -> Formula:
        tok = self.peek()
        if tok.text == "-":
            self.next()
            return Lit(Literal(self.term(), False))
        if tok.kind != "name":
            self.error(f"expected a formula, found {tok.text!r}", tok)
        name = tok.text
        if name in ("exists", "forall"):
            self.next()
            self.expect("(")
            var = self.expect_name()
            if not var.text[:1].isupper():
                self.error("quantified variable must be capitalized", var)
            self.expect(",")
            constants = self.constant_list()
            self.expect(",")
            body = self.formula()
            self.expect(")")
            cls = Exists if name == "exists" else Forall
            return cls(var.text, constants, body)
        if name in self._BINARY or name == "implies":
            self.next()
            self.expect("(")
            left = self.formula()
            self.expect(",")
            right = self.formula()
            self.expect(")")
            if name == "implies":
                return implies(left, right)
            return self._BINARY[name](left, right)
        if name in self._UNARY:
            self.next()
            self.expect("(")
            sub = self.formula()
            self.expect(")")
            return self._UNARY[name](sub)
        return Lit(Literal(self.term(), True))

    # -- complex actions ---------------------------------------------------------

    _FORMULA_HEADS = {"and", "or", "negation", "implies", "exists", "forall"}

    def complex_action(self, params: frozenset[str]) -> ComplexAction:
        branches = [self.sequence_part(params)]
        while self.at("|"):
            self.next()
            branches.append(self.sequence_part(params))
        if len(branches) == 1:
            return branches[0]
        return Alt(tuple(branches))

    def sequence_part(self, params: frozenset[str]) -> ComplexAction:
        units = [self.unit(params)]
        while self.at(";"):
            self.next()
            units.append(self.unit(params))
        node = units[-1]
        for prev in reversed(units[:-1]):
            node = Seq(prev, node)
        return node

    def unit(self, params: frozenset[str]) -> ComplexAction:
        tok = self.peek()
        if tok.text in ("(", "["):
            closing = ")" if tok.text == "(" else "]"
            self.next()
            inner = self.complex_action(params)
            self.expect(closing)
            if self.at("?"):
                self.error("tests apply to formulas, not to complex actions", self.peek())
            return inner
        if tok.text == "if":
            self.next()
            condition = self.formula()
            self.expect("then")
            then_part = self.unit(params)
            else_part: ComplexAction = NULL
            if self.at("else"):
                self.next()
                else_part = self.unit(params)
            return If(condition, then_part, else_part)
        if tok.text == "while":
            self.next()
            condition = self.formula()
            self.expect("do")
            body = self.unit(params)
            return While(condition, body)
        if tok.text == "pick":
            self.next()
            self.expect("(")
            var = self.expect_name()
            if not var.text[:1].isupper():
                self.error("pick variable must be capitalized", var)
            self.expect(",")
            constants = self.constant_list()
            self.expect(",")
            body = self.complex_action(params | {var.text})
            self.expect(")")
            return Pick(var.text, constants, body)
        if tok.text == "null":
            self.next()
            return NULL
        if tok.text == "-" or tok.text in self._FORMULA_HEADS:
            phi = self.formula()
            self.expect("?")
            return Test(phi)
        if tok.kind != "name":
            self.error(f"expected a complex action, found {tok.text!r}", tok)
        term = self.term()
        if self.at("?"):
            self.next()
            return Test(Lit(Literal(term, True)))
        name = str(term.functor)
        if name in self.action_decls:
            return Act(term)
        if name in self.fluent_decls:
            self.error(f"fluent test {term.render()} needs a trailing '?'", tok)
        return Call(name, term.args)

    # -- statements -----------------------------------------------------------

    def parse(self) -> ProblemFile:
        self.header()
        while self.peek().kind != "eof":
            self.statement()
        return self.finish()

    def header(self):
        tok = self.peek()
        words = []
        while not self.at("."):
            if self.peek().kind == "eof":
                self.error("missing problem header", tok)
            words.append(self.next().text)
        self.expect(".")
        if " ".join(words) != "bplan problem v1":
            self.error(f"expected header {PROBLEM_HEADER!r}", tok)

    def statement(self):
        tok = self.peek()
        if tok.kind != "name":
            self.error(f"expected a statement keyword, found {tok.text!r}", tok)
        keyword = tok.text
        handler = {
            "sort": self.stmt_sort,
            "fluent": self.stmt_fluent,
            "action": self.stmt_action,
            "caused": self.stmt_caused,
            "causes": self.stmt_causes,
            "executable": self.stmt_executable,
            "initially": self.stmt_initially,
            "goal": self.stmt_goal,
            "horizon": self.stmt_horizon,
            "temporal": self.stmt_temporal,
            "proc": self.stmt_proc,
            "main": self.stmt_main,
        }.get(keyword)
        if handler is None:
            self.error(f"unknown keyword {keyword!r}", tok)
        self.next()
        handler(tok)
        self.expect(".")

    def stmt_sort(self, tok: Token):
        name = self.expect_name()
        self._check_fresh_name(name)
        if name.text in self.sorts:
            self.error(f"sort {name.text} declared twice", name)
        self.expect("=")
        self.sorts[name.text] = self.constant_list()

    def _check_fresh_name(self, tok: Token):
        if tok.text in RESERVED_NAMES:
            self.error(f"{tok.text!r} is reserved by the encoding", tok)

    def _decl(self, kind: str) -> tuple[str, tuple[str, ...]]:
        name = self.expect_name()
        self._check_fresh_name(name)
        args: list[str] = []
        if self.at("("):
            self.next()
            args.append(self.expect_name().text)
            while self.at(","):
                self.next()
                args.append(self.expect_name().text)
            self.expect(")")
        for sort in args:
            if sort not in self.sorts:
                self.error(f"unknown sort {sort!r} in {kind} declaration", name)
        if name.text in self.fluent_decls or name.text in self.action_decls:
            self.error(f"{name.text} declared twice", name)
        return name.text, tuple(args)

    def stmt_fluent(self, tok: Token):
        name, args = self._decl("fluent")
        self.fluent_decls[name] = args

    def stmt_action(self, tok: Token):
        name, args = self._decl("action")
        self.action_decls[name] = args

    def stmt_caused(self, tok: Token):
        self.expect("(")
        body = self.literal_set()
        self.expect(",")
        head = self.literal()
        self.expect(")")
        guards = self.guards()
        for subst in self.expansions(list(body) + [head], [], guards, tok):
            self.statics.append(
                StaticLaw(
                    frozenset(self.ground_literal(l, subst, tok) for l in body),
                    self.ground_literal(head, subst, tok),
                )
            )

    def stmt_causes(self, tok: Token):
        self.expect("(")
        action = self.term()
        self.expect(",")
        effect = self.literal()
        self.expect(",")
        condition = self.literal_set()
        self.expect(")")
        guards = self.guards()
        for subst in self.expansions([effect] + list(condition), [action], guards, tok):
            self.dynamics.append(
                DynamicLaw(
                    self.ground_action(action, subst, tok),
                    self.ground_literal(effect, subst, tok),
                    frozenset(self.ground_literal(l, subst, tok) for l in condition),
                )
            )

    def stmt_executable(self, tok: Token):
        self.expect("(")
        action = self.term()
        self.expect(",")
        condition = self.literal_set()
        self.expect(")")
        guards = self.guards()
        for subst in self.expansions(list(condition), [action], guards, tok):
            self.executables.append(
                Executability(
                    self.ground_action(action, subst, tok),
                    frozenset(self.ground_literal(l, subst, tok) for l in condition),
                )
            )

    def stmt_initially(self, tok: Token):
        self.expect("(")
        lit = self.literal()
        self.expect(")")
        guards = self.guards()
        for subst in self.expansions([lit], [], guards, tok):
            self.initial.add(self.ground_literal(lit, subst, tok))

    def stmt_goal(self, tok: Token):
        self.expect("(")
        lits = [self.literal()]
        while self.at(","):
            self.next()
            lits.append(self.literal())
        self.expect(")")
        if self.goal is None:
            self.goal = set()
        for lit in lits:
            if _literal_variables(lit):
                self.error("goal literals must be ground", tok)
            self.goal.add(lit)

    def stmt_horizon(self, tok: Token):
        self.expect("(")
        num = self.next()
        if num.kind != "int" or int(num.text) < 0:
            self.error("horizon must be a nonnegative integer", num)
        self.expect(")")
        if self.horizon is not None:
            self.error("horizon given twice", tok)
        self.horizon = int(num.text)

    def stmt_temporal(self, tok: Token):
        if self.temporal is not None:
            self.error("only one temporal statement is supported", tok)
        self.temporal = self.formula()

    def stmt_proc(self, tok: Token):
        name = self.expect_name()
        self._check_fresh_name(name)
        params: list[str] = []
        if self.at("("):
            self.next()
            while True:
                var = self.expect_name()
                if not var.text[:1].isupper():
                    self.error("procedure parameters must be capitalized variables", var)
                params.append(var.text)
                if self.at(","):
                    self.next()
                    continue
                break
            self.expect(")")
        self.expect(":")
        body = self.complex_action(frozenset(params))
        self.procs.append((name.text, tuple(params), body, tok))

    def stmt_main(self, tok: Token):
        if self.main is not None or self.htn is not None:
            self.error("only one main program is supported", tok)
        if self.at("htn"):
            self.next()
            self.htn = self.htn_block(tok)
        else:
            self.main = self.complex_action(frozenset())

    def htn_block(self, tok: Token) -> HTNNode:
        self.expect("{")
        self.expect("programs")
        self.expect("{")
        members: list[tuple[str, ComplexAction]] = []
        while not self.at("}"):
            name = self.expect_name()
            self.expect(":")
            body = self.complex_action(frozenset())
            self.expect(".")
            members.append((name.text, body))
        self.expect("}")
        constraints: list = []
        if self.at("constraints"):
            self.next()
            self.expect("{")
            while not self.at("}"):
                constraints.append(self.htn_constraint())
                self.expect(".")
            self.expect("}")
        self.expect("}")
        return HTNNode(tuple(members), tuple(constraints))

    def htn_constraint(self):
        first = self.expect_name()
        label = None
        kind = first.text
        if self.at(":"):
            label = first.text
            self.next()
            kind = self.expect_name().text
        if label is None:
            label = f"c{self.auto_label}"
            self.auto_label += 1
        self.expect("(")
        if kind == "order":
            before = self.expect_name().text
            self.expect(",")
            after = self.expect_name().text
            self.expect(")")
            return Order(label, before, after)
        if kind == "precondition":
            phi = self.formula()
            self.expect(",")
            prog = self.expect_name().text
            self.expect(")")
            return Precondition(label, phi, prog)
        if kind == "postcondition":
            prog = self.expect_name().text
            self.expect(",")
            phi = self.formula()
            self.expect(")")
            return Postcondition(label, prog, phi)
        if kind == "maintain":
            before = self.expect_name().text
            self.expect(",")
            phi = self.formula()
            self.expect(",")
            after = self.expect_name().text
            self.expect(")")
            return Maintain(label, before, phi, after)
        self.error(f"unknown constraint kind {kind!r}", first)

    # -- schematic expansion -------------------------------------------------

    def _positions(self, term: Term, is_action: bool, tok: Token) -> dict[str, str]:
        """Variable -> sort bindings from one declared atom occurrence."""
        decls = self.action_decls if is_action else self.fluent_decls
        name = str(term.functor)
        if name not in decls:
            kind = "action" if is_action else "fluent"
            self.error(f"unknown {kind} name {name!r}", tok)
        sorts = decls[name]
        if len(sorts) != len(term.args):
            self.error(f"{name} expects {len(sorts)} arguments, got {len(term.args)}", tok)
        out: dict[str, str] = {}
        for arg, sort in zip(term.args, sorts):
            if is_variable_term(arg):
                out[str(arg.functor)] = sort
            elif arg.args:
                self.error(f"nested terms are not allowed in {name}", tok)
            elif arg not in self.sorts[sort]:
                self.error(f"constant {arg.render()} is not in sort {sort}", tok)
        return out

    def expansions(
        self,
        literals: Sequence[Literal],
        actions: Sequence[Term],
        guards: tuple[Guard, ...],
        tok: Token,
    ) -> Iterable[dict[str, Term]]:
        binding: dict[str, str] = {}
        for lit in literals:
            for var, sort in self._positions(lit.atom, False, tok).items():
                if binding.setdefault(var, sort) != sort:
                    self.error(f"variable {var} used at sorts {binding[var]} and {sort}", tok)
        for action in actions:
            for var, sort in self._positions(action, True, tok).items():
                if binding.setdefault(var, sort) != sort:
                    self.error(f"variable {var} used at sorts {binding[var]} and {sort}", tok)
        for guard in guards:
            for side in (guard.left, guard.right):
                if is_variable_term(side) and str(side.functor) not in binding:
                    self.error(f"guard variable {side.render()} has no inferable sort", tok)
        names = sorted(binding)
        import itertools

        for combo in itertools.product(*(self.sorts[binding[v]] for v in names)):
            subst = dict(zip(names, combo))
            if all(self._guard_holds(g, subst, tok) for g in guards):
                yield subst

    def _guard_holds(self, guard: Guard, subst: dict[str, Term], tok: Token) -> bool:
        def value(side: Term) -> Term:
            if is_variable_term(side):
                return subst[str(side.functor)]
            return side

        left, right = value(guard.left), value(guard.right)
        if guard.op == "=":
            return left == right
        if guard.op == "!=":
            return left != right
        if not isinstance(left.functor, int) or not isinstance(right.functor, int):
            self.error("ordered guards need integer constants", tok)
        lv, rv = left.functor, right.functor
        return {"<": lv < rv, "<=": lv <= rv, ">": lv > rv, ">=": lv >= rv}[guard.op]

    def ground_literal(self, lit: Literal, subst: dict[str, Term], tok: Token) -> Literal:
        return Literal(self._subst(lit.atom, subst, tok), lit.positive)

    def ground_action(self, term: Term, subst: dict[str, Term], tok: Token) -> Term:
        return self._subst(term, subst, tok)

    def _subst(self, term: Term, subst: dict[str, Term], tok: Token) -> Term:
        if is_variable_term(term):
            name = str(term.functor)
            if name not in subst:
                self.error(f"unbound variable {name}", tok)
            return subst[name]
        if not term.args:
            return term
        return Term(term.functor, tuple(self._subst(a, subst, tok) for a in term.args))

    # -- assembly ---------------------------------------------------------------

    def finish(self) -> ProblemFile:
        objects = sorted(
            {c for consts in self.sorts.values() for c in consts}, key=Term.render
        )
        signature = Signature.make_sorted(
            objects,
            {name: tuple(self.sorts[s] for s in args) for name, args in self.action_decls.items()},
            {name: tuple(self.sorts[s] for s in args) for name, args in self.fluent_decls.items()},
        )
        domain = DomainDescription(
            signature,
            frozenset(self.statics),
            frozenset(self.dynamics),
            frozenset(self.executables),
        )
        program = self._assemble_program()
        if self.temporal is not None and program is not None:
            raise ValueError("temporal and procedural knowledge cannot be combined")
        return ProblemFile(
            sorts=dict(self.sorts),
            signature=signature,
            domain=domain,
            initial=frozenset(self.initial),
            goal=frozenset(self.goal) if self.goal is not None else None,
            horizon=self.horizon,
            temporal=self.temporal,
            program=program,
        )

    def _assemble_program(self) -> Optional[GeneralProgram]:
        if self.main is None and self.htn is None:
            if self.procs:
                name, _, _, tok = self.procs[0]
                self.error(f"procedure {name} declared but no main program given", tok)
            return None
        table = ProcedureTable()
        domains = self._infer_proc_domains()
        for name, params, body, tok in self.procs:
            table.add(Procedure(name, params, tuple(domains[(name, p)] for p in params), body))
        main: Union[ComplexAction, HTNNode] = self.htn if self.htn is not None else self.main
        return GeneralProgram(table, main)

    def _infer_proc_domains(self) -> dict[tuple[str, str], tuple[Term, ...]]:
        """Fix each procedure parameter's instantiation set.

        Parameters pick up the sort of any declared fluent/action argument
        position they occupy in the body, propagated through procedure calls
        until a fixpoint; anything left over falls back to all objects.
        """
        sorts_of: dict[tuple[str, str], str] = {}
        arity: dict[str, tuple[str, ...]] = {name: params for name, params, _, _ in self.procs}

        def scan_term(term: Term, proc: str, out: dict[tuple[str, str], str], is_action: bool):
            decls = self.action_decls if is_action else self.fluent_decls
            name = str(term.functor)
            sorts = decls.get(name)
            if sorts is None:
                return
            for arg, sort in zip(term.args, sorts):
                if is_variable_term(arg):
                    out.setdefault((proc, str(arg.functor)), sort)

        def scan_formula(phi: Formula, proc: str, out):
            from .formulas import subformulas

            for sub in subformulas(phi):
                if isinstance(sub, Lit):
                    scan_term(sub.literal.atom, proc, out, is_action=False)

        def scan(node: ComplexAction, proc: str, out):
            if isinstance(node, Act):
                scan_term(node.action, proc, out, is_action=True)
            elif isinstance(node, Test):
                scan_formula(node.formula, proc, out)
            elif isinstance(node, Seq):
                scan(node.first, proc, out)
                scan(node.second, proc, out)
            elif isinstance(node, Alt):
                for b in node.branches:
                    scan(b, proc, out)
            elif isinstance(node, If):
                scan_formula(node.condition, proc, out)
                scan(node.then_part, proc, out)
                scan(node.else_part, proc, out)
            elif isinstance(node, While):
                scan_formula(node.condition, proc, out)
                scan(node.body, proc, out)
            elif isinstance(node, Pick):
                scan(node.body, proc, out)
            elif isinstance(node, Call):
                callee_params = arity.get(node.name)
                if callee_params is None:
                    return
                for arg, param in zip(node.args, callee_params):
                    if is_variable_term(arg) and (node.name, param) in sorts_of:
                        sorts_of.setdefault((proc, str(arg.functor)), sorts_of[(node.name, param)])

        for name, params, body, _ in self.procs:
            scan(body, name, sorts_of)
        changed = True
        while changed:
            before = len(sorts_of)
            for name, params, body, _ in self.procs:
                scan(body, name, sorts_of)
            changed = len(sorts_of) != before

        all_objects = tuple(
            sorted({c for consts in self.sorts.values() for c in consts}, key=Term.render)
        )
        out: dict[tuple[str, str], tuple[Term, ...]] = {}
        for name, params, _, _ in self.procs:
            for p in params:
                sort = sorts_of.get((name, p))
                out[(name, p)] = self.sorts[sort] if sort else all_objects
        return out


def parse_problem(text: str) -> ProblemFile:
    return _Parser(text).parse()


def _literal_variables(lit: Literal) -> set[str]:
    from .terms import term_variables

    return term_variables(lit.atom)


# Plan files ---------------------------------------------------------------------


def parse_plan(text: str) -> tuple[Term, ...]:
    """A plan file: the header, then one ``index: action.`` line per step."""
    lines = [l for l in (raw.split("%", 1)[0].strip() for raw in text.splitlines()) if l]
    if not lines or lines[0] != PLAN_HEADER:
        raise ValueError(f"plan file must start with {PLAN_HEADER!r}")
    steps: dict[int, Term] = {}
    from .terms import parse_term

    for line in lines[1:]:
        if not line.endswith("."):
            raise ValueError(f"plan step must end with '.': {line!r}")
        body = line[:-1]
        if ":" not in body:
            raise ValueError(f"plan step must look like 'index: action.': {line!r}")
        index_text, action_text = body.split(":", 1)
        index = int(index_text.strip())
        if index in steps:
            raise ValueError(f"duplicate plan step {index}")
        steps[index] = parse_term(action_text.strip())
    if set(steps) != set(range(len(steps))):
        raise ValueError("plan steps must be consecutive from 0")
    return tuple(steps[i] for i in range(len(steps)))


def render_plan(actions: Sequence[Term]) -> str:
    lines = [PLAN_HEADER]
    for i, action in enumerate(actions):
        lines.append(f"{i}: {action.render()}.")
    return "\n".join(lines) + "\n"
