"""Compile planning problems and control knowledge into ground logic programs.

The base program over time points ``0..n`` contains, per rule family:

* declarations: ``action/1``, ``fluent/1``, ``time/1`` facts, ``literal`` and
  ``contrary`` rules;
* the theory: initial ``holds`` facts, one ``possible`` rule per
  executability condition, one ``holds(effect, T+1)`` rule per dynamic law
  (guarded by ``occ`` and ``possible``), one ``holds(head, T)`` rule per
  static law;
* action generation: ``occ/nocc`` with negation as failure (or, behind a
  flag, one ``0 {occ...} 1`` choice per time point plus executability and
  forcing constraints);
* inertia rules and the consistency constraint;
* when a goal conjunction is given, ``goal :- holds(p1,n), ...`` and the
  constraint ``:- not goal``.

Control knowledge stacks on top: constraint-satisfaction rules (``hf``,
``hf_during``) for temporal formulas, ``trans`` rules for programs, and the
``begin``/``end``/``nok`` machinery for HTN nodes, grounded over all interval
pairs ``0 <= T1 <= T2 <= n`` (the documented scaling bottleneck).

One deliberate grounding choice: ``next`` at the final time point re-checks
its operand at ``n``.  Under the repeat-last-state reading of finite
sequences the tails from ``n`` and ``n+1`` coincide, so this keeps the rules
aligned with the satisfaction relation; leaving the body at the nonexistent
point ``n+1`` would silently falsify ``next`` at the horizon.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .core import DomainDescription, State, ground_actions, ground_fluents
from .formulas import (
    Formula,
    FormulaError,
    Goal,
    Lit,
    encode_formula,
    formula_name,
    goal_literals_of,
    ground_quantifiers,
    is_goal_dependent,
    validate_temporal,
)
from .ground import ChoiceHead, GroundProgram, Rule, constraint, fact
from .procedures import GeneralProgram, ProgramEncoding, encode_program
from .terms import Literal, Term

GOAL_ATOM = Term("goal")


class EncodingError(ValueError):
    pass


def _t(i: int) -> Term:
    return Term(i)


def holds(lit: Literal, t: int) -> Term:
    return Term("holds", (lit.as_term(), _t(t)))


def occ(action: Term, t: int) -> Term:
    return Term("occ", (action, _t(t)))


def possible(action: Term, t: int) -> Term:
    return Term("possible", (action, _t(t)))


def hf(name: Term, t: int) -> Term:
    return Term("hf", (name, _t(t)))


def trans(name: Term, t1: int, t2: int) -> Term:
    return Term("trans", (name, _t(t1), _t(t2)))


def _literal_decls(domain: DomainDescription) -> list[Rule]:
    rules = []
    for f in ground_fluents(domain.signature):
        fl = Term("fluent", (f,))
        p, m = Literal(f, True).as_term(), Literal(f, False).as_term()
        rules.append(fact(fl, "decl-fluent"))
        rules.append(Rule(Term("literal", (p,)), (fl,), (), "literal-pos"))
        rules.append(Rule(Term("literal", (m,)), (fl,), (), "literal-neg"))
        rules.append(Rule(Term("contrary", (p, m)), (fl,), (), "contrary-pos"))
        rules.append(Rule(Term("contrary", (m, p)), (fl,), (), "contrary-neg"))
    return rules


def encode_base(
    domain: DomainDescription,
    initial: frozenset[Literal],
    goal: Optional[Iterable[Literal]],
    n: int,
    occ_encoding: str = "rules",
) -> GroundProgram:
    """The horizon-``n`` planning program for a theory and a literal-conjunction goal.

    ``goal=None`` omits the goal rule and its constraint (used when a program
    constraint replaces them).  ``occ_encoding`` selects between the
    negation-as-failure generator and the choice-rule variant.
    """
    if n < 0:
        raise EncodingError("horizon must be >= 0")
    if occ_encoding not in ("rules", "choice"):
        raise EncodingError(f"unknown occ encoding {occ_encoding!r}")
    rules: list[Rule] = []
    actions = ground_actions(domain.signature)
    times = range(n + 1)

    for t in times:
        rules.append(fact(Term("time", (_t(t),)), "decl-time"))
    for a in actions:
        rules.append(fact(Term("action", (a,)), "decl-action"))
    rules.extend(_literal_decls(domain))

    for lit in initial:
        rules.append(fact(holds(lit, 0), "init"))

    for prop in domain.executables:
        for t in times:
            body = [Term("time", (_t(t),))] + [holds(p, t) for p in sorted(prop.condition, key=Literal.render)]
            rules.append(Rule(possible(prop.action, t), tuple(body), (), "executable"))

    for law in domain.dynamics:
        for t in times:
            body = [Term("time", (_t(t),)), occ(law.action, t), possible(law.action, t)]
            body += [holds(p, t) for p in sorted(law.condition, key=Literal.render)]
            rules.append(Rule(holds(law.effect, t + 1), tuple(body), (), "dynamic"))

    for law in domain.statics:
        for t in times:
            body = [Term("time", (_t(t),))] + [holds(p, t) for p in sorted(law.body, key=Literal.render)]
            rules.append(Rule(holds(law.head, t), tuple(body), (), "static"))

    if occ_encoding == "rules":
        for a in actions:
            for t in times:
                rules.append(
                    Rule(
                        occ(a, t),
                        (Term("action", (a,)), Term("time", (_t(t),)), possible(a, t)),
                        (Term("nocc", (a, _t(t))),),
                        "occ-gen",
                    )
                )
                for b in actions:
                    if b == a:
                        continue
                    rules.append(
                        Rule(
                            Term("nocc", (a, _t(t))),
                            (Term("action", (a,)), Term("action", (b,)), Term("time", (_t(t),)), occ(b, t)),
                            (),
                            "nocc-gen",
                        )
                    )
    else:
        for t in times:
            head = ChoiceHead(0, 1, tuple(occ(a, t) for a in actions))
            rules.append(Rule(head, (Term("time", (_t(t),)),), (), "occ-choice"))
            for a in actions:
                rules.append(constraint([occ(a, t)], [possible(a, t)], "occ-choice-exec"))
                rules.append(Rule(Term("occurred", (_t(t),)), (occ(a, t),), (), "occ-choice-occurred"))
                rules.append(constraint([possible(a, t)], [Term("occurred", (_t(t),))], "occ-choice-forced"))

    for f in ground_fluents(domain.signature):
        pl, ml = Literal(f, True), Literal(f, False)
        for t in times:
            for keep, contrary in ((pl, ml), (ml, pl)):
                rules.append(
                    Rule(
                        holds(keep, t + 1),
                        (
                            Term("literal", (keep.as_term(),)),
                            Term("literal", (contrary.as_term(),)),
                            Term("time", (_t(t),)),
                            Term("contrary", (keep.as_term(), contrary.as_term())),
                            holds(keep, t),
                        ),
                        (holds(contrary, t + 1),),
                        "inertia",
                    )
                )
            rules.append(
                constraint(
                    [Term("fluent", (f,)), holds(pl, t), holds(ml, t)],
                    [],
                    "consistency",
                )
            )

    if goal is not None:
        goal_lits = sorted(set(goal), key=Literal.render)
        rules.append(Rule(GOAL_ATOM, tuple(holds(p, n) for p in goal_lits), (), "goal-def"))
        rules.append(constraint([], [GOAL_ATOM], "goal-constraint"))

    return GroundProgram.of(rules)


# Formula-satisfaction rules ---------------------------------------------------


def _merge_tables(formulas: Sequence[Formula]) -> list[tuple[Term, tuple[Term, ...]]]:
    merged: dict[Term, tuple[Term, ...]] = {}
    order: list[Term] = []
    for phi in formulas:
        for name, facts in encode_formula(phi).facts:
            if name not in merged:
                merged[name] = facts
                order.append(name)
    return [(name, merged[name]) for name in order]


def _formula_rules(
    domain: DomainDescription,
    table: list[tuple[Term, tuple[Term, ...]]],
    n: int,
) -> list[Rule]:
    """Ground constraint-satisfaction rules for every named formula.

    Instantiated per operator fact; existential operators range over later
    time points up to the horizon, ``always`` delegates to ``hf_during`` up
    to ``n``, and ``next`` clamps at the horizon (see the module docstring).
    """
    rules: list[Rule] = []
    times = range(n + 1)

    for f in ground_fluents(domain.signature):
        for lit in (Literal(f, True), Literal(f, False)):
            lt = lit.as_term()
            rules.append(
                Rule(Term("formula", (lt,)), (Term("literal", (lt,)),), (), "formula-literal-decl")
            )
            for t in times:
                rules.append(
                    Rule(
                        hf(lt, t),
                        (Term("literal", (lt,)), holds(lit, t)),
                        (),
                        "hf-literal",
                    )
                )

    during_operands: set[Term] = set()
    for name, facts in table:
        for f in facts:
            rules.append(fact(f, "formula-table"))
        op = next((f for f in facts if f.functor != "formula"), None)
        if op is None:
            continue
        pred = str(op.functor)
        formula_atom = Term("formula", (name,))
        if pred == "and":
            _, n1, n2 = op.args
            for t in times:
                rules.append(Rule(hf(name, t), (formula_atom, op, hf(n1, t), hf(n2, t)), (), "hf-and"))
        elif pred == "or":
            _, n1, n2 = op.args
            for t in times:
                rules.append(Rule(hf(name, t), (formula_atom, op, hf(n1, t)), (), "hf-or-left"))
                rules.append(Rule(hf(name, t), (formula_atom, op, hf(n2, t)), (), "hf-or-right"))
        elif pred == "negation":
            _, n1 = op.args
            for t in times:
                rules.append(Rule(hf(name, t), (formula_atom, op), (hf(n1, t),), "hf-negation"))
        elif pred == "until":
            # The witness point itself is only constrained by the right
            # operand; the left operand runs through the points strictly
            # before it, so the inclusive hf_during chain stops one short.
            _, n1, n2 = op.args
            during_operands.add(n1)
            for t in times:
                rules.append(Rule(hf(name, t), (formula_atom, op, hf(n2, t)), (), "hf-until"))
                for t2 in range(t + 1, n + 1):
                    rules.append(
                        Rule(
                            hf(name, t),
                            (
                                formula_atom,
                                op,
                                Term("hf_during", (n1, _t(t), _t(t2 - 1))),
                                hf(n2, t2),
                            ),
                            (),
                            "hf-until",
                        )
                    )
        elif pred == "always":
            _, n1 = op.args
            during_operands.add(n1)
            for t in times:
                rules.append(
                    Rule(
                        hf(name, t),
                        (formula_atom, op, Term("hf_during", (n1, _t(t), _t(n)))),
                        (),
                        "hf-always",
                    )
                )
        elif pred == "eventually":
            _, n1 = op.args
            for t in times:
                for t2 in range(t, n + 1):
                    rules.append(Rule(hf(name, t), (formula_atom, op, hf(n1, t2)), (), "hf-eventually"))
        elif pred == "next":
            _, n1 = op.args
            for t in times:
                rules.append(
                    Rule(hf(name, t), (formula_atom, op, hf(n1, min(t + 1, n))), (), "hf-next")
                )
        else:
            raise EncodingError(f"unknown operator fact {op.render()}")

    for operand in sorted(during_operands, key=Term.render):
        for t in times:
            rules.append(
                Rule(Term("hf_during", (operand, _t(t), _t(t))), (hf(operand, t),), (), "hf-during-base")
            )
            for t2 in range(t + 1, n + 1):
                rules.append(
                    Rule(
                        Term("hf_during", (operand, _t(t), _t(t2))),
                        (hf(operand, t), Term("hf_during", (operand, _t(t + 1), _t(t2)))),
                        (),
                        "hf-during-step",
                    )
                )
    return rules


def encode_temporal(
    base: GroundProgram,
    domain: DomainDescription,
    phi: Formula,
    goal: Optional[Iterable[Literal]],
    n: int,
) -> GroundProgram:
    """Add a temporal constraint to a base program.

    Goal-independent constraints need only the satisfaction rules, the
    formula's fact table and the constraint that the formula holds at time 0.
    A goal-dependent constraint additionally asserts ``hf`` for every goal
    operator whose literal belongs to the planning goal, at every time point.
    """
    validate_temporal(phi, planning_mode=True)
    grounded = ground_quantifiers(phi)
    rules = _formula_rules(domain, _merge_tables([grounded]), n)
    rules.append(constraint([], [hf(formula_name(grounded), 0)], "temporal-constraint"))
    if is_goal_dependent(grounded):
        if goal is None:
            raise EncodingError("goal-dependent constraint requires a goal")
        goal_set = set(goal)
        for lit in goal_literals_of(grounded):
            if lit in goal_set:
                name = formula_name(Goal(Lit(lit)))
                for t in range(n + 1):
                    rules.append(
                        Rule(hf(name, t), (Term("time", (_t(t),)),), (), "goal-hf")
                    )
    return base.extended(rules)


# Program (trans) rules --------------------------------------------------------


def _trans_rules(
    domain: DomainDescription,
    encoding: ProgramEncoding,
    table: list[tuple[Term, tuple[Term, ...]]],
    n: int,
) -> list[Rule]:
    rules: list[Rule] = []
    times = range(n + 1)

    for a in ground_actions(domain.signature):
        for t in range(n):
            rules.append(
                Rule(trans(a, t, t + 1), (Term("action", (a,)), occ(a, t)), (), "trans-action")
            )

    formula_names = [
        Literal(f, sign).as_term()
        for f in ground_fluents(domain.signature)
        for sign in (True, False)
    ] + [name for name, _ in table]
    for name in formula_names:
        for t in times:
            rules.append(
                Rule(trans(name, t, t), (Term("formula", (name,)), hf(name, t)), (), "trans-test")
            )

    for t in times:
        rules.append(fact(trans(Term("null"), t, t), "trans-null"))

    for f in encoding.facts:
        pred = str(f.functor)
        if pred == "sequence":
            name, first, second = f.args
            for t1 in times:
                for t2 in range(t1, n + 1):
                    for tm in range(t1, t2 + 1):
                        rules.append(
                            Rule(
                                trans(name, t1, t2),
                                (f, trans(first, t1, tm), trans(second, tm, t2)),
                                (),
                                "trans-seq",
                            )
                        )
        elif pred == "in" and len(f.args) == 2:
            member, group = f.args
            if group in (Term("htn_programs"), Term("htn_constraints")):
                continue
            choice_fact = Term("choiceAction", (group,))
            for t1 in times:
                for t2 in range(t1, n + 1):
                    rules.append(
                        Rule(
                            trans(group, t1, t2),
                            (choice_fact, f, trans(member, t1, t2)),
                            (),
                            "trans-alt",
                        )
                    )
        elif pred == "if":
            name, cond, then_name, else_name = f.args
            for t1 in times:
                for t2 in range(t1, n + 1):
                    rules.append(
                        Rule(trans(name, t1, t2), (f, hf(cond, t1), trans(then_name, t1, t2)), (), "trans-if-then")
                    )
                    rules.append(
                        Rule(
                            trans(name, t1, t2),
                            (f, trans(else_name, t1, t2)),
                            (hf(cond, t1),),
                            "trans-if-else",
                        )
                    )
        elif pred == "while":
            name, cond, body = f.args
            for t1 in times:
                for t2 in range(t1, n + 1):
                    for tm in range(t1 + 1, t2 + 1):
                        rules.append(
                            Rule(
                                trans(name, t1, t2),
                                (f, hf(cond, t1), trans(body, t1, tm), trans(name, tm, t2)),
                                (),
                                "trans-while-loop",
                            )
                        )
                rules.append(
                    Rule(trans(name, t1, t1), (f,), (hf(cond, t1),), "trans-while-exit")
                )
        elif pred == "choiceArgs":
            name, instance = f.args
            for t1 in times:
                for t2 in range(t1, n + 1):
                    rules.append(
                        Rule(trans(name, t1, t2), (f, trans(instance, t1, t2)), (), "trans-pick")
                    )
    return rules


def _program_fact_rules(encoding: ProgramEncoding) -> list[Rule]:
    return [fact(f, "program-table") for f in encoding.facts]


def encode_golog(
    base: GroundProgram,
    domain: DomainDescription,
    program: GeneralProgram,
    n: int,
    enforce_goal: bool = False,
) -> GroundProgram:
    """Add a procedural program: formula rules, ``trans`` rules, the program
    facts, and the constraint that the top-level program unfolds over 0..n.

    The base goal constraint is dropped unless ``enforce_goal`` keeps it (a
    supplied goal then filters traces by final state as well).
    """
    encoding = encode_program(program)
    if encoding.is_htn:
        raise EncodingError("HTN nodes go through encode_htn")
    return _knowledge_program(base, domain, program, encoding, n, enforce_goal, [])


def encode_htn(
    base: GroundProgram,
    domain: DomainDescription,
    program: GeneralProgram,
    n: int,
    enforce_goal: bool = False,
    choice_mode: str = "native",
) -> GroundProgram:
    """Add an HTN program: everything the procedural encoding adds, plus the
    interval bookkeeping (``begin``/``end`` choices, coverage, overlap) and
    the ``nok`` violation rules, grounded over all interval pairs.

    ``choice_mode="expand"`` eliminates the cardinality heads into normal
    rules with fresh mutual-exclusion atoms instead of keeping native choice
    rules; the two variants have the same answer sets up to the fresh atoms.
    """
    if choice_mode not in ("native", "expand"):
        raise EncodingError(f"unknown choice mode {choice_mode!r}")
    encoding = encode_program(program)
    if not encoding.is_htn:
        raise EncodingError("encode_htn expects a program with a top-level HTN node")
    extra = _htn_rules(encoding, n)
    result = _knowledge_program(base, domain, program, encoding, n, enforce_goal, extra)
    if choice_mode == "expand":
        from .solver import expand_program

        result = expand_program(result)
    return result


def _knowledge_program(
    base: GroundProgram,
    domain: DomainDescription,
    program: GeneralProgram,
    encoding: ProgramEncoding,
    n: int,
    enforce_goal: bool,
    extra: list[Rule],
) -> GroundProgram:
    table = _merge_tables(encoding.formulas)
    rules = _formula_rules(domain, table, n)
    rules += _trans_rules(domain, encoding, table, n)
    rules += _program_fact_rules(encoding)
    rules += extra
    rules.append(constraint([], [trans(encoding.main_name, 0, n)], "trans-constraint"))
    stripped = base if enforce_goal else base.without_families(["goal-constraint"])
    return stripped.extended(rules)


def _htn_rules(encoding: ProgramEncoding, n: int) -> list[Rule]:
    rules: list[Rule] = []
    htn_fact = next(f for f in encoding.facts if f.functor == "htn")
    node, set_name, cons_name = htn_fact.args
    members = [f.args[0] for f in encoding.facts if f.functor == "in" and f.args[1] == set_name]
    constraints = {
        str(f.functor): [g for g in encoding.facts if g.functor == f.functor]
        for f in encoding.facts
        if f.functor in ("order", "precondition", "postcondition", "maintain")
    }
    intervals = [(t1, t2) for t1 in range(n + 1) for t2 in range(t1, n + 1)]

    for t1, t2 in intervals:
        for t3 in range(t1, t2 + 1):
            rules.append(fact(Term("between", (_t(t3), _t(t1), _t(t2))), "between"))

    time_terms = {t: _t(t) for t in range(n + 1)}
    member_in = {i: Term("in", (i, set_name)) for i in members}
    begin_atoms: dict[tuple, Term] = {}
    end_atoms: dict[tuple, Term] = {}
    used_atoms: dict[tuple, Term] = {}
    not_used_atoms: dict[tuple, Term] = {}
    overlap_atoms: dict[tuple, Term] = {}
    nok_atoms: dict[tuple, Term] = {}
    trans_atoms: dict[tuple, Term] = {}

    def cons_in(label: Term) -> Term:
        return Term("in", (label, cons_name))

    def begin(i, t3, t1, t2):
        key = (i, t3, t1, t2)
        if key not in begin_atoms:
            begin_atoms[key] = Term("begin", (node, i, time_terms[t3], time_terms[t1], time_terms[t2]))
        return begin_atoms[key]

    def end(i, t3, t1, t2):
        key = (i, t3, t1, t2)
        if key not in end_atoms:
            end_atoms[key] = Term("end", (node, i, time_terms[t3], time_terms[t1], time_terms[t2]))
        return end_atoms[key]

    def used(t, t1, t2):
        key = (t, t1, t2)
        if key not in used_atoms:
            used_atoms[key] = Term("used", (node, time_terms[t], time_terms[t1], time_terms[t2]))
        return used_atoms[key]

    def not_used(t, t1, t2):
        key = (t, t1, t2)
        if key not in not_used_atoms:
            not_used_atoms[key] = Term("not_used", (node, time_terms[t], time_terms[t1], time_terms[t2]))
        return not_used_atoms[key]

    step_used_atoms: dict[tuple, Term] = {}
    step_not_used_atoms: dict[tuple, Term] = {}

    def used_step(t, t1, t2):
        key = (t, t1, t2)
        if key not in step_used_atoms:
            step_used_atoms[key] = Term(
                "used_step", (node, time_terms[t], time_terms[t1], time_terms[t2])
            )
        return step_used_atoms[key]

    def not_used_step(t, t1, t2):
        key = (t, t1, t2)
        if key not in step_not_used_atoms:
            step_not_used_atoms[key] = Term(
                "not_used_step", (node, time_terms[t], time_terms[t1], time_terms[t2])
            )
        return step_not_used_atoms[key]

    def overlap(t, t1, t2):
        key = (t, t1, t2)
        if key not in overlap_atoms:
            overlap_atoms[key] = Term("overlap", (node, time_terms[t], time_terms[t1], time_terms[t2]))
        return overlap_atoms[key]

    def nok(t1, t2):
        key = (t1, t2)
        if key not in nok_atoms:
            nok_atoms[key] = Term("nok", (node, time_terms[t1], time_terms[t2]))
        return nok_atoms[key]

    def node_trans(t1, t2):
        key = (t1, t2)
        if key not in trans_atoms:
            trans_atoms[key] = trans(node, t1, t2)
        return trans_atoms[key]

    for t1, t2 in intervals:
        rules.append(Rule(node_trans(t1, t2), (htn_fact,), (nok(t1, t2),), "htn-trans"))
        for i in members:
            span = tuple(range(t1, t2 + 1))
            body = (htn_fact, member_in[i], node_trans(t1, t2))
            rules.append(
                Rule(ChoiceHead(1, 1, tuple(begin(i, t3, t1, t2) for t3 in span)), body, (), "htn-begin")
            )
            rules.append(
                Rule(ChoiceHead(1, 1, tuple(end(i, t3, t1, t2) for t3 in span)), body, (), "htn-end")
            )
            for b in span:
                for e in span:
                    pair = (htn_fact, member_in[i], begin(i, b, t1, t2), end(i, e, t1, t2))
                    if b > e:
                        rules.append(Rule(nok(t1, t2), pair, (), "htn-nok-reversed"))
                    else:
                        rules.append(Rule(nok(t1, t2), pair, (trans(i, b, e),), "htn-nok-trace"))
                        for t in range(b, e + 1):
                            rules.append(Rule(used(t, t1, t2), pair, (), "htn-used"))
                        # Coverage of time points alone cannot see a one-step
                        # gap between the end of one segment and the start of
                        # the next, and the trace semantics requires segments
                        # to tile the interval, so the steps from T to T+1
                        # are covered separately.
                        for t in range(b, e):
                            rules.append(Rule(used_step(t, t1, t2), pair, (), "htn-used-step"))
        for t in range(t1, t2 + 1):
            rules.append(Rule(not_used(t, t1, t2), (), (used(t, t1, t2),), "htn-not-used"))
            rules.append(Rule(nok(t1, t2), (htn_fact, not_used(t, t1, t2)), (), "htn-nok-gap"))
        for t in range(t1, t2):
            rules.append(
                Rule(not_used_step(t, t1, t2), (), (used_step(t, t1, t2),), "htn-not-used-step")
            )
            rules.append(
                Rule(nok(t1, t2), (htn_fact, not_used_step(t, t1, t2)), (), "htn-nok-step-gap")
            )
            rules.append(Rule(nok(t1, t2), (htn_fact, overlap(t, t1, t2)), (), "htn-nok-overlap"))
        for i1 in members:
            for i2 in members:
                if i1 == i2:
                    continue
                for t in range(t1, t2):
                    for b1 in range(t1, t + 1):
                        for e1 in range(t + 1, t2 + 1):
                            for b2 in range(t1, t + 1):
                                for e2 in range(t + 1, t2 + 1):
                                    rules.append(
                                        Rule(
                                            overlap(t, t1, t2),
                                            (
                                                htn_fact,
                                                member_in[i1],
                                                begin(i1, b1, t1, t2),
                                                end(i1, e1, t1, t2),
                                                member_in[i2],
                                                begin(i2, b2, t1, t2),
                                                end(i2, e2, t1, t2),
                                            ),
                                            (),
                                            "htn-overlap",
                                        )
                                    )
        for o in constraints.get("order", []):
            label, i1, i2 = o.args
            for b2 in range(t1, t2 + 1):
                for b1 in range(b2 + 1, t2 + 1):
                    rules.append(
                        Rule(
                            nok(t1, t2),
                            (
                                htn_fact,
                                member_in[i1],
                                begin(i1, b1, t1, t2),
                                member_in[i2],
                                begin(i2, b2, t1, t2),
                                cons_in(label),
                                o,
                            ),
                            (),
                            "htn-nok-order",
                        )
                    )
        for m in constraints.get("maintain", []):
            label, formula, i1, i2 = m.args
            for e1 in range(t1, t2 + 1):
                for b2 in range(e1 + 2, t2 + 1):
                    for t3 in range(e1 + 1, b2):
                        rules.append(
                            Rule(
                                nok(t1, t2),
                                (
                                    htn_fact,
                                    member_in[i1],
                                    end(i1, e1, t1, t2),
                                    member_in[i2],
                                    begin(i2, b2, t1, t2),
                                    cons_in(label),
                                    m,
                                ),
                                (hf(formula, t3),),
                                "htn-nok-maintain",
                            )
                        )
        for p in constraints.get("precondition", []):
            label, formula, i = p.args
            for b in range(t1, t2 + 1):
                rules.append(
                    Rule(
                        nok(t1, t2),
                        (htn_fact, member_in[i], begin(i, b, t1, t2), cons_in(label), p),
                        (hf(formula, b),),
                        "htn-nok-pre",
                    )
                )
        for p in constraints.get("postcondition", []):
            label, formula, i = p.args
            for e in range(t1, t2 + 1):
                rules.append(
                    Rule(
                        nok(t1, t2),
                        (htn_fact, member_in[i], end(i, e, t1, t2), cons_in(label), p),
                        (hf(formula, e),),
                        "htn-nok-post",
                    )
                )
    return rules


# Standalone helper programs ---------------------------------------------------


def encode_closure_program(
    statics,
    literals: Iterable[Literal],
    fluents: Iterable[Term],
    k: int = 0,
) -> GroundProgram:
    """The one-time-point closure program for a static-law set and a literal set.

    Its unique answer set holds exactly the closure's literals at time ``k``
    when the closure is defined, and it has no answer set when it is not.
    """
    rules: list[Rule] = []
    for f in sorted(set(fluents), key=Term.render):
        rules.append(fact(Term("fluent", (f,)), "closure-fluent"))
        rules.append(
            constraint(
                [Term("fluent", (f,)), holds(Literal(f, True), k), holds(Literal(f, False), k)],
                [],
                "closure-consistency",
            )
        )
    for lit in sorted(set(literals), key=Literal.render):
        rules.append(fact(holds(lit, k), "closure-fact"))
    for law in statics:
        body = tuple(holds(p, k) for p in sorted(law.body, key=Literal.render))
        rules.append(Rule(holds(law.head, k), body, (), "closure-law"))
    return GroundProgram.of(rules)


def encode_formula_program(
    domain: DomainDescription,
    formulas: Sequence[Formula],
    states: Sequence[State],
) -> GroundProgram:
    """Formula-satisfaction rules plus a fixed state sequence as facts.

    This is the self-contained program whose unique answer set mirrors the
    satisfaction relation: ``hf(n, t)`` holds exactly when formula ``n`` is
    satisfied by the sequence from ``t`` on.
    """
    if not states:
        raise EncodingError("need at least one state")
    n = len(states) - 1
    grounded = [ground_quantifiers(phi) for phi in formulas]
    for phi in grounded:
        if is_goal_dependent(phi):
            raise FormulaError("goal-dependent formulas have no state-only satisfaction program")
    rules: list[Rule] = _literal_decls(domain)
    for t, state in enumerate(states):
        for lit in sorted(state, key=Literal.render):
            rules.append(fact(holds(lit, t), "state-fact"))
    rules += _formula_rules(domain, _merge_tables(grounded), n)
    return GroundProgram.of(rules)
