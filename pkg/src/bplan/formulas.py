"""Fluent formulas and temporal constraints.

Fluent formulas are built from literals with ``and``/``or``/``negation`` and
bounded quantifiers over explicit constant lists.  Temporal constraints add
``until``/``always``/``eventually``/``next`` plus a goal operator that looks
up the planning goal instead of the current state.  The goal operator cannot
be nested inside itself, and in planning mode its argument must be a single
literal.

Satisfaction over a finite state sequence follows the infinite repetition of
the final state: indices clamp at the last position, existential operators
search up to it, and ``next`` at the end re-checks the final state (the tail
from position n+1 on is indistinguishable from the tail from n).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .core import State
from .terms import Literal, Term, cached_hash

Formula = Union["Lit", "And", "Or", "Not", "Forall", "Exists",
                "Goal", "Until", "Always", "Eventually", "Next"]


@cached_hash
@dataclass(frozen=True)
class Lit:
    literal: Literal


@cached_hash
@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula


@cached_hash
@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula


@cached_hash
@dataclass(frozen=True)
class Not:
    sub: Formula


@cached_hash
@dataclass(frozen=True)
class Forall:
    var: str
    constants: tuple[Term, ...]
    body: Formula


@cached_hash
@dataclass(frozen=True)
class Exists:
    var: str
    constants: tuple[Term, ...]
    body: Formula


@cached_hash
@dataclass(frozen=True)
class Goal:
    sub: Formula


@cached_hash
@dataclass(frozen=True)
class Until:
    left: Formula
    right: Formula


@cached_hash
@dataclass(frozen=True)
class Always:
    sub: Formula


@cached_hash
@dataclass(frozen=True)
class Eventually:
    sub: Formula


@cached_hash
@dataclass(frozen=True)
class Next:
    sub: Formula


TEMPORAL_NODES = (Goal, Until, Always, Eventually, Next)


class FormulaError(ValueError):
    pass


def implies(left: Formula, right: Formula) -> Formula:
    """Material implication, desugared at construction time."""
    return Or(Not(left), right)


def formula_name(phi: Formula) -> Term:
    """Canonical name of a (sub)formula, used wherever encodings need one.

    Literals are their own names; compound formulas print fully
    parenthesized, so equal subformulas always share a name.
    """
    if isinstance(phi, Lit):
        return phi.literal.as_term()
    if isinstance(phi, And):
        return Term("and", (formula_name(phi.left), formula_name(phi.right)))
    if isinstance(phi, Or):
        return Term("or", (formula_name(phi.left), formula_name(phi.right)))
    if isinstance(phi, Not):
        return Term("negation", (formula_name(phi.sub),))
    if isinstance(phi, Goal):
        return Term("goal", (formula_name(phi.sub),))
    if isinstance(phi, Until):
        return Term("until", (formula_name(phi.left), formula_name(phi.right)))
    if isinstance(phi, Always):
        return Term("always", (formula_name(phi.sub),))
    if isinstance(phi, Eventually):
        return Term("eventually", (formula_name(phi.sub),))
    if isinstance(phi, Next):
        return Term("next", (formula_name(phi.sub),))
    if isinstance(phi, (Forall, Exists)):
        raise FormulaError("quantified formulas must be grounded before naming")
    raise TypeError(f"not a formula: {phi!r}")


def render(phi: Formula) -> str:
    if isinstance(phi, Forall):
        consts = ",".join(c.render() for c in phi.constants)
        return f"forall({phi.var},{{{consts}}},{render(phi.body)})"
    if isinstance(phi, Exists):
        consts = ",".join(c.render() for c in phi.constants)
        return f"exists({phi.var},{{{consts}}},{render(phi.body)})"
    return formula_name(phi).render()


def subformulas(phi: Formula) -> Iterator[Formula]:
    """The formula and all of its subformulas, preorder."""
    yield phi
    if isinstance(phi, (And, Or, Until)):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, (Not, Goal, Always, Eventually, Next)):
        yield from subformulas(phi.sub)
    elif isinstance(phi, (Forall, Exists)):
        yield from subformulas(phi.body)


def depth(phi: Formula) -> int:
    if isinstance(phi, Lit):
        return 0
    if isinstance(phi, (And, Or, Until)):
        return 1 + max(depth(phi.left), depth(phi.right))
    if isinstance(phi, (Not, Goal, Always, Eventually, Next)):
        return 1 + depth(phi.sub)
    if isinstance(phi, (Forall, Exists)):
        return 1 + depth(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


def is_temporal(phi: Formula) -> bool:
    return any(isinstance(sub, TEMPORAL_NODES) for sub in subformulas(phi))


def is_goal_dependent(phi: Formula) -> bool:
    return any(isinstance(sub, Goal) for sub in subformulas(phi))


def is_fluent_formula(phi: Formula) -> bool:
    """No temporal operators and no goal operator anywhere."""
    return not is_temporal(phi)


def goal_literals_of(phi: Formula) -> list[Literal]:
    """Arguments of all goal operators; raises unless each is a literal."""
    out = []
    for sub in subformulas(phi):
        if isinstance(sub, Goal):
            if not isinstance(sub.sub, Lit):
                raise FormulaError(
                    "the goal operator only supports a single literal argument "
                    f"in planning mode, found {render(sub.sub)}"
                )
            out.append(sub.sub.literal)
    return out


def validate_temporal(phi: Formula, planning_mode: bool = True) -> None:
    """Structural checks: no goal nesting, goal arguments are fluent formulas.

    With ``planning_mode`` the goal arguments are further restricted to bare
    literals, matching what the goal-dependent encoding supports.
    """
    def walk(node: Formula, under_goal: bool) -> None:
        if isinstance(node, Goal):
            if under_goal:
                raise FormulaError("the goal operator cannot be nested")
            if is_temporal(node.sub):
                raise FormulaError("goal arguments must be fluent formulas")
            walk(node.sub, True)
            return
        if isinstance(node, (And, Or, Until)):
            walk(node.left, under_goal)
            walk(node.right, under_goal)
        elif isinstance(node, (Not, Always, Eventually, Next)):
            walk(node.sub, under_goal)
        elif isinstance(node, (Forall, Exists)):
            walk(node.body, under_goal)

    walk(phi, False)
    if planning_mode:
        goal_literals_of(phi)


def substitute(phi: Formula, var: str, value: Term) -> Formula:
    """Replace free occurrences of ``var``; inner quantifiers shadow it."""
    if isinstance(phi, Lit):
        lit = phi.literal
        atom = _subst_term(lit.atom, var, value)
        return Lit(Literal(atom, lit.positive))
    if isinstance(phi, And):
        return And(substitute(phi.left, var, value), substitute(phi.right, var, value))
    if isinstance(phi, Or):
        return Or(substitute(phi.left, var, value), substitute(phi.right, var, value))
    if isinstance(phi, Not):
        return Not(substitute(phi.sub, var, value))
    if isinstance(phi, Goal):
        return Goal(substitute(phi.sub, var, value))
    if isinstance(phi, Until):
        return Until(substitute(phi.left, var, value), substitute(phi.right, var, value))
    if isinstance(phi, Always):
        return Always(substitute(phi.sub, var, value))
    if isinstance(phi, Eventually):
        return Eventually(substitute(phi.sub, var, value))
    if isinstance(phi, Next):
        return Next(substitute(phi.sub, var, value))
    if isinstance(phi, Forall):
        if phi.var == var:
            return phi
        return Forall(phi.var, phi.constants, substitute(phi.body, var, value))
    if isinstance(phi, Exists):
        if phi.var == var:
            return phi
        return Exists(phi.var, phi.constants, substitute(phi.body, var, value))
    raise TypeError(f"not a formula: {phi!r}")


def _subst_term(term: Term, var: str, value: Term) -> Term:
    if term.functor == var and not term.args:
        return value
    if not term.args:
        return term
    return Term(term.functor, tuple(_subst_term(a, var, value) for a in term.args))


def ground_quantifiers(phi: Formula) -> Formula:
    """Expand bounded quantifiers into right-nested conjunction/disjunction chains.

    The instances follow the declared constant order left to right.  An empty
    constant list has no defined meaning and is rejected.
    """
    if isinstance(phi, (Forall, Exists)):
        if not phi.constants:
            raise FormulaError(f"quantifier over an empty constant list: {render(phi)}")
        instances = [
            ground_quantifiers(substitute(phi.body, phi.var, c)) for c in phi.constants
        ]
        combine = And if isinstance(phi, Forall) else Or
        result = instances[-1]
        for inst in reversed(instances[:-1]):
            result = combine(inst, result)
        return result
    if isinstance(phi, Lit):
        return phi
    if isinstance(phi, And):
        return And(ground_quantifiers(phi.left), ground_quantifiers(phi.right))
    if isinstance(phi, Or):
        return Or(ground_quantifiers(phi.left), ground_quantifiers(phi.right))
    if isinstance(phi, Not):
        return Not(ground_quantifiers(phi.sub))
    if isinstance(phi, Goal):
        return Goal(ground_quantifiers(phi.sub))
    if isinstance(phi, Until):
        return Until(ground_quantifiers(phi.left), ground_quantifiers(phi.right))
    if isinstance(phi, Always):
        return Always(ground_quantifiers(phi.sub))
    if isinstance(phi, Eventually):
        return Eventually(ground_quantifiers(phi.sub))
    if isinstance(phi, Next):
        return Next(ground_quantifiers(phi.sub))
    raise TypeError(f"not a formula: {phi!r}")


def eval_state(phi: Formula, state: State) -> bool:
    """Propositional evaluation of a quantifier-free fluent formula.

    Negation-as-complement is sound because states are complete.
    """
    if isinstance(phi, Lit):
        return phi.literal in state
    if isinstance(phi, And):
        return eval_state(phi.left, state) and eval_state(phi.right, state)
    if isinstance(phi, Or):
        return eval_state(phi.left, state) or eval_state(phi.right, state)
    if isinstance(phi, Not):
        return not eval_state(phi.sub, state)
    if isinstance(phi, (Forall, Exists)):
        raise FormulaError("ground the quantifiers before evaluating")
    raise FormulaError(f"not a fluent formula: {render(phi)}")


def sat(
    states: Sequence[State],
    phi: Formula,
    goal: Optional[frozenset[Literal]] = None,
    start: int = 0,
) -> bool:
    """Satisfaction over the infinite repetition of the final state.

    ``goal`` must be supplied iff the constraint is goal-dependent; a goal
    literal is entailed exactly when it belongs to the goal set.
    """
    if not states:
        raise FormulaError("satisfaction needs at least one state")
    if is_goal_dependent(phi) and goal is None:
        raise FormulaError("goal-dependent constraint evaluated without a goal")
    phi = ground_quantifiers(phi)
    last = len(states) - 1

    def ev(node: Formula, t: int) -> bool:
        t = min(t, last)
        if isinstance(node, Lit):
            return node.literal in states[t]
        if isinstance(node, Goal):
            if not isinstance(node.sub, Lit):
                raise FormulaError("the goal operator only supports literal arguments")
            assert goal is not None
            return node.sub.literal in goal
        if isinstance(node, And):
            return ev(node.left, t) and ev(node.right, t)
        if isinstance(node, Or):
            return ev(node.left, t) or ev(node.right, t)
        if isinstance(node, Not):
            return not ev(node.sub, t)
        if isinstance(node, Until):
            return any(
                ev(node.right, t2) and all(ev(node.left, t1) for t1 in range(t, t2))
                for t2 in range(t, last + 1)
            )
        if isinstance(node, Eventually):
            return any(ev(node.sub, t1) for t1 in range(t, last + 1))
        if isinstance(node, Always):
            return all(ev(node.sub, t1) for t1 in range(t, last + 1))
        if isinstance(node, Next):
            return ev(node.sub, t + 1)
        if isinstance(node, (Forall, Exists)):
            raise FormulaError("ground the quantifiers before evaluating")
        raise TypeError(f"not a formula: {node!r}")

    return ev(phi, start)


@dataclass(frozen=True)
class FormulaTable:
    """Named encoding of a constraint: one operator fact per subformula.

    ``facts`` maps each non-literal subformula name to its fact atoms, e.g.
    ``and(n, n1, n2)`` plus the ``formula(n)`` declaration.  Literal
    subformulas need no entry since they name themselves.
    """

    facts: tuple[tuple[Term, tuple[Term, ...]], ...]

    def all_atoms(self) -> tuple[Term, ...]:
        return tuple(atom for _, atoms in self.facts for atom in atoms)

    def names(self) -> tuple[Term, ...]:
        return tuple(name for name, _ in self.facts)


_OPERATOR_FACTS = {
    And: ("and", lambda n: (n.left, n.right)),
    Or: ("or", lambda n: (n.left, n.right)),
    Not: ("negation", lambda n: (n.sub,)),
    Until: ("until", lambda n: (n.left, n.right)),
    Always: ("always", lambda n: (n.sub,)),
    Eventually: ("eventually", lambda n: (n.sub,)),
    Next: ("next", lambda n: (n.sub,)),
}


def encode_formula(phi: Formula) -> FormulaTable:
    """Emit the fact table for a quantifier-free constraint.

    Shared subterms are emitted once (names are canonical prints, so equal
    subformulas collide deliberately); encoding is a pure function of the
    formula.  Goal subformulas only contribute their ``formula`` declaration;
    their truth is asserted separately by the goal-dependent rules.
    """
    seen: dict[Term, tuple[Term, ...]] = {}
    order: list[Term] = []

    def visit(node: Formula) -> Term:
        if isinstance(node, (Forall, Exists)):
            raise FormulaError("ground the quantifiers before encoding")
        name = formula_name(node)
        if isinstance(node, Lit):
            return name
        if name in seen:
            return name
        if isinstance(node, Goal):
            visit(node.sub)
            seen[name] = (Term("formula", (name,)),)
            order.append(name)
            return name
        pred, children = _OPERATOR_FACTS[type(node)]
        child_names = tuple(visit(child) for child in children(node))
        seen[name] = (
            Term("formula", (name,)),
            Term(pred, (name,) + child_names),
        )
        order.append(name)
        return name

    visit(phi)
    return FormulaTable(tuple((name, seen[name]) for name in order))
