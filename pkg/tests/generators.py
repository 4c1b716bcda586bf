"""Seeded random generators shared by the property and acceptance tests."""

from __future__ import annotations

import random

from bplan.core import (
    DomainDescription,
    DynamicLaw,
    Executability,
    Signature,
    StaticLaw,
)
from bplan.formulas import And, Always, Eventually, Lit, Next, Not, Or, Until
from bplan.procedures import (
    Act,
    Alt,
    GeneralProgram,
    HTNNode,
    If,
    Order,
    Pick,
    Postcondition,
    Precondition,
    ProcedureTable,
    Seq,
    Test,
    While,
)
from bplan.terms import Literal, Term, pos, neg

U = Term("u")
TOY_FLUENTS = tuple(Term(x, (U,)) for x in ("p", "q", "r"))
TOY_ACTIONS = tuple(Term(x, (U,)) for x in ("setp", "clrp", "setq", "flipr"))
TOY_LITERALS = tuple(Literal(f, s) for f in TOY_FLUENTS for s in (True, False))


def toy_domain() -> DomainDescription:
    """Three fluents, four actions, one conditional flip; deterministic."""
    p, q, r = TOY_FLUENTS
    setp, clrp, setq, flipr = TOY_ACTIONS
    sig = Signature.make_sorted(
        [U],
        {str(a.functor): ((U,),) for a in TOY_ACTIONS},
        {str(f.functor): ((U,),) for f in TOY_FLUENTS},
    )
    return DomainDescription(
        sig,
        frozenset(),
        frozenset(
            {
                DynamicLaw(setp, pos(p), frozenset()),
                DynamicLaw(clrp, neg(p), frozenset()),
                DynamicLaw(setq, pos(q), frozenset()),
                DynamicLaw(flipr, pos(r), frozenset({neg(r)})),
                DynamicLaw(flipr, neg(r), frozenset({pos(r)})),
            }
        ),
        frozenset(
            {
                Executability(setp, frozenset()),
                Executability(clrp, frozenset()),
                Executability(setq, frozenset({pos(p)})),
                Executability(flipr, frozenset()),
            }
        ),
    )


def toy_initial() -> frozenset[Literal]:
    p, q, r = TOY_FLUENTS
    return frozenset({neg(p), neg(q), neg(r)})


def random_state(rng: random.Random, fluents=TOY_FLUENTS) -> frozenset[Literal]:
    return frozenset(Literal(f, rng.random() < 0.5) for f in fluents)


def random_formula(rng: random.Random, depth: int, fluents=TOY_FLUENTS):
    if depth == 0:
        return Lit(Literal(rng.choice(fluents), rng.random() < 0.5))
    op = rng.choice(["and", "or", "not", "until", "always", "eventually", "next", "lit"])
    if op == "lit":
        return Lit(Literal(rng.choice(fluents), rng.random() < 0.5))
    if op in ("and", "or", "until"):
        cls = {"and": And, "or": Or, "until": Until}[op]
        return cls(random_formula(rng, depth - 1, fluents), random_formula(rng, depth - 1, fluents))
    cls = {"not": Not, "always": Always, "eventually": Eventually, "next": Next}[op]
    return cls(random_formula(rng, depth - 1, fluents))


def random_complex_action(rng: random.Random, depth: int):
    if depth == 0:
        return Act(rng.choice(TOY_ACTIONS))
    kind = rng.choice(["act", "seq", "alt", "if", "while", "test", "pick"])
    if kind == "act":
        return Act(rng.choice(TOY_ACTIONS))
    if kind == "seq":
        return Seq(random_complex_action(rng, depth - 1), random_complex_action(rng, depth - 1))
    if kind == "alt":
        k = rng.randint(2, 3)
        return Alt(tuple(random_complex_action(rng, depth - 1) for _ in range(k)))
    if kind == "if":
        return If(
            Lit(rng.choice(TOY_LITERALS)),
            random_complex_action(rng, depth - 1),
            random_complex_action(rng, depth - 1),
        )
    if kind == "while":
        return While(Lit(rng.choice(TOY_LITERALS)), Act(rng.choice(TOY_ACTIONS)))
    if kind == "pick":
        return Pick("X", (U,), random_complex_action(rng, depth - 1))
    return Test(Lit(rng.choice(TOY_LITERALS)))


def random_golog_program(rng: random.Random, depth: int = 3) -> GeneralProgram:
    return GeneralProgram(ProcedureTable(), random_complex_action(rng, rng.randint(1, depth)))


def positive_length_body(rng: random.Random, depth: int):
    """Sub-program bodies whose every trace takes at least one step."""
    kind = rng.choice(["act", "seq", "alt", "if"]) if depth else "act"
    if kind == "act":
        return Act(rng.choice(TOY_ACTIONS))
    if kind == "seq":
        return Seq(positive_length_body(rng, depth - 1), positive_length_body(rng, depth - 1))
    if kind == "alt":
        return Alt(tuple(positive_length_body(rng, depth - 1) for _ in range(2)))
    return If(
        Lit(rng.choice(TOY_LITERALS)),
        positive_length_body(rng, depth - 1),
        positive_length_body(rng, depth - 1),
    )


def random_htn_program(rng: random.Random, max_members: int = 3) -> GeneralProgram:
    """HTN instances inside the exact-agreement regime: every sub-program
    trace takes at least one step and constraints avoid the maintain form
    (whose endpoint semantics differ between the definition and the rules)."""
    while True:
        k = rng.randint(2, max_members)
        names = [f"m{i}" for i in range(k)]
        members = tuple((nm, positive_length_body(rng, rng.randint(0, 1))) for nm in names)
        if len({body for _, body in members}) == k:
            break
    constraints = []
    label = 0
    if rng.random() < 0.8:
        i, j = rng.sample(range(k), 2)
        constraints.append(Order(f"c{label}", names[i], names[j]))
        label += 1
    for _ in range(rng.randint(0, 2)):
        nm = rng.choice(names)
        lit = Lit(rng.choice(TOY_LITERALS))
        if rng.random() < 0.5:
            constraints.append(Precondition(f"c{label}", lit, nm))
        else:
            constraints.append(Postcondition(f"c{label}", nm, lit))
        label += 1
    return GeneralProgram(ProcedureTable(), HTNNode(members, tuple(constraints)))


def random_theory(rng: random.Random, nfluents: int = 3):
    """Small random action theories for transition-function properties."""
    fluents = [Term(f"f{i}") for i in range(nfluents)]
    actions = [Term(f"a{i}") for i in range(2)]
    sig = Signature.make_sorted(
        [Term("o")],
        {str(a.functor): () for a in actions},
        {str(f.functor): () for f in fluents},
    )
    lits = [Literal(f, s) for f in fluents for s in (True, False)]
    statics = set()
    for _ in range(rng.randint(0, 3)):
        body = frozenset(rng.sample(lits, rng.randint(1, 2)))
        statics.add(StaticLaw(body, rng.choice(lits)))
    dynamics = set()
    for a in actions:
        for _ in range(rng.randint(1, 2)):
            cond = frozenset(rng.sample(lits, rng.randint(0, 1)))
            dynamics.add(DynamicLaw(a, rng.choice(lits), cond))
    executables = {
        Executability(a, frozenset(rng.sample(lits, rng.randint(0, 1)))) for a in actions
    }
    return DomainDescription(sig, frozenset(statics), frozenset(dynamics), frozenset(executables))
