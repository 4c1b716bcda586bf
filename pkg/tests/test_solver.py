import random

import pytest

from bplan.core import successors
from bplan.encoder import encode_base, encode_closure_program, encode_formula_program, holds, occ
from bplan.core import StaticLaw
from bplan.formulas import formula_name, ground_quantifiers, sat, subformulas
from bplan.ground import ChoiceHead, GroundProgram, Rule, parse_program
from bplan.solver import (
    ResourceCapError,
    SolveConfig,
    SolverError,
    enumerate_answer_sets,
    expand_choice,
    is_answer_set,
    is_expansion_aux,
    least_model,
    reduct,
)
from bplan.terms import Term, neg, pos

from conftest import LOCKED, suitcase_domain, suitcase_s0
from generators import random_formula, random_state, toy_domain
from oracles import coloring_count

A, B, C = Term("a"), Term("b"), Term("c")


def program(*rules):
    return GroundProgram.of(rules)


def coloring_program(edges, vertices):
    colors = [Term("r"), Term("g"), Term("b")]
    rules = []
    for u, v in edges:
        rules.append(Rule(Term("edge", (Term(u), Term(v))), (), (), "input"))
    for u in vertices:
        atoms = {c: Term("color", (Term(u), c)) for c in colors}
        for c in colors:
            others = tuple(atoms[d] for d in colors if d != c)
            rules.append(Rule(atoms[c], (), others, "input"))
    for u, v in edges:
        for c in colors:
            rules.append(
                Rule(
                    None,
                    (
                        Term("color", (Term(u), c)),
                        Term("color", (Term(v), c)),
                        Term("edge", (Term(u), Term(v))),
                    ),
                    (),
                    "input",
                )
            )
    return GroundProgram.of(rules)


class TestReduct:
    def test_keeps_and_strips(self):
        p = program(Rule(A, (), (B,), "input"))
        assert reduct(p, {A}).rules == (Rule(A, (), (), "input"),)

    def test_deletes_blocked_rule(self):
        p = program(Rule(A, (), (B,), "input"))
        assert reduct(p, {B}).rules == ()

    def test_coloring_reduct_keeps_chosen_color(self):
        p = coloring_program([(0, 1)], [0, 1])
        chosen = {Term("color", (Term(0), Term("g")))}
        red = reduct(p, chosen)
        heads = [r.head for r in red.rules if r.head and r.head.functor == "color"]
        color0 = [h for h in heads if h.args[0] == Term(0)]
        assert color0 == [Term("color", (Term(0), Term("g")))]

    def test_rejects_choice(self):
        p = program(Rule(ChoiceHead(1, 1, (A,)), (), (), "input"))
        with pytest.raises(SolverError):
            reduct(p, set())


class TestLeastModel:
    def test_chain(self):
        p = program(Rule(A, (), (), "input"), Rule(B, (A,), (), "input"))
        result = least_model(p)
        assert result.atoms == frozenset({A, B})
        assert not result.inconsistent

    def test_constraint_violation(self):
        p = program(Rule(A, (), (), "input"), Rule(None, (A,), (), "input"))
        assert least_model(p).inconsistent

    def test_closure_program_unique_answer_set(self):
        f, g = Term("f"), Term("g")
        laws = [StaticLaw(frozenset({pos(f)}), pos(g))]
        prog = encode_closure_program(laws, {pos(f)}, [f, g], k=0)
        models = enumerate_answer_sets(prog, SolveConfig())
        assert len(models) == 1
        holds_atoms = {a for a in models[0] if a.functor == "holds"}
        assert holds_atoms == {holds(pos(f), 0), holds(pos(g), 0)}

    def test_closure_program_pathology_unsat(self):
        f, g, h = Term("f"), Term("g"), Term("h")
        laws = [
            StaticLaw(frozenset({pos(f)}), pos(h)),
            StaticLaw(frozenset({pos(f), pos(g)}), neg(h)),
        ]
        prog = encode_closure_program(laws, {pos(f), pos(g)}, [f, g, h])
        assert enumerate_answer_sets(prog, SolveConfig()) == []

    def test_rejects_naf(self):
        p = program(Rule(A, (), (B,), "input"))
        with pytest.raises(SolverError):
            least_model(p)


class TestIsAnswerSet:
    def test_even_loop(self):
        p = program(Rule(A, (), (B,), "input"), Rule(B, (), (A,), "input"))
        assert is_answer_set(p, {A})
        assert is_answer_set(p, {B})
        assert not is_answer_set(p, {A, B})
        assert not is_answer_set(p, set())

    def test_coloring_proper_assignment(self):
        p = coloring_program([(0, 1), (1, 2), (0, 2)], [0, 1, 2])
        good = {
            Term("edge", (Term(0), Term(1))),
            Term("edge", (Term(1), Term(2))),
            Term("edge", (Term(0), Term(2))),
            Term("color", (Term(0), Term("r"))),
            Term("color", (Term(1), Term("g"))),
            Term("color", (Term(2), Term("b"))),
        }
        assert is_answer_set(p, good)
        bad = (good - {Term("color", (Term(1), Term("g")))}) | {
            Term("color", (Term(1), Term("r")))
        }
        assert not is_answer_set(p, bad)

    def test_unfounded_positive_loop(self):
        p = program(Rule(A, (B,), (), "input"), Rule(B, (A,), (), "input"))
        assert is_answer_set(p, set())
        assert not is_answer_set(p, {A, B})


class TestEnumerate:
    def test_triangle_has_six_models(self):
        p = coloring_program([(0, 1), (1, 2), (0, 2)], [0, 1, 2])
        models = enumerate_answer_sets(p, SolveConfig())
        assert len(models) == 6
        assert len(models) == coloring_count([(0, 1), (1, 2), (0, 2)], [0, 1, 2])

    def test_self_blocking_rule_unsat(self):
        p = program(Rule(A, (), (A,), "input"))
        assert enumerate_answer_sets(p, SolveConfig()) == []

    def test_suitcase_horizon_one_matches_transition_function(self):
        domain, s0 = suitcase_domain(), suitcase_s0()
        prog = encode_base(domain, s0, None, 1)
        models = enumerate_answer_sets(prog, SolveConfig())
        decoded = set()
        for model in models:
            step = [a for a in model if a.functor == "occ" and a.args[1] == Term(0)]
            assert len(step) == 1
            action = step[0].args[0]
            s1 = frozenset(
                _lit(a.args[0])
                for a in model
                if a.functor == "holds" and a.args[1] == Term(1)
            )
            decoded.add((action, s1))
        semantic = {
            (action, s1)
            for action in domain.actions()
            for s1 in successors(domain, action, s0)
        }
        assert decoded == semantic

    def test_limit_truncates(self):
        p = coloring_program([(0, 1), (1, 2), (0, 2)], [0, 1, 2])
        assert len(enumerate_answer_sets(p, SolveConfig(limit=2))) == 2

    def test_node_budget_raises(self):
        p = coloring_program([(0, 1), (1, 2), (0, 2)], [0, 1, 2])
        with pytest.raises(ResourceCapError):
            enumerate_answer_sets(p, SolveConfig(node_budget=1))

    def test_exhaustive_refuses_large_programs(self):
        p = coloring_program([(0, 1), (1, 2), (0, 2)], [0, 1, 2])
        with pytest.raises(ResourceCapError):
            enumerate_answer_sets(p, SolveConfig(strategy="exhaustive", exhaustive_atom_cap=5))

    def test_dpll_matches_exhaustive_on_triangle(self):
        # the coloring instance is small enough for the subset-scan oracle
        p = coloring_program([(0, 1), (1, 2), (0, 2)], [0, 1, 2])
        assert len(p.atoms()) <= 18
        assert enumerate_answer_sets(p, SolveConfig()) == enumerate_answer_sets(
            p, SolveConfig(strategy="exhaustive")
        )

    def test_dpll_matches_exhaustive_on_random_programs(self):
        rng = random.Random(29)
        atoms = [Term(c) for c in "abcdef"]
        for _ in range(120):
            rules = []
            for _ in range(rng.randint(1, 8)):
                body_pos = tuple(rng.sample(atoms, rng.randint(0, 2)))
                body_neg = tuple(rng.sample(atoms, rng.randint(0, 2)))
                head = None if rng.random() < 0.15 else rng.choice(atoms)
                rules.append(Rule(head, body_pos, body_neg, "input"))
            p = GroundProgram.of(rules)
            assert enumerate_answer_sets(p, SolveConfig()) == enumerate_answer_sets(
                p, SolveConfig(strategy="exhaustive")
            )


class TestFormulaPrograms:
    def test_always_unique_model_matching_sat(self):
        rng = random.Random(31)
        domain = toy_domain()
        for _ in range(40):
            phi = random_formula(rng, rng.randint(1, 3))
            states = [random_state(rng) for _ in range(rng.randint(1, 4))]
            prog = encode_formula_program(domain, [phi], states)
            models = enumerate_answer_sets(prog, SolveConfig())
            assert len(models) == 1, "satisfaction programs have exactly one answer set"
            model = models[0]
            grounded = ground_quantifiers(phi)
            for sub in set(subformulas(grounded)):
                name = formula_name(sub)
                for t in range(len(states)):
                    assert (Term("hf", (name, Term(t))) in model) == sat(states, sub, start=t)


class TestChoiceRules:
    def test_expand_pair(self):
        rule = Rule(ChoiceHead(1, 1, (A, B)), (), (), "input")
        assert set(expand_choice(rule)) == {
            Rule(A, (), (B,), "input"),
            Rule(B, (), (A,), "input"),
        }

    def test_expand_lower_zero_adds_aux(self):
        rule = Rule(ChoiceHead(0, 1, (A,)), (), (), "input")
        expanded = expand_choice(rule)
        aux = Term("no_choice", (A,))
        assert set(expanded) == {
            Rule(A, (), (aux,), "input"),
            Rule(aux, (), (A,), "input"),
        }
        models = enumerate_answer_sets(GroundProgram.of(expanded), SolveConfig())
        projected = {frozenset(a for a in m if not is_expansion_aux(a)) for m in models}
        assert projected == {frozenset(), frozenset({A})}

    def test_forced_singleton(self):
        rule = Rule(ChoiceHead(1, 1, (A,)), (), (), "input")
        assert expand_choice(rule) == [Rule(A, (), (), "input")]

    def test_native_matches_expansion_semantics(self):
        p = program(Rule(ChoiceHead(1, 1, (A, B)), (), (), "input"))
        models = enumerate_answer_sets(p, SolveConfig())
        assert models == [frozenset({A}), frozenset({B})]

    def test_choice_head_not_elsewhere_enforced(self):
        p = program(
            Rule(ChoiceHead(1, 1, (A,)), (), (), "input"),
            Rule(A, (B,), (), "input"),
        )
        with pytest.raises(SolverError):
            enumerate_answer_sets(p, SolveConfig())

    def test_random_restricted_choice_equivalence(self):
        rng = random.Random(37)
        atoms = [Term(f"x{i}") for i in range(8)]
        for _ in range(100):
            pool = atoms[: rng.randint(4, 8)]
            k = rng.randint(1, 3)
            heads = tuple(rng.sample(pool, k))
            rest = [a for a in pool if a not in heads]
            rules = [
                Rule(
                    ChoiceHead(rng.randint(0, 1), 1, heads),
                    tuple(rng.sample(rest, rng.randint(0, 1))),
                    tuple(rng.sample(rest, rng.randint(0, 1))),
                    "input",
                )
            ]
            for _ in range(rng.randint(1, 5)):
                head = rng.choice(rest) if rest else None
                rules.append(
                    Rule(
                        head,
                        tuple(rng.sample(pool, rng.randint(0, 2))),
                        tuple(rng.sample(pool, rng.randint(0, 2))),
                        "input",
                    )
                )
            p = GroundProgram.of(rules)
            native = enumerate_answer_sets(p, SolveConfig(choice_mode="native"))
            expanded = enumerate_answer_sets(p, SolveConfig(choice_mode="expand"))
            assert native == expanded


class TestTextFormat:
    def test_roundtrip_preserves_models(self):
        domain, s0 = suitcase_domain(), suitcase_s0()
        prog = encode_base(domain, s0, frozenset({neg(LOCKED)}), 1)
        back = parse_program(prog.render())
        assert [r.render() for r in back.rules] == [r.render() for r in prog.rules]
        assert enumerate_answer_sets(prog, SolveConfig()) == enumerate_answer_sets(
            back, SolveConfig()
        )

    def test_parse_choice_rule(self):
        text = "1 {a; b} 1 :- c.\n"
        p = parse_program(text)
        rule = p.rules[0]
        assert isinstance(rule.head, ChoiceHead)
        assert rule.head.atoms == (A, B)
        assert rule.pos == (C,)

    def test_parse_errors_carry_line(self):
        from bplan.ground import ProgramSyntaxError

        with pytest.raises(ProgramSyntaxError) as err:
            parse_program("a :- b\n")
        assert "line 1" in str(err.value)


def _lit(term):
    from bplan.terms import literal_from_term

    return literal_from_term(term)
