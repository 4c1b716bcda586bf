import random

import pytest
from hypothesis import given, settings, strategies as st

from bplan.core import (
    CapacityError,
    ClosureResult,
    DomainDescription,
    DynamicLaw,
    StaticLaw,
    Trajectory,
    all_states,
    closure,
    direct_effects,
    is_executable,
    is_trajectory,
    successors,
    successors_by_scan,
    validate_theory,
)
from bplan.terms import Literal, Term, mk, neg, pos

from conftest import (
    A0,
    CLOSE1,
    CLOSE2,
    F0,
    HK1,
    HK2,
    LOCKED,
    OPEN1,
    OPEN2,
    UP1,
    UP2,
)
from generators import random_theory
from oracles import closure_oracle, successors_oracle

F, G, H = Term("f"), Term("g"), Term("h")


class TestClosure:
    def test_conflicting_laws_undefined(self):
        # two laws whose heads disagree once {f, g} holds
        laws = [
            StaticLaw(frozenset({pos(F)}), pos(H)),
            StaticLaw(frozenset({pos(F), pos(G)}), neg(H)),
        ]
        assert closure(laws, {pos(F), pos(G)}) == ClosureResult.UNDEFINED

    def test_no_laws_identity(self):
        assert closure([], {pos(F)}) == ClosureResult.of(frozenset({pos(F)}))

    def test_suitcase_statics_fixpoint(self, suitcase):
        domain, _ = suitcase
        result = closure(domain.statics, {pos(UP1), pos(UP2)})
        assert result.defined
        assert result.literals == frozenset({pos(UP1), pos(UP2), neg(LOCKED)})

    def test_inconsistent_input_undefined(self):
        assert not closure([], {pos(F), neg(F)}).defined

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_against_least_superset_search(self, data):
        atoms = [F, G, H]
        lits = [Literal(a, s) for a in atoms for s in (True, False)]
        n_laws = data.draw(st.integers(0, 4))
        laws = [
            StaticLaw(
                frozenset(data.draw(st.sets(st.sampled_from(lits), min_size=1, max_size=2))),
                data.draw(st.sampled_from(lits)),
            )
            for _ in range(n_laws)
        ]
        start = frozenset(data.draw(st.sets(st.sampled_from(lits), max_size=3)))
        got = closure(laws, start)
        want = closure_oracle(laws, start)
        if want is None:
            assert not got.defined
        else:
            assert got.defined and got.literals == want

    def test_defined_closure_is_least_closed_superset(self):
        laws = [
            StaticLaw(frozenset({pos(F)}), pos(G)),
            StaticLaw(frozenset({pos(G)}), pos(H)),
        ]
        got = closure(laws, {pos(F)})
        assert got.literals == frozenset({pos(F), pos(G), pos(H)})
        assert closure_oracle(laws, {pos(F)}) == got.literals


class TestDirectEffects:
    def test_open_l2_in_s0(self, suitcase):
        domain, s0 = suitcase
        assert direct_effects(domain, OPEN2, s0) == frozenset({pos(UP2)})

    def test_action_without_laws(self, suitcase):
        domain, s0 = suitcase
        stripped = DomainDescription(
            domain.signature, domain.statics, frozenset(), domain.executables
        )
        assert direct_effects(stripped, OPEN2, s0) == frozenset()

    def test_unconditional_effect(self, toggle):
        domain, s0 = toggle
        assert direct_effects(domain, A0, s0) == frozenset({pos(F0)})

    def test_conditional_effect_requires_condition(self, suitcase):
        domain, s0 = suitcase
        extra = DomainDescription(
            domain.signature,
            domain.statics,
            domain.dynamics | {DynamicLaw(OPEN2, pos(HK1), frozenset({pos(HK1)}))},
            domain.executables,
        )
        assert pos(HK1) not in direct_effects(extra, OPEN2, s0)


class TestExecutability:
    def test_open_l2_executable(self, suitcase):
        domain, s0 = suitcase
        assert is_executable(domain, OPEN2, s0)

    def test_open_l1_not_executable(self, suitcase):
        domain, s0 = suitcase
        assert not is_executable(domain, OPEN1, s0)

    def test_empty_condition_everywhere(self, suitcase):
        domain, _ = suitcase
        for state in all_states(domain):
            assert is_executable(domain, CLOSE1, state)


class TestSuccessors:
    def test_open_l2_transition(self, suitcase):
        domain, s0 = suitcase
        expected = frozenset({pos(UP1), pos(UP2), neg(LOCKED), neg(HK1), pos(HK2)})
        assert successors(domain, OPEN2, s0) == frozenset({expected})

    def test_close_l1_transition(self, suitcase):
        domain, s0 = suitcase
        expected = frozenset({neg(UP1), neg(UP2), pos(LOCKED), neg(HK1), pos(HK2)})
        assert successors(domain, CLOSE1, s0) == frozenset({expected})

    def test_close_l2_self_loop(self, suitcase):
        domain, s0 = suitcase
        assert successors(domain, CLOSE2, s0) == frozenset({s0})

    def test_not_executable_empty(self, suitcase):
        domain, s0 = suitcase
        assert successors(domain, OPEN1, s0) == frozenset()

    def test_toggle(self, toggle):
        domain, s0 = toggle
        assert successors(domain, A0, s0) == frozenset({frozenset({pos(F0)})})

    def test_matches_full_scan_on_suitcase(self, suitcase):
        domain, s0 = suitcase
        for action in domain.actions():
            assert successors(domain, action, s0) == successors_by_scan(domain, action, s0)

    def test_fixpoint_resubstitution(self, suitcase):
        domain, s0 = suitcase
        for action in domain.actions():
            effects = direct_effects(domain, action, s0)
            for s2 in successors(domain, action, s0):
                closed = closure(domain.statics, effects | (s0 & s2))
                assert closed.defined and closed.literals == s2

    def test_random_theories_match_oracle(self):
        rng = random.Random(5)
        for _ in range(25):
            domain = random_theory(rng)
            states = list(all_states(domain))
            if not states:
                continue
            state = rng.choice(states)
            for action in domain.actions():
                got = successors(domain, action, state)
                assert got == successors_oracle(domain, action, state)

    def test_no_statics_symmetric_difference_minimality(self):
        # without static laws the successors are the interpretations
        # satisfying the direct effects that are closest to the source state
        # under symmetric difference
        import itertools

        rng = random.Random(19)
        for _ in range(20):
            domain = random_theory(rng)
            domain = DomainDescription(
                domain.signature, frozenset(), domain.dynamics, domain.executables
            )
            fluents = domain.fluents()
            interpretations = [
                frozenset(Literal(f, s) for f, s in zip(fluents, signs))
                for signs in itertools.product((True, False), repeat=len(fluents))
            ]
            state = rng.choice(interpretations)
            for action in domain.actions():
                got = successors(domain, action, state)
                if not is_executable(domain, action, state):
                    assert got == frozenset()
                    continue
                effects = direct_effects(domain, action, state)
                satisfying = [i for i in interpretations if effects <= i]
                minimal = frozenset(
                    i
                    for i in satisfying
                    if not any((j ^ state) < (i ^ state) for j in satisfying)
                )
                assert got == minimal

    def test_capacity_cap(self, suitcase):
        domain, s0 = suitcase
        with pytest.raises(CapacityError):
            successors(domain, OPEN2, s0, max_fluents=3)

    def test_contradictory_dynamic_laws_yield_no_successor(self, toggle):
        # legal input: the closure of the direct effects is undefined, so the
        # action is executable but leads nowhere, and validation reports it
        domain, s0 = toggle
        clashing = DomainDescription(
            domain.signature,
            domain.statics,
            domain.dynamics | {DynamicLaw(A0, neg(F0), frozenset())},
            domain.executables,
        )
        assert is_executable(clashing, A0, s0)
        assert successors(clashing, A0, s0) == frozenset()
        report = validate_theory(clashing, s0, check_transitions=True)
        assert report.transition_consistent is False
        assert any(v.kind == "inconsistent-domain" for v in report.violations)


class TestValidateTheory:
    def test_suitcase_ok_and_deterministic(self, suitcase):
        domain, s0 = suitcase
        report = validate_theory(domain, s0, check_transitions=True)
        assert report.ok
        assert report.deterministic is True
        assert report.transition_consistent is True

    def test_incomplete_initial_state(self, suitcase):
        domain, s0 = suitcase
        report = validate_theory(domain, frozenset(l for l in s0 if l.atom != HK1))
        assert not report.ok
        assert any(v.kind == "incomplete-initial-state" for v in report.violations)

    def test_inconsistent_initial_state(self, suitcase):
        domain, s0 = suitcase
        report = validate_theory(domain, s0 | {neg(UP1)})
        assert any(v.kind == "inconsistent-initial-state" for v in report.violations)

    def test_unknown_fluent_rejected(self, suitcase):
        domain, s0 = suitcase
        report = validate_theory(domain, s0 | {pos(mk("up", Term("zz")))})
        assert any(v.kind == "unknown-fluent" for v in report.violations)

    def test_initial_state_not_closed(self, suitcase):
        domain, _ = suitcase
        bad = frozenset({pos(UP1), pos(UP2), pos(LOCKED), neg(HK1), pos(HK2)})
        report = validate_theory(domain, bad)
        assert any(v.kind == "initial-state-not-closed" for v in report.violations)


class TestTrajectories:
    def test_example_transition_is_trajectory(self, suitcase):
        domain, s0 = suitcase
        s1 = frozenset({pos(UP1), pos(UP2), neg(LOCKED), neg(HK1), pos(HK2)})
        assert is_trajectory(domain, Trajectory((s0, s1), (OPEN2,)))

    def test_nonexecutable_step_rejected(self, suitcase):
        domain, s0 = suitcase
        assert not is_trajectory(domain, Trajectory((s0, s0), (OPEN1,)))

    def test_zero_length(self, suitcase):
        domain, s0 = suitcase
        assert is_trajectory(domain, Trajectory((s0,), ()))
        not_a_state = frozenset({pos(UP1), pos(UP2), pos(LOCKED), neg(HK1), pos(HK2)})
        assert not is_trajectory(domain, Trajectory((not_a_state,), ()))

    def test_wrong_successor_rejected(self, suitcase):
        domain, s0 = suitcase
        assert not is_trajectory(domain, Trajectory((s0, s0), (OPEN2,)))

    def test_agrees_with_successors_on_generated(self, suitcase):
        domain, s0 = suitcase
        for action in domain.actions():
            for s2 in successors(domain, action, s0):
                assert is_trajectory(domain, Trajectory((s0, s2), (action,)))

    def test_length_mismatch_rejected(self, suitcase):
        _, s0 = suitcase
        with pytest.raises(ValueError):
            Trajectory((s0,), (OPEN2,))
