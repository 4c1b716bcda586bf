"""Dual-route planning: direct semantic search and the solve-and-decode route.

The direct route enumerates trajectories over the transition function,
filters them by goal satisfaction and by the control knowledge (temporal
constraint checked on the state sequence, program knowledge checked by trace
recognition), and reports dead-ended shorter trajectories where no action is
executable.  The logic-program route encodes the same problem, enumerates
answer sets and decodes each into a trajectory via its ``occ``/``holds``
atoms.  Both routes must produce the same trajectory set; ``cross_check``
asserts exactly that and is the executable form of the encoding-correctness
statements the test suite leans on.

Decoding notes: action occurrences form a prefix of the time line (once
nothing is executable, nothing occurs afterwards), and an occurrence at the
final time point is an artifact of the generator firing at every time point,
so it never contributes a step.  A decoded prefix shorter than the horizon is
marked as a dead end; direct search synthesizes the same truncated results so
the two routes stay comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .core import (
    CapacityError,
    DomainDescription,
    State,
    Trajectory,
    ground_actions,
    is_executable,
    is_state,
    is_trajectory,
    successors,
    validate_theory,
)
from .encoder import (
    encode_base,
    encode_golog,
    encode_htn,
    encode_temporal,
)
from .formulas import Formula, is_goal_dependent, sat, validate_temporal
from .ground import GroundProgram
from .procedures import GeneralProgram, HTNNode, is_trace
from .solver import ResourceCapError, SolveConfig, enumerate_answer_sets
from .terms import Literal, Term


class PlanningError(ValueError):
    pass


@dataclass(frozen=True)
class TemporalKnowledge:
    formula: Formula


@dataclass(frozen=True)
class ProgramKnowledge:
    program: GeneralProgram


Knowledge = Union[None, TemporalKnowledge, ProgramKnowledge]


@dataclass(frozen=True)
class PlanningProblem:
    domain: DomainDescription
    initial: frozenset[Literal]
    goal: Optional[frozenset[Literal]]
    horizon: int
    knowledge: Knowledge = None
    all_solutions: bool = True
    deterministic_required: bool = False
    max_fluents: int = 24

    def __post_init__(self):
        if self.horizon < 0:
            raise PlanningError("horizon must be >= 0")
        if self.goal is None and self.knowledge is None:
            raise PlanningError("a problem needs a goal, control knowledge, or both")
        if isinstance(self.knowledge, TemporalKnowledge):
            validate_temporal(self.knowledge.formula, planning_mode=True)
            if is_goal_dependent(self.knowledge.formula) and self.goal is None:
                raise PlanningError("goal-dependent constraint requires a goal")


@dataclass(frozen=True)
class PlanItem:
    trajectory: Trajectory
    classification: str  # "plan" | "possible-plan"
    dead_end: bool

    def actions(self) -> tuple[Term, ...]:
        return self.trajectory.actions

    def key(self) -> tuple:
        return (
            tuple(a.render() for a in self.trajectory.actions),
            tuple(tuple(sorted(l.render() for l in s)) for s in self.trajectory.states),
            self.dead_end,
        )


@dataclass
class PlanResult:
    items: list[PlanItem] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.items)

    def sorted(self) -> "PlanResult":
        return PlanResult(sorted(self.items, key=PlanItem.key))

    def keys(self) -> set[tuple]:
        return {item.key() for item in self.items}


_DETERMINISM_CACHE: dict[tuple, str] = {}


def _classification(problem: PlanningProblem) -> str:
    """Deterministic theories upgrade every trajectory to a plan."""
    key = (problem.domain, problem.initial, problem.max_fluents)
    if key not in _DETERMINISM_CACHE:
        try:
            report = validate_theory(
                problem.domain,
                problem.initial,
                check_transitions=True,
                max_fluents=min(problem.max_fluents, 16),
            )
            verdict = "plan" if report.deterministic else "possible-plan"
        except CapacityError:
            verdict = "possible-plan"
        _DETERMINISM_CACHE[key] = verdict
    return _DETERMINISM_CACHE[key]


def _check_problem(problem: PlanningProblem) -> None:
    report = validate_theory(problem.domain, problem.initial)
    if not report.ok:
        details = "; ".join(f"{v.kind}: {v.detail}" for v in report.violations)
        raise PlanningError(f"invalid action theory: {details}")
    if problem.deterministic_required and _classification(problem) != "plan":
        raise PlanningError("deterministic theory required but domain is not deterministic")


def _temporal_accepts(problem: PlanningProblem, states: tuple[State, ...]) -> bool:
    knowledge = problem.knowledge
    assert isinstance(knowledge, TemporalKnowledge)
    goal = problem.goal if is_goal_dependent(knowledge.formula) else None
    return sat(states, knowledge.formula, goal)


def _goal_holds(problem: PlanningProblem, state: State) -> bool:
    return problem.goal is None or all(l in state for l in problem.goal)


def plan_direct(
    problem: PlanningProblem,
    node_budget: Optional[int] = None,
    prune=None,
) -> PlanResult:
    """Depth-first search over the transition function.

    Keeps length-``horizon`` trajectories whose final state satisfies the
    goal and whose state sequence satisfies the control knowledge.  Control
    knowledge is checked post hoc on the complete sequence (a temporal
    constraint on the state sequence, program knowledge by trace
    recognition), so the accepted set is exactly the defined one.  When no
    action is executable before the horizon, the truncated trajectory is
    reported as a dead end if it satisfies the goal (and, for a temporal
    constraint, the constraint on the truncated sequence); program knowledge
    only ever accepts full-length traces, matching its encoding.

    ``prune``, when given, is called with the state and action prefixes at
    every interior node and may return True to cut that subtree.  Off by
    default; a prune that cuts a subtree containing solutions changes the
    result, so callers must only supply sound ones.
    """
    _check_problem(problem)
    domain = problem.domain
    start: State = frozenset(problem.initial)
    if not is_state(domain, start):
        raise PlanningError("initial state is not closed under the static laws")
    n = problem.horizon
    knowledge = problem.knowledge
    program = knowledge.program if isinstance(knowledge, ProgramKnowledge) else None
    classification = _classification(problem)
    succ_cache: dict = {}
    frontier_cache: dict = {}
    eval_cache: dict = {}
    visited = 0
    items: list[PlanItem] = []
    actions = ground_actions(domain.signature)

    def succ(action: Term, state: State) -> list[State]:
        key = (action, state)
        if key not in succ_cache:
            nxt = successors(domain, action, state, max_fluents=problem.max_fluents)
            succ_cache[key] = sorted(nxt, key=lambda s: tuple(sorted(l.render() for l in s)))
        return succ_cache[key]

    def frontier_of(state: State) -> list[tuple[Term, State]]:
        cached = frontier_cache.get(state)
        if cached is None:
            cached = [(a, s2) for a in actions for s2 in succ(a, state)]
            frontier_cache[state] = cached
        return cached

    def emit(states: list[State], acts: list[Term], dead_end: bool) -> None:
        traj = Trajectory(tuple(states), tuple(acts))
        items.append(PlanItem(traj, classification, dead_end))

    def accept_full(states: list[State], acts: list[Term]) -> bool:
        if not _goal_holds(problem, states[-1]):
            return False
        if program is not None:
            return is_trace(program, Trajectory(tuple(states), tuple(acts)), eval_cache)
        if isinstance(knowledge, TemporalKnowledge):
            return _temporal_accepts(problem, tuple(states))
        return True

    class _StopSearch(Exception):
        pass

    def walk(states: list[State], acts: list[Term]) -> None:
        nonlocal visited
        visited += 1
        if node_budget is not None and visited > node_budget:
            error = ResourceCapError(f"direct search exceeded node budget {node_budget}")
            error.partial = PlanResult(list(items)).sorted()
            raise error
        depth = len(acts)
        if depth == n:
            if accept_full(states, acts):
                emit(states, acts, dead_end=False)
                if not problem.all_solutions:
                    raise _StopSearch
            return
        if prune is not None and depth > 0 and prune(tuple(states), tuple(acts)):
            return
        frontier = frontier_of(states[-1])
        if not frontier:
            # Dead end: nothing is executable.  Program knowledge cannot
            # accept a short unfolding, so only goal/temporal problems report
            # these truncated trajectories.
            if program is None and _goal_holds(problem, states[-1]):
                if not isinstance(knowledge, TemporalKnowledge) or _temporal_accepts(
                    problem, tuple(states)
                ):
                    emit(states, acts, dead_end=True)
                    if not problem.all_solutions:
                        raise _StopSearch
            return
        for action, nxt in frontier:
            acts.append(action)
            states.append(nxt)
            walk(states, acts)
            states.pop()
            acts.pop()

    try:
        walk([start], [])
    except _StopSearch:
        pass
    return PlanResult(items).sorted()


# ASP route ---------------------------------------------------------------------


def encode_problem(
    problem: PlanningProblem,
    occ_encoding: str = "rules",
    choice_mode: str = "native",
) -> GroundProgram:
    """The ground program for a problem, per its knowledge kind."""
    domain, n = problem.domain, problem.horizon
    base = encode_base(domain, problem.initial, problem.goal, n, occ_encoding)
    knowledge = problem.knowledge
    if knowledge is None:
        return base
    if isinstance(knowledge, TemporalKnowledge):
        return encode_temporal(base, domain, knowledge.formula, problem.goal, n)
    program = knowledge.program
    enforce_goal = problem.goal is not None
    if isinstance(program.main, HTNNode):
        return encode_htn(base, domain, program, n, enforce_goal, choice_mode)
    return encode_golog(base, domain, program, n, enforce_goal)


class DecodeError(RuntimeError):
    pass


def decode_model(
    problem: PlanningProblem, model: frozenset[Term]
) -> tuple[Trajectory, bool]:
    """Trajectory from the ``occ``/``holds`` atoms of one answer set.

    Occurrences at times ``0..horizon-1`` form a contiguous prefix whose
    length is the effective plan length; the states come from the ``holds``
    atoms at times up to that length.
    """
    from .terms import literal_from_term

    n = problem.horizon
    occs: dict[int, Term] = {}
    holds_by_time: dict[int, set[Literal]] = {t: set() for t in range(n + 1)}
    for atom in model:
        if atom.functor == "occ":
            action, t = atom.args
            time = int(t.functor)
            if time < n:
                if time in occs:
                    raise DecodeError(f"two occurrences at time {time}")
                occs[time] = action
        elif atom.functor == "holds":
            lit_term, t = atom.args
            time = int(t.functor)
            if 0 <= time <= n:
                holds_by_time[time].add(literal_from_term(lit_term))
    k = 0
    while k in occs:
        k += 1
    if set(occs) != set(range(k)):
        raise DecodeError(f"occurrences are not a prefix: {sorted(occs)}")
    states = tuple(frozenset(holds_by_time[t]) for t in range(k + 1))
    actions = tuple(occs[t] for t in range(k))
    return Trajectory(states, actions), k < n


def plan_asp(
    problem: PlanningProblem,
    occ_encoding: str = "rules",
    choice_mode: str = "native",
    solver_config: Optional[SolveConfig] = None,
) -> PlanResult:
    """Encode, enumerate answer sets, decode, deduplicate, verify.

    Several answer sets may decode to one trajectory (auxiliary atoms and the
    final-time occurrence artifact differ); the result is the deduplicated
    set.  Every decoded trajectory is re-verified semantically before it is
    returned.
    """
    _check_problem(problem)
    program = encode_problem(problem, occ_encoding, choice_mode)
    config = solver_config or SolveConfig(choice_mode=choice_mode)
    if not problem.all_solutions:
        config = SolveConfig(
            limit=1,
            choice_mode=config.choice_mode,
            strategy=config.strategy,
            exhaustive_atom_cap=config.exhaustive_atom_cap,
            node_budget=config.node_budget,
        )
    models = enumerate_answer_sets(program, config)
    classification = _classification(problem)
    seen: dict[tuple, PlanItem] = {}
    for model in models:
        traj, dead_end = decode_model(problem, model)
        item = PlanItem(traj, classification, dead_end)
        key = item.key()
        if key in seen:
            continue
        verdict = verify_plan(problem, traj, expect_dead_end=dead_end)
        if not verdict.valid:
            raise DecodeError(
                "decoded trajectory failed verification: " + "; ".join(verdict.diagnostics)
            )
        seen[key] = item
    return PlanResult(list(seen.values())).sorted()


@dataclass
class Verdict:
    valid: bool
    classification: Optional[str] = None
    diagnostics: list[str] = field(default_factory=list)


def verify_plan(
    problem: PlanningProblem,
    traj: Trajectory,
    expect_dead_end: Optional[bool] = None,
) -> Verdict:
    """Full semantic check of a trajectory against a problem.

    Valid when it starts at the initial state, every step follows the
    transition function, its length is the horizon (or it provably dead-ends
    earlier), the goal holds at the end, and the control knowledge accepts
    it.  The classification (plan vs possible plan) mirrors the theory's
    determinism.
    """
    diagnostics: list[str] = []
    domain = problem.domain
    n = problem.horizon
    if frozenset(problem.initial) != traj.states[0]:
        diagnostics.append("trajectory does not start at the initial state")
    if not is_trajectory(domain, traj):
        diagnostics.append("not a trajectory: some step violates the transition function")
    k = len(traj)
    if k > n:
        diagnostics.append(f"trajectory length {k} exceeds horizon {n}")
    if k < n:
        stuck = not any(
            is_executable(domain, a, traj.states[-1]) for a in ground_actions(domain.signature)
        )
        if not stuck:
            diagnostics.append(
                f"trajectory is shorter than the horizon ({k} < {n}) but an action "
                "is still executable in its final state"
            )
        if expect_dead_end is False:
            diagnostics.append("expected a full-length trajectory")
    if problem.goal is not None and not _goal_holds(problem, traj.states[-1]):
        missing = [l.render() for l in sorted(problem.goal, key=Literal.render)
                   if l not in traj.states[-1]]
        diagnostics.append(f"goal unsatisfied at the final state: {', '.join(missing)}")
    knowledge = problem.knowledge
    if isinstance(knowledge, TemporalKnowledge):
        goal = problem.goal if is_goal_dependent(knowledge.formula) else None
        if not sat(traj.states, knowledge.formula, goal):
            diagnostics.append("temporal constraint unsatisfied")
    elif isinstance(knowledge, ProgramKnowledge):
        if k < n:
            diagnostics.append("program knowledge requires a full-length trace")
        elif not is_trace(knowledge.program, traj):
            detail = ""
            if isinstance(knowledge.program.main, HTNNode):
                from .procedures import explain_htn_failure

                detail = f" ({explain_htn_failure(knowledge.program, traj)})"
            diagnostics.append(f"trajectory is not a trace of the control program{detail}")
    return Verdict(not diagnostics, _classification(problem), diagnostics)


@dataclass
class CrossCheckReport:
    agree: bool
    direct_count: int
    asp_count: int
    only_direct: list[PlanItem] = field(default_factory=list)
    only_asp: list[PlanItem] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def summary(self) -> str:
        status = "AGREE" if self.agree else "DIVERGE"
        return (
            f"{status}: direct={self.direct_count} asp={self.asp_count} "
            f"only_direct={len(self.only_direct)} only_asp={len(self.only_asp)}"
        )


def cross_check(
    problem: PlanningProblem,
    occ_encoding: str = "rules",
    choice_mode: str = "native",
    solver_config: Optional[SolveConfig] = None,
    node_budget: Optional[int] = None,
) -> CrossCheckReport:
    """Assert route agreement: the trajectory sets of both routes coincide.

    Dead-ended items participate with their marker, so the comparison is
    exact rather than up to truncation.
    """
    if not problem.all_solutions:
        raise PlanningError("cross-checking requires complete enumeration on both routes")
    direct = plan_direct(problem, node_budget=node_budget)
    asp = plan_asp(problem, occ_encoding, choice_mode, solver_config)
    direct_keys = {item.key(): item for item in direct.items}
    asp_keys = {item.key(): item for item in asp.items}
    only_direct = [direct_keys[k] for k in sorted(direct_keys.keys() - asp_keys.keys())]
    only_asp = [asp_keys[k] for k in sorted(asp_keys.keys() - direct_keys.keys())]
    warnings = []
    if isinstance(problem.knowledge, ProgramKnowledge) and isinstance(
        problem.knowledge.program.main, HTNNode
    ):
        from .procedures import Maintain

        if any(isinstance(c, Maintain) for c in problem.knowledge.program.main.constraints):
            warnings.append(
                "maintain constraints: the trace definition includes both segment "
                "endpoints while the encoding checks strictly between them; routes "
                "may differ on trajectories separated only by endpoint states"
            )
    return CrossCheckReport(
        agree=not only_direct and not only_asp,
        direct_count=len(direct.items),
        asp_count=len(asp.items),
        only_direct=only_direct,
        only_asp=only_asp,
        warnings=warnings,
    )
