"""Procedural and HTN control knowledge: programs, traces, and their encoding.

A complex action is a plan sketch built from actions, formula tests,
sequencing, nondeterministic choice, conditionals, while loops, bounded
argument choice (``pick``) and procedure calls.  A general program couples a
coherent procedure table with one top-level ground complex action or with an
HTN node: a set of named sub-programs plus ordering/truth constraints over
them.

A trajectory is a *trace* of a program if it can be produced by unfolding the
program: actions consume one step, tests consume none and must hold, a while
body must consume at least one step per iteration, and an HTN node tiles the
whole trajectory into one segment per sub-program subject to the constraints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .core import State, Trajectory
from .formulas import (
    Formula,
    Lit,
    eval_state,
    formula_name,
    ground_quantifiers,
    is_fluent_formula,
    render as render_formula,
)
from .terms import Term, cached_hash, is_variable_term, term_variables

ComplexAction = Union["Act", "Test", "Seq", "Alt", "If", "While", "Pick", "Call", "Null"]


@cached_hash
@dataclass(frozen=True)
class Act:
    action: Term


@cached_hash
@dataclass(frozen=True)
class Test:
    formula: Formula

    __test__ = False  # keep pytest from collecting the AST node


@cached_hash
@dataclass(frozen=True)
class Seq:
    first: ComplexAction
    second: ComplexAction


@cached_hash
@dataclass(frozen=True)
class Alt:
    branches: tuple[ComplexAction, ...]


@cached_hash
@dataclass(frozen=True)
class If:
    condition: Formula
    then_part: ComplexAction
    else_part: ComplexAction


@cached_hash
@dataclass(frozen=True)
class While:
    condition: Formula
    body: ComplexAction


@cached_hash
@dataclass(frozen=True)
class Pick:
    var: str
    constants: tuple[Term, ...]
    body: ComplexAction

    def __post_init__(self):
        if not self.constants:
            raise ProgramError("pick over an empty constant set has no meaning")


@cached_hash
@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Null:
    pass


NULL = Null()


class ProgramError(ValueError):
    pass


@dataclass(frozen=True)
class Procedure:
    """Named procedure: parameters with their instantiation domains, body."""

    name: str
    params: tuple[str, ...]
    domains: tuple[tuple[Term, ...], ...]
    body: ComplexAction

    def __post_init__(self):
        if len(self.params) != len(self.domains):
            raise ProgramError(f"procedure {self.name}: one domain per parameter required")


class ProcedureTable:
    """Uniquely named procedures; bodies must not be bare procedure calls."""

    def __init__(self, procedures: Iterable[Procedure] = ()):
        self._procs: dict[str, Procedure] = {}
        for proc in procedures:
            self.add(proc)

    def add(self, proc: Procedure) -> None:
        if proc.name in self._procs:
            raise ProgramError(f"duplicate procedure name {proc.name}")
        if isinstance(proc.body, Call):
            raise ProgramError(f"procedure {proc.name} is a nested procedure (body is a bare call)")
        stray = free_variables(proc.body) - set(proc.params)
        if stray:
            raise ProgramError(
                f"procedure {proc.name} uses undeclared variables: {', '.join(sorted(stray))}"
            )
        self._procs[proc.name] = proc

    def get(self, name: str) -> Procedure:
        if name not in self._procs:
            raise ProgramError(f"unknown procedure {name}")
        return self._procs[name]

    def __contains__(self, name: str) -> bool:
        return name in self._procs

    def __iter__(self) -> Iterator[Procedure]:
        return iter(self._procs.values())

    def __len__(self) -> int:
        return len(self._procs)


# HTN constraints -----------------------------------------------------------

@dataclass(frozen=True)
class Order:
    label: str
    before: str
    after: str


@dataclass(frozen=True)
class Precondition:
    label: str
    formula: Formula
    program: str


@dataclass(frozen=True)
class Postcondition:
    label: str
    program: str
    formula: Formula


@dataclass(frozen=True)
class Maintain:
    label: str
    before: str
    formula: Formula
    after: str


Constraint = Union[Order, Precondition, Postcondition, Maintain]


@dataclass(frozen=True)
class HTNNode:
    """Named sub-programs plus constraints over them.

    A maintain constraint implicitly orders its two programs, so the implied
    ordering is added when missing.
    """

    members: tuple[tuple[str, ComplexAction], ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        names = [name for name, _ in self.members]
        if len(set(names)) != len(names):
            raise ProgramError("duplicate sub-program names in HTN node")
        for c in self.constraints:
            for ref in _constraint_programs(c):
                if ref not in names:
                    raise ProgramError(f"constraint {c.label} references unknown program {ref}")
            if isinstance(c, Order) and c.before == c.after:
                raise ProgramError(f"ordering constraint {c.label} relates a program to itself")
        implied = []
        have_orders = {(c.before, c.after) for c in self.constraints if isinstance(c, Order)}
        for c in self.constraints:
            if isinstance(c, Maintain) and (c.before, c.after) not in have_orders:
                implied.append(Order(f"{c.label}_ord", c.before, c.after))
                have_orders.add((c.before, c.after))
        if implied:
            object.__setattr__(self, "constraints", self.constraints + tuple(implied))

    def member_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.members)


def _constraint_programs(c: Constraint) -> tuple[str, ...]:
    if isinstance(c, Order):
        return (c.before, c.after)
    if isinstance(c, Precondition):
        return (c.program,)
    if isinstance(c, Postcondition):
        return (c.program,)
    return (c.before, c.after)


@dataclass(frozen=True)
class GeneralProgram:
    """A procedure table plus a ground top-level complex action or HTN node."""

    procedures: ProcedureTable
    main: Union[ComplexAction, HTNNode]


# Grounding ------------------------------------------------------------------

def _subst_action_term(term: Term, subst: Mapping[str, Term]) -> Term:
    if is_variable_term(term):
        return subst.get(str(term.functor), term)
    if not term.args:
        return term
    return Term(term.functor, tuple(_subst_action_term(a, subst) for a in term.args))


def _subst_formula(phi: Formula, subst: Mapping[str, Term]) -> Formula:
    from .formulas import substitute

    out = phi
    for var, value in subst.items():
        out = substitute(out, var, value)
    return out


def ground_complex(delta: ComplexAction, subst: Mapping[str, Term]) -> ComplexAction:
    """Structural substitution; ``pick`` binds its own variable underneath.

    The substitution must cover every free variable of the node.
    """
    missing = free_variables(delta) - set(subst)
    if missing:
        raise ProgramError(f"unbound variables: {', '.join(sorted(missing))}")
    return _ground(delta, dict(subst))


def _ground(delta: ComplexAction, subst: Mapping[str, Term]) -> ComplexAction:
    if isinstance(delta, Act):
        return Act(_subst_action_term(delta.action, subst))
    if isinstance(delta, Test):
        return Test(_subst_formula(delta.formula, subst))
    if isinstance(delta, Seq):
        return Seq(_ground(delta.first, subst), _ground(delta.second, subst))
    if isinstance(delta, Alt):
        return Alt(tuple(_ground(b, subst) for b in delta.branches))
    if isinstance(delta, If):
        return If(
            _subst_formula(delta.condition, subst),
            _ground(delta.then_part, subst),
            _ground(delta.else_part, subst),
        )
    if isinstance(delta, While):
        return While(_subst_formula(delta.condition, subst), _ground(delta.body, subst))
    if isinstance(delta, Pick):
        inner = {k: v for k, v in subst.items() if k != delta.var}
        return Pick(delta.var, delta.constants, _ground(delta.body, inner))
    if isinstance(delta, Call):
        return Call(delta.name, tuple(_subst_action_term(a, subst) for a in delta.args))
    if isinstance(delta, Null):
        return delta
    raise TypeError(f"not a complex action: {delta!r}")


_PICK_CACHE: dict[tuple, ComplexAction] = {}
_PROC_CACHE: dict[tuple, ComplexAction] = {}


def instantiate_pick(delta: Pick, constant: Term) -> ComplexAction:
    key = (delta, constant)
    cached = _PICK_CACHE.get(key)
    if cached is None:
        cached = ground_complex(delta.body, {delta.var: constant})
        _PICK_CACHE[key] = cached
    return cached


def instantiate_procedure(proc: Procedure, args: Sequence[Term]) -> ComplexAction:
    if len(args) != len(proc.params):
        raise ProgramError(
            f"procedure {proc.name} expects {len(proc.params)} arguments, got {len(args)}"
        )
    key = (proc, tuple(args))
    cached = _PROC_CACHE.get(key)
    if cached is None:
        cached = ground_complex(proc.body, dict(zip(proc.params, args)))
        _PROC_CACHE[key] = cached
    return cached


def free_variables(delta: ComplexAction) -> frozenset[str]:
    if isinstance(delta, Act):
        return frozenset(term_variables(delta.action))
    if isinstance(delta, Test):
        return frozenset(_formula_variables(delta.formula))
    if isinstance(delta, Seq):
        return free_variables(delta.first) | free_variables(delta.second)
    if isinstance(delta, Alt):
        return frozenset().union(*(free_variables(b) for b in delta.branches))
    if isinstance(delta, If):
        return (
            frozenset(_formula_variables(delta.condition))
            | free_variables(delta.then_part)
            | free_variables(delta.else_part)
        )
    if isinstance(delta, While):
        return frozenset(_formula_variables(delta.condition)) | free_variables(delta.body)
    if isinstance(delta, Pick):
        return free_variables(delta.body) - {delta.var}
    if isinstance(delta, Call):
        out: set[str] = set()
        for a in delta.args:
            out.update(term_variables(a))
        return frozenset(out)
    if isinstance(delta, Null):
        return frozenset()
    raise TypeError(f"not a complex action: {delta!r}")


def _formula_variables(phi: Formula) -> set[str]:
    from .formulas import And, Always, Eventually, Exists, Forall, Goal, Next, Not, Or, Until

    if isinstance(phi, Lit):
        return set(term_variables(phi.literal.atom))
    if isinstance(phi, (And, Or, Until)):
        return _formula_variables(phi.left) | _formula_variables(phi.right)
    if isinstance(phi, (Not, Goal, Always, Eventually, Next)):
        return _formula_variables(phi.sub)
    if isinstance(phi, (Forall, Exists)):
        return _formula_variables(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def is_ground(delta: ComplexAction) -> bool:
    return not free_variables(delta)


# Dependency analysis ---------------------------------------------------------

PrimItem = tuple[str, object]  # ("act", Term) | ("test", Formula) | ("proc", Term)


def prim(
    delta: ComplexAction,
    table: ProcedureTable,
    _seen: Optional[set[Term]] = None,
) -> frozenset[PrimItem]:
    """Everything the execution of a ground complex action can depend on.

    Actions and test/condition formulas are collected as-is; ``pick`` unions
    over all instantiations; a procedure call contributes its own instance
    plus its body's dependencies.  Procedure instances are expanded at most
    once, so the computation terminates even on self-dependent tables (where
    the instance then shows up in its own set).
    """
    seen = _seen if _seen is not None else set()

    def walk(node: ComplexAction) -> frozenset[PrimItem]:
        if isinstance(node, Act):
            return frozenset({("act", node.action)})
        if isinstance(node, Test):
            return frozenset({("test", node.formula)})
        if isinstance(node, Seq):
            return walk(node.first) | walk(node.second)
        if isinstance(node, Alt):
            return frozenset().union(*(walk(b) for b in node.branches))
        if isinstance(node, If):
            return (
                frozenset({("test", node.condition)})
                | walk(node.then_part)
                | walk(node.else_part)
            )
        if isinstance(node, While):
            return frozenset({("test", node.condition)}) | walk(node.body)
        if isinstance(node, Pick):
            return frozenset().union(
                *(walk(instantiate_pick(node, c)) for c in node.constants)
            )
        if isinstance(node, Call):
            instance = Term(node.name, node.args)
            out = frozenset({("proc", instance)})
            if instance not in seen:
                seen.add(instance)
                out |= walk(instantiate_procedure(table.get(node.name), node.args))
            return out
        if isinstance(node, Null):
            return frozenset()
        raise TypeError(f"not a complex action: {node!r}")

    return walk(delta)


@dataclass
class CoherenceReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_coherent(table: ProcedureTable, max_instances: int = 5000) -> CoherenceReport:
    """Names unique, no nested procedures, every ground instance well-defined.

    A procedure instance ``p(c...)`` is well-defined when it does not appear
    in its own dependency set; the report names the offending instance.
    (Name uniqueness and nested bodies are already rejected at construction,
    so this re-checks well-definedness over every declared instantiation.)
    """
    report = CoherenceReport()
    total = 0
    for proc in table:
        for combo in itertools.product(*proc.domains) if proc.params else [()]:
            total += 1
            if total > max_instances:
                report.violations.append(
                    f"instance cap {max_instances} exceeded while checking coherence"
                )
                return report
            instance = Term(proc.name, tuple(combo))
            body = instantiate_procedure(proc, combo)
            deps = prim(body, table)
            if ("proc", instance) in deps:
                report.violations.append(
                    f"procedure instance {instance.render()} depends on itself"
                )
    return report


# Trace checking ---------------------------------------------------------------

_IN_PROGRESS = object()


class TraceChecker:
    """Memoized trace recognition for a (coherent) general program.

    Memo keys are (node, start, end) with three-valued entries; re-entering a
    key that is in progress answers False, which is sound for coherent
    programs because a correct derivation never needs that cycle.

    ``eval_cache`` may be shared across checkers (e.g. when recognizing many
    trajectories over the same state space) to reuse formula evaluations.
    """

    def __init__(
        self,
        program: GeneralProgram,
        traj: Trajectory,
        eval_cache: Optional[dict] = None,
    ):
        self.program = program
        self.traj = traj
        self.memo: dict[tuple, object] = {}
        self._formula_cache: dict[Formula, Formula] = {}
        self._eval_cache = eval_cache if eval_cache is not None else {}

    def _holds(self, phi: Formula, state: State) -> bool:
        key = (phi, state)
        cached = self._eval_cache.get(key)
        if cached is None:
            grounded = self._formula_cache.get(phi)
            if grounded is None:
                if not is_fluent_formula(phi):
                    raise ProgramError(
                        f"program conditions must be fluent formulas, found {render_formula(phi)}"
                    )
                grounded = ground_quantifiers(phi)
                self._formula_cache[phi] = grounded
            cached = eval_state(grounded, state)
            self._eval_cache[key] = cached
        return cached

    def check(self, node: ComplexAction, i: int, j: int) -> bool:
        key = (node, i, j)
        cached = self.memo.get(key)
        if cached is _IN_PROGRESS:
            return False
        if cached is not None:
            return bool(cached)
        self.memo[key] = _IN_PROGRESS
        result = self._check(node, i, j)
        self.memo[key] = result
        return result

    def _check(self, node: ComplexAction, i: int, j: int) -> bool:
        states, actions = self.traj.states, self.traj.actions
        if isinstance(node, Act):
            return j == i + 1 and actions[i] == node.action
        if isinstance(node, Test):
            return j == i and self._holds(node.formula, states[i])
        if isinstance(node, Null):
            return j == i
        if isinstance(node, Seq):
            return any(
                self.check(node.first, i, m) and self.check(node.second, m, j)
                for m in range(i, j + 1)
            )
        if isinstance(node, Alt):
            return any(self.check(b, i, j) for b in node.branches)
        if isinstance(node, If):
            branch = node.then_part if self._holds(node.condition, states[i]) else node.else_part
            return self.check(branch, i, j)
        if isinstance(node, While):
            if not self._holds(node.condition, states[i]):
                return j == i
            return any(
                self.check(node.body, i, m) and self.check(node, m, j)
                for m in range(i + 1, j + 1)
            )
        if isinstance(node, Pick):
            return any(
                self.check(instantiate_pick(node, c), i, j) for c in node.constants
            )
        if isinstance(node, Call):
            body = instantiate_procedure(self.program.procedures.get(node.name), node.args)
            return self.check(body, i, j)
        raise TypeError(f"not a complex action: {node!r}")

    def check_htn(self, node: HTNNode) -> Optional[tuple[tuple[int, ...], tuple[str, ...]]]:
        """First witness (boundaries, member order), searched lexicographically.

        Boundaries ``0 = j0 <= j1 <= ... <= jk = n`` tile the whole trajectory;
        the member order assigns one sub-program per slot.  The witness must
        satisfy all four constraint conditions: per-slot traces, ordering by
        slot, pre/postconditions at segment endpoints, and maintained formulas
        over every state from the end of the earlier segment to the start of
        the later one.
        """
        n = len(self.traj)
        k = len(node.members)
        bodies = dict(node.members)
        names = node.member_names()
        for inner in itertools.combinations_with_replacement(range(n + 1), k - 1):
            bounds = (0,) + inner + (n,)
            if any(bounds[x] > bounds[x + 1] for x in range(k)):
                continue
            for perm in itertools.permutations(names):
                if self._htn_witness_ok(node, bodies, bounds, perm):
                    return bounds, perm
        return None

    def _htn_witness_ok(
        self,
        node: HTNNode,
        bodies: Mapping[str, ComplexAction],
        bounds: tuple[int, ...],
        perm: tuple[str, ...],
    ) -> bool:
        states = self.traj.states
        slot = {name: idx for idx, name in enumerate(perm)}
        start = {name: bounds[slot[name]] for name in perm}
        end = {name: bounds[slot[name] + 1] for name in perm}
        for name in perm:
            if not self.check(bodies[name], start[name], end[name]):
                return False
        for c in node.constraints:
            if isinstance(c, Order):
                if slot[c.before] >= slot[c.after]:
                    return False
            elif isinstance(c, Precondition):
                if not self._holds(c.formula, states[start[c.program]]):
                    return False
            elif isinstance(c, Postcondition):
                if not self._holds(c.formula, states[end[c.program]]):
                    return False
            else:
                lo, hi = end[c.before], start[c.after]
                if any(not self._holds(c.formula, states[t]) for t in range(lo, hi + 1)):
                    return False
        return True


def is_trace(
    program: GeneralProgram,
    traj: Trajectory,
    eval_cache: Optional[dict] = None,
) -> bool:
    """Whether the trajectory can be produced by unfolding the program."""
    checker = TraceChecker(program, traj, eval_cache)
    if isinstance(program.main, HTNNode):
        return checker.check_htn(program.main) is not None
    return checker.check(program.main, 0, len(traj))


def htn_witness(program: GeneralProgram, traj: Trajectory):
    if not isinstance(program.main, HTNNode):
        raise ProgramError("witness extraction only applies to HTN programs")
    return TraceChecker(program, traj).check_htn(program.main)


def explain_htn_failure(program: GeneralProgram, traj: Trajectory) -> str:
    """Best-effort diagnosis of why no segmentation witnesses the trajectory.

    When some segmentation matches the sub-programs but a constraint rules
    every such candidate out, the blocking constraints are named; otherwise
    the sub-programs themselves do not fit the trajectory.
    """
    node = program.main
    assert isinstance(node, HTNNode)
    checker = TraceChecker(program, traj)
    n = len(traj)
    k = len(node.members)
    bodies = dict(node.members)
    names = node.member_names()
    states = traj.states
    blockers: list[str] = []
    any_tiling = False
    for inner in itertools.combinations_with_replacement(range(n + 1), k - 1):
        bounds = (0,) + inner + (n,)
        for perm in itertools.permutations(names):
            slot = {name: idx for idx, name in enumerate(perm)}
            start = {name: bounds[slot[name]] for name in perm}
            end = {name: bounds[slot[name] + 1] for name in perm}
            if not all(checker.check(bodies[name], start[name], end[name]) for name in perm):
                continue
            any_tiling = True
            for c in node.constraints:
                if isinstance(c, Order):
                    ok = slot[c.before] < slot[c.after]
                    kind = "ordering"
                elif isinstance(c, Precondition):
                    ok = checker._holds(c.formula, states[start[c.program]])
                    kind = "precondition"
                elif isinstance(c, Postcondition):
                    ok = checker._holds(c.formula, states[end[c.program]])
                    kind = "postcondition"
                else:
                    ok = all(
                        checker._holds(c.formula, states[t])
                        for t in range(end[c.before], start[c.after] + 1)
                    )
                    kind = "maintain"
                if not ok:
                    label = f"{kind} constraint {c.label}"
                    if label not in blockers:
                        blockers.append(label)
                    break
    if not any_tiling:
        return "no segmentation of the trajectory matches the sub-programs"
    return "violated: " + ", ".join(blockers)


# Encoding ---------------------------------------------------------------------

HTN_NODE_NAME = Term("htn_main")
HTN_SET_NAME = Term("htn_programs")
HTN_CONSTRAINTS_NAME = Term("htn_constraints")


@dataclass(frozen=True)
class ProgramEncoding:
    """Structure facts for a program plus every formula the rules will need."""

    main_name: Term
    facts: tuple[Term, ...]
    formulas: tuple[Formula, ...]
    is_htn: bool


class _ProgramEncoder:
    def __init__(self, table: ProcedureTable):
        self.table = table
        self.facts: list[Term] = []
        self.fact_seen: set[Term] = set()
        self.formulas: list[Formula] = []
        self.formula_seen: set[Formula] = set()
        self.encoded_instances: set[Term] = set()

    def emit(self, fact: Term) -> None:
        if fact not in self.fact_seen:
            self.fact_seen.add(fact)
            self.facts.append(fact)

    def formula(self, phi: Formula) -> Term:
        grounded = ground_quantifiers(phi)
        if grounded not in self.formula_seen:
            self.formula_seen.add(grounded)
            self.formulas.append(grounded)
        return formula_name(grounded)

    def name_of(self, node: ComplexAction) -> Term:
        if isinstance(node, Act):
            return node.action
        if isinstance(node, Test):
            return formula_name(ground_quantifiers(node.formula))
        if isinstance(node, Null):
            return Term("null")
        if isinstance(node, Seq):
            return Term("seq", (self.name_of(node.first), self.name_of(node.second)))
        if isinstance(node, Alt):
            return Term("alt", tuple(self.name_of(b) for b in node.branches))
        if isinstance(node, If):
            return Term(
                "if",
                (
                    formula_name(ground_quantifiers(node.condition)),
                    self.name_of(node.then_part),
                    self.name_of(node.else_part),
                ),
            )
        if isinstance(node, While):
            return Term(
                "while",
                (formula_name(ground_quantifiers(node.condition)), self.name_of(node.body)),
            )
        if isinstance(node, Pick):
            return Term(
                "pick",
                tuple(self.name_of(instantiate_pick(node, c)) for c in node.constants),
            )
        if isinstance(node, Call):
            return self.call_name(node)
        raise TypeError(f"not a complex action: {node!r}")

    def call_name(self, call: Call) -> Term:
        """Procedure instances are named by the call term itself; instances
        whose body is atomic borrow the body's own name (an action or formula
        already carries the only name the transition rules can see)."""
        body = instantiate_procedure(self.table.get(call.name), call.args)
        if isinstance(body, (Act, Test, Null)):
            return self.name_of(body)
        return Term(call.name, call.args)

    def encode(self, node: ComplexAction) -> Term:
        name = self.name_of(node)
        if isinstance(node, (Act, Null)):
            return name
        if isinstance(node, Test):
            self.formula(node.formula)
            return name
        if isinstance(node, Seq):
            first = self.encode(node.first)
            second = self.encode(node.second)
            self.emit(Term("sequence", (name, first, second)))
            return name
        if isinstance(node, Alt):
            self.emit(Term("choiceAction", (name,)))
            for branch in node.branches:
                self.emit(Term("in", (self.encode(branch), name)))
            return name
        if isinstance(node, If):
            cond = self.formula(node.condition)
            then_name = self.encode(node.then_part)
            else_name = self.encode(node.else_part)
            self.emit(Term("if", (name, cond, then_name, else_name)))
            return name
        if isinstance(node, While):
            cond = self.formula(node.condition)
            body = self.encode(node.body)
            self.emit(Term("while", (name, cond, body)))
            return name
        if isinstance(node, Pick):
            for c in node.constants:
                inst = self.encode(instantiate_pick(node, c))
                self.emit(Term("choiceArgs", (name, inst)))
            return name
        if isinstance(node, Call):
            body = instantiate_procedure(self.table.get(node.name), node.args)
            if isinstance(body, (Act, Test, Null)):
                return self.encode(body)
            instance = Term(node.name, node.args)
            if instance not in self.encoded_instances:
                self.encoded_instances.add(instance)
                self._encode_named_body(instance, body)
            return instance
        raise TypeError(f"not a complex action: {node!r}")

    def _encode_named_body(self, name: Term, body: ComplexAction) -> None:
        """Encode a procedure body under the given instance name."""
        if isinstance(body, Seq):
            self.emit(Term("sequence", (name, self.encode(body.first), self.encode(body.second))))
        elif isinstance(body, Alt):
            self.emit(Term("choiceAction", (name,)))
            for branch in body.branches:
                self.emit(Term("in", (self.encode(branch), name)))
        elif isinstance(body, If):
            self.emit(
                Term(
                    "if",
                    (
                        name,
                        self.formula(body.condition),
                        self.encode(body.then_part),
                        self.encode(body.else_part),
                    ),
                )
            )
        elif isinstance(body, While):
            self.emit(Term("while", (name, self.formula(body.condition), self.encode(body.body))))
        elif isinstance(body, Pick):
            for c in body.constants:
                self.emit(Term("choiceArgs", (name, self.encode(instantiate_pick(body, c)))))
        else:
            raise ProgramError(f"cannot alias {type(body).__name__} body to {name.render()}")

    def encode_htn(self, node: HTNNode) -> Term:
        member_names: dict[str, Term] = {}
        for member, body in node.members:
            if not is_ground(body):
                raise ProgramError(f"HTN sub-program {member} is not ground")
            member_names[member] = self.encode(body)
        if len(set(member_names.values())) != len(member_names):
            raise ProgramError(
                "two HTN sub-programs encode to the same name; give them distinct bodies"
            )
        self.emit(Term("htn", (HTN_NODE_NAME, HTN_SET_NAME, HTN_CONSTRAINTS_NAME)))
        self.emit(Term("set", (HTN_SET_NAME,)))
        for member, _ in node.members:
            self.emit(Term("in", (member_names[member], HTN_SET_NAME)))
        self.emit(Term("set", (HTN_CONSTRAINTS_NAME,)))
        for c in node.constraints:
            label = Term(c.label)
            self.emit(Term("in", (label, HTN_CONSTRAINTS_NAME)))
            if isinstance(c, Order):
                self.emit(Term("order", (label, member_names[c.before], member_names[c.after])))
            elif isinstance(c, Precondition):
                self.emit(Term("precondition", (label, self.formula(c.formula), member_names[c.program])))
            elif isinstance(c, Postcondition):
                self.emit(Term("postcondition", (label, self.formula(c.formula), member_names[c.program])))
            else:
                self.emit(
                    Term(
                        "maintain",
                        (
                            label,
                            self.formula(c.formula),
                            member_names[c.before],
                            member_names[c.after],
                        ),
                    )
                )
        return HTN_NODE_NAME


def encode_program(program: GeneralProgram) -> ProgramEncoding:
    """Structure facts for the program, deterministic in the program value.

    Only instances reachable from the top level are encoded; an unreachable
    instantiation of a procedure would produce facts no rule ever consults.
    """
    enc = _ProgramEncoder(program.procedures)
    if isinstance(program.main, HTNNode):
        main = enc.encode_htn(program.main)
        is_htn = True
    else:
        if not is_ground(program.main):
            raise ProgramError("the top-level complex action must be ground")
        main = enc.encode(program.main)
        is_htn = False
    return ProgramEncoding(main, tuple(enc.facts), tuple(enc.formulas), is_htn)
