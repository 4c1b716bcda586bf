"""Action theories: causal laws, states, and the transition function.

A domain is described by three kinds of ground propositions over a signature
of object constants, action names and fluent names:

* static causal laws  ``caused({p1,...,pn}, f)``
* dynamic causal laws ``causes(a, f, {p1,...,pn})``
* executability conditions ``executable(a, {p1,...,pn})``

States are complete, consistent sets of fluent literals closed under the
static laws.  Executing action ``a`` in state ``s`` yields every state ``s'``
satisfying the fixpoint equation ``s' = Cl(E(a,s) | (s & s'))`` where ``E``
collects the direct effects whose preconditions hold in ``s`` and ``Cl`` is
the least consistent closure under the static laws (which may not exist, in
which case the candidate is ruled out).

All types here are immutable values; the operations are pure functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, Iterable, Iterator, Mapping, Optional

from .terms import Literal, Term

State = FrozenSet[Literal]


class CapacityError(RuntimeError):
    """Raised when a brute-force operation would exceed its configured cap."""


Positions = tuple[tuple[Term, ...], ...]


@dataclass(frozen=True)
class Signature:
    """Object constants plus named action/fluent symbols.

    Each symbol declaration carries, per argument position, the tuple of
    constants that position ranges over; the ground atoms of a symbol are the
    products of its position sets.  Declaring by arity alone (every position
    ranging over all objects) is the degenerate case.
    """

    objects: frozenset[Term]
    action_decls: tuple[tuple[str, Positions], ...]
    fluent_decls: tuple[tuple[str, Positions], ...]

    @staticmethod
    def make(
        objects: Iterable[Term],
        actions: Mapping[str, int],
        fluents: Mapping[str, int],
    ) -> "Signature":
        """Arity-based constructor: every argument ranges over all objects."""
        objs = tuple(sorted(set(objects), key=Term.render))
        return Signature.make_sorted(
            objects,
            {name: (objs,) * arity for name, arity in actions.items()},
            {name: (objs,) * arity for name, arity in fluents.items()},
        )

    @staticmethod
    def make_sorted(
        objects: Iterable[Term],
        actions: Mapping[str, Positions],
        fluents: Mapping[str, Positions],
    ) -> "Signature":
        overlap = set(actions) & set(fluents)
        if overlap:
            raise ValueError(f"action and fluent names must be disjoint: {sorted(overlap)}")
        universe = frozenset(objects)
        decls = {**actions, **fluents}
        for name, positions in decls.items():
            for consts in positions:
                stray = set(consts) - universe
                if stray:
                    raise ValueError(
                        f"{name}: constants outside the object universe: "
                        f"{sorted(c.render() for c in stray)}"
                    )
        return Signature(
            universe,
            tuple(sorted((n, tuple(tuple(p) for p in ps)) for n, ps in actions.items())),
            tuple(sorted((n, tuple(tuple(p) for p in ps)) for n, ps in fluents.items())),
        )

    @property
    def action_names(self) -> dict[str, int]:
        return {name: len(ps) for name, ps in self.action_decls}

    @property
    def fluent_names(self) -> dict[str, int]:
        return {name: len(ps) for name, ps in self.fluent_decls}

    @staticmethod
    def _matches(decls, term: Term) -> bool:
        for name, positions in decls:
            if name == str(term.functor) and len(positions) == len(term.args):
                return all(arg in consts for arg, consts in zip(term.args, positions))
        return False

    def is_action(self, term: Term) -> bool:
        return Signature._matches(self.action_decls, term)

    def is_fluent(self, term: Term) -> bool:
        return Signature._matches(self.fluent_decls, term)


def _instantiations(decls: tuple[tuple[str, Positions], ...], _objects) -> tuple[Term, ...]:
    out = []
    for name, positions in decls:
        for combo in itertools.product(*positions):
            out.append(Term(name, combo))
    return tuple(sorted(out, key=Term.render))


@lru_cache(maxsize=None)
def ground_fluents(sig: Signature) -> tuple[Term, ...]:
    return _instantiations(sig.fluent_decls, sig.objects)


@lru_cache(maxsize=None)
def ground_actions(sig: Signature) -> tuple[Term, ...]:
    return _instantiations(sig.action_decls, sig.objects)


@dataclass(frozen=True)
class StaticLaw:
    body: frozenset[Literal]
    head: Literal


@dataclass(frozen=True)
class DynamicLaw:
    action: Term
    effect: Literal
    condition: frozenset[Literal]


@dataclass(frozen=True)
class Executability:
    action: Term
    condition: frozenset[Literal]


@dataclass(frozen=True)
class DomainDescription:
    """A ground domain description; the frozensets collapse duplicates."""

    signature: Signature
    statics: frozenset[StaticLaw]
    dynamics: frozenset[DynamicLaw]
    executables: frozenset[Executability]

    def fluents(self) -> tuple[Term, ...]:
        return ground_fluents(self.signature)

    def actions(self) -> tuple[Term, ...]:
        return ground_actions(self.signature)


@dataclass(frozen=True)
class ClosureResult:
    """Result of closing a literal set: ``Defined(literals)`` or ``Undefined``.

    An undefined closure is a value, not an error; it arises exactly when the
    monotone fixpoint turns inconsistent.
    """

    defined: bool
    literals: Optional[frozenset[Literal]] = None

    @staticmethod
    def of(literals: frozenset[Literal]) -> "ClosureResult":
        return ClosureResult(True, literals)

    UNDEFINED: "ClosureResult" = None  # type: ignore[assignment]


ClosureResult.UNDEFINED = ClosureResult(False, None)


def closure(statics: Iterable[StaticLaw], literals: Iterable[Literal]) -> ClosureResult:
    """Least consistent superset of ``literals`` closed under ``statics``.

    Computed by iterating the monotone one-step operator (add the head of
    every law whose body is contained in the current set) to a fixpoint.  The
    fixpoint always exists; the closure is defined iff it is consistent.
    """
    laws = list(statics)
    current = set(literals)
    changed = True
    while changed:
        changed = False
        for law in laws:
            if law.head not in current and law.body <= current:
                current.add(law.head)
                changed = True
    for lit in current:
        if lit.complement() in current:
            return ClosureResult.UNDEFINED
    return ClosureResult.of(frozenset(current))


def is_consistent(literals: Iterable[Literal]) -> bool:
    lits = set(literals)
    return all(l.complement() not in lits for l in lits)


def is_complete(sig: Signature, literals: Iterable[Literal]) -> bool:
    lits = set(literals)
    return all(
        Literal(f, True) in lits or Literal(f, False) in lits
        for f in ground_fluents(sig)
    )


def is_state(domain: DomainDescription, literals: Iterable[Literal]) -> bool:
    """Complete, consistent and closed under the static laws."""
    lits = frozenset(literals)
    if not is_consistent(lits) or not is_complete(domain.signature, lits):
        return False
    return all(law.head in lits for law in domain.statics if law.body <= lits)


def direct_effects(domain: DomainDescription, action: Term, state: State) -> frozenset[Literal]:
    """Heads of the action's dynamic laws whose preconditions hold in ``state``."""
    return frozenset(
        law.effect
        for law in domain.dynamics
        if law.action == action and law.condition <= state
    )


def is_executable(domain: DomainDescription, action: Term, state: State) -> bool:
    return any(
        prop.action == action and prop.condition <= state
        for prop in domain.executables
    )


def _changeable_fluents(domain: DomainDescription, effects: Iterable[Literal]) -> tuple[Term, ...]:
    """Fluents that can differ between a state and one of its successors.

    Any literal of ``s'`` outside ``s & s'`` must come from the direct effects
    or be the head of a static law, so only those fluents can flip; the rest
    are pinned by inertia.
    """
    atoms = {lit.atom for lit in effects}
    atoms.update(law.head.atom for law in domain.statics)
    return tuple(sorted(atoms, key=Term.render))


def successors(
    domain: DomainDescription,
    action: Term,
    state: State,
    max_fluents: int = 24,
) -> frozenset[State]:
    """All states reachable by executing ``action`` in ``state``.

    Empty when the action is not executable.  Candidate states are enumerated
    over the changeable fluents only and filtered by the fixpoint equation;
    the result is provably the same as scanning every complete interpretation
    (see :func:`successors_by_scan`, kept as the reference).
    """
    if not is_executable(domain, action, state):
        return frozenset()
    fluent_count = len(ground_fluents(domain.signature))
    if fluent_count > max_fluents:
        raise CapacityError(
            f"domain has {fluent_count} fluents; successor enumeration capped at {max_fluents}"
        )
    effects = direct_effects(domain, action, state)
    flippable = _changeable_fluents(domain, effects)
    flippable_set = set(flippable)
    base = frozenset(lit for lit in state if lit.atom not in flippable_set)
    found = []
    for signs in itertools.product((True, False), repeat=len(flippable)):
        candidate = base | frozenset(Literal(f, sgn) for f, sgn in zip(flippable, signs))
        closed = closure(domain.statics, effects | (state & candidate))
        if closed.defined and closed.literals == candidate:
            found.append(candidate)
    return frozenset(found)


def successors_by_scan(
    domain: DomainDescription,
    action: Term,
    state: State,
    max_fluents: int = 20,
) -> frozenset[State]:
    """Reference implementation: scan every complete interpretation.

    Exponential in the total fluent count; this is the literal reading of the
    transition function and cross-checks :func:`successors` in the tests.
    """
    if not is_executable(domain, action, state):
        return frozenset()
    fluents = ground_fluents(domain.signature)
    if len(fluents) > max_fluents:
        raise CapacityError(f"scan over {len(fluents)} fluents exceeds cap {max_fluents}")
    effects = direct_effects(domain, action, state)
    found = []
    for signs in itertools.product((True, False), repeat=len(fluents)):
        candidate = frozenset(Literal(f, sgn) for f, sgn in zip(fluents, signs))
        closed = closure(domain.statics, effects | (state & candidate))
        if closed.defined and closed.literals == candidate:
            found.append(candidate)
    return frozenset(found)


def all_states(domain: DomainDescription, max_fluents: int = 20) -> Iterator[State]:
    """Every interpretation that qualifies as a state, in enumeration order."""
    fluents = ground_fluents(domain.signature)
    if len(fluents) > max_fluents:
        raise CapacityError(f"state enumeration over {len(fluents)} fluents exceeds cap {max_fluents}")
    for signs in itertools.product((True, False), repeat=len(fluents)):
        candidate = frozenset(Literal(f, sgn) for f, sgn in zip(fluents, signs))
        if all(law.head in candidate for law in domain.statics if law.body <= candidate):
            yield candidate


@dataclass(frozen=True)
class Trajectory:
    """Alternating state/action sequence; ``len(states) == len(actions) + 1``."""

    states: tuple[State, ...]
    actions: tuple[Term, ...]

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("trajectory needs exactly one more state than actions")

    def __len__(self) -> int:
        return len(self.actions)


def is_trajectory(domain: DomainDescription, traj: Trajectory) -> bool:
    """Check every state and every step against the transition function.

    Steps are verified directly through the fixpoint equation rather than by
    enumerating full successor sets.
    """
    for s in traj.states:
        if not is_state(domain, s):
            return False
    for i, action in enumerate(traj.actions):
        s, s_next = traj.states[i], traj.states[i + 1]
        if not is_executable(domain, action, s):
            return False
        closed = closure(domain.statics, direct_effects(domain, action, s) | (s & s_next))
        if not closed.defined or closed.literals != s_next:
            return False
    return True


@dataclass
class Violation:
    kind: str
    detail: str


@dataclass
class TheoryReport:
    violations: list[Violation] = field(default_factory=list)
    deterministic: Optional[bool] = None
    transition_consistent: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, detail: str):
        self.violations.append(Violation(kind, detail))


def validate_theory(
    domain: DomainDescription,
    initial: frozenset[Literal],
    check_transitions: bool = False,
    max_fluents: int = 20,
) -> TheoryReport:
    """Validate an action theory; reports violations instead of raising.

    Always checks the initial state (known fluents, completeness, consistency,
    closure under the static laws).  With ``check_transitions`` the whole
    transition function is exercised: every executable action in every state
    must have at least one successor, and the report records whether the
    domain is deterministic.
    """
    report = TheoryReport()
    sig = domain.signature
    fluents = set(ground_fluents(sig))
    for lit in sorted(initial, key=Literal.render):
        if lit.atom not in fluents:
            report.add("unknown-fluent", f"initial literal {lit} is not over the signature")
    known = frozenset(l for l in initial if l.atom in fluents)
    for lit in sorted(known, key=Literal.render):
        if lit.complement() in known:
            report.add("inconsistent-initial-state", f"both {lit} and {lit.complement()}")
            break
    mentioned = {l.atom for l in known}
    for f in fluents:
        if f not in mentioned:
            report.add("incomplete-initial-state", f"no literal for fluent {f.render()}")
    if report.ok:
        for law in domain.statics:
            if law.body <= known and law.head not in known:
                report.add(
                    "initial-state-not-closed",
                    f"static law with head {law.head} fires but head does not hold",
                )
    if check_transitions and report.ok:
        deterministic = True
        consistent = True
        for state in all_states(domain, max_fluents=max_fluents):
            for action in domain.actions():
                if not is_executable(domain, action, state):
                    continue
                succ = successors(domain, action, state, max_fluents=max_fluents)
                if not succ:
                    consistent = False
                    report.add(
                        "inconsistent-domain",
                        f"{action.render()} is executable but has no successor in "
                        f"{{{', '.join(sorted(l.render() for l in state))}}}",
                    )
                if len(succ) > 1:
                    deterministic = False
        report.deterministic = deterministic
        report.transition_consistent = consistent
    return report


def trajectories_of_length(
    domain: DomainDescription,
    start: State,
    length: int,
    max_fluents: int = 24,
    succ_cache: Optional[dict] = None,
) -> Iterator[Trajectory]:
    """Depth-first enumeration of all trajectories of exactly ``length`` steps."""
    cache = succ_cache if succ_cache is not None else {}

    def succ(action: Term, state: State) -> list[State]:
        key = (action, state)
        if key not in cache:
            nxt = successors(domain, action, state, max_fluents=max_fluents)
            cache[key] = sorted(nxt, key=lambda s: sorted(l.render() for l in s))
        return cache[key]

    actions = domain.actions()
    acts: list[Term] = []

    def walk(states: list[State]) -> Iterator[Trajectory]:
        if len(states) == length + 1:
            yield Trajectory(tuple(states), tuple(acts))
            return
        for action in actions:
            for nxt in succ(action, states[-1]):
                acts.append(action)
                states.append(nxt)
                yield from walk(states)
                states.pop()
                acts.pop()

    yield from walk([start])
