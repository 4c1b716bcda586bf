"""Stable models of ground programs.

Semantics: a set of atoms S is an answer set when (i) no constraint body is
satisfied by S, (ii) every choice rule whose body S satisfies selects between
its bounds among its head atoms, and (iii) S equals the least model of the
program transformed with respect to S: rules with a negative body literal in
S are deleted, remaining negative literals are stripped, and a choice rule
contributes ``b :- pos-body`` for each of its selected head atoms.  Choice
heads are restricted to ``lower <= 1, upper = 1`` and their atoms may not
head any other rule; under that restriction the native treatment and the
normal-rule expansion (:func:`expand_choice`) have the same models up to the
expansion's fresh atoms.

Enumeration is a complete branch-and-propagate search: unit-style propagation
over rule bodies, head support and choice bounds narrows candidates, each
full assignment is certified by an explicit stability check, and models come
out in a canonical order.  An exhaustive subset scan over the atom universe
is available as an independent oracle for small programs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .ground import ChoiceHead, GroundProgram, Rule
from .terms import Term

TRUE, FALSE, UNKNOWN = 1, 2, 0


class SolverError(ValueError):
    pass


class ResourceCapError(RuntimeError):
    """A configured search or size cap was exceeded; results were withheld."""


@dataclass(frozen=True)
class SolveConfig:
    limit: Optional[int] = None
    choice_mode: str = "native"  # native | expand
    strategy: str = "dpll"  # dpll | exhaustive
    exhaustive_atom_cap: int = 20
    node_budget: Optional[int] = None

    def __post_init__(self):
        if self.choice_mode not in ("native", "expand"):
            raise SolverError(f"unknown choice mode {self.choice_mode!r}")
        if self.strategy not in ("dpll", "exhaustive"):
            raise SolverError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class LeastModelResult:
    atoms: frozenset[Term]
    inconsistent: bool


def reduct(program: GroundProgram, model: Iterable[Term]) -> GroundProgram:
    """The program transformed with respect to a candidate atom set.

    Requires choice rules to be expanded or absent.  Rules with a negative
    body atom in the candidate are deleted; surviving rules lose their
    negative body.
    """
    s = set(model)
    out = []
    for rule in program.rules:
        if rule.is_choice():
            raise SolverError("reduct applies to programs without choice rules")
        if any(a in s for a in rule.neg):
            continue
        out.append(Rule(rule.head, rule.pos, (), rule.family))
    return GroundProgram(tuple(out))


def least_model(program: GroundProgram) -> LeastModelResult:
    """Least model of a positive program via immediate-consequence iteration.

    The result is flagged inconsistent when some constraint body is satisfied
    by the least model.
    """
    for rule in program.rules:
        if rule.neg:
            raise SolverError("least_model applies to positive programs only")
        if rule.is_choice():
            raise SolverError("least_model applies to programs without choice rules")
    derived: set[Term] = set()
    pending = [r for r in program.rules if not r.is_constraint()]
    changed = True
    while changed:
        changed = False
        rest = []
        for rule in pending:
            if all(a in derived for a in rule.pos):
                if rule.head not in derived:
                    derived.add(rule.head)
                    changed = True
            else:
                rest.append(rule)
        pending = rest
    inconsistent = any(
        all(a in derived for a in rule.pos)
        for rule in program.rules
        if rule.is_constraint()
    )
    return LeastModelResult(frozenset(derived), inconsistent)


def expand_choice(rule: Rule) -> list[Rule]:
    """Replace a restricted choice rule by normal rules with the same models.

    Every head atom gets a rule firing when no sibling was chosen; a lower
    bound of zero additionally needs a fresh "none chosen" atom carrying the
    empty selection.  Fresh atoms are named after the first head atom.
    """
    if not rule.is_choice():
        return [rule]
    head = rule.head
    assert isinstance(head, ChoiceHead)
    out = []
    aux: Optional[Term] = None
    if head.lower == 0:
        aux = Term("no_choice", (head.atoms[0],))
    for atom in head.atoms:
        others = tuple(b for b in head.atoms if b != atom)
        extra = (aux,) if aux is not None else ()
        out.append(Rule(atom, rule.pos, rule.neg + others + extra, rule.family))
    if aux is not None:
        out.append(Rule(aux, rule.pos, rule.neg + head.atoms, rule.family))
    return out


def expand_program(program: GroundProgram) -> GroundProgram:
    """Expand every choice rule; fresh-atom names must not collide."""
    out: list[Rule] = []
    fresh: set[Term] = set()
    for rule in program.rules:
        if rule.is_choice():
            expanded = expand_choice(rule)
            for r in expanded:
                if isinstance(r.head, Term) and str(r.head.functor) == "no_choice":
                    if r.head in fresh:
                        raise SolverError(f"fresh atom collision expanding {rule.render()}")
                    fresh.add(r.head)
            out.extend(expanded)
        else:
            out.append(rule)
    return GroundProgram.of(out)


def is_expansion_aux(atom: Term) -> bool:
    return str(atom.functor) == "no_choice"


# Internal indexed representation ------------------------------------------------


class _IRule:
    __slots__ = (
        "kind", "heads", "lower", "pos", "neg",
        "unknown", "nfalse", "htrue", "hfalse",
    )

    NORMAL, CONSTRAINT, CHOICE = 0, 1, 2

    def __init__(self, kind, heads, lower, pos_ids, neg_ids):
        self.kind = kind
        self.heads = heads
        self.lower = lower
        self.pos = pos_ids
        self.neg = neg_ids
        self.unknown = len(pos_ids) + len(neg_ids)
        self.nfalse = 0
        self.htrue = 0
        self.hfalse = 0


class _Index:
    """Integer-indexed program with occurrence lists and a branch order."""

    def __init__(self, program: GroundProgram):
        atoms = program.atoms()
        self.atoms: list[Term] = list(atoms)
        self.ids: dict[Term, int] = {a: i for i, a in enumerate(self.atoms)}
        self.rules: list[_IRule] = []
        self.occurs_pos: list[list[int]] = [[] for _ in self.atoms]
        self.occurs_neg: list[list[int]] = [[] for _ in self.atoms]
        self.head_in: list[list[int]] = [[] for _ in self.atoms]
        choice_atoms: set[int] = set()
        other_heads: set[int] = set()
        for rule in program.rules:
            if rule.is_choice():
                assert isinstance(rule.head, ChoiceHead)
                heads = tuple(self.ids[a] for a in rule.head.atoms)
                irule = _IRule(_IRule.CHOICE, heads, rule.head.lower,
                               tuple(self.ids[a] for a in rule.pos),
                               tuple(self.ids[a] for a in rule.neg))
                choice_atoms.update(heads)
            elif rule.is_constraint():
                irule = _IRule(_IRule.CONSTRAINT, (), 0,
                               tuple(self.ids[a] for a in rule.pos),
                               tuple(self.ids[a] for a in rule.neg))
            else:
                head_id = self.ids[rule.head]
                irule = _IRule(_IRule.NORMAL, (head_id,), 0,
                               tuple(self.ids[a] for a in rule.pos),
                               tuple(self.ids[a] for a in rule.neg))
                other_heads.add(head_id)
            rid = len(self.rules)
            self.rules.append(irule)
            for a in irule.pos:
                self.occurs_pos[a].append(rid)
            for a in irule.neg:
                self.occurs_neg[a].append(rid)
            for h in irule.heads:
                self.head_in[h].append(rid)
        clash = choice_atoms & other_heads
        if clash:
            names = ", ".join(self.atoms[a].render() for a in sorted(clash)[:3])
            raise SolverError(f"choice head atoms may not head other rules: {names}")
        seen_choice: set[int] = set()
        for irule in self.rules:
            if irule.kind == _IRule.CHOICE:
                for h in irule.heads:
                    if h in seen_choice:
                        raise SolverError(
                            f"atom {self.atoms[h].render()} appears in two choice heads"
                        )
                    seen_choice.add(h)
        self.branch_order = self._branch_order()

    def _branch_order(self) -> list[int]:
        """Atoms in dependency order: supporters before supported atoms.

        Rank comes from the condensation of the body-to-head dependency
        graph; branching low-rank atoms first lets propagation cascade along
        derivations instead of jumping around.  Ties break on the canonical
        atom ordering, so the order is deterministic.
        """
        n = len(self.atoms)
        adj: list[list[int]] = [[] for _ in range(n)]
        for rule in self.rules:
            for h in rule.heads:
                for b in rule.pos:
                    adj[b].append(h)
                for b in rule.neg:
                    adj[b].append(h)
        index = [0] * n
        low = [0] * n
        on_stack = [False] * n
        visited = [False] * n
        comp = [-1] * n
        counter = [1]
        ncomp = [0]
        stack: list[int] = []

        for root in range(n):
            if visited[root]:
                continue
            work = [(root, 0)]
            while work:
                v, pi = work[-1]
                if pi == 0:
                    visited[v] = True
                    index[v] = low[v] = counter[0]
                    counter[0] += 1
                    stack.append(v)
                    on_stack[v] = True
                if pi < len(adj[v]):
                    work[-1] = (v, pi + 1)
                    w = adj[v][pi]
                    if not visited[w]:
                        work.append((w, 0))
                    elif on_stack[w]:
                        low[v] = min(low[v], index[w])
                else:
                    work.pop()
                    if work:
                        parent = work[-1][0]
                        low[parent] = min(low[parent], low[v])
                    if low[v] == index[v]:
                        while True:
                            w = stack.pop()
                            on_stack[w] = False
                            comp[w] = ncomp[0]
                            if w == v:
                                break
                        ncomp[0] += 1
        # Tarjan emits components in reverse topological order of the
        # body-to-head edges, so a larger component id means "earlier".
        total = ncomp[0]
        return sorted(range(n), key=lambda a: (total - comp[a], a))

    def reset(self):
        for rule in self.rules:
            rule.unknown = len(rule.pos) + len(rule.neg)
            rule.nfalse = 0
            rule.htrue = 0
            rule.hfalse = 0


class _Search:
    def __init__(self, index: _Index, node_budget: Optional[int]):
        self.ix = index
        index.reset()
        n = len(index.atoms)
        self.val = [UNKNOWN] * n
        self.support = [len(index.head_in[a]) for a in range(n)]
        self.trail: list[int] = []
        self.pending: list[tuple[int, int]] = []
        self.node_budget = node_budget
        self.decisions = 0

    # -- propagation ------------------------------------------------------

    def _push(self, atom: int, value: int) -> None:
        self.pending.append((atom, value))

    def propagate(self) -> bool:
        """Process pending assignments; False signals a conflict."""
        while self.pending:
            atom, value = self.pending.pop()
            current = self.val[atom]
            if current != UNKNOWN:
                if current != value:
                    return False
                continue
            if not self._apply(atom, value):
                return False
        return True

    def _apply(self, atom: int, value: int) -> bool:
        """Set an atom and update every counter, then evaluate the fallout.

        Counter updates always run to completion so that backtracking (which
        reverses them wholesale) stays symmetric; only the event phase, which
        never touches counters, may signal a conflict.
        """
        ix = self.ix
        self.val[atom] = value
        self.trail.append(atom)
        completed: list[_IRule] = []
        died: list[_IRule] = []
        choice_changed: list[_IRule] = []
        banned: list[_IRule] = []
        if value == TRUE:
            for rid in ix.occurs_pos[atom]:
                rule = ix.rules[rid]
                rule.unknown -= 1
                completed.append(rule)
            for rid in ix.occurs_neg[atom]:
                rule = ix.rules[rid]
                rule.nfalse += 1
                if rule.nfalse == 1:
                    died.append(rule)
                    for h in rule.heads:
                        self.support[h] -= 1
            for rid in ix.head_in[atom]:
                rule = ix.rules[rid]
                if rule.kind == _IRule.CHOICE:
                    rule.htrue += 1
                    choice_changed.append(rule)
        else:
            for rid in ix.occurs_pos[atom]:
                rule = ix.rules[rid]
                rule.nfalse += 1
                if rule.nfalse == 1:
                    died.append(rule)
                    for h in rule.heads:
                        self.support[h] -= 1
            for rid in ix.occurs_neg[atom]:
                rule = ix.rules[rid]
                rule.unknown -= 1
                completed.append(rule)
            for rid in ix.head_in[atom]:
                rule = ix.rules[rid]
                if rule.kind == _IRule.CHOICE:
                    rule.hfalse += 1
                    choice_changed.append(rule)
                else:
                    banned.append(rule)
        ok = True
        for rule in completed:
            ok = self._body_event(rule) and ok
        for rule in died:
            ok = self._support_events(rule) and ok
        for rule in choice_changed:
            ok = self._choice_event(rule) and ok
        for rule in banned:
            ok = self._banned_event(rule) and ok
        if value == TRUE:
            if self.support[atom] == 0:
                ok = False
            elif self.support[atom] == 1:
                ok = self._force_unique_support(atom) and ok
        return ok

    def _body_true(self, rule: _IRule) -> bool:
        return rule.nfalse == 0 and rule.unknown == 0

    def _must_not_fire(self, rule: _IRule) -> bool:
        if rule.kind == _IRule.CONSTRAINT:
            return True
        if rule.kind == _IRule.NORMAL:
            return self.val[rule.heads[0]] == FALSE
        over = rule.htrue >= 2
        starved = rule.lower == 1 and rule.hfalse == len(rule.heads)
        return over or starved

    def _body_event(self, rule: _IRule) -> bool:
        """Called whenever the rule's body loses an unknown literal."""
        if rule.nfalse > 0:
            return True
        if rule.unknown == 0:
            if rule.kind == _IRule.CONSTRAINT:
                return False
            if rule.kind == _IRule.NORMAL:
                head = rule.heads[0]
                if self.val[head] == FALSE:
                    return False
                if self.val[head] == UNKNOWN:
                    self._push(head, TRUE)
                return True
            return self._choice_bounds_active(rule)
        if rule.unknown == 1 and self._must_not_fire(rule):
            return self._falsify_last(rule)
        return True

    def _choice_bounds_active(self, rule: _IRule) -> bool:
        """Bounds of a choice rule whose body is (now) true."""
        if rule.htrue >= 2:
            return False
        unknowns = len(rule.heads) - rule.htrue - rule.hfalse
        if rule.lower == 1:
            if rule.hfalse == len(rule.heads):
                return False
            if rule.htrue == 0 and unknowns == 1:
                for h in rule.heads:
                    if self.val[h] == UNKNOWN:
                        self._push(h, TRUE)
        if rule.htrue == 1:
            for h in rule.heads:
                if self.val[h] == UNKNOWN:
                    self._push(h, FALSE)
        return True

    def _choice_event(self, rule: _IRule) -> bool:
        """Called when a choice rule's head counters change."""
        if self._body_true(rule):
            return self._choice_bounds_active(rule)
        if self._must_not_fire(rule):
            if rule.nfalse == 0 and rule.unknown == 1:
                return self._falsify_last(rule)
            if rule.nfalse == 0 and rule.unknown == 0:
                return False
        return True

    def _banned_event(self, rule: _IRule) -> bool:
        """A normal rule whose head became false must not fire."""
        if rule.nfalse > 0:
            return True
        if rule.unknown == 0:
            return False
        if rule.unknown == 1:
            return self._falsify_last(rule)
        return True

    def _falsify_last(self, rule: _IRule) -> bool:
        for b in rule.pos:
            if self.val[b] == UNKNOWN:
                self._push(b, FALSE)
                return True
        for b in rule.neg:
            if self.val[b] == UNKNOWN:
                self._push(b, TRUE)
                return True
        return True

    def _support_events(self, rule: _IRule) -> bool:
        """Consequences of a rule's body having just died (supports already
        decremented by the caller)."""
        for h in rule.heads:
            if self.support[h] == 0:
                if self.val[h] == TRUE:
                    return False
                if self.val[h] == UNKNOWN:
                    self._push(h, FALSE)
            elif self.support[h] == 1 and self.val[h] == TRUE:
                if not self._force_unique_support(h):
                    return False
        return True

    def _force_unique_support(self, atom: int) -> bool:
        live = None
        for rid in self.ix.head_in[atom]:
            rule = self.ix.rules[rid]
            if rule.nfalse == 0:
                live = rule
                break
        if live is None:
            return False
        for b in live.pos:
            if self.val[b] == UNKNOWN:
                self._push(b, TRUE)
        for b in live.neg:
            if self.val[b] == UNKNOWN:
                self._push(b, FALSE)
        return True

    # -- backtracking -----------------------------------------------------

    def mark(self) -> int:
        return len(self.trail)

    def undo_to(self, mark: int) -> None:
        ix = self.ix
        while len(self.trail) > mark:
            atom = self.trail.pop()
            value = self.val[atom]
            self.val[atom] = UNKNOWN
            if value == TRUE:
                for rid in ix.occurs_pos[atom]:
                    ix.rules[rid].unknown += 1
                for rid in ix.occurs_neg[atom]:
                    rule = ix.rules[rid]
                    rule.nfalse -= 1
                    if rule.nfalse == 0:
                        for h in rule.heads:
                            self.support[h] += 1
                for rid in ix.head_in[atom]:
                    rule = ix.rules[rid]
                    if rule.kind == _IRule.CHOICE:
                        rule.htrue -= 1
            else:
                for rid in ix.occurs_pos[atom]:
                    rule = ix.rules[rid]
                    rule.nfalse -= 1
                    if rule.nfalse == 0:
                        for h in rule.heads:
                            self.support[h] += 1
                for rid in ix.occurs_neg[atom]:
                    ix.rules[rid].unknown += 1
                for rid in ix.head_in[atom]:
                    rule = ix.rules[rid]
                    if rule.kind == _IRule.CHOICE:
                        rule.hfalse -= 1
        self.pending.clear()

    # -- search -----------------------------------------------------------

    def initial_propagation(self) -> bool:
        for atom in range(len(self.ix.atoms)):
            if self.support[atom] == 0:
                self._push(atom, FALSE)
        for rule in self.ix.rules:
            if rule.nfalse == 0 and rule.unknown == 0:
                if rule.kind == _IRule.CONSTRAINT:
                    return False
                if rule.kind == _IRule.NORMAL:
                    self._push(rule.heads[0], TRUE)
                elif not self._choice_bounds_active(rule):
                    return False
        return self.propagate()

    def run(self) -> Iterator[list[bool]]:
        """Yield every stable total assignment (as a truth vector)."""
        if not self.initial_propagation():
            return
        order = self.ix.branch_order
        frames: list[tuple[int, int, int]] = []  # (atom, next_value_index, mark)
        values = (FALSE, TRUE)
        cursor = 0

        def next_unassigned(start: int) -> int:
            i = start
            while i < len(order) and self.val[order[i]] != UNKNOWN:
                i += 1
            return i

        cursor = next_unassigned(0)
        if cursor == len(order):
            truth = [v == TRUE for v in self.val]
            if self._stable(truth):
                yield truth
            return
        frames.append((cursor, 0, self.mark()))
        while frames:
            pos_, vi, mark = frames[-1]
            if vi == 2:
                frames.pop()
                continue
            frames[-1] = (pos_, vi + 1, mark)
            self.undo_to(mark)
            self.decisions += 1
            if self.node_budget is not None and self.decisions > self.node_budget:
                raise ResourceCapError(f"search exceeded node budget {self.node_budget}")
            self._push(order[pos_], values[vi])
            if not self.propagate():
                continue
            nxt = next_unassigned(pos_ + 1)
            if nxt == len(order):
                truth = [v == TRUE for v in self.val]
                if self._stable(truth):
                    yield list(truth)
                continue
            frames.append((nxt, 0, self.mark()))

    # -- stability --------------------------------------------------------

    def _stable(self, truth: Sequence[bool]) -> bool:
        return _stable_on_index(self.ix, truth)


def _stable_on_index(ix: _Index, truth: Sequence[bool]) -> bool:
    """Certify a total assignment against the stable-model conditions."""
    for rule in ix.rules:
        body = all(truth[b] for b in rule.pos) and not any(truth[b] for b in rule.neg)
        if not body:
            continue
        if rule.kind == _IRule.CONSTRAINT:
            return False
        if rule.kind == _IRule.CHOICE:
            selected = sum(1 for h in rule.heads if truth[h])
            if selected < rule.lower or selected > 1:
                return False
    derived = [False] * len(ix.atoms)
    sources: list[tuple[int, tuple[int, ...]]] = []
    for rule in ix.rules:
        if any(truth[b] for b in rule.neg):
            continue
        if rule.kind == _IRule.NORMAL:
            sources.append((rule.heads[0], rule.pos))
        elif rule.kind == _IRule.CHOICE:
            for h in rule.heads:
                if truth[h]:
                    sources.append((h, rule.pos))
    changed = True
    while changed:
        changed = False
        rest = []
        for head, pos_body in sources:
            if derived[head]:
                continue
            if all(derived[b] for b in pos_body):
                derived[head] = True
                changed = True
            else:
                rest.append((head, pos_body))
        sources = rest
    return all(derived[a] == truth[a] for a in range(len(ix.atoms)))


# Public API ---------------------------------------------------------------------


def is_answer_set(program: GroundProgram, atoms: Iterable[Term]) -> bool:
    """Stability of a candidate: least model of the transformed program plus
    constraint and choice-bound satisfaction."""
    ix = _Index(program)
    s = set(atoms)
    if not s <= set(ix.atoms):
        return False
    truth = [a in s for a in ix.atoms]
    return _stable_on_index(ix, truth)


def enumerate_answer_sets(
    program: GroundProgram,
    config: SolveConfig = SolveConfig(),
) -> list[frozenset[Term]]:
    """All answer sets, canonically ordered, duplicate-free.

    ``config.limit`` truncates after that many models (models found first in
    search order); the node budget raises instead of silently truncating.
    With ``choice_mode="expand"`` the program is expanded to normal rules
    first and the fresh atoms are projected away, which must give the same
    models as the native treatment.
    """
    if config.choice_mode == "expand":
        expanded = expand_program(program)
        models = _enumerate_native(expanded, config)
        projected = [frozenset(a for a in m if not is_expansion_aux(a)) for m in models]
        if len(set(projected)) != len(projected):
            raise SolverError("expansion projection collapsed distinct models")
        return sorted(projected, key=_model_key)
    return _enumerate_native(program, config)


def _model_key(model: frozenset[Term]) -> tuple[str, ...]:
    return tuple(sorted(a.render() for a in model))


def _enumerate_native(program: GroundProgram, config: SolveConfig) -> list[frozenset[Term]]:
    if config.strategy == "exhaustive":
        return _enumerate_exhaustive(program, config)
    ix = _Index(program)
    search = _Search(ix, config.node_budget)
    models = []
    for truth in search.run():
        models.append(frozenset(a for a, t in zip(ix.atoms, truth) if t))
        if config.limit is not None and len(models) >= config.limit:
            break
    return sorted(models, key=_model_key)


def _enumerate_exhaustive(program: GroundProgram, config: SolveConfig) -> list[frozenset[Term]]:
    ix = _Index(program)
    n = len(ix.atoms)
    if n > config.exhaustive_atom_cap:
        raise ResourceCapError(
            f"exhaustive scan over {n} atoms exceeds cap {config.exhaustive_atom_cap}"
        )
    models = []
    for mask in range(1 << n):
        truth = [bool(mask >> i & 1) for i in range(n)]
        if _stable_on_index(ix, truth):
            models.append(frozenset(a for a, t in zip(ix.atoms, truth) if t))
            if config.limit is not None and len(models) >= config.limit:
                break
    return sorted(models, key=_model_key)
