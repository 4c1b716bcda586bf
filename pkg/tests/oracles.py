"""Independent brute-force oracles.

Everything here recomputes results from first principles, without calling the
code paths under test: closures by searching for the least closed consistent
superset, successor states by scanning all complete interpretations,
constraint satisfaction by materializing the repeated final state, trace
recognition by enumerating derivations, and proper graph colorings by
exhaustive assignment.
"""

from __future__ import annotations

import itertools

from bplan.core import DomainDescription, State, Trajectory, ground_fluents
from bplan.formulas import (
    Always,
    And,
    Eventually,
    Goal,
    Lit,
    Next,
    Not,
    Or,
    Until,
    depth,
)
from bplan.procedures import (
    Act,
    Alt,
    Call,
    HTNNode,
    If,
    Null,
    Pick,
    Seq,
    Test,
    While,
    instantiate_pick,
    instantiate_procedure,
)
from bplan.formulas import eval_state, ground_quantifiers
from bplan.terms import Literal, Term


def closed_under(laws, literals) -> bool:
    return all(law.head in literals for law in laws if law.body <= literals)


def closure_oracle(laws, literals):
    """Least consistent closed superset by exhaustive subset search.

    Returns None when no consistent closed superset containing the literals
    exists (the closure is undefined).  Only usable on small universes.
    """
    base = set(literals)
    atoms = {l.atom for l in base}
    for law in laws:
        atoms |= {l.atom for l in law.body} | {law.head.atom}
    atoms = sorted(atoms, key=Term.render)
    candidates = []
    for signs in itertools.product((None, True, False), repeat=len(atoms)):
        candidate = set(base)
        ok = True
        for atom, sign in zip(atoms, signs):
            if sign is None:
                continue
            candidate.add(Literal(atom, sign))
        if not (base <= candidate):
            continue
        if any(l.complement() in candidate for l in candidate):
            continue
        if closed_under(laws, candidate):
            candidates.append(frozenset(candidate))
    if not candidates:
        return None
    least = min(candidates, key=len)
    # the least closed superset must be unique and contained in all others
    assert all(least <= c for c in candidates), "closure is not a least element"
    return least


def successors_oracle(domain: DomainDescription, action: Term, state: State):
    """Transition function by definition: scan every complete interpretation."""
    if not any(
        prop.action == action and prop.condition <= state
        for prop in domain.executables
    ):
        return frozenset()
    effects = frozenset(
        law.effect
        for law in domain.dynamics
        if law.action == action and law.condition <= state
    )
    fluents = ground_fluents(domain.signature)
    out = []
    for signs in itertools.product((True, False), repeat=len(fluents)):
        candidate = frozenset(Literal(f, s) for f, s in zip(fluents, signs))
        closed = closure_oracle(domain.statics, effects | (state & candidate))
        if closed is not None and closed == candidate:
            out.append(candidate)
    return frozenset(out)


def sat_oracle(states, phi, goal=None, start=0) -> bool:
    """Literal reading of constraint satisfaction: extend the sequence by
    repeating the final state out to ``n + depth + 1`` and quantify over the
    extended range (any witness beyond it revisits an already-seen suffix)."""
    phi = ground_quantifiers(phi)
    extended = list(states) + [states[-1]] * (depth(phi) + 1)
    last = len(extended) - 1

    def ev(node, t):
        t = min(t, last)
        if isinstance(node, Lit):
            return node.literal in extended[t]
        if isinstance(node, Goal):
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
        raise TypeError(node)

    return ev(phi, start)


def trace_oracle(program, traj: Trajectory) -> bool:
    """Trace recognition by direct recursion over the defining clauses,
    without memoization (exponential; fine for short trajectories)."""

    def holds(phi, state):
        return eval_state(ground_quantifiers(phi), state)

    def check(node, i, j, fuel):
        if fuel <= 0:
            raise RecursionError("trace oracle fuel exhausted")
        if isinstance(node, Act):
            return j == i + 1 and traj.actions[i] == node.action
        if isinstance(node, Test):
            return j == i and holds(node.formula, traj.states[i])
        if isinstance(node, Null):
            return j == i
        if isinstance(node, Seq):
            return any(
                check(node.first, i, m, fuel - 1) and check(node.second, m, j, fuel - 1)
                for m in range(i, j + 1)
            )
        if isinstance(node, Alt):
            return any(check(b, i, j, fuel - 1) for b in node.branches)
        if isinstance(node, If):
            branch = node.then_part if holds(node.condition, traj.states[i]) else node.else_part
            return check(branch, i, j, fuel - 1)
        if isinstance(node, While):
            if not holds(node.condition, traj.states[i]):
                return j == i
            return any(
                check(node.body, i, m, fuel - 1) and check(node, m, j, fuel - 1)
                for m in range(i + 1, j + 1)
            )
        if isinstance(node, Pick):
            return any(check(instantiate_pick(node, c), i, j, fuel - 1) for c in node.constants)
        if isinstance(node, Call):
            body = instantiate_procedure(program.procedures.get(node.name), node.args)
            return check(body, i, j, fuel - 1)
        raise TypeError(node)

    def check_htn(node: HTNNode):
        n = len(traj)
        k = len(node.members)
        bodies = dict(node.members)
        names = [nm for nm, _ in node.members]
        for inner in itertools.combinations_with_replacement(range(n + 1), k - 1):
            bounds = (0,) + inner + (n,)
            for perm in itertools.permutations(names):
                slot = {nm: idx for idx, nm in enumerate(perm)}
                start = {nm: bounds[slot[nm]] for nm in perm}
                end = {nm: bounds[slot[nm] + 1] for nm in perm}
                if not all(check(bodies[nm], start[nm], end[nm], 200) for nm in perm):
                    continue
                ok = True
                for c in node.constraints:
                    kind = type(c).__name__
                    if kind == "Order":
                        ok = slot[c.before] < slot[c.after]
                    elif kind == "Precondition":
                        ok = holds(c.formula, traj.states[start[c.program]])
                    elif kind == "Postcondition":
                        ok = holds(c.formula, traj.states[end[c.program]])
                    else:
                        ok = all(
                            holds(c.formula, traj.states[t])
                            for t in range(end[c.before], start[c.after] + 1)
                        )
                    if not ok:
                        break
                if ok:
                    return True
        return False

    if isinstance(program.main, HTNNode):
        return check_htn(program.main)
    return check(program.main, 0, len(traj), 200)


def coloring_count(edges, vertices, colors=("r", "g", "b")) -> int:
    """Number of proper colorings by exhaustive assignment."""
    count = 0
    for assignment in itertools.product(colors, repeat=len(vertices)):
        color = dict(zip(vertices, assignment))
        if all(color[u] != color[v] for u, v in edges):
            count += 1
    return count
