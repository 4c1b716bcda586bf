"""Command-line front end.

Subcommands:

* ``validate``   -- check an action theory (and any procedure table)
* ``translate``  -- write the ground logic program for a problem
* ``plan``       -- find plans via the direct route, the solver route or both
* ``check``      -- verify a plan file against a problem
* ``solve``      -- enumerate answer sets of a hand-written ground program

Exit codes: 0 success, 1 invalid input (or route divergence), 2 no plan /
no model / failed check, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .core import CapacityError, State, Trajectory, successors, validate_theory
from .ground import ProgramSyntaxError, parse_program
from .planner import (
    PlanItem,
    PlanningError,
    PlanningProblem,
    cross_check,
    encode_problem,
    plan_asp,
    plan_direct,
    verify_plan,
)
from .problem import ProblemSyntaxError, parse_plan, parse_problem
from .procedures import check_coherent
from .solver import ResourceCapError, SolveConfig, SolverError, enumerate_answer_sets
from .terms import Term

OK, INVALID_INPUT, NO_PLAN, RESOURCE_CAP = 0, 1, 2, 3


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc}", INVALID_INPUT) from exc


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_problem(path: str, horizon: Optional[int], max_fluents: int) -> PlanningProblem:
    text = _read(path)
    try:
        pf = parse_problem(text)
        return pf.planning_problem(horizon=horizon, max_fluents=max_fluents)
    except (ProblemSyntaxError, ValueError) as exc:
        raise _CliError(f"{path}: {exc}", INVALID_INPUT) from exc


def cmd_validate(args) -> int:
    text = _read(args.file)
    try:
        pf = parse_problem(text)
    except (ProblemSyntaxError, ValueError) as exc:
        print(f"INVALID: {exc}")
        return INVALID_INPUT
    try:
        report = validate_theory(
            pf.domain, pf.initial, check_transitions=args.full, max_fluents=args.max_fluents
        )
    except CapacityError as exc:
        print(f"RESOURCE CAP: {exc}")
        return RESOURCE_CAP
    status = OK
    for violation in report.violations:
        print(f"VIOLATION [{violation.kind}] {violation.detail}")
        status = INVALID_INPUT
    if pf.program is not None:
        coherence = check_coherent(pf.program.procedures)
        for line in coherence.violations:
            print(f"VIOLATION [incoherent-procedures] {line}")
            status = INVALID_INPUT
    if status == OK:
        extras = []
        if report.deterministic is not None:
            extras.append("deterministic" if report.deterministic else "nondeterministic")
        if report.transition_consistent is not None and not report.transition_consistent:
            extras.append("transition-inconsistent")
        print("OK" + (f" ({', '.join(extras)})" if extras else ""))
    return status


def cmd_translate(args) -> int:
    problem = _load_problem(args.file, args.horizon, args.max_fluents)
    if args.knowledge_mode == "none":
        problem = PlanningProblem(
            domain=problem.domain,
            initial=problem.initial,
            goal=problem.goal,
            horizon=problem.horizon,
            knowledge=None,
            max_fluents=problem.max_fluents,
        )
    try:
        program = encode_problem(problem, args.occ_encoding, args.choice_mode)
    except (PlanningError, ValueError) as exc:
        raise _CliError(str(exc), INVALID_INPUT) from exc
    text = program.render()
    if args.emit:
        Path(args.emit).write_text(text)
        print(f"wrote {len(program)} rules to {args.emit}")
    else:
        sys.stdout.write(text)
    return OK


def _print_items(items: list[PlanItem], limit: Optional[int]) -> None:
    shown = items if limit is None else items[:limit]
    for idx, item in enumerate(shown, start=1):
        marks = [item.classification, f"length {len(item.trajectory)}"]
        if item.dead_end:
            marks.append("dead-end")
        actions = ", ".join(a.render() for a in item.trajectory.actions) or "(empty)"
        print(f"plan {idx} ({', '.join(marks)}): {actions}")
    if limit is not None and len(items) > limit:
        print(f"... {len(items) - limit} more")


def cmd_plan(args) -> int:
    problem = _load_problem(args.file, args.horizon, args.max_fluents)
    if not args.all and args.route != "both":
        problem = PlanningProblem(
            domain=problem.domain,
            initial=problem.initial,
            goal=problem.goal,
            horizon=problem.horizon,
            knowledge=problem.knowledge,
            all_solutions=False,
            max_fluents=problem.max_fluents,
        )
    config = SolveConfig(choice_mode=args.choice_mode)
    if args.route == "both":
        report = cross_check(problem, args.occ_encoding, args.choice_mode, config)
        for warning in report.warnings:
            print(f"warning: {warning}")
        print(report.summary())
        if not report.agree:
            for item in report.only_direct[:5]:
                print(f"only direct: {', '.join(a.render() for a in item.trajectory.actions)}")
            for item in report.only_asp[:5]:
                print(f"only asp: {', '.join(a.render() for a in item.trajectory.actions)}")
            return INVALID_INPUT
        result = plan_direct(problem)
    elif args.route == "direct":
        result = plan_direct(problem)
    else:
        result = plan_asp(problem, args.occ_encoding, args.choice_mode, config)
    if not result.items:
        print("no plan.")
        return NO_PLAN
    _print_items(result.items, None if args.all else (args.limit or 1))
    return OK


def _completions(problem: PlanningProblem, actions: tuple[Term, ...]) -> list[Trajectory]:
    """All state completions of an action sequence from the initial state."""
    partial: list[list[State]] = [[frozenset(problem.initial)]]
    for action in actions:
        nxt: list[list[State]] = []
        for states in partial:
            for s2 in sorted(
                successors(problem.domain, action, states[-1], problem.max_fluents),
                key=lambda s: tuple(sorted(l.render() for l in s)),
            ):
                nxt.append(states + [s2])
        partial = nxt
        if not partial:
            return []
    return [Trajectory(tuple(states), actions) for states in partial]


def cmd_check(args) -> int:
    problem = _load_problem(args.file, args.horizon, args.max_fluents)
    try:
        actions = parse_plan(_read(args.plan))
    except ValueError as exc:
        raise _CliError(f"{args.plan}: {exc}", INVALID_INPUT) from exc
    trajectories = _completions(problem, actions)
    if not trajectories:
        print("INVALID: action sequence is not executable from the initial state")
        return NO_PLAN
    last_verdict = None
    for traj in trajectories:
        verdict = verify_plan(problem, traj)
        if verdict.valid:
            print(f"VALID ({verdict.classification})")
            return OK
        last_verdict = verdict
    assert last_verdict is not None
    print(f"INVALID: {'; '.join(last_verdict.diagnostics)}")
    return NO_PLAN


def cmd_solve(args) -> int:
    text = _read(args.file)
    try:
        program = parse_program(text)
    except ProgramSyntaxError as exc:
        raise _CliError(f"{args.file}: {exc}", INVALID_INPUT) from exc
    config = SolveConfig(
        limit=None if args.all else args.limit,
        choice_mode=args.choice_mode,
        strategy=args.strategy,
    )
    try:
        models = enumerate_answer_sets(program, config)
    except SolverError as exc:
        raise _CliError(str(exc), INVALID_INPUT) from exc
    if not models:
        print("unsatisfiable.")
        return NO_PLAN
    for idx, model in enumerate(models, start=1):
        atoms = " ".join(sorted(a.render() for a in model))
        print(f"model {idx}: {atoms}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bplan",
        description="Action-language planning with answer set semantics and control knowledge",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, horizon=True):
        p.add_argument("file", help="problem file")
        if horizon:
            p.add_argument("--horizon", type=int, default=None, help="override horizon(k)")
        p.add_argument("--max-fluents", type=int, default=24,
                       help="cap for successor enumeration (default 24)")

    p = sub.add_parser("validate", help="validate an action theory")
    common(p, horizon=False)
    p.add_argument("--full", action="store_true",
                   help="also brute-force check transitions and determinism")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("translate", help="emit the ground logic program")
    common(p)
    p.add_argument("--emit", help="output path (default: stdout)")
    p.add_argument("--knowledge-mode", choices=["auto", "none"], default="auto",
                   help="'none' ignores control knowledge")
    p.add_argument("--occ-encoding", choices=["rules", "choice"], default="rules")
    p.add_argument("--choice-mode", choices=["native", "expand"], default="native")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("plan", help="search for plans")
    common(p)
    p.add_argument("--route", choices=["direct", "asp", "both"], default="asp")
    p.add_argument("--all", action="store_true", help="list every solution")
    p.add_argument("--limit", type=int, default=None, help="list at most this many")
    p.add_argument("--occ-encoding", choices=["rules", "choice"], default="rules")
    p.add_argument("--choice-mode", choices=["native", "expand"], default="native")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("check", help="verify a plan file")
    common(p)
    p.add_argument("--plan", required=True, help="plan file to verify")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="enumerate answer sets of a ground program")
    p.add_argument("file", help="ground program file")
    p.add_argument("--all", action="store_true", help="enumerate every model")
    p.add_argument("--limit", type=int, default=1, help="stop after this many models")
    p.add_argument("--choice-mode", choices=["native", "expand"], default="native")
    p.add_argument("--strategy", choices=["dpll", "exhaustive"], default="dpll")
    p.set_defaults(func=cmd_solve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (PlanningError, SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INVALID_INPUT
    except (ResourceCapError, CapacityError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return RESOURCE_CAP


if __name__ == "__main__":
    sys.exit(main())
