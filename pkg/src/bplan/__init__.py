"""Planning over action theories with answer set semantics and control knowledge."""

__version__ = "0.1.0"

from .core import (
    ClosureResult,
    DomainDescription,
    DynamicLaw,
    Executability,
    Signature,
    StaticLaw,
    Trajectory,
    closure,
    direct_effects,
    is_executable,
    is_trajectory,
    successors,
    validate_theory,
)
from .planner import (
    PlanningProblem,
    ProgramKnowledge,
    TemporalKnowledge,
    cross_check,
    plan_asp,
    plan_direct,
    verify_plan,
)
from .problem import parse_plan, parse_problem, render_plan
from .solver import SolveConfig, enumerate_answer_sets, is_answer_set
from .terms import Literal, Term, neg, pos

__all__ = [
    "ClosureResult",
    "DomainDescription",
    "DynamicLaw",
    "Executability",
    "Literal",
    "PlanningProblem",
    "ProgramKnowledge",
    "Signature",
    "SolveConfig",
    "StaticLaw",
    "TemporalKnowledge",
    "Term",
    "Trajectory",
    "closure",
    "cross_check",
    "direct_effects",
    "enumerate_answer_sets",
    "is_answer_set",
    "is_executable",
    "is_trajectory",
    "neg",
    "parse_plan",
    "parse_problem",
    "plan_asp",
    "plan_direct",
    "pos",
    "render_plan",
    "successors",
    "validate_theory",
    "verify_plan",
]
