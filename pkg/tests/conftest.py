from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bplan.core import (
    DomainDescription,
    DynamicLaw,
    Executability,
    Signature,
    StaticLaw,
)
from bplan.problem import parse_problem
from bplan.terms import Term, mk, neg, pos

ROOT = Path(__file__).parent.parent
CORPUS = ROOT / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


def load_corpus(name: str):
    return parse_problem((CORPUS / name).read_text())


# -- suitcase -----------------------------------------------------------------

L1, L2, S, K1, K2 = (Term(x) for x in ("l1", "l2", "s", "k1", "k2"))
UP1, UP2 = mk("up", L1), mk("up", L2)
LOCKED = mk("locked", S)
HK1, HK2 = mk("holding", K1), mk("holding", K2)
OPEN1, OPEN2 = mk("open", L1), mk("open", L2)
CLOSE1, CLOSE2 = mk("close", L1), mk("close", L2)


def suitcase_domain() -> DomainDescription:
    sig = Signature.make_sorted(
        [L1, L2, S, K1, K2],
        {"open": ((L1, L2),), "close": ((L1, L2),)},
        {"up": ((L1, L2),), "locked": ((S,),), "holding": ((K1, K2),)},
    )
    return DomainDescription(
        sig,
        frozenset(
            {
                StaticLaw(frozenset({pos(UP1), pos(UP2)}), neg(LOCKED)),
                StaticLaw(frozenset({neg(UP1)}), pos(LOCKED)),
                StaticLaw(frozenset({neg(UP2)}), pos(LOCKED)),
            }
        ),
        frozenset(
            {
                DynamicLaw(OPEN1, pos(UP1), frozenset()),
                DynamicLaw(OPEN2, pos(UP2), frozenset()),
                DynamicLaw(CLOSE1, neg(UP1), frozenset()),
                DynamicLaw(CLOSE2, neg(UP2), frozenset()),
            }
        ),
        frozenset(
            {
                Executability(OPEN1, frozenset({pos(HK1)})),
                Executability(OPEN2, frozenset({pos(HK2)})),
                Executability(CLOSE1, frozenset()),
                Executability(CLOSE2, frozenset()),
            }
        ),
    )


def suitcase_s0():
    return frozenset({pos(UP1), neg(UP2), pos(LOCKED), neg(HK1), pos(HK2)})


@pytest.fixture(scope="session")
def suitcase():
    return suitcase_domain(), suitcase_s0()


# -- toggle ---------------------------------------------------------------------

F0 = Term("f")
A0 = Term("a")


def toggle_domain() -> DomainDescription:
    sig = Signature.make_sorted([Term("o")], {"a": ()}, {"f": ()})
    return DomainDescription(
        sig,
        frozenset(),
        frozenset({DynamicLaw(A0, pos(F0), frozenset())}),
        frozenset({Executability(A0, frozenset())}),
    )


@pytest.fixture(scope="session")
def toggle():
    return toggle_domain(), frozenset({neg(F0)})
