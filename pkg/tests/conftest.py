import os
import random

import pytest

from mimply.formula import parse_formula as P
from mimply.nd import Derivation, elim, hyp, intro

os.environ.setdefault("MIMPLY_SEED", "0")


def chain_tree():
    """A -> C from A -> B and B -> C, discharging A."""
    a, ab, bc = P("A"), P("A -> B"), P("B -> C")
    b = elim(hyp(a), hyp(ab))
    c = elim(b, hyp(bc))
    return intro(P("A -> C"), c)


def spine_tree():
    alpha = P("(A -> B -> C -> q) -> ((A -> q) -> D -> q) -> D -> q")
    spine = elim(hyp(P("C")), elim(hyp(P("B")), elim(hyp(P("A")), hyp(alpha.left))))
    aq = intro(P("A -> q"), spine)
    dq = elim(aq, hyp(P("(A -> q) -> D -> q")))
    q = elim(hyp(P("D")), dq)
    t = intro(P("D -> q"), q)
    t = intro(alpha.right, t)
    return intro(alpha, t)


@pytest.fixture
def chain():
    return Derivation.from_tree(chain_tree())


@pytest.fixture
def spine():
    return Derivation.from_tree(spine_tree())


@pytest.fixture
def rng():
    return random.Random(int(os.environ["MIMPLY_SEED"]))
