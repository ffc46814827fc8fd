import pytest

from mimply.formula import parse_formula as P
from mimply.nd import conclusion, open_assumptions, validate_derivation
from mimply.oracle import (
    atom_names, corpus_seed, decide, enumerate_formulas, fib_closed, fib_family, fib_node_count,
    kripke_countermodel, kripke_valid,
)


def fib(k):
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


@pytest.mark.parametrize("delta, beta, expect", [
    ([], "A -> A", True),
    ([], "A -> B -> A", True),
    ([], "(A -> B -> C) -> (A -> B) -> A -> C", True),
    ([], "((A -> B) -> A) -> A", False),
    ([], "A", False),
    (["A", "A -> B"], "B", True),
    (["A -> B", "B -> C"], "A -> C", True),
    (["(A -> B) -> C"], "B -> C", True),
    (["B -> C"], "(A -> B) -> C", False),
    ([], "((A -> B) -> B) -> (B -> A) -> A", False),
])
def test_decide_examples(delta, beta, expect):
    assert decide([P(x) for x in delta], P(beta)) is expect
    assert kripke_valid([P(x) for x in delta], P(beta)) is expect


def test_peirce_countermodel_two_worlds():
    model = kripke_countermodel([], P("((A -> B) -> A) -> A"))
    assert model is not None
    assert kripke_countermodel([], P("A -> A")) is None


def test_enumeration_counts():
    assert atom_names(3) == ["A", "B", "C"]
    assert list(enumerate_formulas(1, 3)) == [P("A"), P("A -> A")]
    assert sum(1 for _ in enumerate_formulas(2, 5)) == 22
    small = list(enumerate_formulas(2, 9))
    assert len(small) == 550 and len(set(small)) == 550
    assert [f.size for f in small] == sorted(f.size for f in small)
    assert all(f.size <= 9 for f in small)


def test_weakening_spot_checks():
    valid = [f for f in enumerate_formulas(2, 7) if decide([], f)]
    for f in valid:
        assert decide([P("A"), P("B -> A")], f)
    for f in enumerate_formulas(2, 5):
        if decide([P("A")], f):
            assert decide([P("A"), P("B")], f)


def test_kripke_agrees_on_small_formulas():
    for f in enumerate_formulas(2, 7):
        assert decide([], f) == kripke_valid([], f)


def test_fib_node_counts():
    for n in range(2, 26):
        assert fib_node_count(n) == 2 * fib(n + 2) - 3
    assert fib_node_count(25) >= fib(25) == 75025


def test_fib_family_shape():
    for n in range(2, 16):
        inst = fib_family(n)
        d = inst.derivation
        validate_derivation(d)
        assert len(d) == fib_node_count(n)
        assert conclusion(d) == inst.atoms[-1]
        assert open_assumptions(d) <= set(inst.delta)
        assert decide(inst.delta, inst.atoms[-1])
    with pytest.raises(ValueError):
        fib_family(1)


def test_fib_closed_is_tautology():
    for n in (2, 3, 6):
        d = fib_closed(n).derivation
        validate_derivation(d)
        assert open_assumptions(d) == frozenset()
        assert decide([], conclusion(d))


def test_seed_from_environment(monkeypatch):
    monkeypatch.delenv("MIMPLY_SEED", raising=False)
    assert corpus_seed() == 0
    monkeypatch.setenv("MIMPLY_SEED", "17")
    assert corpus_seed() == 17
