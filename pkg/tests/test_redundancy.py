import random

import pytest

from mimply.formula import parse_formula as P
from mimply.nd import Derivation, elim, hyp, intro
from mimply.oracle import fib_family
from mimply.redundancy import (
    MatrixOccurrences, RedundancyParams, find_repeats, fingerprints, independent, lri,
    same_structure,
)

import corpus


def _shared():
    return elim(elim(hyp(P("A")), hyp(P("A -> B"))), hyp(P("B -> C")))


def two_copies():
    s = _shared()
    left = intro(P("D -> C"), s)
    right = intro(P("(D -> C) -> C"), elim(hyp(P("D")), left))
    return Derivation.from_tree(elim(left, right))


def test_params_validated():
    with pytest.raises(ValueError):
        RedundancyParams(min_count=1)
    with pytest.raises(ValueError):
        RedundancyParams(min_size=0)


def test_two_copies_found_at_their_level():
    d = two_copies()
    lev = d.levels()
    copies = [v for v in range(len(d)) if d.formulas[v] == P("D -> C") and d.rules[v] == "intro"]
    assert len(copies) == 2
    # the copies sit at different levels, so neither level has a repeat
    assert lev[copies[0]] != lev[copies[1]]
    s_roots = sorted(d.children[v][0] for v in copies)
    assert same_structure(d, *s_roots)
    groups = find_repeats(d, lev[s_roots[0]])
    assert all(s_roots[1] not in g.roots for g in groups)


def test_same_level_copies():
    s = _shared()
    t = elim(intro(P("D -> C"), s), intro(P("(D -> C) -> C"), s))
    d = Derivation.from_tree(t)
    groups = lri(d)
    assert len(groups) == 1
    g = groups[0]
    assert g.level == 2 and len(g.roots) == 2 and g.size == 5
    assert lri(d, RedundancyParams(min_size=6)) == []
    for r in g.roots:
        assert same_structure(d, g.matrix, r)


def test_lri_picks_lowest_level_only():
    s = _shared()
    # two level-2 copies of a pair that itself repeats s below
    u = intro(P("D -> C"), s)
    v = intro(P("(D -> C) -> C"), s)
    pair = elim(u, v)
    t = elim(intro(P("D -> C"), pair), intro(P("(D -> C) -> C"), pair))
    d = Derivation.from_tree(t)
    groups = lri(d)
    assert [(g.level, len(g.roots)) for g in groups] == [(2, 2)]
    assert independent(d, groups)
    assert len(find_repeats(d, 4)) == 1 and len(find_repeats(d, 4)[0].roots) == 4


def test_no_repeats():
    d = Derivation.from_tree(elim(hyp(P("A")), hyp(P("A -> B"))))
    assert lri(d) == []
    assert find_repeats(d, 1) == []


def test_min_size_filters_leaves(chain):
    assert lri(chain, RedundancyParams(min_size=1)) == []
    a = hyp(P("A"))
    d = Derivation.from_tree(elim(elim(a, hyp(P("A -> A -> B"))), elim(a, hyp(P("A -> (A -> B) -> C")))))
    groups = lri(d, RedundancyParams(min_size=1))
    assert [(g.level, len(g.roots)) for g in groups] == [(2, 2)]
    assert lri(d) == []


def test_fib6_group_matches_brute_force():
    d = fib_family(6).derivation
    lev = d.levels()
    for level in range(d.height() + 1):
        nodes = [v for v in range(len(d)) if lev[v] == level]
        sizes = d.subtree_sizes()
        for g in find_repeats(d, level):
            expect = [v for v in nodes if sizes[v] >= 2 and same_structure(d, g.matrix, v)]
            assert list(g.roots) == expect


def test_fib_lri_independent():
    for n in (4, 6, 8, 10):
        d = fib_family(n).derivation
        groups = lri(d)
        assert groups and independent(d, groups)


def test_independent_detects_nesting(chain):
    outer = MatrixOccurrences(0, 0, len(chain), (0,))
    inner = MatrixOccurrences(1, 1, 2, (chain.children[0][0],))
    assert independent(chain, [outer])
    assert not independent(chain, [outer, inner])
    assert not independent(chain, [inner, inner])


def test_fingerprint_equality_iff_same_structure():
    rng = random.Random(7)
    for _ in range(40):
        d, _, _ = corpus.planted_fixture(rng)
        fp = fingerprints(d)
        nodes = range(len(d))
        pairs = [(rng.choice(nodes), rng.choice(nodes)) for _ in range(60)]
        pairs += [(u, v) for u in nodes for v in nodes if fp[u] == fp[v]][:60]
        for u, v in pairs:
            assert (fp[u] == fp[v]) == same_structure(d, u, v)


def test_planted_copies_all_found():
    rng = random.Random(3)
    for _ in range(50):
        d, level, roots = corpus.planted_fixture(rng)
        groups = find_repeats(d, level)
        assert any(set(roots) <= set(g.roots) for g in groups)
