"""Acceptance suite. Each test prints one PASS/FAIL line for its criterion.

Run under pytest, or directly with ``python3 tests/test_acceptance.py``.
"""

import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from mimply.checker import Outcome, check, reference_verdict
from mimply.formula import parse_formula as P
from mimply.nd import Derivation, dumps_derivation, loads_derivation, proof_search
from mimply.oracle import corpus_seed, decide, enumerate_formulas, fib_family, fib_node_count
from mimply.rdag import (
    DEdge, RDagProof, collapse, compress, dumps_rdag, from_derivation, initials, loads_rdag, up,
    validate_structure,
)

import corpus
from conftest import chain_tree

# measured compressed sizes with default parameters
GOLDEN_FIB_DAG = {10: 28, 15: 43, 20: 58, 25: 73}


def fib(k):
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line
    return emit


def _dags():
    for d in corpus.corpus():
        yield d, from_derivation(d)
        yield d, compress(d)


def test_criterion_1_fibonacci_compression(report):
    problems = []
    sizes = {}
    slowest = 0.0
    for n in GOLDEN_FIB_DAG:
        t0 = time.perf_counter()
        d = fib_family(n).derivation
        dag = compress(d)
        ok = check(dag).outcome is Outcome.CORRECT_DERIVATION
        elapsed = time.perf_counter() - t0
        slowest = max(slowest, elapsed)
        sizes[n] = len(dag)
        if len(d) != fib_node_count(n) or len(d) < fib(n):
            problems.append(f"n={n}: tree size {len(d)}")
        if len(dag) > 12 * n or len(dag) != GOLDEN_FIB_DAG[n]:
            problems.append(f"n={n}: dag size {len(dag)}")
        if not ok:
            problems.append(f"n={n}: verdict")
        if elapsed >= 10:
            problems.append(f"n={n}: {elapsed:.1f}s")
    assert fib(25) == 75025 and fib_node_count(25) >= 75025
    report(1, not problems,
           f"dag sizes {sizes}, slowest {slowest:.2f}s" + (f"; {problems}" if problems else ""))


def test_criterion_2_oracle_equivalence(report):
    t0 = time.perf_counter()
    bad = []
    total = 0
    for f in enumerate_formulas(2, 9):
        total += 1
        valid = decide([], f)
        d = proof_search(f)
        if valid != (d is not None):
            bad.append(f.text())
            continue
        if d is not None and check(compress(d)).outcome is not Outcome.CORRECT_TAUTOLOGY:
            bad.append(f.text())
    elapsed = time.perf_counter() - t0
    report(2, not bad and elapsed < 300,
           f"{total} formulas, {len(bad)} disagreements, {elapsed:.1f}s")


def test_criterion_3_compression_invariance(report):
    bad = 0
    items = corpus.corpus()
    for d in items:
        a, b = check(from_derivation(d)), check(compress(d))
        if a.outcome is not b.outcome or a.root_entailment != b.root_entailment:
            bad += 1
    report(3, bad == 0, f"{len(items)} derivations, {bad} differences")


def test_criterion_4_collapse_accounting(report):
    rng = random.Random(corpus_seed())
    bad = 0
    for _ in range(500):
        d, _, roots = corpus.planted_fixture(rng)
        c = from_derivation(d)
        m = len(roots) - 1
        canon = up(c, roots[0])
        out = collapse(c, roots)
        rho_before = sum(e.rho is not None for e in c.d_edges.values())
        rho_after = sum(e.rho is not None for e in out.d_edges.values())
        ok = (len(c) - len(out) == m * len(canon)
              and rho_after - rho_before == m
              and len(out.a_edges) - len(c.a_edges) == m * len(initials(canon))
              and validate_structure(out).ok)
        bad += not ok
    report(4, bad == 0, f"500 fixtures, {bad} accounting failures")


def test_criterion_5_step_bound(report):
    bad = 0
    worst = 0.0
    count = 0
    for _, c in _dags():
        v = check(c)
        count += 1
        worst = max(worst, v.steps / v.bound)
        if v.steps > v.bound or v.steps > v.n_v ** 4:
            bad += 1
    report(5, bad == 0, f"{count} r-DAGs, {bad} over bound, max steps/bound {worst:.3f}")


def _mutate(rng, c: RDagProof):
    kind = rng.choice(["bit", "retarget", "relabel", "drop_a"])
    nodes, d_edges, a_edges = dict(c.nodes), dict(c.d_edges), dict(c.a_edges)
    if kind == "drop_a" and not a_edges:
        kind = "bit"
    if kind == "bit":
        k = rng.choice(sorted(d_edges))
        e = d_edges[k]
        bits = e.bits if e.bits is not None else 0
        d_edges[k] = DEdge(bits ^ (1 << rng.randrange(len(c.order))), e.rho)
    elif kind == "retarget":
        (u, v) = rng.choice(sorted(d_edges))
        w = rng.choice([x for x in sorted(nodes) if x != u])
        e = d_edges.pop((u, v))
        d_edges.setdefault((u, w), e)
    elif kind == "relabel":
        v = rng.choice(sorted(nodes))
        nodes[v] = rng.choice(list(c.order))
    else:
        del a_edges[rng.choice(sorted(a_edges))]
    return kind, RDagProof(nodes, d_edges, a_edges, c.root, c.order)


def test_criterion_6_mutation_soundness(report):
    rng = random.Random(corpus_seed() + 6)
    sources = [c for _, c in _dags() if len(c.d_edges) > 0]
    false_taut = 0
    crashes = 0
    tautologies = 0
    for _ in range(1000):
        src = rng.choice(sources)
        kind, m = _mutate(rng, src)
        try:
            v = check(m)
        except Exception:
            crashes += 1
            continue
        if v.outcome is Outcome.CORRECT_TAUTOLOGY:
            tautologies += 1
            if not decide([], v.root_entailment.succedent):
                false_taut += 1
    report(6, false_taut == 0 and crashes == 0,
           f"1000 mutations, {tautologies} still tautologies, {false_taut} false, {crashes} crashes")


def test_criterion_7_reference_agreement(report):
    bad = 0
    count = 0
    for _, c in _dags():
        count += 1
        a, b = check(c), reference_verdict(c)
        if a.outcome is not b.outcome or a.root_entailment != b.root_entailment:
            bad += 1
    report(7, bad == 0, f"{count} r-DAGs, {bad} disagreements")


def test_criterion_8_round_trip(report):
    bad = 0
    count = 0
    for d, c in _dags():
        count += 1
        td, tc = dumps_derivation(d), dumps_rdag(c)
        if dumps_derivation(loads_derivation(td)) != td or loads_derivation(td) != d:
            bad += 1
        if dumps_rdag(loads_rdag(tc)) != tc:
            bad += 1
    chain = Derivation.from_tree(chain_tree())
    root_ok = chain.dep_set(0) == {P("A -> B"), P("B -> C")} and str(chain.dep(0)) == "000101"
    entail = check(from_derivation(chain)).root_entailment
    root_ok = root_ok and chain.order.members(entail.antecedent) == {P("A -> B"), P("B -> C")}
    report(8, bad == 0 and root_ok,
           f"{count} proofs and r-DAGs, {bad} mismatches, chain root dependencies "
           f"{'ok' if root_ok else 'wrong'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
