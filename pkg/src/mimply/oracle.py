"""Ground truth for testing: a decision procedure, a Kripke brute force, a
formula enumerator and the Fibonacci family of large derivations.

Nothing here imports the proof-search, compression or checking code, so it can
be used to judge them.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .formula import Atom, Formula, Imp
from .nd import Derivation, PTree, elim, hyp, intro


# --- contraction-free sequent search ------------------------------------------

def decide(delta: Iterable[Formula], beta: Formula) -> bool:
    """Whether ``delta`` entails ``beta`` in minimal implicational logic.

    Backward search in the implicational fragment of Dyckhoff's contraction-free
    calculus. Every rule makes the sequent smaller in the multiset ordering, so
    the search terminates without loop checks.
    """
    return _provable(frozenset(delta), beta)


@lru_cache(maxsize=200_000)
def _provable(gamma: frozenset, goal: Formula) -> bool:
    while isinstance(goal, Imp):
        gamma = gamma | {goal.left}
        goal = goal.right
    gamma = _saturate(gamma)
    if goal in gamma:
        return True
    for h in gamma:
        if isinstance(h, Imp) and isinstance(h.left, Imp):
            rest = gamma - {h}
            c, d, b = h.left.left, h.left.right, h.right
            if _provable(rest | {Imp(d, b)}, Imp(c, d)) and _provable(rest | {b}, goal):
                return True
    return False


def _saturate(gamma: frozenset) -> frozenset:
    """Apply ``p, p -> B  =>  p, B`` for atoms ``p`` until nothing changes."""
    changed = True
    while changed:
        changed = False
        for h in gamma:
            if isinstance(h, Imp) and isinstance(h.left, Atom) and h.left in gamma:
                gamma = (gamma - {h}) | {h.right}
                changed = True
                break
    return gamma


# --- Kripke brute force ------------------------------------------------------------

def _atoms(formulas: Iterable[Formula]) -> list[Atom]:
    seen = set()
    stack = list(formulas)
    while stack:
        f = stack.pop()
        if isinstance(f, Imp):
            stack.extend((f.left, f.right))
        else:
            seen.add(f)
    return sorted(seen, key=lambda a: a.name)


def _partial_orders(n: int) -> Iterator[list[list[bool]]]:
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for choice in itertools.product((False, True), repeat=len(pairs)):
        le = [[i == j for j in range(n)] for i in range(n)]
        for (i, j), on in zip(pairs, choice):
            le[i][j] = on
        ok = all(not (le[i][j] and le[j][i]) for i, j in pairs)
        ok = ok and all(
            le[i][k] or not (le[i][j] and le[j][k])
            for i in range(n) for j in range(n) for k in range(n)
        )
        if ok:
            yield le


def _upsets(le: list[list[bool]]) -> list[frozenset[int]]:
    n = len(le)
    out = []
    for mask in range(1 << n):
        s = {i for i in range(n) if mask >> i & 1}
        if all(j in s for i in s for j in range(n) if le[i][j]):
            out.append(frozenset(s))
    return out


def kripke_countermodel(delta: Iterable[Formula], beta: Formula, max_worlds: int = 3):
    """Search models with at most ``max_worlds`` worlds for one where ``delta`` holds
    at some world but ``beta`` does not. Returns ``(order, valuation, world)`` or None."""
    delta = list(delta)
    atoms = _atoms([*delta, beta])
    for n in range(1, max_worlds + 1):
        for le in _partial_orders(n):
            ups = _upsets(le)
            for vals in itertools.product(ups, repeat=len(atoms)):
                val = dict(zip(atoms, vals))
                memo: dict = {}

                def forces(w: int, f: Formula) -> bool:
                    key = (w, f)
                    if key not in memo:
                        if isinstance(f, Imp):
                            memo[key] = all(
                                not forces(u, f.left) or forces(u, f.right)
                                for u in range(n) if le[w][u]
                            )
                        else:
                            memo[key] = w in val[f]
                    return memo[key]

                for w in range(n):
                    if all(forces(w, g) for g in delta) and not forces(w, beta):
                        return le, {a.name: sorted(s) for a, s in val.items()}, w
    return None


def kripke_valid(delta: Iterable[Formula], beta: Formula, max_worlds: int = 3) -> bool:
    return kripke_countermodel(delta, beta, max_worlds) is None


# --- enumeration ---------------------------------------------------------------------

def atom_names(num_atoms: int) -> list[str]:
    if num_atoms <= 26:
        return [chr(ord("A") + i) for i in range(num_atoms)]
    return [f"p{i}" for i in range(1, num_atoms + 1)]


def enumerate_formulas(num_atoms: int, max_size: int) -> Iterator[Formula]:
    """Every formula over ``num_atoms`` atoms with at most ``max_size`` nodes, once each.

    Ordered by size, then by the size of the left subformula, then recursively.
    """
    if num_atoms < 1 or max_size < 1:
        raise ValueError("need at least one atom and size at least 1")
    by_size: dict[int, list[Formula]] = {1: [Atom(n) for n in atom_names(num_atoms)]}
    yield from by_size[1]
    for s in range(3, max_size + 1, 2):
        level = []
        for ls in range(1, s - 1, 2):
            rs = s - 1 - ls
            for left in by_size[ls]:
                for right in by_size[rs]:
                    level.append(Imp(left, right))
        by_size[s] = level
        yield from level


# --- Fibonacci family --------------------------------------------------------------

@dataclass(frozen=True)
class FibInstance:
    n: int
    atoms: tuple[Atom, ...]
    delta: tuple[Formula, ...]
    derivation: Derivation


def fib_node_count(n: int) -> int:
    """``N(1)=1, N(2)=3, N(i+2)=N(i)+N(i+1)+3``."""
    a, b = 1, 3
    if n == 1:
        return 1
    for _ in range(n - 2):
        a, b = b, a + b + 3
    return b


def _fib_tree(n: int):
    p = [None] + [Atom(f"p{i}") for i in range(1, n + 1)]
    delta = [p[1], Imp(p[1], p[2])]
    proofs: list[PTree | None] = [None, hyp(p[1]), elim(hyp(p[1]), hyp(Imp(p[1], p[2])))]
    for i in range(1, n - 1):
        step = Imp(p[i], Imp(p[i + 1], p[i + 2]))
        delta.append(step)
        proofs.append(elim(proofs[i + 1], elim(proofs[i], hyp(step))))
    return tuple(p[1:]), tuple(delta), proofs[n]


def fib_family(n: int) -> FibInstance:
    """Derivation of ``p_n`` from ``{p1, p1 -> p2} + {p_i -> (p_{i+1} -> p_{i+2})}``.

    The proof of ``p_{i+2}`` contains the proofs of both ``p_i`` and ``p_{i+1}``
    in full, so the tree grows like the Fibonacci numbers.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    atoms, delta, tree = _fib_tree(n)
    return FibInstance(n, atoms, delta, Derivation.from_tree(tree))


def fib_closed(n: int) -> FibInstance:
    """:func:`fib_family` with every assumption discharged; the first one listed is outermost."""
    if n < 2:
        raise ValueError("n must be at least 2")
    atoms, delta, tree = _fib_tree(n)
    for f in reversed(delta):
        tree = intro(Imp(f, tree.formula), tree)
    return FibInstance(n, atoms, delta, Derivation.from_tree(tree))


def corpus_seed(default: int = 0) -> int:
    """Seed for randomized corpora, taken from ``MIMPLY_SEED`` when set."""
    raw = os.environ.get("MIMPLY_SEED")
    return int(raw) if raw not in (None, "") else default
