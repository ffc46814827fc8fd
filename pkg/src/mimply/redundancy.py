"""Repeated sub-derivations (matrices) and independent selections of their instances.

Two sub-derivations are instances of the same matrix when they are identical as
labelled trees: same formulas, rules, shape and dependency bitstrings.
Identity is decided by hash-consing every subtree into an integer id, so equal
ids mean equal structure with no possibility of a collision.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nd import Derivation


@dataclass(frozen=True)
class RedundancyParams:
    """Desk-scale thresholds for calling a sub-derivation redundant.

    They replace the asymptotic instance counts used in the theory. ``min_count``
    is the number of instances needed at one level, ``min_size`` the smallest
    matrix (in nodes) worth sharing.
    """

    min_count: int = 2
    min_size: int = 2

    def __post_init__(self):
        if self.min_count < 2:
            raise ValueError("min_count must be at least 2")
        if self.min_size < 1:
            raise ValueError("min_size must be at least 1")


@dataclass(frozen=True)
class MatrixOccurrences:
    fingerprint: int
    level: int
    size: int
    roots: tuple[int, ...]

    @property
    def matrix(self) -> int:
        """Root of the canonical instance (the first one)."""
        return self.roots[0]


def fingerprints(d: Derivation) -> list[int]:
    """Interned structure id for every subtree of ``d``."""
    table: dict[tuple, int] = {}
    fp = [0] * len(d)
    for i in range(len(d) - 1, -1, -1):
        key = (d.rules[i], d.formulas[i], tuple(fp[c] for c in d.children[i]), d.deps[i])
        fp[i] = table.setdefault(key, len(table))
    return fp


def same_structure(d: Derivation, u: int, v: int, e: Derivation | None = None) -> bool:
    """Deep node-by-node comparison of the subtree at ``u`` in ``d`` and ``v`` in ``e``."""
    e = d if e is None else e
    stack = [(u, v)]
    while stack:
        a, b = stack.pop()
        if (d.rules[a], d.formulas[a], d.deps[a]) != (e.rules[b], e.formulas[b], e.deps[b]):
            return False
        if d.order != e.order and d.dep_set(a) != e.dep_set(b):
            return False
        if len(d.children[a]) != len(e.children[b]):
            return False
        stack.extend(zip(d.children[a], e.children[b]))
    return True


def _groups_at(d, fp, sizes, nodes, level, params):
    buckets: dict[int, list[int]] = {}
    for v in nodes:
        if sizes[v] >= params.min_size:
            buckets.setdefault(fp[v], []).append(v)
    out = [
        MatrixOccurrences(key, level, sizes[roots[0]], tuple(sorted(roots)))
        for key, roots in buckets.items()
        if len(roots) >= params.min_count
    ]
    out.sort(key=lambda g: (-g.size, g.roots[0]))
    return out


def find_repeats(d: Derivation, level: int, params: RedundancyParams = RedundancyParams()
                 ) -> list[MatrixOccurrences]:
    """All maximal groups of identical sub-derivations rooted at ``level``."""
    lev = d.levels()
    nodes = [v for v in range(len(d)) if lev[v] == level]
    return _groups_at(d, fingerprints(d), d.subtree_sizes(), nodes, level, params)


def lri(d: Derivation, params: RedundancyParams = RedundancyParams()) -> list[MatrixOccurrences]:
    """Lowest repeated instances, chosen greedily from the conclusion upward.

    A group is kept when at least ``min_count`` of its instances lie outside
    every instance already selected. Instances inside a selected instance are
    dropped, so the result is an independent set: no selected instance
    contains another.
    """
    fp = fingerprints(d)
    sizes = d.subtree_sizes()
    lev = d.levels()
    by_level: dict[int, list[int]] = {}
    for v in range(len(d)):
        by_level.setdefault(lev[v], []).append(v)
    covered = bytearray(len(d))
    chosen = []
    for level in sorted(by_level):
        for g in _groups_at(d, fp, sizes, by_level[level], level, params):
            roots = tuple(r for r in g.roots if not covered[r])
            if len(roots) < params.min_count:
                continue
            chosen.append(MatrixOccurrences(g.fingerprint, level, g.size, roots))
            for r in roots:
                for v in d.subtree(r):
                    covered[v] = 1
    return chosen


def independent(d: Derivation, groups: list[MatrixOccurrences]) -> bool:
    """No selected instance lies inside (or equals) another selected instance."""
    roots = [r for g in groups for r in g.roots]
    if len(set(roots)) != len(roots):
        return False
    root_set = set(roots)
    for r in roots:
        for v in d.subtree(r)[1:]:
            if v in root_set:
                return False
    return True
