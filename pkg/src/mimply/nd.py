"""Tree-shaped Natural Deduction derivations for minimal implicational logic.

A :class:`Derivation` stores its nodes in preorder (root is node 0). Every node
carries a formula, a rule tag and the dependency bitstring of its formula
occurrence: the set of open assumptions it rests on. ``->``-introduction
discharges greedily, so the dependency of a node is fully determined by the
subtree above it.
"""

from __future__ import annotations

import gc
import json
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple

from .formula import (
    Bitstring, Formula, Imp, SubformulaOrder, SyntaxTree, decode, parse_formula,
    subformula_order, subformulas,
)

HYP = "hyp"
INTRO = "intro"
ELIM = "elim"
RULES = (HYP, INTRO, ELIM)
_ARITY = {HYP: 0, INTRO: 1, ELIM: 2}


class DerivationError(ValueError):
    pass


class RuleShapeError(DerivationError):
    def __init__(self, node: int, message: str):
        super().__init__(f"node {node}: {message}")
        self.node = node


class DependencyError(DerivationError):
    def __init__(self, node: int, expected: Bitstring, found: Bitstring):
        super().__init__(f"node {node}: dependency {found} should be {expected}")
        self.node = node
        self.expected = expected
        self.found = found


class MappingError(DerivationError):
    def __init__(self, branch: "Branch", message: str):
        super().__init__(f"branch starting at node {branch.nodes[0]}: {message}")
        self.branch = branch


@contextmanager
def gc_paused():
    """Suspend the cyclic collector while building large acyclic structures."""
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


# --- proof trees used to build derivations ----------------------------------

class PTree(NamedTuple):
    """Builder node. Subtrees may be shared; :meth:`Derivation.from_tree` unfolds them."""

    formula: Formula
    rule: str
    children: tuple = ()


def hyp(f: Formula) -> PTree:
    return PTree(f, HYP)


def intro(f: Formula, premise: PTree) -> PTree:
    if not isinstance(f, Imp) or f.right != premise.formula:
        raise RuleShapeError(-1, f"cannot introduce {f} from {premise.formula}")
    return PTree(f, INTRO, (premise,))


def elim(minor: PTree, major: PTree) -> PTree:
    m = major.formula
    if not isinstance(m, Imp) or m.left != minor.formula:
        raise RuleShapeError(-1, f"{m} is not a major premise for minor {minor.formula}")
    return PTree(m.right, ELIM, (minor, major))


# --- derivations -------------------------------------------------------------

@dataclass(frozen=True)
class Derivation:
    formulas: tuple
    rules: tuple
    children: tuple
    deps: tuple  # int masks over ``order``
    order: SubformulaOrder
    _levels: list = field(default=None, init=False, repr=False, compare=False)

    @classmethod
    def from_tree(cls, tree: PTree, order: SubformulaOrder | None = None) -> "Derivation":
        with gc_paused():
            return cls._from_tree(tree, order)

    @classmethod
    def _from_tree(cls, tree: PTree, order: SubformulaOrder | None) -> "Derivation":
        formulas, rules, children = [], [], []
        stack = [(tree, -1, 0)]
        while stack:
            t, parent, slot = stack.pop()
            i = len(formulas)
            formulas.append(t.formula)
            rules.append(t.rule)
            children.append([None] * len(t.children))
            if parent >= 0:
                children[parent][slot] = i
            for s in range(len(t.children) - 1, -1, -1):
                stack.append((t.children[s], i, s))
        if order is None:
            order = subformula_order(set(formulas))
        deps = [0] * len(formulas)
        index = order.index
        for i in range(len(formulas) - 1, -1, -1):
            r = rules[i]
            if r == HYP:
                deps[i] = 1 << index(formulas[i])
            elif r == INTRO:
                deps[i] = deps[children[i][0]] & ~(1 << index(formulas[i].left))
            else:
                deps[i] = deps[children[i][0]] | deps[children[i][1]]
        return cls(tuple(formulas), tuple(rules), tuple(tuple(c) for c in children),
                   tuple(deps), order)

    def __len__(self):
        return len(self.formulas)

    @property
    def size(self) -> int:
        return len(self.formulas)

    @property
    def root(self) -> int:
        return 0

    def dep(self, i: int) -> Bitstring:
        return Bitstring(self.deps[i], len(self.order))

    def dep_set(self, i: int) -> frozenset[Formula]:
        return self.order.members(self.deps[i])

    def parents(self) -> list[int | None]:
        par: list[int | None] = [None] * len(self)
        for i, ch in enumerate(self.children):
            for c in ch:
                par[c] = i
        return par

    def levels(self) -> list[int]:
        if self._levels is None:
            lev = [0] * len(self)
            for i, ch in enumerate(self.children):
                for c in ch:
                    lev[c] = lev[i] + 1
            object.__setattr__(self, "_levels", lev)
        return self._levels

    def height(self) -> int:
        return max(self.levels())

    def subtree(self, i: int) -> list[int]:
        """Node ids of the subtree rooted at ``i`` (preorder)."""
        out, stack = [], [i]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out

    def subtree_sizes(self) -> list[int]:
        sizes = [1] * len(self)
        for i in range(len(self) - 1, -1, -1):
            for c in self.children[i]:
                sizes[i] += sizes[c]
        return sizes

    def to_tree(self, i: int = 0) -> PTree:
        built: dict[int, PTree] = {}
        for v in reversed(self.subtree(i)):
            built[v] = PTree(self.formulas[v], self.rules[v],
                             tuple(built[c] for c in self.children[v]))
        return built[i]


def conclusion(d: Derivation) -> Formula:
    return d.formulas[0]


def open_assumptions(d: Derivation) -> frozenset[Formula]:
    return decode(d.dep(0), d.order)


def validate_derivation(d: Derivation) -> None:
    """Raise :class:`RuleShapeError` or :class:`DependencyError` on the first bad node."""
    n = len(d)
    if n == 0:
        raise RuleShapeError(0, "empty derivation")
    if not (len(d.rules) == len(d.children) == len(d.deps) == n):
        raise RuleShapeError(0, "field lengths disagree")
    seen = [False] * n
    seen[0] = True
    for i in range(n):
        rule, ch, f = d.rules[i], d.children[i], d.formulas[i]
        if rule not in _ARITY:
            raise RuleShapeError(i, f"unknown rule {rule!r}")
        if len(ch) != _ARITY[rule]:
            raise RuleShapeError(i, f"{rule} needs {_ARITY[rule]} premises, has {len(ch)}")
        for c in ch:
            if not (i < c < n) or seen[c]:
                raise RuleShapeError(i, f"bad child id {c}")
            seen[c] = True
        if f not in d.order:
            raise RuleShapeError(i, f"formula {f} outside the subformula order")
        if rule == INTRO:
            if not isinstance(f, Imp) or f.right != d.formulas[ch[0]]:
                raise RuleShapeError(i, f"{f} is not an introduction of {d.formulas[ch[0]]}")
        elif rule == ELIM:
            minor, major = (d.formulas[c] for c in ch)
            if major != Imp(minor, f):
                raise RuleShapeError(i, f"premises {minor} and {major} do not yield {f}")
    if not all(seen):
        raise RuleShapeError(seen.index(False), "node unreachable from the root")
    width = len(d.order)
    for i in range(n - 1, -1, -1):
        rule, ch, f = d.rules[i], d.children[i], d.formulas[i]
        if d.deps[i] < 0 or d.deps[i] >> width:
            raise DependencyError(i, Bitstring(0, width), Bitstring(0, width))
        if rule == HYP:
            expected = 1 << d.order.index(f)
        elif rule == INTRO:
            expected = d.deps[ch[0]] & ~(1 << d.order.index(f.left))
        else:
            expected = d.deps[ch[0]] | d.deps[ch[1]]
        if expected != d.deps[i]:
            raise DependencyError(i, Bitstring(expected, width), d.dep(i))


# --- branches ----------------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    nodes: tuple[int, ...]
    e_part_end: int  # index into ``nodes`` of the minimal formula
    principal: bool
    rank: int  # 0 for the principal branch, n+1 for branches ending in minors of an n-branch

    @property
    def kind(self) -> str:
        return "principal" if self.principal else "secondary"

    @property
    def minimal(self) -> int:
        return self.nodes[self.e_part_end]

    @property
    def e_part(self) -> tuple[int, ...]:
        return self.nodes[: self.e_part_end + 1]


def branches(d: Derivation) -> list[Branch]:
    """Decompose ``d`` into branches; every node lies on exactly one branch."""
    par = d.parents()
    raw = []
    for leaf in range(len(d)):
        if d.rules[leaf] != HYP:
            continue
        path = [leaf]
        x = leaf
        while True:
            p = par[x]
            if p is None:
                break
            if d.rules[p] == ELIM and d.children[p][0] == x:
                break  # x is a minor premise
            path.append(p)
            x = p
        end = 0
        while end + 1 < len(path) and d.rules[path[end + 1]] == ELIM:
            end += 1
        raw.append((tuple(path), end))
    owner = {}
    for k, (path, _) in enumerate(raw):
        for v in path:
            owner[v] = k
    rank: dict[int, int] = {}

    def rank_of(k: int) -> int:
        if k not in rank:
            last = raw[k][0][-1]
            p = par[last]
            rank[k] = 0 if p is None else rank_of(owner[p]) + 1
        return rank[k]

    out = [Branch(path, end, par[path[-1]] is None, rank_of(k))
           for k, (path, end) in enumerate(raw)]
    out.sort(key=lambda b: (b.rank, b.nodes[0]))
    return out


def is_normal(d: Derivation) -> bool:
    return not any(
        d.rules[i] == ELIM and d.rules[d.children[i][1]] == INTRO for i in range(len(d))
    )


def is_expanded(d: Derivation) -> bool:
    return all(d.formulas[b.minimal].is_atom for b in branches(d))


def levels(d: Derivation) -> list[int]:
    return list(d.levels())


def height(d: Derivation) -> int:
    return d.height()


def check_subformula_principle(d: Derivation) -> bool:
    allowed = subformulas([conclusion(d), *open_assumptions(d)])
    return all(f in allowed for f in d.formulas)


# --- E-mapped proofs ---------------------------------------------------------

@dataclass
class EmND:
    derivation: Derivation
    tree: SyntaxTree
    ell: dict[int, int]
    paths: dict[tuple[int, ...], tuple[int, ...]]  # E-part nodes -> syntax-tree path


def _spine_path(tree: SyntaxTree, u: int, steps: int) -> list[int] | None:
    path = [u]
    for _ in range(steps):
        nxt = tree.right[path[-1]]
        if nxt is None:
            return None
        path.append(nxt)
    return path


def emnd_map(d: Derivation) -> EmND:
    """Map every E-part of a normal expanded derivation onto the conclusion's syntax tree.

    The top-formula of each E-part goes to a left-child vertex ``u`` and the
    E-part follows the right spine below ``u`` down to its minimal formula.
    When several vertices qualify, the one sitting as left child of the spine
    vertex the consuming elimination was mapped to is preferred, then the
    first in preorder. Open assumptions are mapped the same way.
    """
    tree = SyntaxTree(conclusion(d))
    by_label: dict[Formula, list[int]] = {}
    for v in tree.vertices():
        if tree.is_left_child(v):
            by_label.setdefault(tree.labels[v], []).append(v)
    par = d.parents()
    ell: dict[int, int] = {}
    paths: dict[tuple[int, ...], tuple[int, ...]] = {}
    for b in branches(d):
        epart = b.e_part
        steps = len(epart) - 1
        candidates = []
        for u in by_label.get(d.formulas[epart[0]], ()):
            path = _spine_path(tree, u, steps)
            if path and all(tree.labels[p] == d.formulas[x] for p, x in zip(path, epart)):
                candidates.append(path)
        if not candidates:
            raise MappingError(b, "no right spine of the conclusion matches this E-part")
        chosen = candidates[0]
        last = b.nodes[-1]
        consumer = par[last]
        if consumer is not None and len(epart) == len(b.nodes):
            major = d.children[consumer][1]
            if major in ell:
                want = tree.left[ell[major]]
                for path in candidates:
                    if path[-1] == want:
                        chosen = path
                        break
        for x, v in zip(epart, chosen):
            ell[x] = v
        paths[epart] = tuple(chosen)
    _check_mapping(d, tree, ell, paths)
    return EmND(d, tree, ell, paths)


def _check_mapping(d, tree, ell, paths):
    for epart, path in paths.items():
        top, q = path[0], path[-1]
        if tree.spine_top(q) != top and len(path) > 1:
            raise DerivationError(f"E-part at node {epart[0]} is not anchored at its spine top")
        if not tree.is_left_child(top):
            raise DerivationError(f"E-part at node {epart[0]} does not start at a left child")
        for a, b in zip(path, path[1:]):
            if tree.right[a] != b:
                raise DerivationError(f"E-part at node {epart[0]} leaves the right spine")
    for x, v in ell.items():
        if tree.labels[v] != d.formulas[x]:
            raise DerivationError(f"node {x} mapped to a vertex with a different label")


def e_part_types(e: EmND, atom: Formula | None = None) -> int:
    """Number of distinct syntax-tree paths the E-parts instantiate.

    With ``atom`` given, only paths ending in a vertex labelled by that atom count.
    """
    kinds = {p for p in e.paths.values() if atom is None or e.tree.labels[p[-1]] == atom}
    return len(kinds)


# --- proof search ------------------------------------------------------------

def _spine(f: Formula) -> tuple[list[Formula], Formula]:
    ants = []
    while isinstance(f, Imp):
        ants.append(f.left)
        f = f.right
    return ants, f


def default_depth_bound(alpha: Formula) -> int:
    return 2 * alpha.size + 2


def proof_search(alpha: Formula, depth_bound: int | None = None) -> Derivation | None:
    """Goal-directed search for a normal, expanded, closed proof of ``alpha``.

    Iterative deepening on the height, so the proof returned has minimal height.
    """
    bound = default_depth_bound(alpha) if depth_bound is None else depth_bound
    if bound < 1:
        raise ValueError("depth bound must be at least 1")

    @lru_cache(maxsize=None)
    def prove(ctx: frozenset, goal: Formula, budget: int) -> PTree | None:
        if budget < 0:
            return None
        if isinstance(goal, Imp):
            if budget < 1:
                return None
            sub = prove(ctx | {goal.left}, goal.right, budget - 1)
            return None if sub is None else PTree(goal, INTRO, (sub,))
        for h in sorted(ctx, key=lambda f: (f.size, f.text())):
            ants, head = _spine(h)
            k = len(ants)
            if head != goal or k > budget:
                continue
            minors = []
            for j, a in enumerate(ants, 1):
                m = prove(ctx, a, budget - (k - j + 1))
                if m is None:
                    break
                minors.append(m)
            else:
                cur = hyp(h)
                for m in minors:
                    cur = PTree(cur.formula.right, ELIM, (m, cur))
                return cur
        return None

    for b in range(bound + 1):
        t = prove(frozenset(), alpha, b)
        if t is not None:
            return Derivation.from_tree(t)
    return None


# --- serialization -------------------------------------------------------------

def derivation_to_dict(d: Derivation) -> dict:
    return {
        "order": [f.text() for f in d.order],
        "nodes": [
            {
                "id": i,
                "formula": d.formulas[i].text(),
                "rule": d.rules[i],
                "children": list(d.children[i]),
                "dep": str(d.dep(i)),
            }
            for i in range(len(d))
        ],
        "root": 0,
    }


def dumps_derivation(d: Derivation) -> str:
    return json.dumps(derivation_to_dict(d), indent=1, ensure_ascii=False) + "\n"


def derivation_from_dict(data: dict) -> Derivation:
    """Inverse of :func:`derivation_to_dict`. Nodes are renumbered to preorder."""
    try:
        order = SubformulaOrder(parse_formula(s) for s in data["order"])
        raw = {int(n["id"]): n for n in data["nodes"]}
        root = int(data["root"])
        if root not in raw:
            raise DerivationError(f"root {root} is not a node")
        width = len(order)
        formulas, rules, children, deps = [], [], [], []
        renum: dict[int, int] = {}
        stack = [(root, -1, 0)]
        while stack:
            old, parent, slot = stack.pop()
            if old in renum:
                raise DerivationError(f"node {old} has two parents")
            node = raw[old]
            new = len(formulas)
            renum[old] = new
            kids = [int(c) for c in node["children"]]
            formulas.append(parse_formula(node["formula"]))
            rules.append(node["rule"])
            children.append([None] * len(kids))
            bits = Bitstring.from_string(node["dep"])
            if bits.length != width:
                raise DerivationError(f"node {old}: dependency length {bits.length} != {width}")
            deps.append(bits.value)
            if parent >= 0:
                children[parent][slot] = new
            for s in range(len(kids) - 1, -1, -1):
                if kids[s] not in raw:
                    raise DerivationError(f"node {old}: unknown child {kids[s]}")
                stack.append((kids[s], new, s))
        if len(renum) != len(raw):
            raise DerivationError("some nodes are unreachable from the root")
    except (KeyError, TypeError, AttributeError) as exc:
        raise DerivationError(f"malformed derivation: {exc!r}") from exc
    return Derivation(tuple(formulas), tuple(rules), tuple(tuple(c) for c in children),
                      tuple(deps), order)


def loads_derivation(text: str) -> Derivation:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DerivationError(f"not JSON: {exc}") from exc
    return derivation_from_dict(data)


def build(tree: PTree, universe: Iterable[Formula] = ()) -> Derivation:
    """Derivation from a proof tree, with the order widened by ``universe`` if given."""
    universe = list(universe)
    if not universe:
        return Derivation.from_tree(tree)
    d = Derivation.from_tree(tree)
    return Derivation.from_tree(tree, subformula_order([*d.order, *universe]))
