"""Local entailments over r-DAG certificates and the level-sweep checker.

Every node gets a table from indices to sequents ``Delta |- beta`` (antecedent
kept as a bitmask over the certificate's order), or an :class:`Undefined`
marker carrying the reason the rules failed. Slot 0 is the node's own
entailment. Extra slots come from ancestrality edges and select which copy of a
shared sub-proof a consumer is looking at.

How a table crosses a deductive edge ``(u, v)``:

* an edge with ``rho = j`` hands ``v`` the single slot ``{0: table(u)[j]}``;
* the (at most one) edge without ``rho`` hands over every slot not claimed by
  a ``rho`` edge leaving ``u``;
* if the edge carries a bitstring, it must equal the antecedent of every
  sequent handed over (``LabelMismatch`` otherwise).

Eliminations combine slot by slot. When one premise has fewer slots than the
other, its missing slots are read from its slot 0. Two slot sets that are not
nested make the node undefined (``IndexMismatch``). Every sequent is obtained
from sequents of the premises by a sound rule, so anything the checker
accepts is semantically valid whatever the shape of the DAG.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .formula import Formula, Imp
from .rdag import RDagError, RDagProof, dag_levels, validate_structure


@dataclass(frozen=True)
class Sequent:
    antecedent: int
    succedent: Formula

    def render(self, order) -> str:
        members = order.members(self.antecedent)
        ant = ", ".join(f.text() for f in order if f in members)
        return f"{{{ant}}} |- {self.succedent.text()}"


@dataclass(frozen=True)
class Undefined:
    reason: str
    node: int | None = None

    def __str__(self):
        where = "" if self.node is None else f" at node {self.node}"
        return f"{self.reason}{where}"


class Outcome(Enum):
    INCORRECT = "Incorrect"
    CORRECT_TAUTOLOGY = "CorrectTautology"
    CORRECT_DERIVATION = "CorrectDerivation"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    root_entailment: Sequent | Undefined
    steps: int
    reason: str = ""
    height: int = 0
    n_v: int = 0
    n_a: int = 0

    @property
    def bound(self) -> int:
        """``h * n_v * max(1, n_A)`` with ``h`` the number of levels swept."""
        return (self.height + 1) * self.n_v * max(1, self.n_a)

    @property
    def correct(self) -> bool:
        return self.outcome is not Outcome.INCORRECT


def _bit(c: RDagProof, f: Formula) -> int | None:
    return 1 << c.order.index(f) if f in c.order else None


def _passed(c: RDagProof, u: int, v: int, tables: dict):
    t = tables[u]
    if isinstance(t, Undefined):
        return t
    e = c.d_edges[(u, v)]
    if e.rho is not None:
        if e.rho not in t:
            return Undefined("MissingSlot", v)
        val = {0: t[e.rho]}
    else:
        claimed = set()
        free = 0
        for w in c.post[u]:
            r = c.d_edges[(u, w)].rho
            if r is None:
                free += 1
            else:
                claimed.add(r)
        if free > 1:
            return Undefined("Divergent", u)
        val = {j: s for j, s in t.items() if j not in claimed}
        if not val:
            return Undefined("MissingSlot", v)
    if e.bits is not None:
        for s in val.values():
            if s.antecedent != e.bits:
                return Undefined("LabelMismatch", v)
    return val


def _combine(t1: dict, t2: dict, v: int):
    k1, k2 = set(t1), set(t2)
    if k1 == k2:
        return [(j, t1[j], t2[j]) for j in sorted(k1)]
    if k1 < k2 and 0 in k1:
        return [(j, t1.get(j, t1[0]), t2[j]) for j in sorted(k2)]
    if k2 < k1 and 0 in k2:
        return [(j, t1[j], t2.get(j, t2[0])) for j in sorted(k1)]
    return Undefined("IndexMismatch", v)


def node_table(c: RDagProof, v: int, tables: dict):
    """Entailment table of ``v`` from the tables of its premises."""
    phi = c.nodes[v]
    prem = sorted(c.pre[v])
    if not prem:
        b = _bit(c, phi)
        if b is None:
            return Undefined("UnknownFormula", v)
        table = {0: Sequent(b, phi)}
    elif len(prem) == 1:
        (u,) = prem
        if not isinstance(phi, Imp) or phi.right != c.nodes[u]:
            return Undefined("RuleMismatch", v)
        val = _passed(c, u, v, tables)
        if isinstance(val, Undefined):
            return val
        b = _bit(c, phi.left)
        if b is None:
            return Undefined("UnknownFormula", v)
        table = {j: Sequent(s.antecedent & ~b, phi) for j, s in val.items()}
    elif len(prem) == 2:
        u1, u2 = prem
        if c.nodes[u2] == Imp(c.nodes[u1], phi):
            minor, major = u1, u2
        elif c.nodes[u1] == Imp(c.nodes[u2], phi):
            minor, major = u2, u1
        else:
            return Undefined("RuleMismatch", v)
        t1 = _passed(c, minor, v, tables)
        if isinstance(t1, Undefined):
            return t1
        t2 = _passed(c, major, v, tables)
        if isinstance(t2, Undefined):
            return t2
        pairs = _combine(t1, t2, v)
        if isinstance(pairs, Undefined):
            return pairs
        table = {j: Sequent(s1.antecedent | s2.antecedent, phi) for j, s1, s2 in pairs}
    else:
        return Undefined("Arity", v)
    for w in c.a_in[v]:
        delta = c.a_edges[(w, v)]
        if delta not in table:
            if 0 not in table:
                return Undefined("MissingSlot", v)
            table[delta] = table[0]
    return table


def rdh(c: RDagProof, v: int | None = None):
    """Reverse deductive height: 1 on leaves, 1 + max over premises elsewhere.

    With ``v`` omitted, returns the map for every node. Raises on cycles.
    """
    memo: dict[int, int] = {}
    state: dict[int, int] = {}
    for start in ([v] if v is not None else sorted(c.nodes)):
        if start in memo:
            continue
        stack = [start]
        while stack:
            x = stack[-1]
            if x in memo:
                stack.pop()
                continue
            if state.get(x) is None:
                state[x] = 1
                for u in c.pre[x]:
                    if u not in memo:
                        if state.get(u) == 1:
                            raise RDagError(f"deductive cycle through node {u}")
                        stack.append(u)
            else:
                memo[x] = 1 + max((memo[u] for u in c.pre[x]), default=0)
                stack.pop()
    return memo[v] if v is not None else memo


def local_entailment(c: RDagProof) -> dict:
    """Reference computation: evaluate every node in increasing ``rdh`` order."""
    heights = rdh(c)
    tables: dict = {}
    for v in sorted(c.nodes, key=lambda x: (heights[x], x)):
        tables[v] = node_table(c, v, tables)
    return tables


def _verdict_from_root(c, t, steps, height):
    n_v, n_a = len(c.nodes), len(c.a_edges)
    if isinstance(t, Undefined):
        return Verdict(Outcome.INCORRECT, t, steps, str(t), height, n_v, n_a)
    if 0 not in t:
        u = Undefined("MissingSlot", c.root)
        return Verdict(Outcome.INCORRECT, u, steps, str(u), height, n_v, n_a)
    s = t[0]
    outcome = Outcome.CORRECT_TAUTOLOGY if s.antecedent == 0 else Outcome.CORRECT_DERIVATION
    return Verdict(outcome, s, steps, "", height, n_v, n_a)


def check(c: RDagProof) -> Verdict:
    """Structural validation followed by a sweep from the deepest level to the root."""
    report = validate_structure(c)
    if not report.ok:
        u = Undefined("Structure: " + report.summary())
        return Verdict(Outcome.INCORRECT, u, 0, str(u), 0, len(c.nodes), len(c.a_edges))
    lev = dag_levels(c)
    height = max(lev.values())
    by_level: list[list[int]] = [[] for _ in range(height + 1)]
    for v, l in lev.items():
        by_level[l].append(v)
    tables: dict = {}
    steps = 0
    for level in range(height, -1, -1):
        for v in sorted(by_level[level]):
            t = node_table(c, v, tables)
            tables[v] = t
            steps += max(1, 0 if isinstance(t, Undefined) else len(t))
    return _verdict_from_root(c, tables[c.root], steps, height)


def reference_verdict(c: RDagProof) -> Verdict:
    """Verdict read off :func:`local_entailment` (steps not counted)."""
    report = validate_structure(c)
    if not report.ok:
        u = Undefined("Structure: " + report.summary())
        return Verdict(Outcome.INCORRECT, u, 0, str(u), 0, len(c.nodes), len(c.a_edges))
    tables = local_entailment(c)
    height = max(dag_levels(c).values())
    return _verdict_from_root(c, tables[c.root], 0, height)
