"""Rooted-DAG proof certificates and the detach / collapse / compress pipeline.

Edges run from premise to conclusion: a deductive edge ``(u, v)`` says that the
formula at ``u`` is a premise of the rule concluding at ``v``. Each deductive
edge may carry a dependency bitstring ``bits`` and a link index ``rho``.
Ancestrality edges ``(v, w)`` run from the consumer of a shared copy to the
initials of that copy and carry the index ``delta`` selecting the consumer's
slot.

The public operations return new objects. :func:`compress` works on a private
copy that it mutates in place.
"""

from __future__ import annotations

import json
import sys
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .formula import Bitstring, Formula, Imp, SubformulaOrder, parse_formula
from .nd import Derivation, gc_paused
from .redundancy import RedundancyParams, fingerprints

__all__ = [
    "DEdge", "RDagProof", "Fragment", "StructureReport", "RDagError", "NotAnInstance",
    "IndexCollision", "CompressParams", "CompressStats", "from_derivation",
    "validate_structure", "up", "difference", "restrict", "initials", "detach_link",
    "collapse", "compress", "compress_report", "dag_levels", "dag_height",
    "dumps_rdag", "loads_rdag", "rdag_to_dict", "rdag_from_dict", "unfolded_fingerprints",
]


class RDagError(ValueError):
    pass


class NotAnInstance(RDagError):
    pass


class IndexCollision(RDagError):
    pass


class DEdge(NamedTuple):
    bits: int | None = None
    rho: int | None = None


class RDagProof:
    """Certificate ``<V, E_d, E_A, r, l, L, rho, delta, O>``.

    ``nodes`` maps ids to formulas, ``d_edges`` maps ``(u, v)`` to a
    :class:`DEdge`, ``a_edges`` maps ``(v, w)`` to its delta index.
    """

    def __init__(self, nodes: dict, d_edges: dict, a_edges: dict, root, order: SubformulaOrder):
        self.nodes: dict[int, Formula] = dict(nodes)
        self.d_edges: dict[tuple[int, int], DEdge] = {
            k: (e if isinstance(e, DEdge) else DEdge(*e)) for k, e in d_edges.items()
        }
        self.a_edges: dict[tuple[int, int], int] = dict(a_edges)
        self.root = root
        self.order = order
        self.provenance: dict[int, tuple[int, int]] = {}
        self._index_adjacency()

    def _index_adjacency(self):
        self.pre: dict[int, set[int]] = {v: set() for v in self.nodes}
        self.post: dict[int, set[int]] = {v: set() for v in self.nodes}
        self.a_in: dict[int, set[int]] = defaultdict(set)
        self.a_out: dict[int, set[int]] = defaultdict(set)
        for u, v in self.d_edges:
            self.post.setdefault(u, set()).add(v)
            self.pre.setdefault(v, set()).add(u)
        for u, v in self.a_edges:
            self.a_out.setdefault(u, set()).add(v)
            self.a_in.setdefault(v, set()).add(u)

    # --- basic queries ---
    def __len__(self):
        return len(self.nodes)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def premises(self, v: int) -> list[int]:
        return sorted(self.pre.get(v, ()))

    def consumers(self, u: int) -> list[int]:
        return sorted(self.post.get(u, ()))

    def copy(self) -> "RDagProof":
        out = type(self)(self.nodes, self.d_edges, self.a_edges, self.root, self.order)
        out.provenance = dict(self.provenance)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, RDagProof)
            and self.root == other.root
            and self.order == other.order
            and self.nodes == other.nodes
            and self.d_edges == other.d_edges
            and self.a_edges == other.a_edges
        )

    def __repr__(self):
        return (f"{type(self).__name__}(|V|={len(self.nodes)}, |E_d|={len(self.d_edges)}, "
                f"|E_A|={len(self.a_edges)}, root={self.root})")

    # --- in-place edits (private to this module) ---
    def _add_d_edge(self, u, v, edge: DEdge):
        self.d_edges[(u, v)] = edge
        self.post[u].add(v)
        self.pre[v].add(u)

    def _add_a_edge(self, u, v, delta: int):
        self.a_edges[(u, v)] = delta
        self.a_out[u].add(v)
        self.a_in[v].add(u)

    def _remove_nodes(self, doomed: Iterable[int]):
        for x in doomed:
            for u in self.pre.pop(x):
                del self.d_edges[(u, x)]
                if u in self.post:
                    self.post[u].discard(x)
            for v in self.post.pop(x):
                del self.d_edges[(x, v)]
                if v in self.pre:
                    self.pre[v].discard(x)
            for u in self.a_in.pop(x, ()):
                del self.a_edges[(u, x)]
                self.a_out[u].discard(x)
            for v in self.a_out.pop(x, ()):
                del self.a_edges[(x, v)]
                self.a_in[v].discard(x)
            del self.nodes[x]


class Fragment(RDagProof):
    """Result of restriction or difference. Not a certificate and never checked."""


def from_derivation(d: Derivation) -> RDagProof:
    """The tree ``d`` as an r-DAG: one node per occurrence, no ancestrality edges."""
    c = RDagProof.__new__(RDagProof)
    deps = d.deps
    c.nodes = dict(enumerate(d.formulas))
    c.d_edges = {(u, v): DEdge(deps[u], None) for v, ch in enumerate(d.children) for u in ch}
    c.a_edges = {}
    c.root = 0
    c.order = d.order
    c.provenance = {}
    c.pre = {v: set(ch) for v, ch in enumerate(d.children)}
    c.post = {v: ({p} if p is not None else set()) for v, p in enumerate(d.parents())}
    c.a_in = defaultdict(set)
    c.a_out = defaultdict(set)
    return c


# --- levels -----------------------------------------------------------------

def dag_levels(c: RDagProof) -> dict[int, int]:
    """Shortest deductive distance from the root for every node that reaches it."""
    if c.root not in c.nodes:
        return {}
    dist = {c.root: 0}
    queue = deque([c.root])
    while queue:
        v = queue.popleft()
        for u in c.pre[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def dag_height(c: RDagProof) -> int:
    lev = dag_levels(c)
    return max(lev.values()) if lev else 0


# --- structural validity ------------------------------------------------------

CONDITIONS = ("global", "labels", "ed_l1", "ed_l2", "ea_target", "ea_source",
              "ea_irreflexive", "rho_distinct")


@dataclass
class StructureReport:
    failures: dict[str, list] = field(default_factory=lambda: {c: [] for c in CONDITIONS})

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def passed(self, condition: str) -> bool:
        return not self.failures[condition]

    def failed_conditions(self) -> list[str]:
        return [c for c in CONDITIONS if self.failures[c]]

    def summary(self) -> str:
        if self.ok:
            return "all conditions hold"
        parts = []
        for c in self.failed_conditions():
            shown = ", ".join(str(x) for x in self.failures[c][:3])
            parts.append(f"{c}: {shown}")
        return "; ".join(parts)


def validate_structure(c: RDagProof) -> StructureReport:
    rep = StructureReport()
    f = rep.failures
    width = len(c.order)

    # Global: rooted, connected, every inverse path to a node has the same length.
    if c.root not in c.nodes:
        f["global"].append(("root", c.root))
    for (u, v) in c.d_edges:
        if u not in c.nodes or v not in c.nodes:
            f["global"].append(("dangling", (u, v)))
        elif u == v:
            f["global"].append(("self-loop", (u, v)))
    for (u, v) in c.a_edges:
        if u not in c.nodes or v not in c.nodes:
            f["global"].append(("dangling-A", (u, v)))
    if not f["global"]:
        lev = dag_levels(c)
        for v in sorted(c.nodes):
            if v not in lev:
                f["global"].append(("unreachable", v))
        if c.post[c.root]:
            f["global"].append(("root-has-consumer", c.root))
        for (u, v) in sorted(c.d_edges):
            if u in lev and v in lev and lev[u] != lev[v] + 1:
                f["global"].append(("uneven", (u, v)))

    # Labels live in the order; bitstrings fit its width.
    for v, phi in c.nodes.items():
        if phi not in c.order:
            f["labels"].append(("formula", v))
    for k, e in c.d_edges.items():
        if e.bits is not None and (e.bits < 0 or e.bits >> width):
            f["labels"].append(("bits", k))

    # Rule shapes and bitstring discipline.
    for v in sorted(c.nodes):
        prem = c.premises(v) if v in c.pre else []
        phi = c.nodes[v]
        free_out = [w for w in c.post.get(v, ()) if c.d_edges[(v, w)].rho is None]
        if len(prem) == 1:
            u = prem[0]
            if not isinstance(phi, Imp) or phi.right != c.nodes.get(u):
                f["ed_l1"].append(("shape", v))
                continue
            bits_in = c.d_edges[(u, v)].bits
            if bits_in is None or phi.left not in c.order:
                continue
            expected = bits_in & ~(1 << c.order.index(phi.left))
            for w in free_out:
                b = c.d_edges[(v, w)].bits
                if b is not None and b != expected:
                    f["ed_l1"].append(("bits", (v, w)))
        elif len(prem) == 2:
            u1, u2 = prem
            a, b = c.nodes.get(u1), c.nodes.get(u2)
            if b == Imp(a, phi):
                pass
            elif a == Imp(b, phi):
                u1, u2 = u2, u1
            else:
                f["ed_l2"].append(("shape", v))
                continue
            b1, b2 = c.d_edges[(u1, v)].bits, c.d_edges[(u2, v)].bits
            if b1 is None or b2 is None:
                continue
            for w in free_out:
                bw = c.d_edges[(v, w)].bits
                if bw is not None and bw != b1 | b2:
                    f["ed_l2"].append(("bits", (v, w)))
        elif len(prem) > 2:
            f["ed_l2"].append(("arity", v))

    # Ancestrality edges.
    for (u, v), delta in sorted(c.a_edges.items()):
        if u == v:
            f["ea_irreflexive"].append((u, v))
        if v in c.pre and c.pre[v] and not (c.a_out.get(v, set()) - {u}):
            f["ea_target"].append((u, v))
        ok = any(w != v and c.d_edges[(w, u)].rho == delta for w in c.pre.get(u, ()))
        if not ok:
            f["ea_source"].append((u, v))
        if not isinstance(delta, int) or delta < 1:
            f["ea_source"].append(("index", (u, v)))

    for u in sorted(c.nodes):
        rhos = [c.d_edges[(u, w)].rho for w in c.post.get(u, ())]
        rhos = [r for r in rhos if r is not None]
        if len(set(rhos)) != len(rhos) or any(r < 1 for r in rhos):
            f["rho_distinct"].append(u)
    return rep


# --- fragments -------------------------------------------------------------------

def _up_nodes(c: RDagProof, k: int) -> set[int]:
    seen = {k}
    stack = [k]
    while stack:
        v = stack.pop()
        for u in c.pre[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def restrict(c: RDagProof, keep: Iterable[int], root=None) -> Fragment:
    """Componentwise restriction of ``c`` to the node set ``keep``."""
    keep = set(keep)
    missing = keep - c.nodes.keys()
    if missing:
        raise RDagError(f"nodes not in the DAG: {sorted(missing)[:5]}")
    if root is None and c.root in keep:
        root = c.root
    return Fragment(
        {v: c.nodes[v] for v in keep},
        {k: e for k, e in c.d_edges.items() if k[0] in keep and k[1] in keep},
        {k: d for k, d in c.a_edges.items() if k[0] in keep and k[1] in keep},
        root, c.order,
    )


def up(c: RDagProof, k: int) -> Fragment:
    """The largest sub-DAG with root ``k``: every node from which ``k`` is reachable."""
    if k not in c.nodes:
        raise RDagError(f"node {k} not in the DAG")
    return restrict(c, _up_nodes(c, k), root=k)


def difference(d: RDagProof, c: RDagProof) -> Fragment:
    return restrict(d, d.nodes.keys() - c.nodes.keys())


def _initials_within(c: RDagProof, region: set[int]) -> set[int]:
    leaves = [v for v in region if not c.pre[v]]
    reach = set(leaves)
    stack = list(leaves)
    while stack:
        w = stack.pop()
        for u in c.a_in[w]:
            if u in region and u not in reach:
                reach.add(u)
                stack.append(u)
    return {v for v in reach if not (c.a_in[v] & region)}


def initials(c: RDagProof) -> set[int]:
    """Top-formulas together with representative top-formulas."""
    return _initials_within(c, set(c.nodes))


# --- isomorphism ------------------------------------------------------------------

def unfolded_fingerprints(c: RDagProof, nodes: Iterable[int]) -> dict[int, int]:
    """Interned id of the labelled tree obtained by unfolding the DAG above each node."""
    table: dict[tuple, int] = {}
    memo: dict[int, int] = {}
    for start in nodes:
        stack = [(start, False)]
        while stack:
            v, ready = stack.pop()
            if v in memo:
                continue
            if not ready:
                stack.append((v, True))
                stack.extend((u, False) for u in c.pre[v] if u not in memo)
                continue
            prem = sorted(
                (c.nodes[u].text(), memo[u], c.d_edges[(u, v)].bits) for u in c.pre[v]
            )
            key = (c.nodes[v], tuple(prem))
            memo[v] = table.setdefault(key, len(table))
    return memo


# --- detach and link -----------------------------------------------------------------

def _exclusive_region(c: RDagProof, k: int) -> set[int] | None:
    """Nodes of ``up(c, k)`` if nothing outside it touches them other than via ``k``."""
    region = _up_nodes(c, k)
    for x in region:
        if x != k and not c.post[x] <= region:
            return None
        if not c.a_in[x] <= region or not c.a_out[x] <= region:
            return None
    return region


def _fresh_index(c: RDagProof) -> int:
    used = [e.rho for e in c.d_edges.values() if e.rho is not None]
    used.extend(c.a_edges.values())
    return max(used, default=0) + 1


def _detach_in_place(c: RDagProof, k: int, canon: int, i: int, region: set[int],
                     inits: set[int] | None = None):
    consumers = sorted(c.post[k])
    for v in consumers:
        if (canon, v) in c.d_edges:
            raise NotAnInstance(f"node {v} already consumes {canon}")
    if inits is None:
        inits = _initials_within(c, _up_nodes(c, canon))
    edges = [(v, c.d_edges[(k, v)].bits) for v in consumers]
    c._remove_nodes(region)
    for v, bits in edges:
        c._add_d_edge(canon, v, DEdge(bits, i))
        for w in sorted(inits):
            c._add_a_edge(v, w, i)


def detach_link(d: RDagProof, k: int, c: RDagProof | int, i: int) -> RDagProof:
    """Replace the instance rooted at ``k`` by a link to the copy rooted at ``r(c)``.

    Every consumer ``v`` of ``k`` gets a deductive edge from ``r(c)`` with
    ``rho = i`` and the old bitstring, plus an ancestrality edge with
    ``delta = i`` to each initial of ``up(d, r(c))``. The nodes above ``k`` are
    removed.
    """
    canon = c if isinstance(c, int) else c.root
    if k not in d.nodes or canon not in d.nodes:
        raise NotAnInstance("both roots must be nodes of the DAG")
    if k == canon:
        raise NotAnInstance("the canonical copy cannot be detached from itself")
    if k == d.root:
        raise NotAnInstance("the root cannot be detached")
    if not isinstance(i, int) or i < 1:
        raise IndexCollision(f"index {i!r} must be a positive integer")
    region = _exclusive_region(d, k)
    if region is None:
        raise NotAnInstance(f"up({k}) is shared with the rest of the DAG")
    canon_region = _up_nodes(d, canon)
    if region & canon_region:
        raise NotAnInstance(f"up({k}) overlaps the canonical copy")
    fps = unfolded_fingerprints(d, [k, canon])
    if fps[k] != fps[canon]:
        raise NotAnInstance(f"up({k}) is not isomorphic to up({canon})")
    if any(d.d_edges[(canon, w)].rho == i for w in d.post[canon]):
        raise IndexCollision(f"index {i} already links out of node {canon}")
    inits = _initials_within(d, canon_region)
    if canon in inits:
        # every consumer would get an ancestrality edge back to the node it
        # links from, which source consistency forbids
        raise RDagError(f"node {canon} is its own initial and cannot be linked to")
    if any(d.a_edges[(u, w)] == i for w in inits for u in d.a_in[w]):
        raise IndexCollision(f"index {i} already selects a slot of an initial of {canon}")
    out = d.copy()
    _detach_in_place(out, k, canon, i, region)
    return out


def collapse(d: RDagProof, Y: list[int], c: RDagProof | int | None = None) -> RDagProof:
    """Keep ``Y[0]`` as the canonical copy and link every other instance to it.

    Indices are fresh: one past the largest index already in use, counting up.
    ``provenance`` on the result maps each new index to (canonical, ordinal).
    """
    Y = list(Y)
    if len(Y) <= 1:
        return d.copy()
    canon = Y[0] if c is None else (c if isinstance(c, int) else c.root)
    if canon != Y[0]:
        raise NotAnInstance("the canonical copy must be the first instance")
    out = d
    nxt = _fresh_index(d)
    for ordinal, k in enumerate(Y[1:], 1):
        out = detach_link(out, k, canon, nxt)
        out.provenance[nxt] = (canon, ordinal)
        nxt += 1
    return out


# --- compress ------------------------------------------------------------------------

@dataclass(frozen=True)
class CompressParams:
    redundancy: RedundancyParams = RedundancyParams()
    p: int | None = None
    enforce_gate: bool = False

    def __post_init__(self):
        if self.p is not None and self.p <= 3:
            raise ValueError("p must exceed 3")
        if self.enforce_gate and self.p is None:
            raise ValueError("the size gate needs p")


@dataclass
class CompressStats:
    calls: int = 0
    max_depth: int = 0
    collapses: int = 0
    detached: int = 0


def compress_report(d: Derivation, params: CompressParams = CompressParams()
                    ) -> tuple[RDagProof, CompressStats]:
    """Share repeated sub-derivations level by level, starting next to the conclusion.

    For every group of identical sub-derivations at a level, the canonical copy
    is compressed first (recursively) and the other instances are then linked
    to it. Instances that have already become shared are left in place.
    """
    with gc_paused():
        return _compress(d, params)


def _compress(d: Derivation, params: CompressParams) -> tuple[RDagProof, CompressStats]:
    dag = from_derivation(d)
    stats = CompressStats()
    if params.enforce_gate and len(d.order) ** params.p >= len(d):
        return dag, stats
    rp = params.redundancy
    fp = fingerprints(d)
    sizes = d.subtree_sizes()
    done: set[int] = set()
    counter = [_fresh_index(dag)]
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * d.height() + 1000))

    def run(x: int, depth: int):
        stats.calls += 1
        stats.max_depth = max(stats.max_depth, depth)
        done.add(x)
        frontier = [x]
        while frontier:
            nxt = set()
            for v in frontier:
                nxt.update(dag.pre[v])
            frontier = sorted(nxt)
            buckets: dict[int, list[int]] = {}
            for v in frontier:
                if sizes[v] >= rp.min_size:
                    buckets.setdefault(fp[v], []).append(v)
            groups = [g for g in buckets.values() if len(g) >= rp.min_count]
            groups.sort(key=lambda g: (-sizes[g[0]], g[0]))
            for members in groups:
                # The first member is kept unless another one is already shared
                # or no longer a plain tree (and so could not be detached).
                regions = {m: _exclusive_region(dag, m) for m in members[1:]}
                shared = [m for m in members if m in done]
                touched = [m for m in members[1:] if regions[m] is None]
                canon = (shared or touched or members)[0]
                if canon != members[0]:
                    regions[members[0]] = _exclusive_region(dag, members[0])
                if canon not in done:
                    run(canon, depth + 1)
                inits = _initials_within(dag, _up_nodes(dag, canon))
                if canon in inits:
                    # fully shared already; the instances stay and their
                    # insides are linked further down
                    continue
                linked = False
                for y in members:
                    if y == canon or regions[y] is None:
                        continue
                    stats.detached += len(regions[y])
                    _detach_in_place(dag, y, canon, counter[0], regions[y], inits)
                    dag.provenance[counter[0]] = (canon, y)
                    counter[0] += 1
                    linked = True
                stats.collapses += linked
            frontier = [v for v in frontier if v in dag.nodes]

    try:
        run(0, 0)
    finally:
        sys.setrecursionlimit(limit)
    return dag, stats


def compress(d: Derivation, params: CompressParams = CompressParams()) -> RDagProof:
    return compress_report(d, params)[0]


# --- serialization ------------------------------------------------------------------

def rdag_to_dict(c: RDagProof) -> dict:
    ids = {v: n for n, v in enumerate(sorted(c.nodes))}
    d_edges = []
    for (u, v), e in sorted(c.d_edges.items(), key=lambda kv: (ids[kv[0][0]], ids[kv[0][1]])):
        item = {"from": ids[u], "to": ids[v]}
        if e.bits is not None:
            item["bits"] = str(Bitstring(e.bits, len(c.order)))
        if e.rho is not None:
            item["rho"] = e.rho
        d_edges.append(item)
    a_edges = [
        {"from": ids[u], "to": ids[v], "delta": delta}
        for (u, v), delta in sorted(c.a_edges.items(), key=lambda kv: (ids[kv[0][0]], ids[kv[0][1]]))
    ]
    return {
        "order": [f.text() for f in c.order],
        "nodes": [{"id": ids[v], "formula_index": c.order.index(c.nodes[v])} for v in sorted(c.nodes)],
        "root": ids[c.root],
        "d_edges": d_edges,
        "a_edges": a_edges,
    }


def dumps_rdag(c: RDagProof) -> str:
    return json.dumps(rdag_to_dict(c), indent=1, ensure_ascii=False) + "\n"


def rdag_from_dict(data: dict) -> RDagProof:
    try:
        order = SubformulaOrder(parse_formula(s) for s in data["order"])
        nodes = {}
        for n in data["nodes"]:
            idx = n["formula_index"]
            if not isinstance(idx, int) or not 0 <= idx < len(order):
                raise RDagError(f"node {n['id']}: formula index {idx!r} out of range")
            nodes[int(n["id"])] = order[idx]
        d_edges = {}
        for e in data["d_edges"]:
            key = (int(e["from"]), int(e["to"]))
            bits = e.get("bits")
            if bits is not None:
                b = Bitstring.from_string(bits)
                if b.length != len(order):
                    raise RDagError(f"edge {key}: bitstring length {b.length} != {len(order)}")
                bits = b.value
            rho = e.get("rho")
            if rho is not None and not isinstance(rho, int):
                raise RDagError(f"edge {key}: rho must be an integer")
            if key in d_edges:
                raise RDagError(f"duplicate edge {key}")
            d_edges[key] = DEdge(bits, rho)
        a_edges = {}
        for e in data["a_edges"]:
            key = (int(e["from"]), int(e["to"]))
            if not isinstance(e["delta"], int):
                raise RDagError(f"ancestrality edge {key}: delta must be an integer")
            if key in a_edges:
                raise RDagError(f"duplicate ancestrality edge {key}")
            a_edges[key] = e["delta"]
        root = int(data["root"])
    except (KeyError, TypeError, AttributeError) as exc:
        raise RDagError(f"malformed r-DAG: {exc!r}") from exc
    for (u, v) in list(d_edges) + list(a_edges):
        if u not in nodes or v not in nodes:
            raise RDagError(f"edge ({u}, {v}) mentions an unknown node")
    if root not in nodes:
        raise RDagError(f"root {root} is not a node")
    return RDagProof(nodes, d_edges, a_edges, root, order)


def loads_rdag(text: str) -> RDagProof:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RDagError(f"not JSON: {exc}") from exc
    return rdag_from_dict(data)
