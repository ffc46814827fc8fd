"""Implicational formulas, syntax trees, subformula orders and dependency bitstrings."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "Formula", "Atom", "Imp", "ParseError", "parse_formula", "subformulas",
    "SubformulaOrder", "subformula_order", "Bitstring", "encode", "decode",
    "union", "remove", "SyntaxTree", "right_ancestral", "imp_chain",
]


class Formula:
    """Base class for the two formula constructors.

    Formulas are immutable and compare structurally. Hashes and sizes are
    computed once at construction, so formulas can be used freely as dict keys
    even when they are deeply nested.
    """

    __slots__ = ()

    @property
    def is_atom(self) -> bool:
        return isinstance(self, Atom)

    def __str__(self) -> str:
        return self.text()

    def text(self) -> str:
        raise NotImplementedError


class Atom(Formula):
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("atom", name)))

    def __setattr__(self, key, value):
        raise AttributeError("formulas are immutable")

    @property
    def size(self) -> int:
        return 1

    def __eq__(self, other):
        return self is other or (isinstance(other, Atom) and other.name == self.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Atom({self.name!r})"

    def text(self) -> str:
        return self.name


class Imp(Formula):
    __slots__ = ("left", "right", "_hash", "size", "_text")

    def __init__(self, left: Formula, right: Formula):
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "_hash", hash(("imp", left, right)))
        object.__setattr__(self, "size", left.size + right.size + 1)
        object.__setattr__(self, "_text", None)

    def __setattr__(self, key, value):
        raise AttributeError("formulas are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Imp)
            and self._hash == other._hash
            and self.size == other.size
            and self.left == other.left
            and self.right == other.right
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Imp({self.left!r}, {self.right!r})"

    def text(self) -> str:
        if self._text is None:
            left = self.left.text()
            if isinstance(self.left, Imp):
                left = f"({left})"
            object.__setattr__(self, "_text", f"{left} -> {self.right.text()}")
        return self._text


def imp_chain(antecedents: Iterable[Formula], head: Formula) -> Formula:
    """Build ``a1 -> (a2 -> ... -> head)``."""
    result = head
    for a in reversed(list(antecedents)):
        result = Imp(a, result)
    return result


# --- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(->|⊃)|([A-Za-z_][A-Za-z0-9_]*)|(\()|(\))|(\S))")


class ParseError(ValueError):
    def __init__(self, message: str, token_index: int, position: int):
        super().__init__(f"{message} (token {token_index}, column {position})")
        self.token_index = token_index
        self.position = position


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("imp", m.group(1), start))
        elif m.group(2):
            tokens.append(("atom", m.group(2), start))
        elif m.group(3):
            tokens.append(("lpar", "(", start))
        elif m.group(4):
            tokens.append(("rpar", ")", start))
        else:
            raise ParseError(f"unexpected character {m.group(5)!r}", len(tokens), start)
        pos = m.end()
    return tokens


def parse_formula(text: str) -> Formula:
    """Parse ``A -> (B -> A)`` style text; ``->`` associates to the right."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty formula", 0, 0)
    pos = 0

    def fail(message: str):
        if pos < len(tokens):
            raise ParseError(message, pos, tokens[pos][2])
        raise ParseError(message, pos, len(text))

    def primary() -> Formula:
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end of input")
        kind, value, _ = tokens[pos]
        if kind == "atom":
            pos += 1
            return Atom(value)
        if kind == "lpar":
            pos += 1
            inner = implication()
            if pos >= len(tokens) or tokens[pos][0] != "rpar":
                fail("expected ')'")
            pos += 1
            return inner
        fail(f"unexpected {value!r}")

    def implication() -> Formula:
        nonlocal pos
        left = primary()
        if pos < len(tokens) and tokens[pos][0] == "imp":
            pos += 1
            return Imp(left, implication())
        return left

    result = implication()
    if pos != len(tokens):
        fail(f"unexpected {tokens[pos][1]!r}")
    return result


# --- subformulas and orders ------------------------------------------------

def subformulas(formulas: Formula | Iterable[Formula]) -> set[Formula]:
    """Subformula closure of one formula or of a collection of formulas."""
    if isinstance(formulas, Formula):
        formulas = [formulas]
    seen: set[Formula] = set()
    stack = list(formulas)
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        if isinstance(f, Imp):
            stack.append(f.left)
            stack.append(f.right)
    return seen


class SubformulaOrder:
    """A total order on a finite set of formulas; position ``i`` is bit ``i``."""

    __slots__ = ("formulas", "_index")

    def __init__(self, formulas: Iterable[Formula]):
        self.formulas = tuple(formulas)
        self._index = {f: i for i, f in enumerate(self.formulas)}
        if len(self._index) != len(self.formulas):
            raise ValueError("duplicate formula in order")

    def __len__(self):
        return len(self.formulas)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.formulas)

    def __contains__(self, f):
        return f in self._index

    def __getitem__(self, i: int) -> Formula:
        return self.formulas[i]

    def __eq__(self, other):
        return isinstance(other, SubformulaOrder) and other.formulas == self.formulas

    def __hash__(self):
        return hash(self.formulas)

    def __repr__(self):
        return f"SubformulaOrder([{', '.join(f.text() for f in self.formulas)}])"

    def index(self, f: Formula) -> int:
        try:
            return self._index[f]
        except KeyError:
            raise KeyError(f"formula {f} is not in the order") from None

    def mask(self, formulas: Iterable[Formula]) -> int:
        m = 0
        for f in formulas:
            m |= 1 << self.index(f)
        return m

    def members(self, mask: int) -> frozenset[Formula]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.formulas[i])
            mask >>= 1
            i += 1
        return frozenset(out)


def _order_key(f: Formula):
    return (f.size, f.text())


def subformula_order(universe: Iterable[Formula]) -> SubformulaOrder:
    """Canonical order on the subformula closure of ``universe``.

    Sorted by syntax-tree size, ties broken by the canonical printed form.
    """
    closure = subformulas(list(universe))
    if not closure:
        raise ValueError("subformula order needs a nonempty universe")
    return SubformulaOrder(sorted(closure, key=_order_key))


# --- bitstrings ------------------------------------------------------------

@dataclass(frozen=True)
class Bitstring:
    """Fixed-length bit vector. Character ``i`` of the string form is bit ``i``."""

    value: int
    length: int

    def __post_init__(self):
        if self.value < 0 or self.value >> self.length:
            raise ValueError("bitstring value does not fit its length")

    @classmethod
    def from_string(cls, bits: str) -> "Bitstring":
        if set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        value = 0
        for i, ch in enumerate(bits):
            if ch == "1":
                value |= 1 << i
        return cls(value, len(bits))

    @classmethod
    def zeros(cls, length: int) -> "Bitstring":
        return cls(0, length)

    def __str__(self):
        return "".join("1" if self.value >> i & 1 else "0" for i in range(self.length))

    def __or__(self, other: "Bitstring") -> "Bitstring":
        return union(self, other)

    def __len__(self):
        return self.length


def encode(formulas: Iterable[Formula], order: SubformulaOrder) -> Bitstring:
    return Bitstring(order.mask(formulas), len(order))


def decode(bits: Bitstring, order: SubformulaOrder) -> frozenset[Formula]:
    if bits.length != len(order):
        raise ValueError("bitstring length does not match the order")
    return order.members(bits.value)


def union(b1: Bitstring, b2: Bitstring) -> Bitstring:
    if b1.length != b2.length:
        raise ValueError(f"length mismatch: {b1.length} != {b2.length}")
    return Bitstring(b1.value | b2.value, b1.length)


def remove(bits: Bitstring, f: Formula, order: SubformulaOrder) -> Bitstring:
    """Clear the bit of ``f`` (greedy discharge). A clear bit stays clear."""
    if bits.length != len(order):
        raise ValueError("bitstring length does not match the order")
    return Bitstring(bits.value & ~(1 << order.index(f)), bits.length)


# --- syntax trees ----------------------------------------------------------

class SyntaxTree:
    """Ordered full binary parse tree. Vertices are preorder integers, root 0."""

    def __init__(self, formula: Formula):
        self.labels: list[Formula] = []
        self.left: list[int | None] = []
        self.right: list[int | None] = []
        self.parent: list[int | None] = []
        stack: list[tuple[Formula, int | None, str]] = [(formula, None, "")]
        while stack:
            f, par, side = stack.pop()
            v = len(self.labels)
            self.labels.append(f)
            self.left.append(None)
            self.right.append(None)
            self.parent.append(par)
            if par is not None:
                if side == "L":
                    self.left[par] = v
                else:
                    self.right[par] = v
            if isinstance(f, Imp):
                stack.append((f.right, v, "R"))
                stack.append((f.left, v, "L"))

    @property
    def root(self) -> int:
        return 0

    def __len__(self):
        return len(self.labels)

    def vertices(self) -> range:
        return range(len(self.labels))

    def is_left_child(self, v: int) -> bool:
        p = self.parent[v]
        return p is not None and self.left[p] == v

    def is_right_child(self, v: int) -> bool:
        p = self.parent[v]
        return p is not None and self.right[p] == v

    def spine_top(self, v: int) -> int:
        """Highest vertex reachable from ``v`` through parent links along right-child edges."""
        while self.is_right_child(v):
            v = self.parent[v]
        return v


def right_ancestral(v: int, tree: SyntaxTree) -> set[int]:
    """All vertices from which ``v`` is reached by a nonempty chain of right-child edges."""
    if not 0 <= v < len(tree):
        raise IndexError(f"vertex {v} not in tree")
    out = set()
    while tree.is_right_child(v):
        v = tree.parent[v]
        out.add(v)
    return out
