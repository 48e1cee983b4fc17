"""Threshold access trees and the access structures they define.

A tree is written as an s-expression ``(t child ...)`` where each child is
another tree or a node name.  Node names are numbered densely, starting at
0, in order of first appearance.  Sets of nodes are represented as int
bitmasks with bit ``i`` standing for node ``i``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

from .errors import CapacityError, ParseError, StructureError

MAX_NODES = 20

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([A-Za-z_][A-Za-z0-9_]*)|(-?\d+)|(\S))")


@dataclass(frozen=True)
class Leaf:
    node: int


@dataclass(frozen=True)
class Gate:
    threshold: int
    children: tuple[Vertex, ...]

    @property
    def fan_in(self) -> int:
        return len(self.children)


Vertex = Union[Leaf, Gate]


@dataclass(frozen=True)
class AccessTree:
    root: Vertex
    nodes: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.nodes)

    def __str__(self) -> str:
        return format_tree(self)


@dataclass(frozen=True)
class AccessStructure:
    """An antichain of node sets over a named universe."""

    nodes: tuple[str, ...]
    sets: tuple[int, ...]

    def __post_init__(self):
        full = (1 << len(self.nodes)) - 1
        if not self.sets:
            raise StructureError("an access structure needs at least one set")
        for s in self.sets:
            if s <= 0 or s & ~full:
                raise StructureError(f"set {s:#x} is empty or outside the universe")
        if not is_antichain(self.sets):
            raise StructureError("access sets must form an antichain")

    @property
    def n(self) -> int:
        return len(self.nodes)

    def named(self) -> list[list[str]]:
        return [mask_to_names(s, self.nodes) for s in self.sets]


# -- set helpers --------------------------------------------------------------

def popcount(x: int) -> int:
    return bin(x).count("1")


def members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def mask_to_names(mask: int, nodes: Sequence[str]) -> list[str]:
    return [nodes[i] for i in members(mask)]


def names_to_mask(names: Iterable[str], nodes: Sequence[str]) -> int:
    index = {name: i for i, name in enumerate(nodes)}
    m = 0
    for name in names:
        if name not in index:
            raise StructureError(f"unknown node {name!r}")
        m |= 1 << index[name]
    return m


def set_key(mask: int) -> tuple:
    """Canonical ordering: smaller sets first, then lexicographic indices."""
    return popcount(mask), members(mask)


def minimal_sets(masks: Iterable[int]) -> tuple[int, ...]:
    """Inclusion-minimal elements of ``masks``, in canonical order."""
    out: list[int] = []
    for m in sorted(set(masks), key=set_key):
        if not any(s & ~m == 0 for s in out):
            out.append(m)
    return tuple(out)


def is_antichain(masks: Sequence[int]) -> bool:
    for a, b in combinations(masks, 2):
        if a & ~b == 0 or b & ~a == 0:
            return False
    return True


def contains_member(mask: int, family: Iterable[int]) -> bool:
    """True when ``mask`` is a superset of some set in ``family``."""
    return any(s & ~mask == 0 for s in family)


# -- parsing and printing -----------------------------------------------------

def _tokens(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(5) is not None:
            raise ParseError(f"unexpected character {m.group(5)!r} at offset {m.start(5)}")
        pos = m.end()
        if m.group(1):
            yield "(", m.start(1)
        elif m.group(2):
            yield ")", m.start(2)
        elif m.group(3):
            yield ("name", m.group(3)), m.start(3)
        else:
            yield ("int", int(m.group(4))), m.start(4)


def parse_tree(text: str, universe: Optional[Sequence[str]] = None) -> AccessTree:
    """Parse ``(t child ...)`` into an :class:`AccessTree`.

    ``universe`` fixes the node numbering in advance; otherwise nodes are
    numbered by first appearance.

    >>> tree = parse_tree("(2 a (1 b c))")
    >>> tree.nodes
    ('a', 'b', 'c')
    """
    nodes: list[str] = list(universe) if universe is not None else []
    index = {name: i for i, name in enumerate(nodes)}
    if len(index) != len(nodes):
        raise ParseError("universe contains duplicate names")
    toks = list(_tokens(text))
    pos = 0

    def node_for(name: str, at: int) -> Leaf:
        if name not in index:
            if universe is not None:
                raise ParseError(f"node {name!r} at offset {at} is not in the universe")
            index[name] = len(nodes)
            nodes.append(name)
        return Leaf(index[name])

    def parse_vertex() -> Vertex:
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of input")
        tok, at = toks[pos]
        pos += 1
        if isinstance(tok, tuple) and tok[0] == "name":
            return node_for(tok[1], at)
        if tok != "(":
            raise ParseError(f"expected '(' or a node name at offset {at}")
        if pos >= len(toks) or not (isinstance(toks[pos][0], tuple) and toks[pos][0][0] == "int"):
            raise ParseError(f"expected a threshold after '(' at offset {at}")
        t = toks[pos][0][1]
        pos += 1
        children = []
        while True:
            if pos >= len(toks):
                raise ParseError(f"unclosed '(' at offset {at}")
            if toks[pos][0] == ")":
                pos += 1
                break
            children.append(parse_vertex())
        if not children:
            raise ParseError(f"vertex at offset {at} has no children")
        if not 1 <= t <= len(children):
            raise ParseError(f"threshold {t} at offset {at} is outside 1..{len(children)}")
        return Gate(t, tuple(children))

    if not toks:
        raise ParseError("empty tree")
    root = parse_vertex()
    if pos != len(toks):
        raise ParseError(f"trailing input at offset {toks[pos][1]}")
    if len(nodes) > MAX_NODES:
        raise CapacityError(f"{len(nodes)} nodes exceed the cap of {MAX_NODES}")
    return AccessTree(root, tuple(nodes))


def format_tree(tree: AccessTree) -> str:
    def fmt(v: Vertex) -> str:
        if isinstance(v, Leaf):
            return tree.nodes[v.node]
        return "(" + " ".join([str(v.threshold)] + [fmt(c) for c in v.children]) + ")"
    return fmt(tree.root)


# -- semantics ----------------------------------------------------------------

def _as_mask(tree_nodes: Sequence[str], s) -> int:
    if isinstance(s, int):
        return s
    return names_to_mask(s, tree_nodes)


def evaluate(tree: AccessTree, s) -> bool:
    """Whether the node set ``s`` (a bitmask or an iterable of names) satisfies the tree."""
    mask = _as_mask(tree.nodes, s)

    def ev(v: Vertex) -> bool:
        if isinstance(v, Leaf):
            return bool(mask >> v.node & 1)
        need = v.threshold
        for c in v.children:
            if ev(c):
                need -= 1
                if need == 0:
                    return True
        return False

    return ev(tree.root)


def enumerate_minimal(tree: AccessTree) -> AccessStructure:
    """All inclusion-minimal node sets that satisfy the tree."""
    if tree.n > MAX_NODES:
        raise CapacityError(f"{tree.n} nodes exceed the cap of {MAX_NODES}")

    def mins(v: Vertex) -> tuple[int, ...]:
        if isinstance(v, Leaf):
            return (1 << v.node,)
        child_mins = [mins(c) for c in v.children]
        acc = set()
        for group in combinations(child_mins, v.threshold):
            partial = {0}
            for fam in group:
                partial = set(minimal_sets(p | s for p in partial for s in fam))
            acc.update(partial)
        return minimal_sets(acc)

    return AccessStructure(tree.nodes, mins(tree.root))


def leaves(tree: AccessTree) -> list[int]:
    """Node indices of the leaves in depth-first order (with repeats)."""
    out = []

    def walk(v: Vertex):
        if isinstance(v, Leaf):
            out.append(v.node)
        else:
            for c in v.children:
                walk(c)

    walk(tree.root)
    return out


def is_partitioned(tree: AccessTree) -> bool:
    seen = leaves(tree)
    return len(seen) == len(set(seen))


def depth(tree: AccessTree) -> int:
    def d(v: Vertex) -> int:
        return 0 if isinstance(v, Leaf) else 1 + max(d(c) for c in v.children)
    return d(tree.root)


def is_balanced(tree: AccessTree) -> bool:
    def leaf_depths(v: Vertex, level: int, out: set):
        if isinstance(v, Leaf):
            out.add(level)
        else:
            for c in v.children:
                leaf_depths(c, level + 1, out)
        return out
    return len(leaf_depths(tree.root, 0, set())) == 1


def balance(tree: AccessTree) -> AccessTree:
    """Wrap shallow leaves in single-child OR vertices until all leaves sit
    at the same depth.  The defined access structure is unchanged.

    >>> print(balance(parse_tree("(2 a b (1 c d e))")))
    (2 (1 a) (1 b) (1 c d e))
    """
    height = depth(tree)

    def pad(v: Vertex, level: int) -> Vertex:
        if isinstance(v, Leaf):
            for _ in range(height - level):
                v = Gate(1, (v,))
            return v
        return Gate(v.threshold, tuple(pad(c, level + 1) for c in v.children))

    return AccessTree(pad(tree.root, 0), tree.nodes)


def access_structure(nodes: Sequence[str], sets: Iterable[Iterable[str]]) -> AccessStructure:
    """Build an access structure from named sets, keeping their order."""
    nodes = tuple(nodes)
    return AccessStructure(nodes, tuple(names_to_mask(s, nodes) for s in sets))
