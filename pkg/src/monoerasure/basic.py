"""Splitting-and-copying scheme over bit strings.

Thresholds are first rewritten as ORs of ANDs.  An AND vertex splits its
input into equal consecutive chunks, one per child; an OR vertex hands the
whole input to every child.  A node's fragment is the list of chunks that
reach its leaves, in depth-first leaf order.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import lcm
from typing import Optional, Sequence, Union

from .access import AccessTree, Leaf, Vertex, evaluate, format_tree
from .errors import CapacityError, CodeError

MAX_EXPANDED_FAN_IN = 8

Bits = tuple[int, ...]


@dataclass(frozen=True)
class _Or:
    children: tuple


@dataclass(frozen=True)
class _And:
    children: tuple
    label: str


_Expanded = Union[Leaf, _Or, _And]


def _expand(tree: AccessTree) -> _Expanded:
    def walk(v: Vertex, path: str) -> _Expanded:
        if isinstance(v, Leaf):
            return v
        label = f"{path} {format_tree(AccessTree(v, tree.nodes))}"
        kids = [walk(c, f"{path}.{i}") for i, c in enumerate(v.children)]
        t, r = v.threshold, len(kids)
        if t == 1:
            return _Or(tuple(kids))
        if t == r:
            return _And(tuple(kids), label)
        if r > MAX_EXPANDED_FAN_IN:
            raise CapacityError(f"vertex {label} has fan-in {r} > {MAX_EXPANDED_FAN_IN}")
        return _Or(tuple(_And(g, label) for g in combinations(kids, t)))

    return walk(tree.root, "root")


def basic_block_size(tree: AccessTree) -> int:
    """Smallest input length every AND vertex can split evenly."""
    def walk(v: _Expanded) -> int:
        if isinstance(v, Leaf):
            return 1
        sub = lcm(*(walk(c) for c in v.children))
        return sub * len(v.children) if isinstance(v, _And) else sub
    return walk(_expand(tree))


def basic_encode(tree: AccessTree, bits: Sequence[int]) -> list[list[Bits]]:
    """Per-node chunk lists for the bit string ``bits``."""
    out: list[list[Bits]] = [[] for _ in tree.nodes]

    def walk(v: _Expanded, data: Bits):
        if isinstance(v, Leaf):
            out[v.node].append(data)
        elif isinstance(v, _Or):
            for c in v.children:
                walk(c, data)
        else:
            parts = len(v.children)
            if len(data) % parts:
                raise CodeError(f"vertex {v.label} cannot split {len(data)} bits into {parts} "
                                f"equal chunks; pad the input to a multiple of "
                                f"{basic_block_size(tree)} bits")
            size = len(data) // parts
            for i, c in enumerate(v.children):
                walk(c, data[i * size:(i + 1) * size])

    walk(_expand(tree), tuple(bits))
    return out


def basic_decode(tree: AccessTree, chunks: Sequence[Sequence[Sequence[int]]], present) -> Optional[Bits]:
    """Reassemble the input from the chunks of the nodes in ``present``.

    ``present`` is a bitmask or an iterable of names.  Returns ``None`` if
    those nodes do not satisfy the tree.
    """
    if not evaluate(tree, present):
        return None
    mask = present if isinstance(present, int) else sum(1 << tree.nodes.index(x) for x in set(present))
    if len(chunks) != len(tree.nodes):
        raise CodeError(f"expected chunk lists for {len(tree.nodes)} nodes")
    cursor = [0] * len(tree.nodes)

    def walk(v: _Expanded) -> Optional[Bits]:
        if isinstance(v, Leaf):
            pos = cursor[v.node]
            cursor[v.node] += 1
            if not mask >> v.node & 1:
                return None
            if pos >= len(chunks[v.node]):
                raise CodeError(f"node {tree.nodes[v.node]} supplied too few chunks")
            return tuple(chunks[v.node][pos])
        results = [walk(c) for c in v.children]
        if isinstance(v, _Or):
            found = [r for r in results if r is not None]
            if found and any(r != found[0] for r in found):
                raise CodeError("copies of the same chunk disagree")
            return found[0] if found else None
        if any(r is None for r in results):
            return None
        if len({len(r) for r in results}) != 1:
            raise CodeError(f"chunks below vertex {v.label} have unequal lengths")
        return sum(results, ())

    out = walk(_expand(tree))
    for node in range(len(tree.nodes)):
        if mask >> node & 1 and cursor[node] != len(chunks[node]):
            raise CodeError(f"node {tree.nodes[node]} supplied {len(chunks[node])} chunks, "
                            f"expected {cursor[node]}")
    return out
