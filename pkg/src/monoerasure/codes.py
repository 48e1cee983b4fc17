"""Linear erasure codes whose columns are assigned to nodes.

A code is a ``k x m`` generator over GF(q) together with a labeling that
names the node owning each column.  A node's fragment is the list of
symbols in its columns, in ascending column order.  Nodes that own no
column hold the empty fragment, written ``None``.

A set of nodes can decode exactly when its columns have rank ``k``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .access import AccessStructure
from .errors import CapacityError, CodeError
from .field import (
    FieldMatrix, check_modulus, rank, smallest_prime_at_least, solve_left_many,
    vandermonde, vecmat,
)

Fragment = Optional[tuple[int, ...]]

MAX_MDS_CHECK = 16


@dataclass(frozen=True)
class LinearCode:
    generator: FieldMatrix
    labeling: tuple[int, ...]
    nodes: tuple[str, ...]

    def __post_init__(self):
        if len(self.labeling) != self.generator.ncols:
            raise CodeError("labeling must name one node per column")
        if any(not 0 <= i < len(self.nodes) for i in self.labeling):
            raise CodeError("labeling refers to a node outside the universe")
        if self.generator.nrows < 1:
            raise CodeError("a code needs k >= 1")

    @property
    def q(self) -> int:
        return self.generator.q

    @property
    def k(self) -> int:
        return self.generator.nrows

    @property
    def m(self) -> int:
        return self.generator.ncols

    @property
    def n(self) -> int:
        return len(self.nodes)

    def columns_of(self, node: int) -> tuple[int, ...]:
        return tuple(j for j, owner in enumerate(self.labeling) if owner == node)

    def columns_of_set(self, mask: int) -> tuple[int, ...]:
        return tuple(j for j, owner in enumerate(self.labeling) if mask >> owner & 1)

    def columns_per_node(self) -> tuple[int, ...]:
        counts = [0] * self.n
        for owner in self.labeling:
            counts[owner] += 1
        return tuple(counts)


def make_code(generator: FieldMatrix, per_node: Sequence[int], nodes: Sequence[str]) -> LinearCode:
    """Label consecutive column blocks, node 0 first, with ``per_node`` columns each."""
    labeling = tuple(i for i, c in enumerate(per_node) for _ in range(c))
    return LinearCode(generator, labeling, tuple(nodes))


def encode(code: LinearCode, f: Sequence[int]) -> tuple[Fragment, ...]:
    if len(f) != code.k:
        raise CodeError(f"message has {len(f)} symbols, code expects k={code.k}")
    if any(not 0 <= x < code.q for x in f):
        raise CodeError(f"message symbols must lie in 0..{code.q - 1}")
    word = vecmat(f, code.generator)
    return split_word(code, word)


def split_word(code: LinearCode, word: Sequence[int]) -> tuple[Fragment, ...]:
    parts: list[list[int]] = [[] for _ in range(code.n)]
    for owner, x in zip(code.labeling, word):
        parts[owner].append(x)
    return tuple(tuple(p) if p else None for p in parts)


def _gather(code: LinearCode, fragments: Sequence[Fragment]):
    """Columns and symbols of every node that supplied a fragment of the right size."""
    if len(fragments) != code.n:
        raise CodeError(f"expected {code.n} fragment slots, got {len(fragments)}")
    cols: list[int] = []
    syms: list[int] = []
    for node, frag in enumerate(fragments):
        if frag is None:
            continue
        own = code.columns_of(node)
        if len(frag) != len(own):
            raise CodeError(f"fragment of node {code.nodes[node]} has {len(frag)} symbols, "
                            f"expected {len(own)}")
        cols.extend(own)
        syms.extend(frag)
    return cols, syms


def decode(code: LinearCode, fragments: Sequence[Fragment]) -> Optional[tuple[int, ...]]:
    """Recover the message from the supplied fragments.

    ``None`` entries are treated as missing.  Returns ``None`` when the
    supplied columns have rank below ``k`` or the symbols are inconsistent
    with every message.
    """
    cols, syms = _gather(code, fragments)
    out = solve_left_many(code.generator.select_columns(cols), [syms])
    return None if out is None else out[0]


def decode_blocks(code: LinearCode, present: int, blocks: Sequence[Sequence[int]]):
    """Decode many codewords at once from the nodes in bitmask ``present``.

    Each block lists the present nodes' symbols in ascending column order.
    """
    cols = code.columns_of_set(present)
    return solve_left_many(code.generator.select_columns(cols), blocks)


def is_sufficient(code: LinearCode, mask: int) -> bool:
    cols = code.columns_of_set(mask)
    return rank(code.generator.select_columns(cols)) == code.k


def is_complete(code: LinearCode, structure: AccessStructure) -> bool:
    if structure.nodes != code.nodes:
        raise CodeError("access structure and code use different universes")
    return all(is_sufficient(code, s) for s in structure.sets)


def overhead(code: LinearCode) -> Fraction:
    return Fraction(code.m - code.k, code.k)


def mds_code(k: int, m: int, q: int, labeling: Optional[Sequence[int]] = None,
             nodes: Optional[Sequence[str]] = None) -> LinearCode:
    """Vandermonde ``[m, k]`` code.  Without a labeling each column goes to
    its own virtual node ``V1..Vm``."""
    check_modulus(q)
    if not 1 <= k <= m:
        raise CodeError(f"need 1 <= k <= m, got k={k}, m={m}")
    if m > q:
        raise CodeError(f"an MDS code of length {m} needs q >= {m}, got {q}")
    g = vandermonde(k, m, q)
    if labeling is None:
        labeling = range(m)
        nodes = [f"V{j + 1}" for j in range(m)]
    elif nodes is None:
        nodes = [f"V{j + 1}" for j in range(max(labeling) + 1)]
    return LinearCode(g, tuple(labeling), tuple(nodes))


def check_mds(code: LinearCode) -> bool:
    """Whether every ``k`` columns are independent (cap: ``m <= 16``)."""
    if code.m > MAX_MDS_CHECK:
        raise CapacityError(f"MDS check is capped at m <= {MAX_MDS_CHECK}")
    g = code.generator
    return all(rank(g.select_columns(c)) == code.k for c in combinations(range(code.m), code.k))


def default_field_size(m: int) -> int:
    return smallest_prime_at_least(m)


# -- serialization ------------------------------------------------------------

def code_manifest(code: LinearCode) -> dict:
    per_node = code.columns_per_node()
    return {
        "q": code.q,
        "k": code.k,
        "m": code.m,
        "nodes": list(code.nodes),
        "columns_per_node": {name: per_node[i] for i, name in enumerate(code.nodes)},
        "generator": code.generator.tolist(),
        "labeling": [code.nodes[i] for i in code.labeling],
    }


def code_from_manifest(obj: dict) -> LinearCode:
    try:
        nodes = tuple(obj["nodes"])
        index = {name: i for i, name in enumerate(nodes)}
        g = FieldMatrix.from_rows(obj["generator"], int(obj["q"]), ncols=int(obj["m"]))
        labeling = tuple(index[name] for name in obj["labeling"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CodeError(f"malformed code manifest: {exc}") from None
    if g.nrows != int(obj["k"]):
        raise CodeError("manifest k does not match the generator")
    code = LinearCode(g, labeling, nodes)
    declared = obj.get("columns_per_node")
    if declared is not None and declared != {n: c for n, c in zip(nodes, code.columns_per_node())}:
        raise CodeError("manifest columns_per_node does not match the labeling")
    return code


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def code_hash(code: LinearCode) -> str:
    return hashlib.sha256(canonical_json(code_manifest(code)).encode()).hexdigest()

