"""Fragment hashing and the two commitment schemes.

The vector scheme commits to all ``n`` fragment digests at once; the Merkle
scheme commits to a single root and attaches an authentication path to
each fragment.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Optional, Sequence

from ..codes import Fragment, LinearCode

DIGEST_SIZE = 32
EMPTY_COUNT = 0xFFFFFFFF
ZERO_DIGEST = bytes(DIGEST_SIZE)


def H(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def fragment_bytes(node: int, fragment: Fragment) -> bytes:
    """Canonical encoding: magic, 1-based node index, symbol count, symbols.

    The empty fragment uses the count ``0xFFFFFFFF`` and carries no symbols.
    """
    if fragment is None:
        return b"MEC1" + struct.pack(">II", node + 1, EMPTY_COUNT)
    return (b"MEC1" + struct.pack(">II", node + 1, len(fragment))
            + b"".join(struct.pack(">Q", x) for x in fragment))


def fragment_digest(node: int, fragment: Fragment) -> bytes:
    return H(fragment_bytes(node, fragment))


def tree_depth(n: int) -> int:
    """Number of levels above the leaves, ``ceil(log2 n)``."""
    return max(0, (n - 1).bit_length())


def merkle_levels(leaf_digests: Sequence[bytes]) -> list[list[bytes]]:
    """All levels from the (zero-padded) leaves up to the root."""
    width = 1 << tree_depth(len(leaf_digests))
    level = list(leaf_digests) + [ZERO_DIGEST] * (width - len(leaf_digests))
    levels = [level]
    while len(level) > 1:
        level = [H(level[i] + level[i + 1]) for i in range(0, len(level), 2)]
        levels.append(level)
    return levels


def merkle_build(leaf_digests: Sequence[bytes]) -> tuple[bytes, list[tuple[bytes, ...]]]:
    """Root and the authentication path of every leaf."""
    levels = merkle_levels(leaf_digests)
    proofs = []
    for i in range(len(leaf_digests)):
        path = []
        pos = i
        for level in levels[:-1]:
            path.append(level[pos ^ 1])
            pos >>= 1
        proofs.append(tuple(path))
    return levels[-1][0], proofs


def merkle_verify(i: int, data: bytes, proof: Sequence[bytes], root: bytes, n: int) -> bool:
    """Whether ``data`` is leaf ``i`` of an ``n``-leaf tree with this root."""
    if not 0 <= i < n or len(proof) != tree_depth(n):
        return False
    h = H(data)
    for level, sibling in enumerate(proof):
        if len(sibling) != DIGEST_SIZE:
            return False
        h = H(sibling + h) if i >> level & 1 else H(h + sibling)
    return h == root


def fragment_fits(code: LinearCode, node: int, fragment: Fragment) -> bool:
    """Shape and range check against the node's columns."""
    size = len(code.columns_of(node))
    if fragment is None:
        return size == 0
    return len(fragment) == size and size > 0 and all(
        isinstance(x, int) and 0 <= x < code.q for x in fragment)


class VectorScheme:
    name = "vector"

    def commit(self, fragments: Sequence[Fragment]):
        c = b"".join(fragment_digest(i, g) for i, g in enumerate(fragments))
        return c, [()] * len(fragments)

    def check(self, c: Optional[bytes], n: int, node: int, fragment: Fragment, proof) -> bool:
        if not isinstance(c, bytes) or len(c) != n * DIGEST_SIZE or proof:
            return False
        return fragment_digest(node, fragment) == c[node * DIGEST_SIZE:(node + 1) * DIGEST_SIZE]

    def stored_overhead(self, n: int) -> int:
        return n * DIGEST_SIZE


class MerkleScheme:
    name = "merkle"

    def commit(self, fragments: Sequence[Fragment]):
        return merkle_build([fragment_digest(i, g) for i, g in enumerate(fragments)])

    def check(self, c: Optional[bytes], n: int, node: int, fragment: Fragment, proof) -> bool:
        if not isinstance(c, bytes) or len(c) != DIGEST_SIZE:
            return False
        return merkle_verify(node, fragment_bytes(node, fragment), tuple(proof), c, n)

    def stored_overhead(self, n: int) -> int:
        return (tree_depth(n) + 1) * DIGEST_SIZE


SCHEMES = {"vector": VectorScheme(), "merkle": MerkleScheme()}
