"""Generalized Byzantine quorum systems, their kernels and reliable sets.

All families are tuples of node bitmasks over a shared universe of at most
20 nodes, kept in canonical order (by size, then by member indices).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .access import (
    MAX_NODES, AccessStructure, contains_member, mask_of, mask_to_names,
    minimal_sets, names_to_mask, set_key,
)
from .errors import CapacityError, StructureError


@dataclass(frozen=True)
class QuorumContext:
    nodes: tuple[str, ...]
    quorums: tuple[int, ...]
    fail_prone: tuple[int, ...]
    kernels: tuple[int, ...]
    reliable: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.nodes)

    def kernel_structure(self) -> AccessStructure:
        return AccessStructure(self.nodes, self.kernels)

    def describe(self) -> dict:
        named = lambda fam: [mask_to_names(s, self.nodes) for s in fam]  # noqa: E731
        return {
            "universe": list(self.nodes),
            "quorums": named(self.quorums),
            "fail_prone": named(self.fail_prone),
            "kernels": named(self.kernels),
            "reliable": named(self.reliable),
        }


def _check_n(n: int) -> None:
    if n > MAX_NODES:
        raise CapacityError(f"{n} nodes exceed the cap of {MAX_NODES}")


def canonical_fail_prone(quorums: Iterable[int], n: int) -> tuple[int, ...]:
    """Maximal sets among the complements of the quorums."""
    full = (1 << n) - 1
    comps = {full & ~q for q in quorums}
    out = [c for c in comps if not any(c != d and c & ~d == 0 for d in comps)]
    return tuple(sorted(out, key=set_key))


def check_quorum_system(quorums: Sequence[int], fail_prone: Sequence[int], n: int):
    """Check consistency and availability.

    Returns ``(ok, violations)`` where violations are human readable.
    """
    violations = []
    for q1, q2 in combinations(list(quorums), 2):
        inter = q1 & q2
        for f in fail_prone:
            if inter & ~f == 0:
                violations.append(f"consistency: quorums {q1:#x} and {q2:#x} intersect "
                                  f"inside fail-prone set {f:#x}")
                break
    for q in quorums:
        for f in fail_prone:
            if q & ~f == 0:
                violations.append(f"consistency: quorum {q:#x} lies inside fail-prone set {f:#x}")
                break
    for f in fail_prone:
        if not any(q & f == 0 for q in quorums):
            violations.append(f"availability: every quorum meets fail-prone set {f:#x}")
    return not violations, violations


def kernels(quorums: Sequence[int], n: int) -> tuple[int, ...]:
    """Minimal sets meeting every quorum (minimal transversals)."""
    _check_n(n)
    if not quorums:
        raise StructureError("a quorum system needs at least one quorum")
    current = (0,)
    # Extend transversals one quorum at a time, keeping only minimal ones.
    for q in sorted(set(quorums), key=set_key):
        grown = []
        for t in current:
            if t & q:
                grown.append(t)
            else:
                grown.extend(t | (1 << i) for i in range(n) if q >> i & 1)
        current = minimal_sets(grown)
    return current


def reliable_sets(fail_prone: Sequence[int], kernel_sets: Sequence[int], n: int) -> tuple[int, ...]:
    """Minimal sets ``R`` such that for every fail-prone ``F`` some kernel
    lies inside ``R`` minus ``F``."""
    _check_n(n)
    current = (0,)
    for f in sorted(set(fail_prone), key=set_key):
        avoiding = [k for k in kernel_sets if k & f == 0]
        if not avoiding:
            return ()
        grown = []
        for r in current:
            if contains_member(r & ~f, avoiding):
                grown.append(r)
            else:
                grown.extend(r | k for k in avoiding)
        current = minimal_sets(grown)
    return current


def quorum_context(nodes: Sequence[str], quorums: Iterable[int],
                   fail_prone: Optional[Iterable[int]] = None) -> QuorumContext:
    """Validate a quorum system and derive kernels and reliable sets.

    Without an explicit fail-prone system the canonical one is used.
    """
    nodes = tuple(nodes)
    n = len(nodes)
    _check_n(n)
    if len(set(nodes)) != n:
        raise StructureError("duplicate node names")
    full = (1 << n) - 1
    qs = tuple(sorted(set(quorums), key=set_key))
    if not qs:
        raise StructureError("a quorum system needs at least one quorum")
    for q in qs:
        if q <= 0 or q & ~full:
            raise StructureError(f"quorum {q:#x} is empty or outside the universe")
    fp = canonical_fail_prone(qs, n) if fail_prone is None else tuple(sorted(set(fail_prone), key=set_key))
    ok, violations = check_quorum_system(qs, fp, n)
    if not ok:
        raise StructureError("; ".join(violations))
    ks = kernels(qs, n)
    rs = reliable_sets(fp, ks, n)
    return QuorumContext(nodes, qs, fp, ks, rs)


def threshold_quorum_context(n: int, f: int) -> QuorumContext:
    """Nodes ``p1..pn``, every ``f``-subset fail-prone, quorums of size
    ``ceil((n + f + 1) / 2)``."""
    if n < 1 or f < 0:
        raise StructureError("need n >= 1 and f >= 0")
    if n < 3 * f + 1:
        raise StructureError(f"threshold systems need n >= 3f + 1, got n={n}, f={f}")
    _check_n(n)
    size = -(-(n + f + 1) // 2)
    quorums = [mask_of(c) for c in combinations(range(n), size)]
    fail_prone = [mask_of(c) for c in combinations(range(n), f)]
    nodes = [f"p{i + 1}" for i in range(n)]
    return quorum_context(nodes, quorums, fail_prone)


def context_from_json(obj: dict) -> QuorumContext:
    """Accepts ``{"universe": [...], "quorums": [[...]], "fail_prone"?: [[...]]}``
    or ``{"threshold": {"n": N, "f": F}}``."""
    if "threshold" in obj:
        th = obj["threshold"]
        return threshold_quorum_context(int(th["n"]), int(th["f"]))
    try:
        nodes = tuple(obj["universe"])
        quorums = [names_to_mask(q, nodes) for q in obj["quorums"]]
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed quorum description: {exc}") from None
    fail_prone = None
    if obj.get("fail_prone") is not None:
        fail_prone = [names_to_mask(f, nodes) for f in obj["fail_prone"]]
    return quorum_context(nodes, quorums, fail_prone)


def load_quorum_file(path) -> QuorumContext:
    with open(path) as fh:
        return context_from_json(json.load(fh))
