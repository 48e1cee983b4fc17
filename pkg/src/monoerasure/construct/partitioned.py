"""Fragment assignments for trees in which every node appears once.

Both assignments give node ``i`` some number ``h(i)`` of columns of a
single ``[nu, k]`` MDS code.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from ..access import AccessTree, Leaf, Vertex, balance, format_tree, leaves
from ..codes import LinearCode, make_code
from ..errors import ConstructionError, InternalError
from ..field import smallest_prime_at_least, vandermonde


@dataclass(frozen=True)
class Assignment:
    method: str
    k: int
    per_node: tuple[int, ...]

    @property
    def nu(self) -> int:
        return sum(self.per_node)

    @property
    def beta(self) -> Fraction:
        return Fraction(self.nu - self.k, self.k)


def require_partitioned(tree: AccessTree) -> None:
    repeated = sorted(tree.nodes[i] for i, c in Counter(leaves(tree)).items() if c > 1)
    if repeated:
        raise ConstructionError("tree is not partitioned; repeated nodes: " + ", ".join(repeated))


def uniform_assignment(tree: AccessTree) -> Assignment:
    """Each leaf gets ``k / P`` columns where ``P`` is the product of
    thresholds from the root down to its parent and ``k = lcm(P)``."""
    require_partitioned(tree)
    per_path: dict[int, int] = {}

    def walk(v: Vertex, above: int):
        if isinstance(v, Leaf):
            per_path[v.node] = above
            return
        for c in v.children:
            walk(c, above * v.threshold)

    walk(balance(tree).root, 1)
    k = lcm(*per_path.values())
    h = tuple(k // per_path[i] if i in per_path else 0 for i in range(tree.n))
    return Assignment("uniform", k, h)


def fa_optimal(tree: AccessTree) -> Assignment:
    """Bottom-up optimal assignment.

    At each vertex, children are sorted by their cost ratio ``nu/k``; the
    cheapest ``s*`` are kept and rescaled to a common ``k``, the rest get
    nothing.
    """
    require_partitioned(tree)

    def solve(v: Vertex) -> tuple[int, dict[int, int]]:
        if isinstance(v, Leaf):
            return 1, {v.node: 1}
        subs = [solve(c) for c in v.children]
        order = sorted(range(len(subs)), key=lambda a: Fraction(sum(subs[a][1].values()), subs[a][0]))
        rho = [Fraction(sum(subs[a][1].values()), subs[a][0]) for a in order]
        r, t = len(subs), v.threshold
        s_star = r
        for s in range(r - t + 1, r):
            if rho[s] >= sum(rho[:s]) / (s - r + t):
                s_star = s
                break
        kept = order[:s_star]
        lam = lcm(*(subs[a][0] for a in kept))
        h: dict[int, int] = {}
        for a in kept:
            alpha = lam // subs[a][0]
            for node, c in subs[a][1].items():
                if node in h:
                    raise InternalError(f"node {tree.nodes[node]} assigned twice below "
                                        f"{format_tree(AccessTree(v, tree.nodes))}")
                h[node] = alpha * c
        return (s_star - r + t) * lam, h

    k, h = solve(tree.root)
    return Assignment("optimal", k, tuple(h.get(i, 0) for i in range(tree.n)))


def assignment_code(assignment: Assignment, nodes) -> LinearCode:
    q = smallest_prime_at_least(assignment.nu)
    return make_code(vandermonde(assignment.k, assignment.nu, q), assignment.per_node, nodes)


def build_partitioned_code(tree: AccessTree, via: str = "optimal") -> tuple[Assignment, LinearCode]:
    if via == "optimal":
        assignment = fa_optimal(tree)
    elif via == "uniform":
        assignment = uniform_assignment(tree)
    else:
        raise ConstructionError(f"unknown assignment method {via!r}")
    return assignment, assignment_code(assignment, tree.nodes)

