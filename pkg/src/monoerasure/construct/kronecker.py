"""Recursive code construction for arbitrary threshold trees.

A leaf contributes the trivial ``[1]`` code.  A vertex ``t``-of-``r`` takes
its children's generators ``M_a`` (``k_a`` rows), brings them to a common
row count ``lam = lcm(k_a)`` via ``R_a = M_a (x) I_{lam/k_a}``, and combines
them as ``(A (x) I_lam) diag(R_1, ..., R_r)`` where ``A`` is a ``t x r``
Vandermonde matrix.  Row block ``i``, column block ``a`` of the result is
simply ``A[i][a] * R_a``, which is how it is computed here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm, prod

from ..access import AccessTree, Gate, Leaf, Vertex, balance
from ..codes import LinearCode
from ..errors import CapacityError, InternalError
from ..field import FieldMatrix, identity, kronecker, rank, smallest_prime_at_least, vandermonde

MAX_COLUMNS = 4096


@dataclass(frozen=True)
class KroneckerResult:
    generator: FieldMatrix
    labeling: tuple[int, ...]

    @property
    def k(self) -> int:
        return self.generator.nrows

    @property
    def columns(self) -> int:
        return self.generator.ncols


@dataclass(frozen=True)
class SizePrediction:
    psi: tuple[Fraction, ...]
    k: int
    columns: int
    beta: Fraction


def kronecker_field_size(tree: AccessTree) -> int:
    """Smallest prime at least the largest fan-in among non-OR vertices."""
    def widest(v: Vertex) -> int:
        if isinstance(v, Leaf):
            return 2
        own = len(v.children) if v.threshold != 1 else 2
        return max([own] + [widest(c) for c in v.children])
    return smallest_prime_at_least(widest(tree.root))


def _sizes(v: Vertex) -> tuple[int, int]:
    """``(k, columns)`` of the subtree without building matrices."""
    if isinstance(v, Leaf):
        return 1, 1
    subs = [_sizes(c) for c in v.children]
    lam = lcm(*(k for k, _ in subs))
    return lam * v.threshold, sum(lam // k * cols for k, cols in subs)


def _coefficients(t: int, r: int, q: int) -> FieldMatrix:
    if t == 1:
        return FieldMatrix(q, 1, r, ((1,) * r,))
    return vandermonde(t, r, q)


def build_kronecker(tree: AccessTree, q: int | None = None, max_columns: int = MAX_COLUMNS) -> KroneckerResult:
    if q is None:
        q = kronecker_field_size(tree)
    _, cols = _sizes(tree.root)
    if cols > max_columns:
        raise CapacityError(f"construction needs {cols} columns, cap is {max_columns}")

    def build(v: Vertex) -> KroneckerResult:
        if isinstance(v, Leaf):
            return KroneckerResult(FieldMatrix(q, 1, 1, ((1,),)), (v.node,))
        subs = [build(c) for c in v.children]
        lam = lcm(*(s.k for s in subs))
        lifted = []
        labels: list[int] = []
        for s in subs:
            alpha = lam // s.k
            lifted.append(kronecker(s.generator, identity(alpha, q)))
            labels.extend(node for node in s.labeling for _ in range(alpha))
        a = _coefficients(v.threshold, len(subs), q)
        rows = []
        for i in range(v.threshold):
            for row_in_block in range(lam):
                row: tuple[int, ...] = ()
                for coef, r_a in zip(a.rows[i], lifted):
                    row += tuple(coef * x % q for x in r_a.rows[row_in_block])
                rows.append(row)
        return KroneckerResult(FieldMatrix(q, len(rows), len(labels), tuple(rows)), tuple(labels))

    return build(tree.root)


def kronecker_to_code(tree: AccessTree, result: KroneckerResult | None = None) -> LinearCode:
    if result is None:
        result = build_kronecker(tree)
    if rank(result.generator) != result.k:
        raise InternalError("recursive construction produced a rank-deficient generator")
    return LinearCode(result.generator, result.labeling, tree.nodes)


def _leaf_parent_paths(v: Vertex, above: tuple[Gate, ...], out: list):
    if isinstance(v, Leaf):
        return
    path = above + (v,)
    if all(isinstance(c, Leaf) for c in v.children):
        out.append(path)
        return
    for c in v.children:
        _leaf_parent_paths(c, path, out)


def predict_kronecker_size(tree: AccessTree) -> SizePrediction:
    """Closed-form dimension, length and overhead of :func:`build_kronecker`.

    After balancing, each vertex whose children are leaves contributes its
    fan-in divided by the product of thresholds on its root path.
    """
    paths: list[tuple[Gate, ...]] = []
    _leaf_parent_paths(balance(tree).root, (), paths)
    if not paths:
        return SizePrediction((), 1, 1, Fraction(0))
    products = [prod(g.threshold for g in p) for p in paths]
    psi = tuple(Fraction(len(p[-1].children), pp) for p, pp in zip(paths, products))
    k = lcm(*products)
    total = sum(psi)
    return SizePrediction(psi, k, int(total * k), total - 1)
