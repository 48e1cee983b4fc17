"""Dense matrices over prime fields GF(q).

Matrices are immutable and store their rows as tuples of ints in
``range(q)``.  Gaussian elimination always takes the first nonzero entry
of the current column as the pivot, so ranks, solutions and pivot choices
are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from sympy.ntheory import isprime, nextprime

from .errors import FieldError

MAX_MODULUS = 1 << 61


def smallest_prime_at_least(bound: int) -> int:
    """Return the least prime ``p >= max(bound, 2)``.

    >>> [smallest_prime_at_least(b) for b in (1, 3, 8)]
    [2, 3, 11]
    """
    if bound <= 2:
        return 2
    if isprime(bound):
        return bound
    return int(nextprime(bound))


def check_modulus(q: int) -> None:
    if not isinstance(q, int) or q < 2 or q >= MAX_MODULUS or not isprime(q):
        raise FieldError(f"modulus {q!r} is not a prime below 2^61")


@dataclass(frozen=True)
class FieldMatrix:
    q: int
    nrows: int
    ncols: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.rows) != self.nrows:
            raise FieldError("row count does not match data")
        for row in self.rows:
            if len(row) != self.ncols:
                raise FieldError("ragged matrix rows")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], q: int, ncols: Optional[int] = None):
        check_modulus(q)
        data = tuple(tuple(int(x) % q for x in row) for row in rows)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        return cls(q, len(data), ncols, data)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def entries(self) -> tuple[int, ...]:
        """Row-major flattening."""
        return tuple(x for row in self.rows for x in row)

    def tolist(self) -> list[list[int]]:
        return [list(row) for row in self.rows]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.rows)

    def select_columns(self, indices: Sequence[int]) -> FieldMatrix:
        data = tuple(tuple(row[j] for j in indices) for row in self.rows)
        return FieldMatrix(self.q, self.nrows, len(indices), data)

    def transpose(self) -> FieldMatrix:
        data = tuple(tuple(row[j] for row in self.rows) for j in range(self.ncols))
        return FieldMatrix(self.q, self.ncols, self.nrows, data)

    def scale(self, c: int) -> FieldMatrix:
        q = self.q
        c %= q
        return FieldMatrix(q, self.nrows, self.ncols,
                           tuple(tuple(c * x % q for x in row) for row in self.rows))

    def __matmul__(self, other: FieldMatrix) -> FieldMatrix:
        return matmul(self, other)


def zeros(nrows: int, ncols: int, q: int) -> FieldMatrix:
    check_modulus(q)
    return FieldMatrix(q, nrows, ncols, tuple((0,) * ncols for _ in range(nrows)))


def identity(n: int, q: int) -> FieldMatrix:
    check_modulus(q)
    return FieldMatrix(q, n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


def vandermonde(t: int, r: int, q: int) -> FieldMatrix:
    """The ``t x r`` matrix with entry ``x_j ** i`` at the canonical points ``x_j = j``.

    Any ``t`` of its columns are linearly independent.  ``0 ** 0`` is 1.

    >>> vandermonde(3, 3, 3).tolist()
    [[1, 1, 1], [0, 1, 2], [0, 1, 1]]
    """
    check_modulus(q)
    if t < 1 or r < 1:
        raise FieldError(f"vandermonde dimensions must be positive, got {t}x{r}")
    if r > q:
        raise FieldError(f"GF({q}) has only {q} evaluation points, {r} requested")
    return FieldMatrix(q, t, r, tuple(tuple(pow(x, i, q) for x in range(r)) for i in range(t)))


def kronecker(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    if a.q != b.q:
        raise FieldError(f"field mismatch: GF({a.q}) vs GF({b.q})")
    q = a.q
    data = []
    for arow in a.rows:
        for brow in b.rows:
            data.append(tuple(x * y % q for x in arow for y in brow))
    return FieldMatrix(q, a.nrows * b.nrows, a.ncols * b.ncols, tuple(data))


def block_diag(blocks: Sequence[FieldMatrix]) -> FieldMatrix:
    if not blocks:
        raise FieldError("block_diag needs at least one block")
    q = blocks[0].q
    if any(b.q != q for b in blocks):
        raise FieldError("field mismatch in block_diag")
    ncols = sum(b.ncols for b in blocks)
    data = []
    offset = 0
    for b in blocks:
        for row in b.rows:
            data.append((0,) * offset + row + (0,) * (ncols - offset - b.ncols))
        offset += b.ncols
    return FieldMatrix(q, len(data), ncols, tuple(data))


def hstack(blocks: Sequence[FieldMatrix]) -> FieldMatrix:
    if not blocks:
        raise FieldError("hstack needs at least one block")
    q, nrows = blocks[0].q, blocks[0].nrows
    if any(b.q != q or b.nrows != nrows for b in blocks):
        raise FieldError("hstack blocks disagree on field or row count")
    data = tuple(sum((b.rows[i] for b in blocks), ()) for i in range(nrows))
    return FieldMatrix(q, nrows, sum(b.ncols for b in blocks), data)


def vstack(blocks: Sequence[FieldMatrix]) -> FieldMatrix:
    if not blocks:
        raise FieldError("vstack needs at least one block")
    q, ncols = blocks[0].q, blocks[0].ncols
    if any(b.q != q or b.ncols != ncols for b in blocks):
        raise FieldError("vstack blocks disagree on field or column count")
    data = tuple(row for b in blocks for row in b.rows)
    return FieldMatrix(q, len(data), ncols, data)


def matmul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    if a.q != b.q:
        raise FieldError(f"field mismatch: GF({a.q}) vs GF({b.q})")
    if a.ncols != b.nrows:
        raise FieldError(f"cannot multiply {a.shape} by {b.shape}")
    q = a.q
    bcols = b.transpose().rows
    data = tuple(tuple(sum(x * y for x, y in zip(row, col)) % q for col in bcols)
                 for row in a.rows)
    return FieldMatrix(q, a.nrows, b.ncols, data)


def vecmat(v: Sequence[int], m: FieldMatrix) -> tuple[int, ...]:
    """Row vector times matrix."""
    if len(v) != m.nrows:
        raise FieldError(f"vector of length {len(v)} does not match {m.nrows} rows")
    q = m.q
    acc = [0] * m.ncols
    for c, row in zip(v, m.rows):
        if c:
            for j, x in enumerate(row):
                acc[j] += c * x
    return tuple(x % q for x in acc)


def _eliminate(work: list[list[int]], nvars: int, q: int) -> list[int]:
    """Reduce ``work`` in place to reduced row echelon form over the first
    ``nvars`` columns and return the pivot columns."""
    pivots = []
    r = 0
    nrows = len(work)
    for c in range(nvars):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if work[i][c]), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        inv = pow(work[r][c], -1, q)
        prow = [x * inv % q for x in work[r]]
        work[r] = prow
        for i in range(nrows):
            if i != r:
                f = work[i][c]
                if f:
                    work[i] = [(x - f * y) % q for x, y in zip(work[i], prow)]
        pivots.append(c)
        r += 1
    return pivots


def rank(m: FieldMatrix) -> int:
    if m.nrows == 0 or m.ncols == 0:
        return 0
    # Eliminate along the shorter side; rank is transpose invariant.
    src = m.rows if m.nrows <= m.ncols else m.transpose().rows
    work = [list(row) for row in src]
    return len(_eliminate(work, len(work[0]), m.q))


def solve_left_many(g: FieldMatrix, targets: Sequence[Sequence[int]]) -> Optional[list[tuple[int, ...]]]:
    """Solve ``f @ g == t`` for every target row ``t``.

    Returns ``None`` when ``g`` has rank below its row count (the solution
    would not be unique) or when some target lies outside the row space.
    """
    k, c = g.nrows, g.ncols
    for t in targets:
        if len(t) != c:
            raise FieldError(f"target of length {len(t)} does not match {c} columns")
    if k == 0:
        return [() for _ in targets]
    q = g.q
    # f @ g = t  <=>  g^T f^T = t^T; augment g^T with one column per target.
    work = [list(col) + [t[j] % q for t in targets] for j, col in enumerate(g.transpose().rows)]
    if not work:
        return None
    pivots = _eliminate(work, k, q)
    if len(pivots) < k:
        return None
    for row in work[k:]:
        if any(row[k:]):
            return None
    return [tuple(work[i][k + s] for i in range(k)) for s in range(len(targets))]


def solve_left(g: FieldMatrix, target: Sequence[int]) -> Optional[tuple[int, ...]]:
    """The unique ``f`` with ``f @ g == target``, or ``None``.

    >>> g = FieldMatrix.from_rows([[1, 1], [0, 1]], 7)
    >>> solve_left(g, (1, 2))
    (1, 1)
    """
    out = solve_left_many(g, [target])
    return None if out is None else out[0]
