"""Exact rational linear programming for fragment-size assignment.

Given access sets ``A_1..A_w`` over ``n`` nodes, find ``y >= 0`` minimizing
``sum(y)`` subject to ``sum(y_i for i in A_j) >= 1`` for every set.  Scaling
an optimal ``y`` by the lcm of its denominators yields integer fragment
sizes.

The solver is a textbook two-phase tableau simplex over ``Fraction`` with
Bland's rule, so it always terminates and returns an exact vertex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

from .access import AccessStructure, members
from .errors import InternalError, LpError


@dataclass(frozen=True)
class LpSolution:
    objective: Fraction
    y: tuple[Fraction, ...]


@dataclass(frozen=True)
class Parameters:
    k: int
    per_node: tuple[int, ...]
    m: int
    beta: Fraction


def gamma_from_structure(structure: AccessStructure) -> tuple[tuple[int, ...], ...]:
    """0/1 incidence matrix: one row per access set, one column per node."""
    n = structure.n
    return tuple(tuple(s >> i & 1 for i in range(n)) for s in structure.sets)


class _Tableau:
    """Rows ``[a_1 .. a_N | rhs]`` with one basic variable per row."""

    def __init__(self, rows, basis):
        self.rows = rows
        self.basis = basis

    def pivot(self, r: int, c: int):
        prow = self.rows[r]
        inv = 1 / prow[c]
        prow = [x * inv for x in prow]
        self.rows[r] = prow
        for i, row in enumerate(self.rows):
            if i != r and row[c]:
                f = row[c]
                self.rows[i] = [x - f * y for x, y in zip(row, prow)]
        self.basis[r] = c

    def reduced_costs(self, cost):
        """``c_j - c_B B^-1 A_j`` for every column."""
        ncols = len(cost)
        red = list(cost)
        for row, b in zip(self.rows, self.basis):
            cb = cost[b]
            if cb:
                for j in range(ncols):
                    if row[j]:
                        red[j] -= cb * row[j]
        return red

    def optimize(self, cost, allowed):
        """Minimize ``cost`` using Bland's rule over columns in ``allowed``."""
        while True:
            red = self.reduced_costs(cost)
            entering = next((j for j in allowed if red[j] < 0), None)
            if entering is None:
                return red
            best = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise LpError("linear program is unbounded")
            self.pivot(best[1], entering)


def simplex_min(cost: Sequence, a_eq: Sequence[Sequence], b_eq: Sequence):
    """Minimize ``cost . x`` subject to ``a_eq x = b_eq`` and ``x >= 0``.

    Returns ``(value, x, reduced_costs)``, all exact.  Phase one adds an
    artificial variable only for rows that lack a ready-made unit column.
    """
    nvars = len(cost)
    rows = []
    for row, b in zip(a_eq, b_eq):
        row = [Fraction(x) for x in row] + [Fraction(b)]
        if len(row) != nvars + 1:
            raise LpError("constraint row has the wrong length")
        if row[-1] < 0:
            row = [-x for x in row]
        rows.append(row)
    m = len(rows)

    basis = [None] * m
    for j in range(nvars):
        col = [row[j] for row in rows]
        ones = [i for i, x in enumerate(col) if x]
        if len(ones) == 1 and col[ones[0]] == 1 and basis[ones[0]] is None:
            basis[ones[0]] = j
    artificial = [i for i in range(m) if basis[i] is None]
    width = nvars + len(artificial)
    for i, row in enumerate(rows):
        extra = [Fraction(0)] * len(artificial)
        if i in artificial:
            extra[artificial.index(i)] = Fraction(1)
        rows[i] = row[:-1] + extra + [row[-1]]
    for a, i in enumerate(artificial):
        basis[i] = nvars + a
    tab = _Tableau(rows, basis)

    if artificial:
        phase1 = [Fraction(0)] * nvars + [Fraction(1)] * len(artificial)
        tab.optimize(phase1, range(width))
        if sum(tab.rows[i][-1] for i, b in enumerate(tab.basis) if b >= nvars) != 0:
            raise LpError("linear program is infeasible")
        # Drive zero-valued artificials out of the basis, dropping redundant rows.
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= nvars:
                j = next((j for j in range(nvars) if tab.rows[i][j]), None)
                if j is None:
                    del tab.rows[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, j)
            i += 1
        tab.rows = [row[:nvars] + [row[-1]] for row in tab.rows]

    full_cost = [Fraction(c) for c in cost]
    red = tab.optimize(full_cost, range(nvars))
    x = [Fraction(0)] * nvars
    for row, b in zip(tab.rows, tab.basis):
        x[b] = row[-1]
    value = sum((c * v for c, v in zip(full_cost, x)), Fraction(0))
    return value, tuple(x), tuple(red)


def solve_lpp(gamma: Sequence[Sequence[int]]) -> LpSolution:
    """Optimal vertex of ``min sum(y)`` s.t. ``gamma @ y >= 1``, ``y >= 0``.

    The simplex runs on the dual program ``max sum(u)`` s.t.
    ``gamma^T @ u <= 1``, whose slack columns give a starting basis and
    whose tableau has only ``n`` rows.  The optimal ``y`` is read off the
    reduced costs of those slacks and is itself a basic solution.
    """
    if not gamma:
        raise LpError("need at least one access set")
    n = len(gamma[0])
    if any(len(row) != n for row in gamma):
        raise LpError("ragged incidence matrix")
    if any(not any(row) for row in gamma):
        raise LpError("an access set is empty; the program is infeasible")
    w = len(gamma)
    # Columns: u_1..u_w then slacks s_1..s_n.
    a_eq = [[gamma[j][i] for j in range(w)] + [int(i == t) for t in range(n)] for i in range(n)]
    cost = [-1] * w + [0] * n
    value, _, red = simplex_min(cost, a_eq, [1] * n)
    y = tuple(red[w:])
    objective = -value
    if any(v < 0 for v in y) or sum(y) != objective:
        raise InternalError("dual readout produced an inconsistent primal solution")
    for row in gamma:
        if sum(v for v, g in zip(y, row) if g) < 1:
            raise InternalError("dual readout violates a covering constraint")
    return LpSolution(objective, y)


def solve_structure(structure: AccessStructure) -> LpSolution:
    return solve_lpp(gamma_from_structure(structure))


def lcm_of_denominators(values: Sequence[Fraction]) -> int:
    """Smallest common denominator.

    >>> lcm_of_denominators([Fraction(1, 4), Fraction(1, 6)])
    12
    """
    return lcm(1, *(Fraction(v).denominator for v in values))


def derive_parameters(y: Sequence[Fraction]) -> Parameters:
    """Integer code parameters from fractional fragment sizes."""
    y = [Fraction(v) for v in y]
    if not y or any(v < 0 for v in y):
        raise LpError("fragment sizes must be a nonempty nonnegative vector")
    k = lcm_of_denominators(y)
    per_node = tuple(int(v * k) for v in y)
    m = sum(per_node)
    return Parameters(k, per_node, m, Fraction(m - k, k))


def covered(structure: AccessStructure, y: Sequence[Fraction]) -> bool:
    """Whether every access set receives total size at least 1."""
    return all(sum(y[i] for i in members(s)) >= 1 for s in structure.sets)
