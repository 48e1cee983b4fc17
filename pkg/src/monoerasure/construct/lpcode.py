"""Codes for arbitrary access structures from the fragment-size LP."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from ..access import AccessStructure, popcount
from ..codes import LinearCode, make_code
from ..errors import ConstructionError
from ..field import smallest_prime_at_least, vandermonde
from ..ratlp import LpSolution, Parameters, derive_parameters, solve_structure


@dataclass(frozen=True)
class LpCode:
    code: LinearCode
    solution: LpSolution
    params: Parameters


def build_lp_code(structure: AccessStructure, k_multiplier: int = 1) -> LpCode:
    """MDS code of dimension ``k`` and length ``m`` with node ``i`` holding
    ``m_i`` consecutive columns, nodes in index order."""
    if k_multiplier < 1:
        raise ConstructionError("k_multiplier must be a positive integer")
    solution = solve_structure(structure)
    params = derive_parameters(solution.y)
    k = params.k * k_multiplier
    per_node = tuple(c * k_multiplier for c in params.per_node)
    m = sum(per_node)
    q = smallest_prime_at_least(m)
    code = make_code(vandermonde(k, m, q), per_node, structure.nodes)
    if k_multiplier != 1:
        params = Parameters(k, per_node, m, params.beta)
    return LpCode(code, solution, params)


def overhead_bounds(n: int, tau: int, k: int) -> tuple[int, int, Fraction]:
    """``(min m, max m, overhead ceiling)`` for ``n`` nodes, smallest access
    set size ``tau`` and code dimension ``k``."""
    if not 1 <= tau <= n or k < 1:
        raise ConstructionError("need 1 <= tau <= n and k >= 1")
    return k, ceil(Fraction(k, tau)) * n, Fraction(n, k) + Fraction(n - tau, tau)


def smallest_set_size(structure: AccessStructure) -> int:
    return min(popcount(s) for s in structure.sets)
