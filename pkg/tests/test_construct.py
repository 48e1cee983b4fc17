from __future__ import annotations

import random
from math import lcm
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from monoerasure.access import AccessTree, Leaf, enumerate_minimal, evaluate, parse_tree
from monoerasure.codes import check_mds, is_complete, is_sufficient, overhead
from monoerasure.construct import (
    build_kronecker, build_lp_code, build_partitioned_code, fa_optimal, kronecker_field_size,
    kronecker_to_code, overhead_bounds, predict_kronecker_size, smallest_set_size,
    uniform_assignment,
)
from monoerasure.errors import CapacityError, ConstructionError
from monoerasure.field import FieldMatrix, block_diag, identity, kronecker, matmul, vandermonde
from monoerasure.ratlp import solve_structure
from oracles import random_tree_text
from trees import FIVE_NODE, MIXED_DEPTH, NINE_NODE, SHARED_LEAF


def literal_generator(tree: AccessTree, q: int):
    """Kronecker construction written directly as (A (x) I) diag(R_a)."""
    def build(v):
        if isinstance(v, Leaf):
            return identity(1, q)
        subs = [build(c) for c in v.children]
        lam = lcm(*(s.nrows for s in subs))
        lifted = [kronecker(s, identity(lam // s.nrows, q)) for s in subs]
        if v.threshold == 1:
            a = FieldMatrix.from_rows([[1] * len(subs)], q)
        else:
            a = vandermonde(v.threshold, len(subs), q)
        return matmul(kronecker(a, identity(lam, q)), block_diag(lifted))
    return build(tree.root)


def test_block_layout_for_two_of_three():
    tree = parse_tree("(2 (1 a b) (2 c d) (3 e f g))")
    q = kronecker_field_size(tree)
    g = build_kronecker(tree, q).generator
    children = [build_kronecker(AccessTree(c, tree.nodes), q).generator for c in tree.root.children]
    lam = 6
    lifted = [kronecker(c, identity(lam // c.nrows, q)) for c in children]
    # row blocks [R1 R2 R3] and [0 R2 2R3]
    top = [row for i in range(lam) for row in [sum((r.rows[i] for r in lifted), ())]]
    bottom = [tuple(0 for _ in lifted[0].rows[i]) + lifted[1].rows[i]
              + tuple(2 * x % q for x in lifted[2].rows[i]) for i in range(lam)]
    assert [list(r) for r in g.rows] == [list(r) for r in top + bottom]
    assert g == literal_generator(tree, q)


@given(st.integers(0, 10 ** 9))
def test_matches_literal_product(seed):
    tree = parse_tree(random_tree_text(random.Random(seed), 6, 3, partitioned=False))
    q = kronecker_field_size(tree)
    assert build_kronecker(tree, q).generator == literal_generator(tree, q)


def test_field_sizes():
    assert kronecker_field_size(parse_tree(SHARED_LEAF)) == 3
    assert kronecker_field_size(parse_tree("(1 a b c d e)")) == 2
    assert kronecker_field_size(parse_tree("(2 a b)")) == 2


def test_shared_leaf_construction():
    tree = parse_tree(SHARED_LEAF)
    code = kronecker_to_code(tree)
    assert (code.q, code.k, code.m) == (3, 12, 33)
    assert overhead(code) == F(7, 4)
    structure = enumerate_minimal(tree)
    assert len(structure.sets) == 14 and is_complete(code, structure)
    pred = predict_kronecker_size(tree)
    assert (pred.k, pred.columns, pred.beta) == (12, 33, F(7, 4))


def test_prediction_on_flat_trees():
    assert predict_kronecker_size(parse_tree("(2 p1 p2)")).psi == (F(1),)
    assert predict_kronecker_size(parse_tree("(2 p1 p2)")).beta == 0
    assert predict_kronecker_size(parse_tree("(1 p1 p2)")).beta == 1


def test_column_cap():
    tree = parse_tree("(1 (5 a b c d e) (4 f g h i) (3 j k l) (7 m n o p q r s))")
    with pytest.raises(CapacityError):
        build_kronecker(tree, max_columns=16)


@given(st.integers(0, 10 ** 9))
def test_prediction_matches_construction(seed):
    tree = parse_tree(random_tree_text(random.Random(seed), 7, 3, partitioned=False))
    built = build_kronecker(tree)
    pred = predict_kronecker_size(tree)
    assert (built.k, built.columns) == (pred.k, pred.columns)
    assert F(built.columns - built.k, built.k) == pred.beta


@given(st.integers(0, 10 ** 9))
def test_kronecker_codes_are_complete(seed):
    tree = parse_tree(random_tree_text(random.Random(seed), 6, 3, partitioned=False))
    code = kronecker_to_code(tree)
    for mask in range(1 << tree.n):
        assert is_sufficient(code, mask) or not evaluate(tree, mask)


def test_fa_on_nine_node_tree():
    a = fa_optimal(parse_tree(NINE_NODE))
    assert a.k == 2 and a.per_node == (2, 0, 0, 1, 1, 1, 0, 0, 0)


def test_mixed_depth_assignments():
    tree = parse_tree(MIXED_DEPTH)
    assert fa_optimal(tree).beta == 1
    assert uniform_assignment(tree).beta == F(3, 2)


def test_shared_leaf_is_rejected_by_partitioned_builders():
    tree = parse_tree(SHARED_LEAF)
    with pytest.raises(ConstructionError, match="p4"):
        fa_optimal(tree)
    with pytest.raises(ConstructionError):
        uniform_assignment(tree)
    with pytest.raises(ConstructionError):
        build_partitioned_code(parse_tree(NINE_NODE), via="other")


@given(st.integers(0, 10 ** 9))
def test_optimal_assignment_matches_lp(seed):
    tree = parse_tree(random_tree_text(random.Random(seed), 7, 3, partitioned=True))
    a, code = build_partitioned_code(tree)
    sol = solve_structure(enumerate_minimal(tree))
    assert a.beta == sol.objective - 1
    assert uniform_assignment(tree).beta >= a.beta
    for mask in range(1 << tree.n):
        assert is_sufficient(code, mask) or not evaluate(tree, mask)


def test_lp_code_three_of_four():
    lp = build_lp_code(enumerate_minimal(parse_tree("(3 a b c d)")))
    assert (lp.params.k, lp.params.m, lp.params.beta) == (3, 4, F(1, 3))
    assert check_mds(lp.code)


def test_lp_code_five_node():
    structure = enumerate_minimal(parse_tree(FIVE_NODE))
    lp = build_lp_code(structure)
    assert (lp.code.k, lp.code.m, lp.code.q) == (5, 7, 7)
    assert is_complete(lp.code, structure)
    bigger = build_lp_code(structure, k_multiplier=3)
    assert (bigger.code.k, bigger.code.m, bigger.params.beta) == (15, 21, F(2, 5))
    with pytest.raises(ConstructionError):
        build_lp_code(structure, k_multiplier=0)


def test_overhead_bounds():
    assert overhead_bounds(5, 3, 5) == (5, 10, F(5, 3))
    assert overhead_bounds(4, 1, 1) == (1, 4, 7)
    with pytest.raises(ConstructionError):
        overhead_bounds(3, 4, 1)


@given(st.integers(0, 10 ** 9))
def test_lp_codes_are_complete_and_bounded(seed):
    tree = parse_tree(random_tree_text(random.Random(seed), 6, 3, partitioned=False))
    structure = enumerate_minimal(tree)
    lp = build_lp_code(structure)
    assert is_complete(lp.code, structure)
    lo, hi, ceiling = overhead_bounds(tree.n, smallest_set_size(structure), lp.params.k)
    assert lo <= lp.params.m <= hi
    assert lp.params.beta < ceiling
