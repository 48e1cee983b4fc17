from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from monoerasure.access import evaluate, parse_tree
from monoerasure.basic import basic_block_size, basic_decode, basic_encode
from monoerasure.codes import (
    LinearCode, check_mds, code_from_manifest, code_hash, code_manifest, decode,
    encode, is_sufficient, make_code, mds_code, overhead,
)
from monoerasure.construct import build_lp_code, kronecker_to_code
from monoerasure.errors import CapacityError, CodeError
from monoerasure.field import FieldMatrix, vandermonde
from monoerasure.packing import pack_bytes, unpack_bytes
from oracles import random_tree_text
from trees import FIVE_NODE, SHARED_LEAF


def three_node_code():
    g = FieldMatrix.from_rows([[1, 1, 1], [0, 1, 2]], 7)
    return LinearCode(g, (0, 1, 2), ("a", "b", "c"))


def test_encode_per_node():
    assert encode(three_node_code(), (1, 1)) == ((1,), (2,), (3,))


def test_decode_from_two_of_three():
    code = three_node_code()
    assert decode(code, ((1,), None, (3,))) == (1, 1)
    assert decode(code, ((1,), None, None)) is None


def test_decode_rejects_inconsistent_fragments():
    assert decode(three_node_code(), ((1,), (2,), (4,))) is None


def test_decode_rejects_wrong_fragment_size():
    with pytest.raises(CodeError):
        decode(three_node_code(), ((1, 2), None, (3,)))


def test_nodes_without_columns_hold_empty_fragment():
    g = vandermonde(2, 3, 5)
    code = make_code(g, (2, 0, 1), ("x", "y", "z"))
    frags = encode(code, (3, 4))
    assert frags[1] is None and len(frags[0]) == 2
    assert decode(code, frags) == (3, 4)


def test_overhead_is_exact():
    code = three_node_code()
    assert overhead(code) == Fraction(1, 2)
    assert overhead(kronecker_to_code(parse_tree(SHARED_LEAF))) == Fraction(7, 4)


def test_mds_code():
    code = mds_code(3, 5, 5)
    assert code.nodes == ("V1", "V2", "V3", "V4", "V5")
    assert check_mds(code)
    with pytest.raises(CodeError):
        mds_code(2, 8, 7)
    with pytest.raises(CapacityError):
        check_mds(mds_code(2, 17, 17))


def test_non_mds_detected():
    g = FieldMatrix.from_rows([[1, 1, 0], [0, 0, 1]], 3)
    assert not check_mds(LinearCode(g, (0, 1, 2), ("a", "b", "c")))


def test_manifest_round_trip_and_hash():
    code = build_lp_code_for(FIVE_NODE)
    again = code_from_manifest(code_manifest(code))
    assert again == code
    assert code_hash(again) == code_hash(code)
    broken = code_manifest(code)
    broken["columns_per_node"]["a"] += 1
    with pytest.raises(CodeError):
        code_from_manifest(broken)


def build_lp_code_for(text):
    from monoerasure.access import enumerate_minimal
    return build_lp_code(enumerate_minimal(parse_tree(text))).code


@given(st.integers(0, 10 ** 9))
def test_sufficiency_is_decodability_for_mds_codes(seed):
    rng = random.Random(seed)
    q = rng.choice([5, 7, 11])
    m = rng.randint(1, 5)
    k = rng.randint(1, m)
    n = rng.randint(1, 4)
    labeling = tuple(rng.randrange(n) for _ in range(m))
    code = LinearCode(vandermonde(k, m, q), labeling, tuple(f"v{i}" for i in range(n)))
    f = tuple(rng.randrange(q) for _ in range(k))
    frags = encode(code, f)
    for mask in range(1 << n):
        sub = [frags[i] if mask >> i & 1 else None for i in range(n)]
        got = decode(code, sub)
        assert (got == f) == is_sufficient(code, mask)
        assert got is None or got == f


# -- splitting and copying ----------------------------------------------------

EXAMPLE_BITS = (0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1)


def test_basic_chunks_for_five_node_tree():
    tree = parse_tree(FIVE_NODE)
    chunks = dict(zip(tree.nodes, basic_encode(tree, EXAMPLE_BITS)))
    f1, f2 = (0, 1, 1, 1, 0, 0), (1, 0, 1, 1, 0, 1)
    g1, g2, g3 = (1, 0), (1, 1), (0, 1)
    h1, h2 = (0, 1, 1), (1, 0, 0)
    assert chunks == {"a": [f1, h1], "b": [f1, h2], "c": [g1, f2], "d": [g2, f2], "e": [g3, f2]}


def test_basic_decode_examples():
    tree = parse_tree(FIVE_NODE)
    chunks = basic_encode(tree, EXAMPLE_BITS)
    assert basic_decode(tree, chunks, {"a", "b", "c"}) == EXAMPLE_BITS
    assert basic_decode(tree, chunks, {"c", "d"}) is None


def test_basic_divisibility_error_names_vertex():
    tree = parse_tree(FIVE_NODE)
    with pytest.raises(CodeError, match=r"\(3 c d e\)"):
        basic_encode(tree, (1,) * 10)
    assert basic_block_size(tree) == 12


def test_basic_threshold_expansion_round_trips():
    tree = parse_tree("(2 a b c)")
    bits = (1, 0, 1, 1)
    chunks = basic_encode(tree, bits)
    for mask in range(8):
        got = basic_decode(tree, chunks, mask)
        assert (got == bits) == evaluate(tree, mask)


def test_basic_decode_rejects_malformed_chunks():
    tree = parse_tree(FIVE_NODE)
    chunks = basic_encode(tree, EXAMPLE_BITS)
    chunks[0] = chunks[0][:1]
    with pytest.raises(CodeError):
        basic_decode(tree, chunks, {"a", "b", "c"})


@given(st.integers(0, 10 ** 9))
def test_basic_scheme_round_trips_on_random_trees(seed):
    rng = random.Random(seed)
    tree = parse_tree(random_tree_text(rng, 6, 3, partitioned=rng.random() < 0.5))
    size = basic_block_size(tree)
    bits = tuple(rng.randrange(2) for _ in range(size * rng.randint(1, 2)))
    chunks = basic_encode(tree, bits)
    for mask in range(1 << tree.n):
        got = basic_decode(tree, chunks, mask)
        assert (got == bits) if evaluate(tree, mask) else got is None


# -- packing ------------------------------------------------------------------

@given(st.binary(max_size=40), st.sampled_from([2, 3, 5, 7, 13, 257, (1 << 61) - 1]),
       st.integers(1, 5))
def test_packing_round_trip(data, q, multiple):
    symbols, pad = pack_bytes(data, q, multiple)
    assert len(symbols) % multiple == 0
    assert all(0 <= s < q for s in symbols)
    assert unpack_bytes(symbols[:len(symbols) - pad], q, len(data)) == data


def test_packing_is_little_endian():
    assert pack_bytes(b"\x06", 5)[0] == [2, 1, 0, 0]
