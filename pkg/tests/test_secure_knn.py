import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from encsearch.secure_knn import (
    PayloadAuthError,
    SecretKey,
    decrypt_payload,
    encrypt_index,
    encrypt_payload,
    gen_trapdoor,
    keygen,
    merge_split,
    split_index,
    split_query,
    unlinkability_bound,
)
from encsearch.server import score


def transparent_key(n, S):
    eye = np.eye(n + 1)
    return SecretKey(np.asarray(S, dtype=np.uint8), eye, eye, eye, eye, b"\0" * 32)


def test_keygen_deterministic():
    a = keygen(4, np.random.default_rng(99))
    b = keygen(4, np.random.default_rng(99))
    assert a.to_bytes() == b.to_bytes()
    assert a.inverse_error() <= 1e-8
    assert set(np.unique(a.S)) <= {0, 1} and a.S.shape == (5,)
    assert np.linalg.cond(a.M1) <= 1e6 and np.linalg.cond(a.M2) <= 1e6


def test_keygen_indicator_varies_across_seeds():
    # P(equal S) = 2^-5 for n = 4; 400 seed pairs -> expect about 12.5 collisions
    same = sum(
        np.array_equal(keygen(4, np.random.default_rng(2 * i)).S, keygen(4, np.random.default_rng(2 * i + 1)).S)
        for i in range(400)
    )
    assert 1 <= same <= 30


def test_keygen_rejects_small_n():
    with pytest.raises(ValueError):
        keygen(1, np.random.default_rng(0))


def test_key_file_round_trip(tmp_path):
    key = keygen(9, np.random.default_rng(1))
    key.save(tmp_path / "k.bin")
    back = SecretKey.load(tmp_path / "k.bin")
    assert back.to_bytes() == key.to_bytes()
    np.testing.assert_array_equal(back.S, key.S)


def test_split_index_rules(rng):
    D = np.array([2.0, 3.0])
    a, b = split_index(D, [0, 0], rng)
    np.testing.assert_array_equal(a, D)
    np.testing.assert_array_equal(b, D)
    a, b = split_index(D, [1, 0], rng)
    assert a[0] + b[0] == pytest.approx(2.0) and a[0] != 2.0
    assert a[1] == b[1] == 3.0


def test_split_query_rules(rng):
    Q = np.array([2.0, 3.0])
    a, b = split_query(Q, [1, 1], rng)
    np.testing.assert_array_equal(a, Q)
    np.testing.assert_array_equal(b, Q)
    a, b = split_query(Q, [1, 0], rng)
    assert a[0] == b[0] == 2.0
    assert a[1] + b[1] == pytest.approx(3.0)


def test_split_length_mismatch(rng):
    with pytest.raises(ValueError):
        split_index(np.ones(3), [1, 0], rng)


@settings(max_examples=200, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 40), elements=st.floats(-1e3, 1e3)),
    st.integers(0, 2**32 - 1),
)
def test_split_all_ones_reconstructs(D, seed):
    rng = np.random.default_rng(seed)
    ones = np.ones(D.shape, dtype=np.uint8)
    a, b = split_index(D, ones, rng)
    scale = max(1.0, np.abs(D).max())
    assert np.abs(a + b - D).max() <= 1e-12 * scale
    np.testing.assert_array_equal(merge_split(a, b, ones == 1), a + b)
    qa, qb = split_query(D, 1 - ones, rng)
    assert np.abs(qa + qb - D).max() <= 1e-12 * scale
    assert not np.array_equal(a, D) or D.size == 0


def test_transparency_exhaustive(rng):
    for dim in range(1, 8):
        for S in itertools.product((0, 1), repeat=dim):
            S = np.array(S)
            D, Q = rng.normal(size=dim), rng.normal(size=dim)
            Da, Db = split_index(D, S, rng)
            Qa, Qb = split_query(Q, S, rng)
            assert Da @ Qa + Db @ Qb == pytest.approx(D @ Q, abs=1e-9)


def test_encrypt_index_transparent_key():
    key = transparent_key(4, [0] * 5)
    sub = encrypt_index([0.6, 0.8], [1.0, 0.0], key, np.random.default_rng(0), doc_id="x")
    np.testing.assert_array_equal(sub.left, [0.6, 0.8, 1.0, 0.0, 1.0])
    np.testing.assert_array_equal(sub.right, sub.left)
    assert sub.doc_id == "x"


def test_encrypt_degenerate_document(rng):
    key = keygen(4, rng)
    sub = encrypt_index(np.zeros(2), np.zeros(2), key, rng)
    T = gen_trapdoor([1.0, 0], [0, 1.0], key, rng, r=3.0, t=-2.5)
    assert score(sub, T) == pytest.approx(-2.5, abs=1e-9)


def test_encrypt_dimension_mismatch(rng):
    key = keygen(4, rng)
    with pytest.raises(ValueError):
        encrypt_index(np.zeros(3), np.zeros(2), key, rng)
    with pytest.raises(ValueError):
        gen_trapdoor(np.zeros(1), np.zeros(2), key, rng)


def test_trapdoor_transparent_key(rng):
    key = transparent_key(4, [1] * 5)
    T = gen_trapdoor([0.6, 0.8], [0.0, 1.0], key, rng, r=1.0, t=0.0)
    np.testing.assert_array_equal(T.left, [0.6, 0.8, 0.0, 1.0, 0.0])
    np.testing.assert_array_equal(T.right, T.left)


def test_trapdoor_zero_direction(rng):
    key = transparent_key(3, [1] * 4)
    T = gen_trapdoor(np.zeros(2), np.zeros(1), key, rng)
    assert not T.left[:3].any() and T.left[3] == T.right[3]
    assert abs(T.left[3]) <= 1000


def test_trapdoor_r_positive(rng):
    key = keygen(4, rng)
    with pytest.raises(ValueError):
        gen_trapdoor([1.0, 0], [0, 1.0], key, rng, r=0.0, t=1.0)


def test_trapdoors_distinct(rng):
    key = keygen(7, rng)
    q1, q2 = np.array([0.6, 0.8, 0, 0]), np.array([0.0, 1.0, 0])
    seen = {gen_trapdoor(q1, q2, key, rng).to_bytes() for _ in range(1000)}
    assert len(seen) == 1000


@pytest.mark.parametrize(
    "args, expected",
    [
        ((1, 0, 0, 1024, 0), -1024.0),
        ((1, 0, 0, 0, 0), 0.0),
        ((4, 2, 8, 16, 16), -50.0),
    ],
)
def test_unlinkability_bound(args, expected):
    assert unlinkability_bound(*args) == expected


def test_unlinkability_bound_errors():
    with pytest.raises(ValueError):
        unlinkability_bound(0, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        unlinkability_bound(1, -1, 1, 1, 1)


def test_payload_round_trip():
    key = bytes(range(32))
    doc = bytes(range(256)) * 4
    assert decrypt_payload(encrypt_payload(doc, key), key) == doc
    assert decrypt_payload(encrypt_payload(b"", key), key) == b""
    ct = encrypt_payload(doc, key, associated=b"d1")
    assert len(ct) == len(doc) + 28
    assert doc not in ct


def test_payload_tamper_detected():
    key = bytes(32)
    ct = bytearray(encrypt_payload(b"secret document", key))
    ct[20] ^= 1
    with pytest.raises(PayloadAuthError):
        decrypt_payload(bytes(ct), key)
    with pytest.raises(PayloadAuthError):
        decrypt_payload(encrypt_payload(b"x", key, associated=b"d1"), key, associated=b"d2")
