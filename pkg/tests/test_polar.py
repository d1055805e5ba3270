import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from polarbc.polar import (ARGMAX, KNOWN, LLR_CLIP, SAMPLE, PolarTransform, bhattacharyya_from_llr,
                           check_length, polar_transform, prob_one, run_sc)


def kron_matrix(N):
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.ones((1, 1), dtype=np.uint8)
    while G.shape[0] < N:
        G = np.kron(G, F)
    return G


@given(st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_transform_matches_kronecker_and_is_involution(n, seed):
    N = 1 << n
    u = np.random.default_rng(seed).integers(0, 2, (3, N)).astype(np.uint8)
    x = polar_transform(u)
    assert np.array_equal(x, (u.astype(int) @ kron_matrix(N)) % 2)
    assert np.array_equal(polar_transform(x), u)


def test_transform_involution_large(rng):
    u = rng.integers(0, 2, (2, 4096)).astype(np.uint8)
    assert np.array_equal(polar_transform(polar_transform(u)), u)


@given(arrays(np.uint8, (2, 16), elements=st.integers(0, 1)), arrays(np.uint8, (2, 16), elements=st.integers(0, 1)))
def test_transform_linear(a, b):
    assert np.array_equal(polar_transform(a ^ b), polar_transform(a) ^ polar_transform(b))


def test_check_length():
    with pytest.raises(ValueError):
        check_length(6)
    assert PolarTransform(3).N == 8


def test_sc_known_mode_reproduces_input(rng):
    u = rng.integers(0, 2, (4, 16)).astype(np.uint8)
    out = run_sc(np.zeros((4, 16)), np.full(16, KNOWN), known=u)
    assert np.array_equal(out, u)


def test_sc_argmax_inverts_noiseless_observation(rng):
    # perfectly reliable leaves: argmax SC recovers u from x = uG
    u = rng.integers(0, 2, (5, 32)).astype(np.uint8)
    x = polar_transform(u)
    leaf = np.where(x == 0, 50.0, -50.0)
    assert np.array_equal(run_sc(leaf, np.full(32, ARGMAX)), u)


def test_sc_ties_decide_zero():
    assert run_sc(np.zeros((1, 4)), np.full(4, ARGMAX)).sum() == 0


def test_sc_sample_mode_uses_uniforms():
    # uniform leaves: every bit is a fair coin resolved by its uniform
    unif = np.array([[0.1, 0.9, 0.4, 0.6]])
    out = run_sc(np.zeros((1, 4)), np.full(4, SAMPLE), unif=unif)
    assert out.tolist() == [[1, 0, 1, 0]]


def test_sc_record_first_bit_llr():
    # u_0 is the parity of x; the first recorded LLR is the box-plus of the leaves
    leaf = np.array([[1.0, 2.0]])
    _, rec = run_sc(leaf, np.full(2, KNOWN), known=np.zeros((1, 2), np.uint8), record=True)
    expected = 2 * np.arctanh(np.tanh(0.5) * np.tanh(1.0))
    assert rec[0, 0, 0] == pytest.approx(expected, rel=1e-6)
    assert rec[0, 0, 1] == pytest.approx(3.0)


def test_llr_helpers():
    assert prob_one(0.0) == pytest.approx(0.5)
    assert prob_one(-LLR_CLIP) == pytest.approx(1.0)
    assert bhattacharyya_from_llr(0.0) == pytest.approx(1.0)
    assert bhattacharyya_from_llr(1e4) == pytest.approx(0.0)
