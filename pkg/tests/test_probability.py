import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from polarbc.probability import (ConditionalPmf, LayeredDistribution, Pmf, ValidationError, binary_entropy,
                                 bhattacharyya, conditional_entropy, conditional_mutual_information,
                                 entropy, kl_divergence, mutual_information, tv_channel_extension_identity,
                                 tv_distance)

weights = arrays(np.float64, st.integers(2, 6), elements=st.floats(0.01, 1.0))


def norm(w):
    return w / w.sum()


def test_pmf_rejects_bad_mass():
    with pytest.raises(ValidationError):
        Pmf([0.5, 0.6])
    with pytest.raises(ValidationError):
        Pmf([1.2, -0.2])
    with pytest.raises(ValidationError):
        Pmf([])


def test_kernel_rows_must_sum_to_one():
    with pytest.raises(ValidationError):
        ConditionalPmf([[0.5, 0.4], [0.5, 0.5]])


def test_layered_joint_is_markov():
    lay = LayeredDistribution.from_params(0.3, (0.2, 0.7), (0.1, 0.9))
    j = lay.joint()
    assert j.sum() == pytest.approx(1.0)
    # X depends on (W, V) only through V
    pxv = j / j.sum(axis=2, keepdims=True)
    assert np.allclose(pxv[0], pxv[1])


def test_entropy_values():
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.0) == 0.0
    assert entropy(Pmf([0.25] * 4)) == pytest.approx(2.0)


def test_bsc_mutual_information():
    p = 0.11
    joint = 0.5 * np.array([[1 - p, p], [p, 1 - p]])
    assert mutual_information(joint) == pytest.approx(1 - binary_entropy(p), abs=1e-12)
    assert conditional_entropy(joint) == pytest.approx(binary_entropy(p), abs=1e-12)


def test_bhattacharyya_extremes():
    assert bhattacharyya(np.array([[0.5, 0], [0, 0.5]])) == 0.0
    assert bhattacharyya(np.array([[0.25, 0.25], [0.25, 0.25]])) == pytest.approx(1.0)


@given(weights, weights)
def test_tv_and_kl(a, b):
    n = min(len(a), len(b))
    p, q = norm(a[:n]), norm(b[:n])
    tv = tv_distance(p, q)
    assert 0 <= tv <= 1
    # Pinsker: TV <= sqrt(D ln2 / 2)
    assert tv <= math.sqrt(kl_divergence(p, q) * math.log(2) / 2) + 1e-12


@given(arrays(np.float64, (2, 3, 2), elements=st.floats(0.01, 1.0)))
def test_information_identities(raw):
    j = raw / raw.sum()
    cmi = conditional_mutual_information(j)
    assert cmi >= 0
    # chain rule: I(X; Y, Z) = I(X; Z) + I(X; Y | Z)
    assert mutual_information(j) == pytest.approx(mutual_information(j.sum(axis=1)) + cmi, abs=1e-10)


@given(weights, st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_tv_channel_extension(w, ny, seed):
    r = np.random.default_rng(seed)
    nx = len(w)
    ch = ConditionalPmf(r.dirichlet(np.ones(ny), size=nx))
    lhs, rhs = tv_channel_extension_identity(Pmf(norm(w)), Pmf(r.dirichlet(np.ones(nx))), ch)
    assert abs(lhs - rhs) <= 1e-12


def test_tv_support_mismatch():
    with pytest.raises(ValidationError):
        tv_distance(np.array([0.5, 0.5]), np.array([1.0, 0, 0]))
