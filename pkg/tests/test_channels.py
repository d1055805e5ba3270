import numpy as np
import pytest

from polarbc.channels import (bec, bsc, identity, induced_output_joints, make_general_channel,
                              make_product_channel, transmit)
from polarbc.probability import ConditionalPmf, LayeredDistribution, ValidationError, mutual_information


def test_kernels():
    assert np.allclose(bsc(0.1).rows, [[0.9, 0.1], [0.1, 0.9]])
    assert bec(0.2).rows.shape == (2, 3)
    assert np.array_equal(identity().rows, np.eye(2))


def test_product_channel_kernels():
    ch = make_product_channel(bsc(0.05), bsc(0.15), bsc(0.05))
    assert np.allclose(ch.kernel(1), bsc(0.05).rows)
    assert np.allclose(ch.kernel(3), bsc(0.15).rows)
    assert np.allclose(ch.kernel(2), bsc(0.05).compose(bsc(0.05)).rows)


def test_general_channel_validation():
    with pytest.raises(ValidationError):
        make_product_channel(bec(0.1), bsc(0.1), bsc(0.1))   # k2 must take the ternary y1
    ch = make_general_channel(np.full((2, 2, 2), 0.25), identity())
    assert ch.y1_size == 2 and ch.y3_size == 2


def test_transmit_statistics(rng):
    ch = make_product_channel(bsc(0.1), bsc(0.3), bsc(0.2))
    x = np.zeros((200000,), np.uint8)
    y = transmit(ch, x, rng)
    assert abs(y[1].mean() - 0.1) < 0.005
    assert abs(y[3].mean() - 0.3) < 0.005
    assert abs(y[2].mean() - (0.1 * 0.8 + 0.9 * 0.2)) < 0.005
    # y2 is drawn from y1, so y2 == y1 except where the degradation flips it
    assert abs((y[2] != y[1]).mean() - 0.2) < 0.005


def test_degradation_ordering():
    lay = LayeredDistribution.from_params(0.5, (0.1, 0.9), (0.1, 0.9))
    ch = make_product_channel(bsc(0.05), bsc(0.15), bsc(0.05))
    j = induced_output_joints(ch, lay)
    i1 = mutual_information(j[1].sum(axis=(1, 2)))
    i2 = mutual_information(j[2].sum(axis=(1, 2)))
    assert i2 <= i1


def test_noiseless_transmit_is_identity(rng):
    ch = make_product_channel(identity(), identity(), identity())
    x = rng.integers(0, 2, (5, 16)).astype(np.uint8)
    y = transmit(ch, x, rng)
    for j in (1, 2, 3):
        assert np.array_equal(y[j], x)
