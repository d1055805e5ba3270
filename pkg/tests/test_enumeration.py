import numpy as np
import pytest
from hypothesis import given, strategies as st

from polarbc.enumeration import (MAX_N, all_sequences, block_law, block_tv, conditional_letters,
                                 layer_laws, prefix_conditionals, sequence_index)
from polarbc.polar import polar_transform
from polarbc.polarization import BitChannelSets, LayerSets
from polarbc.probability import LayeredDistribution
from polarbc.verify import encoder_law_vs_product, reference_instance

E = np.zeros(0, np.int64)


def layered(rng):
    return LayeredDistribution.from_params(rng.uniform(0.05, 0.95), tuple(rng.uniform(0, 1, 2)),
                                           tuple(rng.uniform(0, 1, 2)))


def sets_from(rng, N, h=0.3, l=0.3):
    layers = {}
    for L in ("W", "V", "X"):
        r = rng.random(N)
        layers[L] = LayerSets(np.flatnonzero(r < h), np.flatnonzero((r >= h) & (r < h + l)), {}, {}, N)
    return BitChannelSets(layers, N, "rank")


def test_sequence_index_is_inverse_of_listing():
    U = all_sequences(8)
    assert np.array_equal(sequence_index(U), np.arange(256))


def test_size_limit():
    with pytest.raises(ValueError):
        block_law(np.full((2, 1), 0.5), 2 * MAX_N)


@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 4, 8]))
def test_block_law_rows_are_distributions(seed, N):
    rng = np.random.default_rng(seed)
    for kern in conditional_letters(layered(rng)).values():
        law = block_law(kern, N)
        assert np.allclose(law.sum(axis=1), 1.0)
        assert np.all(law >= 0)


def test_block_law_matches_iid_product_through_transform(rng):
    lay = layered(rng)
    N = 4
    law = block_law(conditional_letters(lay)["W"], N)[0]
    U = all_sequences(N)
    w = polar_transform(U)
    direct = np.prod(lay.pw.mass[w], axis=1)
    assert np.allclose(law, direct)


def test_prefix_conditionals_rebuild_the_law(rng):
    law = block_law(conditional_letters(layered(rng))["V"], 4)
    cond = prefix_conditionals(law)
    U = all_sequences(4)
    rebuilt = np.ones(law.shape)
    for i, (_, p0) in enumerate(cond):
        past = sequence_index(U[:, :i]) if i else np.zeros(16, np.int64)
        rebuilt *= np.where(U[:, i] == 0, p0[:, past], 1 - p0[:, past])
    assert np.allclose(rebuilt, law)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4]))
def test_tv_below_summation_bound(seed, N):
    rng = np.random.default_rng(seed)
    lay = layered(rng)
    out = block_tv(lay, sets_from(rng, N))
    assert 0 <= out["tv"] <= out["bound"] + 1e-12
    assert out["tv"] <= 1 + 1e-12


def test_all_sampled_positions_give_zero_tv(rng):
    lay = layered(rng)
    empty = BitChannelSets({L: LayerSets(E, E, {}, {}, 4) for L in "WVX"}, 4, "rank")
    out = block_tv(lay, empty)
    assert out["tv"] == pytest.approx(0, abs=1e-14)
    assert out["bound"] == pytest.approx(0, abs=1e-14)


def test_product_law_is_normalized(rng):
    for L, d in layer_laws(layered(rng), sets_from(rng, 4), 4).items():
        assert np.allclose(d["Q"].sum(axis=1), 1.0)


def test_sc_encoder_matches_enumerated_product_law():
    rep = encoder_law_vs_product(reference_instance())
    assert rep["ok"], rep
