import numpy as np
import pytest
from hypothesis import given, strategies as st

from polarbc.codec import (RateBackoffError, build_layout, create_instance, decode_receiver1,
                           decode_receiver2, decode_receiver3, encode_chain, message_bit_budget)
from polarbc.codec.encoder import LQ, link_values
from polarbc.codec.layout import LAYER_ORDER, _feasibility, budget_formula, select_case
from polarbc.codec.randomness import uniforms
from polarbc.polarization import BitChannelSets, LayerSets
from polarbc.region import RateSplit
from polarbc.verify import CASE_DESIGNS, case_instance


def random_sets(rng, N=16) -> BitChannelSets:
    def pick(p):
        return np.flatnonzero(rng.random(N) < p)
    layers = {}
    for L, rxs in (("W", (1, 2, 3)), ("V", (1, 3)), ("X", (1,))):
        H = pick(rng.uniform(0.3, 0.9))
        Lset = np.setdiff1d(pick(0.3), H)
        layers[L] = LayerSets(H, Lset, {j: pick(rng.uniform(0.2, 0.8)) for j in rxs}, {}, N)
    return BitChannelSets(layers, N, "rank")


@pytest.fixture(scope="module", params=sorted(CASE_DESIGNS))
def case(request):
    return case_instance(request.param)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_layout_budget_matches_formula(seed, k):
    rng = np.random.default_rng(seed)
    sets = random_sets(rng)
    m = tuple(int(v) for v in rng.integers(0, 10, 3))
    if _feasibility(sets, *m) is not None:
        with pytest.raises(RateBackoffError):
            build_layout(sets, m, k)
        return
    lay = build_layout(sets, m, k)
    assert lay.case_tag == select_case(sets, m[0], m[1])
    assert message_bit_budget(lay) == budget_formula(lay.case_tag, k, m, sets)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_roles_are_disjoint_and_inside_h(seed, k):
    rng = np.random.default_rng(seed)
    sets = random_sets(rng)
    m = tuple(int(v) for v in rng.integers(0, 8, 3))
    if _feasibility(sets, *m) is not None:
        return
    lay = build_layout(sets, m, k)
    for t in range(k):
        r = lay.roles(t)
        for L in LAYER_ORDER:
            parts = [r[L][q] for q in ("public", "private", "dest")]
            allidx = np.concatenate(parts)
            assert len(np.unique(allidx)) == len(allidx)
            assert np.all(np.isin(allidx, sets[L].H))
    assert all(len(sum((list(i) for _, i in ln.sources), [])) == ln.size for ln in lay.copy_links)
    if k == 1:
        assert lay.roles(0)["W"]["dest"].size == 0


def test_each_design_hits_its_case(case):
    assert case.case_tag in CASE_DESIGNS
    assert case.budget == budget_formula(case.case_tag, case.k, case.layout.counts, case.sets)


@pytest.mark.parametrize("k", [1, 2, 4])
@pytest.mark.parametrize("tag", sorted(CASE_DESIGNS))
def test_noiseless_round_trip_every_receiver(tag, k):
    inst = case_instance(tag, k=k)
    rng = np.random.default_rng(7)
    B = 20
    pub = rng.integers(0, 2, (B, inst.budget[0]), dtype=np.uint8)
    pri = rng.integers(0, 2, (B, inst.budget[1]), dtype=np.uint8)
    x = encode_chain(inst, pub, pri)
    p1, q1 = decode_receiver1(inst, x)
    assert np.array_equal(p1, pub) and np.array_equal(q1, pri)
    assert np.array_equal(decode_receiver2(inst, x), pub)
    assert np.array_equal(decode_receiver3(inst, x), pub)


def test_copy_links_carry_previous_block(case):
    rng = np.random.default_rng(3)
    pub = rng.integers(0, 2, (5, case.budget[0]), dtype=np.uint8)
    pri = rng.integers(0, 2, (5, case.budget[1]), dtype=np.uint8)
    _, u = encode_chain(case, pub, pri, return_u=True)
    for t in range(1, case.k):
        for ln in case.layout.copy_links:
            assert np.array_equal(u[:, t, LQ[ln.dest_layer], ln.dest], link_values(u, t - 1, ln))


def test_frozen_positions_hold_the_shared_bits(case):
    pub = np.zeros((2, case.budget[0]), np.uint8)
    pri = np.ones((2, case.budget[1]), np.uint8)
    _, u = encode_chain(case, pub, pri, return_u=True)
    m = case.frozen_masks
    assert np.array_equal(u[:, m], np.broadcast_to(case.frozen_bits[m], u[:, m].shape))


def test_encoding_is_keyed_by_session(case):
    rng = np.random.default_rng(1)
    pub = rng.integers(0, 2, (1, case.budget[0]), dtype=np.uint8)
    pri = rng.integers(0, 2, (1, case.budget[1]), dtype=np.uint8)
    a = encode_chain(case, pub, pri, sessions=[5])
    b = encode_chain(case, pub, pri, sessions=[5])
    assert np.array_equal(a, b)


def test_uniforms_depend_only_on_their_keys():
    a = uniforms(1, np.array([0, 1, 2]), 0, "V", 16)
    b = uniforms(1, np.array([2]), 0, "V", 16)
    assert np.array_equal(a[2], b[0])
    assert not np.array_equal(a[0], uniforms(1, np.array([0]), 0, "X", 16)[0])
    assert np.all((a >= 0) & (a < 1))


def test_length_checks(case):
    with pytest.raises(ValueError):
        encode_chain(case, np.zeros((1, case.budget[0] + 1)), np.zeros((1, case.budget[1])))
    with pytest.raises(ValueError):
        decode_receiver3(case, np.zeros((1, case.k, case.N + 1), np.uint8))


def test_backoff_scales_rates_to_fit(case):
    lay, ch, sets = case.layered, case.channel, case.sets
    with pytest.raises(RateBackoffError) as exc:
        create_instance(lay, ch, sets, 0.9, RateSplit(0.3, 0.3), 2)
    assert exc.value.max_scale is not None and 0 <= exc.value.max_scale < 1
    inst = create_instance(lay, ch, sets, 0.9, RateSplit(0.3, 0.3), 2, backoff=True)
    assert inst.backoff_scale == pytest.approx(exc.value.max_scale)
    assert all(r <= q for r, q in zip(inst.rates, (0.9, 0.3, 0.3)))
