import numpy as np
import pytest
from hypothesis import given, strategies as st

from polarbc.channels import bsc, make_product_channel
from polarbc.probability import LayeredDistribution
from polarbc.region import (NotAchievableError, RatePair, RateSplit, bit_counts, capacity_violations,
                            constructive_rate_split, fm_equivalence_check, in_capacity_region,
                            max_private_rate, profile, region_corner, split_identities, split_interval)
from polarbc.verify import grid_split_feasible, interior_pair, random_profile


def bsc_triple():
    lay = LayeredDistribution.from_params(0.5, (0.1, 0.9), (0.05, 0.95))
    return profile(lay, make_product_channel(bsc(0.05), bsc(0.15), bsc(0.05))).check()


def test_profile_chain_rule_and_degradation():
    prof = bsc_triple()
    assert prof.i_w_y2 <= prof.i_w_y1 + 1e-12
    assert abs(prof.i_v_y1_given_w + prof.i_x_y1_given_v - prof.i_x_y1_given_w) < 1e-12
    assert all(v >= 0 for v in prof.as_dict().values())


def test_noiseless_uniform_x_gives_one_bit():
    lay = LayeredDistribution.from_params(0.5, (0.5, 0.5), (0.5, 0.5))
    prof = profile(lay, make_product_channel(bsc(0.0), bsc(0.0), bsc(0.0)))
    assert prof.i_x_y1 == pytest.approx(1.0)
    assert prof.i_w_y1 == pytest.approx(0.0, abs=1e-12)


def test_violations_name_every_bound():
    prof = bsc_triple()
    bad = capacity_violations(RatePair(1.0, 1.0), prof)
    assert len(bad) == 3
    assert any("public" in b for b in bad) and any("sum" in b for b in bad)
    with pytest.raises(NotAchievableError):
        constructive_rate_split(RatePair(1.0, 1.0), prof)


def test_zero_rates_always_admissible():
    prof = bsc_triple()
    assert in_capacity_region(RatePair(0.0, 0.0), prof)
    s = constructive_rate_split(RatePair(0.0, 0.0), prof)
    assert s.r11 == 0 and s.r12 == 0


def test_negative_rates_rejected():
    with pytest.raises(ValueError):
        RatePair(-0.1, 0.0)
    with pytest.raises(ValueError):
        RateSplit(0.0, -1e-3)


def test_corner_is_on_the_boundary():
    prof = bsc_triple()
    c = region_corner(prof)
    assert not in_capacity_region(c, prof)
    assert in_capacity_region(RatePair(0.99 * c.r0, 0.99 * c.r1), prof)
    assert max_private_rate(0.99 * c.r0, prof) >= c.r1


@given(st.integers(0, 2**32 - 1))
def test_split_meets_identities_and_sums(seed):
    rng = np.random.default_rng(seed)
    pair = None
    while pair is None:
        prof = random_profile(rng)
        pair = interior_pair(prof, rng)
    s = constructive_rate_split(pair, prof)
    assert all(split_identities(pair.r0, s, prof))
    assert s.r11 + s.r12 == pytest.approx(pair.r1, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_split_interval_agrees_with_grid(seed):
    rng = np.random.default_rng(seed)
    prof = random_profile(rng)
    c = region_corner(prof)
    pair = RatePair(*(rng.uniform(0, 1.2, 2) * np.array([c.r0 + 1e-3, c.r1 + 1e-3])))
    iv = split_interval(pair, prof)
    if grid_split_feasible(pair, prof):
        assert iv is not None


def test_fm_check_finds_no_counterexamples(rng):
    rep = fm_equivalence_check(bsc_triple(), 2000, rng)
    assert rep["forward_counterexamples"] == 0 and rep["backward_counterexamples"] == 0
    assert rep["checked_forward"] > 0 and rep["checked_backward"] > 0


def test_bit_counts_floor():
    assert bit_counts(64, 0.25, RateSplit(0.1, 0.05)) == (16, 6, 3)
    assert bit_counts(8, 0.125, RateSplit(0.0, 0.0)) == (1, 0, 0)
