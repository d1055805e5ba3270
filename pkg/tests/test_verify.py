import numpy as np
import pytest

from polarbc import verify


def test_oracle_suite_is_well_formed():
    suite = verify.oracle_suite()
    assert len(suite) >= 5
    assert len({name for name, _, _ in suite}) == len(suite)


def test_erasure_degrade_keeps_erasures():
    k = verify.erasure_degrade(0.25).rows
    assert np.allclose(k.sum(axis=1), 1)
    assert k[2].tolist() == [0, 0, 1]


def test_bec_closed_form_suite():
    rep = verify.bec_closed_form()
    assert rep["ok"] and rep["max_deviation"] < 1e-12


def test_bec_reference_recursion():
    assert np.allclose(verify.bec_z_reference(0.5, 1), [0.75, 0.25])
    assert np.allclose(verify.bec_z_reference(0.1, 0), [0.1])


def test_z_h_suite_small():
    assert verify.z_h_bounds((1, 2))["ok"]


def test_tv_identity_suite_small():
    assert verify.tv_identity(20, seed=5)["ok"]


def test_rate_split_suite_small():
    rep = verify.rate_split_property(100, seed=3)
    assert rep["ok"], rep


def test_fm_suite_has_coverage():
    rep = verify.fm_equivalence(5, 2000, seed=1)
    assert rep["ok"]
    assert rep["checked_forward"] > 100 and rep["checked_backward"] > 100


def test_exact_vs_mc_report_shape():
    rep = verify.exact_vs_monte_carlo(n=2, samples=20000, seed=0)
    assert set(rep) >= {"ok", "n", "samples", "worst_sigma", "failures"}
    assert rep["n"] == 2 and rep["samples"] == 20000


def test_case_round_trip_suite():
    rep = verify.case_round_trips(trials=10)
    assert rep["ok"], rep
    assert sorted(rep["cases"]) == ["A1", "A2", "B1", "B2"]


def test_unknown_case_tag():
    with pytest.raises(KeyError):
        verify.case_instance("C3")
