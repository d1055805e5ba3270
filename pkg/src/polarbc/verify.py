"""Property suites behind ``polarbc verify`` and the acceptance tests.

Each suite returns a plain dict with a boolean ``ok`` and enough numbers
to see how close the check came.
"""

from __future__ import annotations

import math

import numpy as np

from .channels import BroadcastChannel, bec, bsc, make_product_channel
from .enumeration import (all_sequences, block_law, conditional_letters, layer_laws,
                          prefix_conditionals, sequence_index)
from .models import LAYERS, RECEIVERS
from .polar import ARGMAX, KNOWN, argmax_bit, polar_transform, prob_one, run_sc
from .polarization import exact_layer_stats, monte_carlo_layer_stats, rank_targets
from .probability import ConditionalPmf, LayeredDistribution, Pmf, tv_channel_extension_identity
from .region import (NotAchievableError, RatePair, constructive_rate_split, fm_equivalence_check,
                     profile, region_corner, split_identities)
from .codec.encoder import set_modes
from .construction import CodeSpec, construct

MC_FLOOR = 1e-9


def erasure_degrade(d: float) -> ConditionalPmf:
    """Further erase a BEC output (0, 1, e) with probability d."""
    return ConditionalPmf(np.array([[1 - d, 0, d], [0, 1 - d, d], [0, 0, 1.0]]))


def oracle_suite() -> list[tuple[str, LayeredDistribution, BroadcastChannel]]:
    """Small channel/distribution combinations used by the exact-oracle checks."""
    return [
        ("bsc-triple", LayeredDistribution.from_params(0.5, (0.15, 0.85), (0.1, 0.9)),
         make_product_channel(bsc(0.05), bsc(0.15), bsc(0.05))),
        ("bec-mixed", LayeredDistribution.from_params(0.4, (0.2, 0.7), (0.3, 0.8)),
         make_product_channel(bec(0.2), bsc(0.1), erasure_degrade(0.3))),
        ("skewed-w", LayeredDistribution.from_params(0.2, (0.1, 0.9), (0.05, 0.95)),
         make_product_channel(bsc(0.1), bec(0.4), bsc(0.02))),
        ("all-erasure", LayeredDistribution.from_params(0.5, (0.3, 0.6), (0.2, 0.7)),
         make_product_channel(bec(0.1), bec(0.3), erasure_degrade(0.2))),
        ("asymmetric", LayeredDistribution.from_params(0.35, (0.05, 0.6), (0.4, 0.9)),
         make_product_channel(bsc(0.2), bsc(0.03), bsc(0.15))),
    ]


def exact_vs_monte_carlo(n: int = 3, samples: int = 100000, seed: int = 0, nsigma: float = 3.0) -> dict:
    """Per-index |Z_mc - Z_exact| <= nsigma * SE (plus a float floor) on every suite entry."""
    worst, rows, ok, zero_se = 0.0, [], True, 0
    for name, lay, ch in oracle_suite():
        ex = exact_layer_stats(lay, ch, n)
        mc = monte_carlo_layer_stats(lay, ch, n, samples, np.random.default_rng(seed))
        for L in LAYERS:
            pairs = [("source", ex[L].z_source, mc[L].z_source, mc[L].se_source)]
            pairs += [(f"rx{j}", ex[L].z_receiver[j], mc[L].z_receiver[j], mc[L].se_receiver[j])
                      for j in RECEIVERS[L]]
            for tag, ze, zm, se in pairs:
                dev = np.abs(zm - ze)
                lim = nsigma * se + MC_FLOOR
                bad = np.flatnonzero(dev > lim)
                live = se > 0
                if live.any():
                    excess = np.maximum(dev[live] - MC_FLOOR, 0.0)
                    worst = max(worst, float(np.max(excess / se[live])))
                # a zero plug-in SE means the estimate saw no spread at all
                zero_se += int(np.sum(~live & (dev > MC_FLOOR)))
                if bad.size:
                    ok = False
                    rows.append({"combo": name, "layer": L, "which": tag, "indices": bad.tolist(),
                                 "dev": dev[bad].tolist(), "se": se[bad].tolist()})
    return {"ok": ok, "n": n, "samples": samples, "worst_sigma": worst,
            "zero_se_deviations": zero_se, "failures": rows}


def bec_z_reference(eps: float, n: int) -> np.ndarray:
    """Bit-channel Z of BEC(eps) for x = u G_N in natural order.

    The first half of u sees the length-N/2 code over the combined channel
    (erasure 2e - e^2), the second half the one over the split channel (e^2).
    """
    if n == 0:
        return np.array([eps])
    return np.concatenate([bec_z_reference(2 * eps - eps * eps, n - 1),
                           bec_z_reference(eps * eps, n - 1)])


def bec_closed_form(eps_values=(0.1, 0.5), n_values=(1, 2), tol: float = 1e-9) -> dict:
    """Receiver-1 Z of a uniform W layer seen through BEC(eps), against the erasure recursion."""
    # V = W and X = V, so W reaches receiver 1 through the BEC itself
    lay = LayeredDistribution.from_params(0.5, (0.0, 1.0), (0.0, 1.0))
    ok, worst, rows = True, 0.0, []
    for eps in eps_values:
        ch = make_product_channel(bec(eps), bec(eps), erasure_degrade(0.0))
        for n in n_values:
            z = exact_layer_stats(lay, ch, n)["W"].z_receiver[1]
            dev = float(np.max(np.abs(z - bec_z_reference(eps, n))))
            worst = max(worst, dev)
            ok &= dev <= tol
            rows.append({"eps": eps, "N": 1 << n, "deviation": dev})
    return {"ok": bool(ok), "max_deviation": worst, "rows": rows}


def z_h_bounds(n_values=(1, 2, 3), tol: float = 1e-9) -> dict:
    """Z^2 <= H <= Z for every exactly computed bit-channel in the suite."""
    checked, worst, ok = 0, 0.0, True
    for _, lay, ch in oracle_suite():
        for n in n_values:
            st = exact_layer_stats(lay, ch, n)
            for L in LAYERS:
                vecs = [(st[L].z_source, st[L].h_source)]
                vecs += [(st[L].z_receiver[j], st[L].h_receiver[j]) for j in RECEIVERS[L]]
                for z, h in vecs:
                    lo = z * z - h
                    hi = h - z
                    worst = max(worst, float(lo.max()), float(hi.max()))
                    ok &= bool(np.all(lo <= tol) and np.all(hi <= tol))
                    checked += z.size
    return {"ok": ok, "checked": checked, "worst_violation": worst}


def _random_pmf(rng, size: int) -> Pmf:
    return Pmf(rng.dirichlet(np.ones(size)))


def tv_identity(trials: int = 100, seed: int = 0, tol: float = 1e-12) -> dict:
    """Shared-channel TV identity on random (pX, qX, channel) triples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        nx, ny = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        ch = ConditionalPmf(rng.dirichlet(np.ones(ny), size=nx))
        lhs, rhs = tv_channel_extension_identity(_random_pmf(rng, nx), _random_pmf(rng, nx), ch)
        worst = max(worst, abs(lhs - rhs))
    return {"ok": worst <= tol, "trials": trials, "max_deviation": worst}


def random_profile(rng: np.random.Generator):
    """Profile of a random layered law over a random degraded product channel."""
    lay = LayeredDistribution.from_params(*rng.uniform(0.02, 0.98, 1), tuple(rng.uniform(0, 1, 2)),
                                          tuple(rng.uniform(0, 1, 2)))
    def kern(nout):
        return ConditionalPmf(rng.dirichlet(np.ones(nout), size=2))
    n1, n3 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    c2 = ConditionalPmf(rng.dirichlet(np.ones(2), size=n1))
    return profile(lay, make_product_channel(kern(n1), kern(n3), c2)).check()


def interior_pair(prof, rng: np.random.Generator, margin: float = 2e-3):
    """Uniform point of the capacity region shrunk by ``margin`` on every bound, or None."""
    a = min(prof.i_w_y2, prof.i_v_y3) - margin
    b = prof.i_x_y1_given_w - margin
    c = prof.i_v_y3 + prof.i_x_y1_given_v - margin
    if a <= 0 or b <= 0 or c <= 0:
        return None
    for _ in range(100):
        r0, r1 = rng.uniform(0, a), rng.uniform(0, b)
        if r0 + r1 < c:
            return RatePair(r0, r1)
    return None


def grid_split_feasible(pair: RatePair, prof, step: float = 1e-3) -> bool:
    """Brute force: some R11 on the grid over [0, R1] meets the three split identities."""
    r11 = np.arange(0.0, pair.r1 + step / 2, step)
    r11 = r11[r11 <= pair.r1]
    r12 = pair.r1 - r11
    return bool(np.any((r11 < prof.i_v_y1_given_w) & (r12 < prof.i_x_y1_given_v)
                       & (pair.r0 + r11 < prof.i_v_y3) & (pair.r0 < prof.i_w_y2)))


def rate_split_property(draws: int = 1000, seed: int = 0) -> dict:
    """Constructive split vs grid search on random interior points."""
    rng = np.random.default_rng(seed)
    done = mismatches = identity_failures = 0
    while done < draws:
        prof = random_profile(rng)
        pair = interior_pair(prof, rng)
        if pair is None:
            continue
        done += 1
        try:
            split = constructive_rate_split(pair, prof)
            found = True
            if not all(split_identities(pair.r0, split, prof)) or abs(split.r11 + split.r12 - pair.r1) > 1e-12:
                identity_failures += 1
        except NotAchievableError:
            found = False
        if found != grid_split_feasible(pair, prof):
            mismatches += 1
    return {"ok": mismatches == 0 and identity_failures == 0, "draws": draws,
            "mismatches": mismatches, "identity_failures": identity_failures}


def fm_equivalence(profiles: int = 20, points: int = 10000, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    per = math.ceil(points / profiles)
    fwd = bwd = checked_f = checked_b = 0
    for _ in range(profiles):
        rep = fm_equivalence_check(random_profile(rng), per, rng)
        fwd += rep["forward_counterexamples"]
        bwd += rep["backward_counterexamples"]
        checked_f += rep["checked_forward"]
        checked_b += rep["checked_backward"]
    return {"ok": fwd == 0 and bwd == 0, "points": per * profiles, "forward_counterexamples": fwd,
            "backward_counterexamples": bwd, "checked_forward": checked_f, "checked_backward": checked_b}


# ---------------------------------------------------------------- encoder ensemble law

def sc_encoder_laws(inst) -> dict:
    """Ensemble law of each layer's encoder, read off the SC pass itself.

    Every (side sequence, u) pair is forced through the SC recursion and
    the recorded LLRs are turned into the encoder's per-index factors:
    1/2 where the bit is uniform (H), an indicator of the SC decision where
    it is argmax (L), and the SC probability where it is sampled.
    """
    N = inst.N
    U = all_sequences(N)
    out = {}
    for L in LAYERS:
        model = inst.models[(L, None)]
        mode = set_modes(inst.sets[L])
        M = 1 if L == "W" else 1 << N
        side = None if L == "W" else np.repeat(U, 1 << N, axis=0)
        uu = np.tile(U, (M, 1))
        leaf = model.leaf_llr(model.side_index(side, None), uu.shape)
        _, rec = run_sc(leaf, np.full(N, KNOWN), known=uu, record=True)
        llr = rec[0]
        p1 = prob_one(llr)
        fac = np.where(uu == 1, p1, 1 - p1)
        fac[:, mode == KNOWN] = 0.5
        am = mode == ARGMAX
        fac[:, am] = (uu[:, am] == argmax_bit(llr[:, am])).astype(float)
        out[L] = fac.prod(axis=1).reshape(M, 1 << N)
    return out


def argmax_margin(layered: LayeredDistribution, sets, N: int) -> float:
    """Smallest |P(u_i = 0 | past) - 1/2| over L positions and reachable pasts."""
    margin = np.inf
    for L in LAYERS:
        cond = prefix_conditionals(block_law(conditional_letters(layered)[L], N))
        for i in np.asarray(sets[L].L):
            wt, p0 = cond[i]
            live = wt > 0
            if live.any():
                margin = min(margin, float(np.min(np.abs(p0[live] - 0.5))))
    return margin


def encoder_law_vs_product(inst) -> dict:
    """Max cell deviation between the SC encoder law and the product formula on (u_w, u_v, u_x)."""
    N = inst.N
    exact = layer_laws(inst.layered, inst.sets, N)
    sc = sc_encoder_laws(inst)
    idx = sequence_index(polar_transform(all_sequences(N)))
    Qw, Qv, Qx = exact["W"]["Q"][0], exact["V"]["Q"], exact["X"]["Q"][idx]
    Sw, Sv, Sx = sc["W"][0], sc["V"], sc["X"][idx]
    worst = 0.0
    for uw in range(1 << N):
        w = idx[uw]
        q = Qw[uw] * Qv[w][:, None] * Qx
        s = Sw[uw] * Sv[w][:, None] * Sx
        worst = max(worst, float(np.max(np.abs(q - s))))
    return {"ok": worst < 1e-10, "max_cell_deviation": worst,
            "argmax_margin": argmax_margin(inst.layered, inst.sets, N), "cells": 1 << (3 * N)}


def reference_instance():
    """n=3 instance with non-empty L sets in every layer (skewed-w entry of the suite)."""
    _, lay, ch = oracle_suite()[2]
    c = region_corner(profile(lay, ch))
    return construct(lay, ch, CodeSpec(n=3, k=1, r0=0.5 * c.r0, r1=0.5 * c.r1, source_gap=0.1))


# ---------------------------------------------------------------- case round trips

# Noiseless round-trip designs, one per chaining case. Each entry gives
# (receiver-1 kernel, BEC erasure at receiver 3, BSC flip on the degraded link
# to receiver 2, a in p(v|w), receiver gap, public bits, private bits, extra
# receiver-3 V-layer positions). The extra positions push I_3^v past I_1^v so
# the private chain has room to borrow.
CASE_DESIGNS = {
    "A1": (("bsc", 0.03), 0.5, 0.001, 0.15, 0.5, 8, 9, 6),
    "A2": (("bsc", 0.001), 0.4, 0.02, 0.05, 0.3, 22, 1, 0),
    "B1": (("bsc", 0.001), 0.1, 0.02, 0.05, 0.5, 21, 1, 0),
    "B2": (("bsc", 0.001), 0.4, 0.1, 0.05, 0.3, 19, 1, 0),
}


def case_instance(tag: str, n: int = 6, k: int = 3, counts: tuple | None = None):
    """Build the frozen design for one case tag over X = V.

    ``counts`` replaces the per-block (public, private) bit counts.
    """
    from .harness import ExperimentConfig

    c1, e3, p2, a, rg, m0, m1, extra3 = CASE_DESIGNS[tag]
    if counts is not None:
        m0, m1 = counts
    N = 1 << n
    cfg = ExperimentConfig(
        channel={"c1": {"kind": c1[0], "p": c1[1]}, "c3": {"kind": "bec", "p": e3},
                 "c2": {"kind": "bsc", "p": p2}},
        distribution={"pw1": 0.5, "pv1_given_w": [a, 1 - a], "px1_given_v": [0.0, 1.0]},
        rates={"r0": (m0 + 0.5) / N, "r1": (m1 + 0.5) / N}, k=k, n=[n],
        seeds={"stats": 0, "frozen": 0, "cr": 0, "trials": 0},
        selection={"mode": "rank", "target_rule": "gap", "source_gap": 0.1,
                   "receiver_gap": rg, "stats_samples": 5000})
    lay, ch = cfg.build_distribution(), cfg.build_channel()
    spec = cfg.code_spec(n)
    spec.exact_stats = False
    if extra3:
        spec.targets = rank_targets(lay, ch, spec.source_gap, spec.receiver_gap)
        spec.targets["V"]["rx"][3] += extra3 / N
    return construct(lay, ch, spec)


def case_round_trips(trials: int = 100, seed: int = 0) -> dict:
    """Noiseless encode/decode for every case tag; all receivers must be error-free."""
    from .harness import simulate_instance

    rows = {}
    for tag in CASE_DESIGNS:
        inst = case_instance(tag)
        cnt = simulate_instance(inst, trials, seed, noiseless=True)
        rows[tag] = {"case": inst.case_tag, "errors": cnt, "budget": list(inst.budget)}
    ok = all(r["case"] == t and r["errors"]["joint"] == 0 for t, r in rows.items())
    return {"ok": ok, "trials": trials, "cases": rows}


def run_all(quick: bool = False, seed: int = 0) -> dict:
    """Everything ``polarbc verify`` checks; ``quick`` shrinks the sample counts."""
    s = 10 if quick else 1
    report = {
        "exact_vs_monte_carlo": exact_vs_monte_carlo(3, 100000 // s, seed),
        "bec_closed_form": bec_closed_form(),
        "z_h_bounds": z_h_bounds(),
        "tv_identity": tv_identity(100, seed),
        "rate_split": rate_split_property(1000 // s, seed),
        "fm_equivalence": fm_equivalence(20, 10000 // s, seed),
        "encoder_law": encoder_law_vs_product(reference_instance()),
        "case_round_trips": case_round_trips(100 // s, seed),
    }
    return {"ok": all(r["ok"] for r in report.values()), "suites": report}
