"""Bit-channel statistics and index-set selection for the three layers.

Two estimators are provided.  ``exact_layer_stats`` enumerates every
sequence and is only meant for N <= 8; it never touches the SC code, so it
serves as an oracle for ``monte_carlo_layer_stats``, which runs a forced
SC pass over sampled sequences and averages sech(llr / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import BroadcastChannel, transmit
from .models import LAYERS, RECEIVERS, letter_models, prior_layer
from .polar import KNOWN, bhattacharyya_from_llr, check_length, polar_transform, run_sc
from .probability import LayeredDistribution, conditional_entropy

EXACT_MAX_N = 3


@dataclass
class BitChannelStats:
    layer: str
    z_source: np.ndarray
    z_receiver: dict
    estimation_method: str = "exact"
    sample_count: int = 0
    # exact mode: conditional entropies in bits; monte-carlo mode: standard errors
    h_source: np.ndarray | None = None
    h_receiver: dict | None = None
    se_source: np.ndarray | None = None
    se_receiver: dict | None = None

    @property
    def N(self) -> int:
        return len(self.z_source)


# ---------------------------------------------------------------- exact oracle

def _merge_letters(table: np.ndarray) -> np.ndarray:
    """Merge side letters with proportional likelihood columns.

    P(a | s) depends on s only through the column direction, so merging is
    exact for both Z and the conditional entropy.
    """
    w = table.sum(axis=0)
    keep = w > 0
    t, w = table[:, keep], w[keep]
    # key on the log ratio: rounding the posterior itself would fold
    # near-deterministic outputs into deterministic ones and bias Z
    with np.errstate(divide="ignore"):
        llr = np.log(t[0]) - np.log(t[1])
    key, inv = np.unique(np.round(llr, 10), return_inverse=True)
    out = np.zeros((2, key.size))
    np.add.at(out[0], inv, t[0])
    np.add.at(out[1], inv, t[1])
    return out


def exact_bit_channels(table: np.ndarray, n: int, chunk: int = 1 << 20):
    """Z and H (bits) of U_i given (U^{1:i-1}, S^{1:N}) by full enumeration."""
    if n > EXACT_MAX_N:
        raise ValueError(f"exact enumeration refused for n={n} > {EXACT_MAX_N}")
    N = 1 << n
    t = _merge_letters(np.asarray(table, dtype=float))
    S = t.shape[1]
    us = ((np.arange(1 << N)[:, None] >> np.arange(N - 1, -1, -1)) & 1).astype(np.uint8)
    a = polar_transform(us).astype(np.intp)          # (2^N, N)
    z = np.zeros(N)
    h = np.zeros(N)
    total = S ** N
    step = max(1, chunk // (1 << N))
    for start in range(0, total, step):
        idx = np.arange(start, min(total, start + step))
        s = (idx[:, None] // S ** np.arange(N - 1, -1, -1)) % S   # (c, N)
        p = np.ones((len(idx), 1 << N))
        for j in range(N):
            p *= t[a[:, j][None, :], s[:, j][:, None]]
        for i in range(N):
            m = p.reshape(len(idx), 1 << i, 2, -1).sum(axis=3)
            p0, p1 = m[:, :, 0], m[:, :, 1]
            z[i] += 2 * np.sqrt(p0 * p1).sum()
            tot = p0 + p1
            with np.errstate(divide="ignore", invalid="ignore"):
                hh = (np.where(p0 > 0, -p0 * np.log2(p0), 0) + np.where(p1 > 0, -p1 * np.log2(p1), 0)
                      + np.where(tot > 0, tot * np.log2(tot), 0))
            h[i] += hh.sum()
    return np.clip(z, 0, 1), np.maximum(h, 0)


def _minus(t: np.ndarray) -> np.ndarray:
    # P(u1, (o1, o2)) = sum_u2 P(u1 ^ u2, o1) P(u2, o2)
    t0, t1 = t
    return np.stack([np.outer(t0, t0) + np.outer(t1, t1),
                     np.outer(t1, t0) + np.outer(t0, t1)]).reshape(2, -1)


def _plus(t: np.ndarray) -> np.ndarray:
    # P(u2, (o1, o2, u1)) = P(u1 ^ u2, o1) P(u2, o2)
    t0, t1 = t
    u1_0 = np.stack([np.outer(t0, t0), np.outer(t1, t1)]).reshape(2, -1)
    u1_1 = np.stack([np.outer(t1, t0), np.outer(t0, t1)]).reshape(2, -1)
    return np.concatenate([u1_0, u1_1], axis=1)


def _z_h(t: np.ndarray) -> tuple[float, float]:
    p0, p1 = t
    tot = p0 + p1
    with np.errstate(divide="ignore", invalid="ignore"):
        h = (np.where(p0 > 0, -p0 * np.log2(p0), 0) + np.where(p1 > 0, -p1 * np.log2(p1), 0)
             + np.where(tot > 0, tot * np.log2(tot), 0))
    return float(2 * np.sqrt(p0 * p1).sum()), float(h.sum())


def recursive_bit_channels(table: np.ndarray, n: int):
    """Z and H of every bit-channel via channel combining with posterior merging.

    Natural order: the first half of the indices is the length-N/2 code over
    the combined (minus) channel, the second half the one over the plus
    channel.  Merging outputs with equal posteriors keeps Z and H exact.
    """
    def rec(t, m):
        if m == 0:
            return [_z_h(t)]
        return rec(_merge_letters(_minus(t)), m - 1) + rec(_merge_letters(_plus(t)), m - 1)

    zh = np.array(rec(_merge_letters(np.asarray(table, dtype=float)), n))
    return np.clip(zh[:, 0], 0, 1), np.maximum(zh[:, 1], 0)


def exact_layer_stats(layered: LayeredDistribution, ch: BroadcastChannel, n: int) -> dict:
    """Exact statistics for all three layers, keyed by layer name."""
    if n > EXACT_MAX_N:
        raise ValueError(f"exact statistics refused for n={n} > {EXACT_MAX_N}")
    models = letter_models(layered, ch)
    out = {}
    for layer in LAYERS:
        zs, hs = recursive_bit_channels(models[(layer, None)].table, n)
        zr, hr = {}, {}
        for j in RECEIVERS[layer]:
            zr[j], hr[j] = recursive_bit_channels(models[(layer, j)].table, n)
        out[layer] = BitChannelStats(layer, zs, zr, "exact", 0, hs, hr)
    return out


# ---------------------------------------------------------------- Monte Carlo

def sample_sequences(layered: LayeredDistribution, ch: BroadcastChannel, shape, rng: np.random.Generator) -> dict:
    """i.i.d. draws of (w, v, x, y1, y2, y3) with the given array shape."""
    w = (rng.random(shape) < layered.pw.mass[1]).astype(np.uint8)
    v = (rng.random(shape) < layered.pv_given_w.rows[w, 1]).astype(np.uint8)
    x = (rng.random(shape) < layered.px_given_v.rows[v, 1]).astype(np.uint8)
    y = transmit(ch, x, rng)
    return {"W": w, "V": v, "X": x, 1: y.y1, 2: y.y2, 3: y.y3}


def layer_leaves(models: dict, ch: BroadcastChannel, layer: str, prior, ys: dict, shape) -> np.ndarray:
    """Stack leaf LLRs: tree 0 is the source, then one tree per receiver in ``ys``."""
    src = models[(layer, None)]
    leaves = [src.leaf_llr(src.side_index(prior, None), shape)]
    for j, y in ys.items():
        m = models[(layer, j)]
        leaves.append(m.leaf_llr(m.side_index(prior, y, ch.output_size(j)), shape))
    return np.stack(leaves)


def monte_carlo_layer_stats(layered: LayeredDistribution, ch: BroadcastChannel, n: int,
                            samples: int, rng: np.random.Generator, chunk: int = 4096) -> dict:
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    N = 1 << n
    models = letter_models(layered, ch)
    # running mean and sum of squared deviations, merged chunk by chunk
    mu = {L: np.zeros((1 + len(RECEIVERS[L]), N)) for L in LAYERS}
    m2 = {L: np.zeros((1 + len(RECEIVERS[L]), N)) for L in LAYERS}
    done = 0
    while done < samples:
        B = min(chunk, samples - done)
        seq = sample_sequences(layered, ch, (B, N), rng)
        for layer in LAYERS:
            pl = prior_layer(layer)
            prior = None if pl is None else seq[pl]
            leaf = layer_leaves(models, ch, layer, prior, {j: seq[j] for j in RECEIVERS[layer]}, (B, N))
            u = polar_transform(seq[layer])
            _, rec = run_sc(leaf, np.full(N, KNOWN), known=u, record=True)
            zz = bhattacharyya_from_llr(rec)
            cm = zz.mean(axis=1)
            cm2 = ((zz - cm[:, None, :]) ** 2).sum(axis=1)
            d = cm - mu[layer]
            tot = done + B
            mu[layer] += d * B / tot
            m2[layer] += cm2 + d * d * done * B / tot
        done += B
    out = {}
    for layer in LAYERS:
        se = np.sqrt(m2[layer] / (samples - 1) / samples)
        mean = np.clip(mu[layer], 0, 1)
        rx = RECEIVERS[layer]
        out[layer] = BitChannelStats(
            layer, mean[0], {j: mean[1 + q] for q, j in enumerate(rx)}, "monte-carlo", samples,
            se_source=se[0], se_receiver={j: se[1 + q] for q, j in enumerate(rx)})
    return out


# ---------------------------------------------------------------- set selection

@dataclass
class LayerSets:
    H: np.ndarray
    L: np.ndarray
    L_rx: dict
    H_rx: dict
    N: int

    def I(self, j: int) -> np.ndarray:
        return np.intersect1d(self.L_rx[j], self.H)

    def F(self, j: int) -> np.ndarray:
        return np.setdiff1d(self.H, self.I(j))

    @property
    def R(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.N), np.union1d(self.H, self.L))


@dataclass
class BitChannelSets:
    layers: dict
    N: int
    selection_mode: str
    delta_n: float | None = None
    # indices dropped from L_{W|Y2} to keep it nested in L_{W|Y1}
    nesting_removed: list = field(default_factory=list)

    def __getitem__(self, layer: str) -> LayerSets:
        return self.layers[layer]


def delta_threshold(N: int, beta: float = 0.3) -> float:
    return 2.0 ** (-(N ** beta))


def _top(values: np.ndarray, count: int, largest: bool) -> np.ndarray:
    idx = np.arange(len(values))
    key = -values if largest else values
    order = np.lexsort((idx, key))
    return np.sort(order[:count])


def _count(frac: float, N: int) -> int:
    return int(min(N, max(0, math.ceil(frac * N - 1e-9))))


def select_sets(stats: dict, mode: str = "threshold", beta: float = 0.3, targets: dict | None = None) -> BitChannelSets:
    """Build H, L and receiver sets for every layer.

    threshold mode: H = {Z >= 1 - delta}, L = {Z <= delta}, delta = 2^(-N^beta).
    rank mode: ``targets[layer]`` holds ``{"H": frac, "L": frac, "rx": {j: frac}}``
    and the sets are the top/bottom indices by Z, ties to the lower index.
    """
    N = stats["W"].N
    check_length(N)
    layers = {}
    delta = None
    if mode == "threshold":
        delta = delta_threshold(N, beta)
        for name, st in stats.items():
            H = np.flatnonzero(st.z_source >= 1 - delta)
            L = np.flatnonzero(st.z_source <= delta)
            Lr = {j: np.flatnonzero(z <= delta) for j, z in st.z_receiver.items()}
            Hr = {j: np.flatnonzero(z >= 1 - delta) for j, z in st.z_receiver.items()}
            layers[name] = LayerSets(H, L, Lr, Hr, N)
    elif mode == "rank":
        if targets is None:
            raise ValueError("rank mode needs target fractions")
        for name, st in stats.items():
            tg = targets[name]
            H = _top(st.z_source, _count(tg["H"], N), True)
            L = _top(st.z_source, _count(tg["L"], N), False)
            if np.intersect1d(H, L).size:
                raise ValueError(f"layer {name}: H and L overlap, target fractions too large")
            Lr = {j: _top(z, _count(tg["rx"][j], N), False) for j, z in st.z_receiver.items()}
            Hr = {j: _top(z, N - len(Lr[j]), True) for j, z in st.z_receiver.items()}
            layers[name] = LayerSets(H, L, Lr, Hr, N)
    else:
        raise ValueError(f"unknown selection mode {mode!r}")
    w = layers["W"]
    removed = np.setdiff1d(w.L_rx[2], w.L_rx[1])
    w.L_rx[2] = np.intersect1d(w.L_rx[2], w.L_rx[1])
    return BitChannelSets(layers, N, mode, delta, removed.tolist())


def layer_entropies(layered: LayeredDistribution, ch: BroadcastChannel) -> dict:
    """Single-letter H(A | ctx) and H(A | ctx, Y_j) per layer, in bits."""
    from .channels import induced_output_joints
    wvx = layered.joint()
    out = {"W": {None: conditional_entropy(wvx.sum(axis=(1, 2)))},
           "V": {None: conditional_entropy(wvx.sum(axis=2).T)},
           "X": {None: conditional_entropy(wvx.sum(axis=0).T)}}
    joints = induced_output_joints(ch, layered)
    for j in RECEIVERS["W"]:
        out["W"][j] = conditional_entropy(joints[j].sum(axis=(1, 2)))
    for j in RECEIVERS["V"]:
        out["V"][j] = conditional_entropy(joints[j].sum(axis=2).transpose(1, 0, 2))
    out["X"][1] = conditional_entropy(joints[1].sum(axis=0).transpose(1, 0, 2))
    return out


def rank_targets(layered: LayeredDistribution, ch: BroadcastChannel,
                 source_gap: float = 0.1, receiver_gap: float = 0.2) -> dict:
    """Target fractions for rank mode, backed off from the entropy limits.

    With h = H(A|ctx), H and L give up ``source_gap * 4h(1-h)`` each, so a
    layer that is already deterministic or uniform loses nothing and the
    freed indices land in R.  The receiver low-entropy set keeps 1 - h plus
    (1 - receiver_gap) of I(A; Y_j | ctx).
    """
    ent = layer_entropies(layered, ch)
    out = {}
    for layer in LAYERS:
        h = ent[layer][None]
        rx = {}
        for j in RECEIVERS[layer]:
            mi = max(0.0, h - ent[layer][j])
            rx[j] = (1 - h) + (1 - receiver_gap) * mi
        cut = source_gap * 4 * h * (1 - h)
        out[layer] = {"H": max(0.0, h - cut), "L": max(0.0, 1 - h - cut), "rx": rx}
    return out


def rate_matched_targets(layered: LayeredDistribution, ch: BroadcastChannel, r0: float,
                         r11: float, r12: float, source_gap: float = 0.1, margin: float = 0.01) -> dict:
    """Rank targets whose information sets just hold the requested rates.

    Messages take the lowest indices of their parent sets, so a parent set
    much larger than the message puts the message on its weakest members.
    Here each receiver set keeps the L part, the R band next to it, and
    ``need + margin`` more, capped at I(A; Y_j | ctx).  Receiver 3 needs
    the public overflow that the W layer cannot carry on top of R11 in the
    V layer.
    """
    ent = layer_entropies(layered, ch)
    mi = {L: {j: max(0.0, ent[L][None] - ent[L][j]) for j in RECEIVERS[L]} for L in LAYERS}
    overflow = max(0.0, r0 - mi["W"][3])
    need = {"W": {1: r0, 2: r0, 3: r0}, "V": {1: r11, 3: r11 + overflow}, "X": {1: r12}}
    out = {}
    for layer in LAYERS:
        h = ent[layer][None]
        cut = source_gap * 4 * h * (1 - h)
        rx = {j: min(1.0, (1 - h) + cut + min(mi[layer][j], need[layer][j] + margin))
              for j in RECEIVERS[layer]}
        out[layer] = {"H": max(0.0, h - cut), "L": max(0.0, 1 - h - cut), "rx": rx}
    return out


def polarization_diagnostics(sets: BitChannelSets, layered: LayeredDistribution, ch: BroadcastChannel) -> dict:
    """Set fractions next to their single-letter limits.  Informational only."""
    ent = layer_entropies(layered, ch)
    N = sets.N
    rep = {}
    for layer in LAYERS:
        s = sets[layer]
        h = ent[layer][None]
        d = {"H_frac": len(s.H) / N, "H_limit": h,
             "L_frac": len(s.L) / N, "L_limit": 1 - h,
             "R_frac": len(s.R) / N, "receivers": {}}
        for j in RECEIVERS[layer]:
            mi = max(0.0, h - ent[layer][j])
            d["receivers"][j] = {"I_frac": len(s.I(j)) / N, "mutual_information": mi,
                                 "gap": mi - len(s.I(j)) / N}
        rep[layer] = d
    return rep
