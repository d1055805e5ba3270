"""Brute-force block laws for short codes (N <= 8).

Everything here is computed by listing all 2^N u-vectors, so it serves as
an oracle for the SC-based code paths.  Sequences are indexed MSB first:
index = sum_i u_i 2^(N-1-i), which keeps every prefix u^{<i} a
contiguous block of indices.
"""

from __future__ import annotations

import numpy as np

from .polar import TIE_LLR, check_length, polar_transform
from .probability import LayeredDistribution

MAX_N = 8


def all_sequences(N: int) -> np.ndarray:
    """(2^N, N) uint8 bit rows in index order."""
    idx = np.arange(1 << N)
    return ((idx[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1).astype(np.uint8)


def sequence_index(bits: np.ndarray) -> np.ndarray:
    N = bits.shape[-1]
    w = (1 << (N - 1 - np.arange(N))).astype(np.int64)
    return bits.astype(np.int64) @ w


def _check(N: int):
    check_length(N)
    if N > MAX_N:
        raise ValueError(f"enumeration is limited to N <= {MAX_N}")


def conditional_letters(layered: LayeredDistribution) -> dict:
    """Per-layer letter kernels c[a, s] = P(A = a | side letter s)."""
    return {"W": layered.pw.mass[:, None].copy(),
            "V": layered.pv_given_w.rows.T.copy(),     # [v, w]
            "X": layered.px_given_v.rows.T.copy()}     # [x, v]


def block_law(kernel: np.ndarray, N: int) -> np.ndarray:
    """P(u | side sequence) as an (M, 2^N) array.

    M = 1 for a layer without side letters, else one row per side
    sequence in index order.
    """
    _check(N)
    U = all_sequences(N)
    A = polar_transform(U)                              # a = u G
    S = kernel.shape[1]
    sides = np.zeros((1, N), np.intp) if S == 1 else all_sequences(N).astype(np.intp)
    # prod_i kernel[a_i(u), s_i]
    law = np.ones((sides.shape[0], U.shape[0]))
    for i in range(N):
        law *= kernel[A[:, i]][:, sides[:, i]].T
    return law


def prefix_conditionals(law: np.ndarray) -> list:
    """Per index i: (past weight (M, 2^i), P(u_i = 0 | past) (M, 2^i))."""
    M, size = law.shape
    N = size.bit_length() - 1
    out = []
    for i in range(N):
        m = law.reshape(M, 1 << i, 2, -1).sum(axis=3)
        tot = m.sum(axis=2)
        with np.errstate(invalid="ignore", divide="ignore"):
            p0 = np.where(tot > 0, m[:, :, 0] / np.where(tot > 0, tot, 1), 0.5)
        out.append((tot, p0))
    return out


def step_factors(p0: list, layer_sets) -> list:
    """Q(u_i = 0 | past) per index: 1/2 on H, argmax on L, P elsewhere."""
    H = set(np.asarray(layer_sets.H).tolist())
    L = set(np.asarray(layer_sets.L).tolist())
    out = []
    for i, q in enumerate(p0):
        if i in H:
            out.append(np.full_like(q, 0.5))
        elif i in L:
            with np.errstate(divide="ignore"):
                llr = np.log(q) - np.log1p(-q)
            out.append((llr >= -TIE_LLR).astype(float))   # same tie rule as the SC pass
        else:
            out.append(q.copy())
    return out


def product_law(q0: list, N: int) -> np.ndarray:
    """Assemble prod_i Q(u_i | u^{<i}) into an (M, 2^N) array."""
    M = q0[0].shape[0]
    law = np.ones((M, 1))
    for i in range(N):
        q = q0[i]
        law = np.stack([law * q, law * (1 - q)], axis=2).reshape(M, 1 << (i + 1))
    return law


def layer_laws(layered: LayeredDistribution, sets, N: int) -> dict:
    """Exact P and product-form Q for every layer, plus the bound term."""
    kern = conditional_letters(layered)
    out = {}
    side_weight = {"W": np.ones(1)}
    pw = layered.pw.mass
    pv = pw @ layered.pv_given_w.rows
    U = all_sequences(N)      # side rows are the w (or v) sequences themselves
    side_weight["V"] = np.prod(pw[U], axis=1)
    side_weight["X"] = np.prod(pv[U], axis=1)
    for L in ("W", "V", "X"):
        P = block_law(kern[L], N)
        cond = prefix_conditionals(P)
        p0 = [c for _, c in cond]
        q0 = step_factors(p0, sets[L])
        Q = product_law(q0, N)
        # sum_i E_P |P(0 | past) - Q(0 | past)|, with the side sequence drawn from P
        sw = side_weight[L][:, None]
        bound = sum(float((sw * wt * np.abs(a - b)).sum()) for (wt, a), b in zip(cond, q0))
        out[L] = {"P": P, "Q": Q, "bound": bound}
    return out


def block_tv(layered: LayeredDistribution, sets, N: int | None = None) -> dict:
    """Exact TV between the i.i.d. law and the product measure Q on (u_w, u_v, u_x).

    Returns the distance, the summation bound and its per-layer terms.
    """
    N = sets.N if N is None else N
    laws = layer_laws(layered, sets, N)
    idx = sequence_index(polar_transform(all_sequences(N)))   # index of u G
    Pw, Qw = laws["W"]["P"][0], laws["W"]["Q"][0]
    Pv, Qv = laws["V"]["P"], laws["V"]["Q"]
    Px, Qx = laws["X"]["P"], laws["X"]["Q"]
    # the side row of V is w = u_w G; the side row of X is v = u_v G
    Px_v, Qx_v = Px[idx], Qx[idx]
    total = 0.0
    for uw in range(1 << N):
        w = idx[uw]
        p = Pw[uw] * Pv[w][:, None] * Px_v
        q = Qw[uw] * Qv[w][:, None] * Qx_v
        total += np.abs(p - q).sum()
    terms = {L: laws[L]["bound"] for L in laws}
    return {"tv": 0.5 * total, "bound": sum(terms.values()), "bound_terms": terms}
