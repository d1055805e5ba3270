"""Three-layer randomized SC encoder with cross-block copies."""

from __future__ import annotations

import numpy as np

from ..polar import ARGMAX, KNOWN, SAMPLE, polar_transform, run_sc
from .instance import CodeInstance
from .layout import LAYER_ORDER
from .randomness import uniforms

LQ = {L: q for q, L in enumerate(LAYER_ORDER)}


def set_modes(layer_sets) -> np.ndarray:
    """Encoder rule per index: H given, L argmax, everything else sampled."""
    mode = np.full(layer_sets.N, SAMPLE, np.int8)
    mode[layer_sets.L] = ARGMAX
    mode[layer_sets.H] = KNOWN
    return mode


def layer_modes(inst: CodeInstance, layer: str) -> np.ndarray:
    return set_modes(inst.sets[layer])


def encode_layer(model, layer_sets, prior: np.ndarray | None, h_values: np.ndarray,
                 unif: np.ndarray) -> np.ndarray:
    """One randomized SC pass from the source law of ``model``."""
    leaf = model.leaf_llr(model.side_index(prior, None), h_values.shape)
    return run_sc(leaf, set_modes(layer_sets), known=h_values, unif=unif)


def scatter_stream(bits: np.ndarray, slots, store: np.ndarray):
    """Write a (B, total) bit stream into ``store[:, t, layer, idx]`` slot by slot."""
    off = 0
    for t, L, idx in slots:
        store[:, t, LQ[L], idx] = bits[:, off:off + len(idx)]
        off += len(idx)
    if off != bits.shape[1]:
        raise ValueError(f"message has {bits.shape[1]} bits, layout holds {off}")


def gather_stream(store: np.ndarray, slots) -> np.ndarray:
    parts = [store[:, t, LQ[L], idx] for t, L, idx in slots]
    if not parts:
        return np.zeros((store.shape[0], 0), store.dtype)
    return np.concatenate(parts, axis=1)


def link_values(store: np.ndarray, t: int, link) -> np.ndarray:
    return np.concatenate([store[:, t, LQ[L], idx] for L, idx in link.sources], axis=1)


def sc_encode_layer(inst: CodeInstance, layer: str, prior: np.ndarray | None, h_values: np.ndarray,
                    block: int, sessions: np.ndarray) -> np.ndarray:
    """Fill one layer for a batch: H from ``h_values``, the rest from the source law.

    ``prior`` is the transformed previous layer (w for V, v for X).
    """
    unif = uniforms(inst.common_randomness_seed, sessions, block, layer, h_values.shape[1])
    return encode_layer(inst.models[(layer, None)], inst.sets[layer], prior, h_values, unif)


def encode_chain(inst: CodeInstance, public: np.ndarray, private: np.ndarray,
                 sessions: np.ndarray | None = None, return_u: bool = False):
    """Encode a batch of message pairs into k codewords each.

    Parameters
    ----------
    public, private : (B, public_total) and (B, private_total) bit arrays
    sessions : (B,) ints keying the common randomness; defaults to 0..B-1

    Returns
    -------
    x : (B, k, N) uint8 codewords, plus the (B, k, 3, N) u-vectors when
    ``return_u`` is set.
    """
    public = np.atleast_2d(np.asarray(public, dtype=np.uint8))
    private = np.atleast_2d(np.asarray(private, dtype=np.uint8))
    B = public.shape[0]
    if private.shape[0] != B:
        raise ValueError("public and private batches differ in size")
    if public.shape[1] != inst.budget[0] or private.shape[1] != inst.budget[1]:
        raise ValueError(f"message lengths {public.shape[1]}, {private.shape[1]} "
                         f"do not match the budget {inst.budget}")
    sessions = np.arange(B) if sessions is None else np.asarray(sessions)
    k, N = inst.k, inst.N
    u = np.zeros((B, k, 3, N), np.uint8)
    u[:] = inst.frozen_bits[None]
    scatter_stream(public, inst.public_slots(), u)
    scatter_stream(private, inst.private_slots(), u)
    x = np.zeros((B, k, N), np.uint8)
    for t in range(k):
        if t > 0:
            for ln in inst.layout.copy_links:
                u[:, t, LQ[ln.dest_layer], ln.dest] = link_values(u, t - 1, ln)
        prior = None
        for L in LAYER_ORDER:
            u[:, t, LQ[L]] = sc_encode_layer(inst, L, prior, u[:, t, LQ[L]], t, sessions)
            prior = polar_transform(u[:, t, LQ[L]])
        x[:, t] = prior
    return (x, u) if return_u else x
