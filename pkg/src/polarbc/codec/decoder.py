"""Receiver-side SC decoding of the chained blocks.

Each decoder runs two trees per layer in lock step: the receiver posterior
(tree 0) decides message and low-entropy positions by argmax, and the
source posterior (tree 1) re-derives the randomized positions from the
shared common randomness.  Known positions are the frozen bits plus the
copies that the block order makes available: receiver 3 walks forward and
learns copy destinations from the previous block; receivers 1 and 2 walk
backward and learn copy sources from the next block.
"""

from __future__ import annotations

import numpy as np

from ..polar import ARGMAX, KNOWN, SAMPLE, polar_transform, run_sc
from .encoder import LQ, gather_stream, link_values
from .instance import CodeInstance
from .randomness import uniforms


def decoded_layers(inst: CodeInstance, receiver: int) -> tuple:
    if receiver == 1:
        return ("W", "V", "X")
    if receiver == 2:
        return ("W",)
    if receiver == 3:
        return ("W", "V") if inst.case_tag in ("A1", "A2") else ("W",)
    raise ValueError(f"no receiver {receiver}")


def _known_mask(inst: CodeInstance, t: int, layer: str, forward: bool) -> np.ndarray:
    m = inst.frozen_masks[t, LQ[layer]].copy()
    for ln in inst.layout.copy_links:
        if forward and t > 0 and ln.dest_layer == layer:
            m[ln.dest] = True
        if not forward and t < inst.k - 1:
            for L, idx in ln.sources:
                if L == layer:
                    m[idx] = True
    return m


def _modes(inst: CodeInstance, layer: str, known: np.ndarray):
    s = inst.sets[layer]
    mode = np.full(inst.N, ARGMAX, np.int8)
    tree = np.zeros(inst.N, np.int64)
    mode[s.R] = SAMPLE
    tree[s.R] = 1
    mode[known] = KNOWN
    tree[known] = 0
    return mode, tree


def _decode(inst: CodeInstance, receiver: int, y: np.ndarray, sessions) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim == 2:
        y = y[None]
    B, k, N = y.shape
    if k != inst.k or N != inst.N:
        raise ValueError(f"expected (B, {inst.k}, {inst.N}) observations, got {y.shape}")
    sessions = np.arange(B) if sessions is None else np.asarray(sessions)
    forward = receiver == 3
    layers = decoded_layers(inst, receiver)
    ysize = inst.channel.output_size(receiver)
    store = np.full((B, k, 3, N), -1, np.int8)
    store[:] = np.where(inst.frozen_masks, inst.frozen_bits, -1)[None]
    order = range(k) if forward else range(k - 1, -1, -1)
    for t in order:
        if forward and t > 0:
            for ln in inst.layout.copy_links:
                store[:, t, LQ[ln.dest_layer], ln.dest] = link_values(store, t - 1, ln)
        if not forward and t < k - 1:
            for ln in inst.layout.copy_links:
                vals = store[:, t + 1, LQ[ln.dest_layer], ln.dest]
                off = 0
                for L, idx in ln.sources:
                    store[:, t, LQ[L], idx] = vals[:, off:off + len(idx)]
                    off += len(idx)
        prior = None
        for L in layers:
            rx = inst.models[(L, receiver)]
            src = inst.models[(L, None)]
            known = _known_mask(inst, t, L, forward)
            mode, tree = _modes(inst, L, known)
            leaves = [rx.leaf_llr(rx.side_index(prior, y[:, t], ysize))]
            if np.any(tree == 1):
                leaves.append(src.leaf_llr(src.side_index(prior, None), (B, N)))
            unif = uniforms(inst.common_randomness_seed, sessions, t, L, N)
            kv = np.maximum(store[:, t, LQ[L]], 0).astype(np.uint8)
            u = run_sc(np.stack(leaves), mode, tree, known=kv, unif=unif)
            store[:, t, LQ[L]] = u
            prior = polar_transform(u)
    return store


def decode_receiver3(inst: CodeInstance, y3: np.ndarray, sessions=None, return_store: bool = False):
    """Public message estimate from (B, k, N) receiver-3 outputs."""
    store = _decode(inst, 3, y3, sessions)
    pub = gather_stream(store, inst.public_slots())
    return (pub, store) if return_store else pub


def decode_receiver1(inst: CodeInstance, y1: np.ndarray, sessions=None, return_store: bool = False):
    """(public, private) estimates from receiver-1 outputs."""
    store = _decode(inst, 1, y1, sessions)
    out = (gather_stream(store, inst.public_slots()), gather_stream(store, inst.private_slots()))
    return (*out, store) if return_store else out


def decode_receiver2(inst: CodeInstance, y2: np.ndarray, sessions=None, return_store: bool = False):
    store = _decode(inst, 2, y2, sessions)
    pub = gather_stream(store, inst.public_slots())
    return (pub, store) if return_store else pub
