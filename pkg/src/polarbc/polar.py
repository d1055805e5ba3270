"""Polar transform and a batched successive-cancellation engine.

G_N = F^{(x)n} with F = [[1, 0], [1, 1]], natural order (no bit reversal),
x = u G_N.  Splitting u = (u_a, u_b) in halves gives
x = ((u_a ^ u_b) G', u_b G'), which is the recursion used by the SC pass.

The SC pass runs several "trees" (LLR vectors) in lock step: every tree
sees the same bit decisions, but each index picks which tree drives the
decision and how.  This is what the codec needs: the decoder decodes
message bits from the receiver posterior while re-deriving randomized bits
from the source posterior of the same past.

LLRs are ``log P(0) / P(1)`` in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

LLR_CLIP = 1000.0
# |llr| at or below this is an exact tie blurred by rounding; ties decide 0
TIE_LLR = 1e-9

# per-index decision rules
KNOWN = 0     # take the supplied bit
ARGMAX = 1    # 1 iff llr < -TIE_LLR (ties go to 0)
SAMPLE = 2    # 1 iff uniform < P(1)


def check_length(N: int) -> int:
    n = int(N).bit_length() - 1
    if N < 1 or (1 << n) != N:
        raise ValueError(f"length {N} is not a power of two")
    return n


def polar_transform(u: np.ndarray) -> np.ndarray:
    """x = u G_N over GF(2) along the last axis.  Works on any batch shape."""
    u = np.asarray(u)
    N = u.shape[-1]
    check_length(N)
    x = (u.astype(np.uint8) & 1).reshape(-1, N).copy()
    B = x.shape[0]
    h = 1
    while h < N:
        v = x.reshape(B, N // (2 * h), 2, h)
        v[:, :, 0, :] ^= v[:, :, 1, :]
        h *= 2
    return x.reshape(u.shape)


@dataclass(frozen=True)
class PolarTransform:
    n: int

    @property
    def N(self) -> int:
        return 1 << self.n

    def __call__(self, u):
        u = np.asarray(u)
        if u.shape[-1] != self.N:
            raise ValueError(f"expected length {self.N}, got {u.shape[-1]}")
        return polar_transform(u)

    def matrix(self) -> np.ndarray:
        return polar_transform(np.eye(self.N, dtype=np.uint8))


@numba.njit(cache=True, inline="always")
def _f(a, b):
    s = 1.0
    if (a < 0) != (b < 0):
        s = -1.0
    m = min(abs(a), abs(b))
    return s * m + np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))


@numba.njit(cache=True)
def _sc_batch(leaf, mode, tree, known, unif, record):
    # leaf (T, B, N); mode, tree (N,); known (B, N) uint8; unif (B, N)
    T, B, N = leaf.shape
    n = 0
    while (1 << n) < N:
        n += 1
    u = np.zeros((B, N), np.uint8)
    rec = np.zeros((T, B, N))
    L = np.zeros((T, n + 1, N))      # L[t, d, :N>>d]
    left = np.zeros((n + 1, N), np.uint8)  # x of the finished left child of depth-d node
    cur = np.zeros(N, np.uint8)
    tmp = np.zeros(N, np.uint8)
    for b in range(B):
        for t in range(T):
            for j in range(N):
                L[t, 0, j] = leaf[t, b, j]
        for i in range(N):
            if i == 0:
                start = 0
            else:
                tz = 0
                while ((i >> tz) & 1) == 0:
                    tz += 1
                d = n - 1 - tz
                half = N >> (d + 1)
                for t in range(T):
                    for j in range(half):
                        a = L[t, d, j]
                        c = L[t, d, j + half]
                        if left[d, j] == 1:
                            a = -a
                        L[t, d + 1, j] = a + c
                start = d + 1
            for d in range(start, n):
                half = N >> (d + 1)
                for t in range(T):
                    for j in range(half):
                        L[t, d + 1, j] = _f(L[t, d, j], L[t, d, j + half])
            ell = L[tree[i], n, 0]
            md = mode[i]
            if md == 0:
                bit = known[b, i]
            elif md == 1:
                bit = 1 if ell < -TIE_LLR else 0
            else:
                p1 = 1.0 / (1.0 + np.exp(ell)) if ell > -700 else 1.0
                bit = 1 if unif[b, i] < p1 else 0
            u[b, i] = bit
            if record:
                for t in range(T):
                    rec[t, b, i] = L[t, n, 0]
            # climb: combine finished right children into parents
            cur[0] = bit
            size = 1
            d = n - 1
            k = i
            while d >= 0 and (k & 1) == 1:
                for j in range(size):
                    tmp[j] = left[d, j] ^ cur[j]
                for j in range(size):
                    cur[size + j] = cur[j]
                    cur[j] = tmp[j]
                size *= 2
                k >>= 1
                d -= 1
            if d >= 0:
                for j in range(size):
                    left[d, j] = cur[j]
    return u, rec


def run_sc(leaf: np.ndarray, mode: np.ndarray, tree: np.ndarray | None = None,
           known: np.ndarray | None = None, unif: np.ndarray | None = None,
           record: bool = False):
    """Successive cancellation over stacked trees.

    Parameters
    ----------
    leaf : (T, B, N) or (B, N) array
        Per-position LLRs for each tree and batch row.
    mode : (N,) int
        KNOWN, ARGMAX or SAMPLE per index.
    tree : (N,) int, optional
        Which tree's LLR drives the decision at each index (default 0).
    known : (B, N) bits used where mode is KNOWN.
    unif : (B, N) uniforms used where mode is SAMPLE.
    record : bool
        Also return the bit-channel LLR of every tree at every index.

    Returns
    -------
    u : (B, N) uint8, and the recorded LLRs (T, B, N) when ``record``.
    """
    leaf = np.asarray(leaf, dtype=np.float64)
    if leaf.ndim == 2:
        leaf = leaf[None]
    T, B, N = leaf.shape
    check_length(N)
    leaf = np.clip(leaf, -LLR_CLIP, LLR_CLIP)
    mode = np.ascontiguousarray(mode, dtype=np.int8)
    tree = np.zeros(N, np.int64) if tree is None else np.ascontiguousarray(tree, dtype=np.int64)
    if tree.size and (tree.min() < 0 or tree.max() >= T):
        raise ValueError("tree index out of range")
    known = np.zeros((B, N), np.uint8) if known is None else np.ascontiguousarray(known, dtype=np.uint8)
    unif = np.zeros((B, N)) if unif is None else np.ascontiguousarray(unif, dtype=np.float64)
    u, rec = _sc_batch(np.ascontiguousarray(leaf), mode, tree, known, unif, record)
    return (u, rec) if record else u


def argmax_bit(llr):
    """Hard decision of the ARGMAX rule, vectorized."""
    return (np.asarray(llr) < -TIE_LLR).astype(np.uint8)


def prob_one(llr):
    """P(bit = 1) from an LLR, matching the SAMPLE rule of the SC pass."""
    llr = np.asarray(llr, dtype=float)
    return np.where(llr > -700, 1.0 / (1.0 + np.exp(np.minimum(llr, 700))), 1.0)


def bhattacharyya_from_llr(llr):
    """2 sqrt(p0 p1) = sech(llr / 2), without overflow."""
    a = np.abs(np.asarray(llr, dtype=float)) / 2
    e = np.exp(-a)
    return 2 * e / (1 + e * e)
