"""Three-receiver broadcast channel with receiver 2 physically degraded from receiver 1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .probability import ConditionalPmf, LayeredDistribution, ValidationError


def bsc(eps: float) -> ConditionalPmf:
    return ConditionalPmf([[1 - eps, eps], [eps, 1 - eps]])


def bec(eps: float) -> ConditionalPmf:
    """Binary erasure kernel; output 2 is the erasure symbol."""
    return ConditionalPmf([[1 - eps, 0.0, eps], [0.0, 1 - eps, eps]])


def identity(size: int = 2) -> ConditionalPmf:
    return ConditionalPmf(np.eye(size))


@dataclass(frozen=True)
class BroadcastChannel:
    """Kernels p(y1, y3 | x) and p(y2 | y1).

    ``k13.rows[x, y1 * y3_size + y3]`` is the joint output law for input x.
    """

    y1_size: int
    y3_size: int
    k13: ConditionalPmf
    k2: ConditionalPmf

    def __post_init__(self):
        if self.k13.input_size != 2:
            raise ValidationError("input alphabet must be binary")
        if self.k13.output_size != self.y1_size * self.y3_size:
            raise ValidationError("k13 output size must be y1_size * y3_size")
        if self.k2.input_size != self.y1_size:
            raise ValidationError("k2 must take y1 as its input")

    @property
    def x_size(self) -> int:
        return 2

    @property
    def y2_size(self) -> int:
        return self.k2.output_size

    def joint13(self) -> np.ndarray:
        """``p[x, y1, y3]`` conditional table."""
        return self.k13.rows.reshape(2, self.y1_size, self.y3_size)

    def kernel(self, receiver: int) -> np.ndarray:
        """Marginal x -> y_j kernel as a (2, |Y_j|) matrix."""
        t = self.joint13()
        if receiver == 1:
            return t.sum(axis=2)
        if receiver == 3:
            return t.sum(axis=1)
        if receiver == 2:
            return t.sum(axis=2) @ self.k2.rows
        raise ValueError(f"no receiver {receiver}")

    def output_size(self, receiver: int) -> int:
        return {1: self.y1_size, 2: self.y2_size, 3: self.y3_size}[receiver]


def make_product_channel(c1: ConditionalPmf, c3: ConditionalPmf, c2: ConditionalPmf) -> BroadcastChannel:
    """Y1 and Y3 conditionally independent given X; Y2 drawn from Y1 through c2."""
    if c1.input_size != 2 or c3.input_size != 2:
        raise ValidationError("c1 and c3 must have binary input")
    if c2.input_size != c1.output_size:
        raise ValidationError("c2 input must match the y1 alphabet")
    rows = (c1.rows[:, :, None] * c3.rows[:, None, :]).reshape(2, -1)
    return BroadcastChannel(c1.output_size, c3.output_size, ConditionalPmf(rows), c2)


def make_general_channel(k13: np.ndarray, c2: ConditionalPmf) -> BroadcastChannel:
    """Arbitrary coupling: ``k13[x, y1, y3]``."""
    k13 = np.asarray(k13, dtype=float)
    if k13.ndim != 3:
        raise ValidationError("k13 must be indexed [x, y1, y3]")
    return BroadcastChannel(k13.shape[1], k13.shape[2], ConditionalPmf(k13.reshape(2, -1)), c2)


@dataclass(frozen=True)
class ChannelSample:
    y1: np.ndarray
    y2: np.ndarray
    y3: np.ndarray

    def __getitem__(self, receiver: int) -> np.ndarray:
        return {1: self.y1, 2: self.y2, 3: self.y3}[receiver]


def _inverse_cdf(rows: np.ndarray, inputs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(rows, axis=1)
    cdf[:, -1] = 1.0
    c = cdf[inputs]                      # (..., m)
    out = (u[..., None] >= c).sum(axis=-1)
    return np.minimum(out, rows.shape[1] - 1)


def transmit(ch: BroadcastChannel, x: np.ndarray, rng: np.random.Generator) -> ChannelSample:
    """Pass x (any shape, last axis = positions) through the channel.

    Reference recipe: draw one uniform array of x's shape for the (y1, y3)
    pair, then a second for y2, both from ``rng.random``; each symbol is the
    inverse-CDF lookup in its kernel row.
    """
    x = np.asarray(x)
    if x.size and (x.min() < 0 or x.max() > 1):
        raise ValidationError("x must be binary")
    x = x.astype(np.intp)
    u13 = rng.random(x.shape)
    u2 = rng.random(x.shape)
    pair = _inverse_cdf(ch.k13.rows, x, u13)
    y1, y3 = np.divmod(pair, ch.y3_size)
    y2 = _inverse_cdf(ch.k2.rows, y1, u2)
    as8 = lambda a: a.astype(np.uint8)
    return ChannelSample(as8(y1), as8(y2), as8(y3))


def induced_output_joints(ch: BroadcastChannel, layered: LayeredDistribution) -> dict[int, np.ndarray]:
    """``{j: p[w, v, x, y_j]}`` for the three receivers."""
    wvx = layered.joint()
    return {j: wvx[:, :, :, None] * ch.kernel(j)[None, None, :, :] for j in (1, 2, 3)}
