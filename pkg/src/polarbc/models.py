"""Per-letter models feeding the SC trees of each layer.

Every bit-channel family is "binary letter A with per-position side
information S", described by the table ``P(a, s)`` of shape (2, |S|):

=========  ==============  =====================
layer      observer        side information
=========  ==============  =====================
W          source          none
W          receiver j      y_j
V          source          w
V          receiver 1, 3   (w, y_j)
X          source          v
X          receiver 1      (v, y_1)
=========  ==============  =====================

Side-information letters are flattened with the layer bit first, e.g.
``s = w * |Y_j| + y_j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import BroadcastChannel
from .polar import LLR_CLIP
from .probability import LayeredDistribution

LAYERS = ("W", "V", "X")
RECEIVERS = {"W": (1, 2, 3), "V": (1, 3), "X": (1,)}


@dataclass(frozen=True)
class LetterModel:
    layer: str
    receiver: int | None
    table: np.ndarray  # P(a, s)

    @property
    def side_size(self) -> int:
        return self.table.shape[1]

    def llr_table(self) -> np.ndarray:
        p0, p1 = self.table
        with np.errstate(divide="ignore", invalid="ignore"):
            llr = np.log(p0) - np.log(p1)
        llr = np.where((p0 == 0) & (p1 == 0), 0.0, llr)
        return np.clip(llr, -LLR_CLIP, LLR_CLIP)

    def leaf_llr(self, side: np.ndarray | None, shape=None) -> np.ndarray:
        tab = self.llr_table()
        if side is None:
            return np.full(shape, tab[0])
        return tab[side]

    def side_index(self, prior: np.ndarray | None, y: np.ndarray | None, y_size: int = 1):
        """Flatten (prior layer bits, receiver symbols) to a side letter index."""
        if prior is None and y is None:
            return None
        if y is None:
            return prior.astype(np.intp)
        if prior is None:
            return y.astype(np.intp)
        return prior.astype(np.intp) * y_size + y.astype(np.intp)


def letter_models(layered: LayeredDistribution, ch: BroadcastChannel) -> dict:
    """All six model families keyed by ``(layer, receiver or None)``."""
    pw = layered.pw.mass
    pvw = layered.pv_given_w.rows
    pxv = layered.px_given_v.rows
    out = {}
    out[("W", None)] = LetterModel("W", None, pw[:, None].copy())
    wv = pw[:, None] * pvw          # [w, v]
    vx = wv.sum(axis=0)[:, None] * pxv  # [v, x]
    out[("V", None)] = LetterModel("V", None, wv.T.copy())   # [v, w]
    out[("X", None)] = LetterModel("X", None, vx.T.copy())   # [x, v]
    wvx = layered.joint()
    for j in RECEIVERS["W"]:
        k = ch.kernel(j)
        wx = wvx.sum(axis=1)
        out[("W", j)] = LetterModel("W", j, wx @ k)  # [w, y]
    for j in RECEIVERS["V"]:
        k = ch.kernel(j)
        wvy = np.einsum("wvx,xy->wvy", wvx, k)
        out[("V", j)] = LetterModel("V", j, wvy.transpose(1, 0, 2).reshape(2, -1))  # [v, (w, y)]
    k1 = ch.kernel(1)
    vxy = vx[:, :, None] * k1[None, :, :]
    out[("X", 1)] = LetterModel("X", 1, vxy.transpose(1, 0, 2).reshape(2, -1))  # [x, (v, y)]
    return out


def prior_layer(layer: str) -> str | None:
    return {"W": None, "V": "W", "X": "V"}[layer]
