"""Index partitions, per-block roles and cross-block copy links.

Cases
-----
A1, A2
    The public message does not fit in the receiver-3 W information set, so
    the overflow goes to the V layer and the W-layer chain carries both the
    W bits receiver 2 cannot see and those V-layer public bits.  A1 also
    chains private V bits from the receiver-3 set into the receiver-1 set.
B1
    Public bits fit in the receiver-3 W set but not in the part shared with
    receiver 2: chain inside the W layer only.
B2
    Everything fits in shared positions; no chaining.

Blocks are numbered 0..k-1.  All partitions are sorted ascending, and each
partition takes the lowest available indices of its parent set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..polarization import BitChannelSets

LAYER_ORDER = ("W", "V", "X")


class RateBackoffError(ValueError):
    """A finite-N cardinality inequality fails.

    ``inequality`` names the failing constraint, ``max_scale`` is the
    largest common scale factor on (r0, r11, r12) that makes the layout
    feasible (0 when even the all-zero rates fail, which cannot happen).
    """

    def __init__(self, inequality: str, max_scale: float | None = None):
        self.inequality = inequality
        self.max_scale = max_scale
        msg = f"rate backoff required: {inequality}"
        if max_scale is not None:
            msg += f" (largest feasible scale {max_scale:.3f})"
        super().__init__(msg)


@dataclass(frozen=True)
class CopyLink:
    """Values at ``sources`` of block t are copied to ``dest`` of block t+1.

    ``sources`` is a list of (layer, indices); their concatenation maps
    one-to-one onto ``dest`` in ascending order.
    """

    sources: tuple
    dest_layer: str
    dest: np.ndarray

    @property
    def size(self) -> int:
        return len(self.dest)


@dataclass
class ChainingLayout:
    case_tag: str
    k: int
    N: int
    counts: tuple          # (m0, m11, m12) per-block bit counts
    w_parts: dict
    v_parts: dict
    x_parts: dict
    copy_links: list = field(default_factory=list)

    def roles(self, t: int) -> dict:
        """Per-layer ``{"public", "private", "dest"}`` index arrays for block t."""
        return _roles(self, t)

    def __eq__(self, other):
        if not isinstance(other, ChainingLayout):
            return NotImplemented
        same = lambda a, b: a.keys() == b.keys() and all(np.array_equal(a[q], b[q]) for q in a)
        return (self.case_tag == other.case_tag and self.k == other.k and self.N == other.N
                and tuple(self.counts) == tuple(other.counts)
                and same(self.w_parts, other.w_parts) and same(self.v_parts, other.v_parts)
                and same(self.x_parts, other.x_parts)
                and len(self.copy_links) == len(other.copy_links)
                and all(a.dest_layer == b.dest_layer and np.array_equal(a.dest, b.dest)
                        and len(a.sources) == len(b.sources)
                        and all(la == lb and np.array_equal(ia, ib)
                                for (la, ia), (lb, ib) in zip(a.sources, b.sources))
                        for a, b in zip(self.copy_links, other.copy_links)))


_E = np.zeros(0, dtype=np.int64)


def _arr(x) -> np.ndarray:
    return np.sort(np.asarray(x, dtype=np.int64))


def _first(parent: np.ndarray, count: int) -> np.ndarray:
    return _arr(np.sort(parent)[:max(count, 0)])


def select_case(sets: BitChannelSets, m0: int, m11: int) -> str:
    w, v = sets["W"], sets["V"]
    I3w = w.I(3)
    A = np.intersect1d(I3w, w.I(2))
    if m0 > len(I3w):
        p = len(np.intersect1d(v.I(1), v.I(3)))
        over = max(0, (m0 - len(I3w)) - len(np.setdiff1d(v.I(3), v.I(1))))
        return "A1" if m11 > p - over else "A2"
    return "B1" if m0 > len(A) else "B2"


def _feasibility(sets: BitChannelSets, m0: int, m11: int, m12: int) -> str | None:
    """First violated cardinality inequality, or None."""
    w, v, x = sets["W"], sets["V"], sets["X"]
    I3w, I2w = w.I(3), w.I(2)
    A = np.intersect1d(I3w, I2w)
    C = np.setdiff1d(I3w, I2w)
    Bpool = np.setdiff1d(I2w, I3w)
    I1v, I3v = v.I(1), v.I(3)
    if m12 > len(x.I(1)):
        return f"private X-layer bits per block {m12} <= |I_1^x| = {len(x.I(1))}"
    case = select_case(sets, m0, m11)
    if case in ("A1", "A2"):
        if m0 - len(A) > len(Bpool):
            return f"chained public bits {m0 - len(A)} <= |I_2^w minus I_3^w| = {len(Bpool)}"
        extra = m0 - len(I3w)
        if extra > len(I3v):
            return f"V-layer public bits {extra} <= |I_3^v| = {len(I3v)}"
        f1 = np.setdiff1d(I3v, I1v)
        over = max(0, extra - len(f1))
        p = len(np.intersect1d(I1v, I3v)) - over
        if case == "A1":
            need = m11 - p
            free = len(f1) - min(extra, len(f1))
            if need > free:
                return f"chained private V bits {need} <= free |I_3^v minus I_1^v| = {free}"
            if need > len(np.setdiff1d(I1v, I3v)):
                return f"chained private V bits {need} <= |I_1^v minus I_3^v| = {len(np.setdiff1d(I1v, I3v))}"
    else:
        if m11 > len(I1v):
            return f"private V-layer bits per block {m11} <= |I_1^v| = {len(I1v)}"
        if case == "B1":
            need = m0 - len(A)
            if need > len(C):
                return f"chained public bits {need} <= |I_3^w minus I_2^w| = {len(C)}"
            if need > len(Bpool):
                return f"chained public bits {need} <= |I_2^w minus I_3^w| = {len(Bpool)}"
    return None


def max_feasible_scale(sets: BitChannelSets, r0: float, r11: float, r12: float, step: float = 1e-3) -> float:
    from ..region import RateSplit, bit_counts
    N = sets.N
    for s in np.arange(1.0, -step / 2, -step):
        s = max(float(s), 0.0)
        m = bit_counts(N, r0 * s, RateSplit(r11 * s, r12 * s))
        if _feasibility(sets, *m) is None:
            return s
    return 0.0


def check_counts(sets: BitChannelSets, m0: int, m11: int, m12: int, rates=None):
    bad = _feasibility(sets, m0, m11, m12)
    if bad is not None:
        scale = None if rates is None else max_feasible_scale(sets, *rates)
        raise RateBackoffError(bad, scale)


def build_layout(sets: BitChannelSets, counts: tuple, k: int, case_tag: str | None = None) -> ChainingLayout:
    m0, m11, m12 = counts
    if k < 1:
        raise ValueError("need at least one block")
    check_counts(sets, m0, m11, m12)
    case = select_case(sets, m0, m11) if case_tag is None else case_tag
    w, v, x = sets["W"], sets["V"], sets["X"]
    I3w, I2w = w.I(3), w.I(2)
    A = _arr(np.intersect1d(I3w, I2w))
    C_all = _arr(np.setdiff1d(I3w, I2w))
    Bpool = _arr(np.setdiff1d(I2w, I3w))
    I1v, I3v = v.I(1), v.I(3)
    I13v = _arr(np.intersect1d(I1v, I3v))
    I3F1v = _arr(np.setdiff1d(I3v, I1v))
    I1F3v = _arr(np.setdiff1d(I1v, I3v))
    wp = {"I3w_and_I2w": A, "I3w_and_F2w": C_all, "B_w1": _E, "B_w2": Bpool}
    vp = {k_: _E for k_ in ("I31v", "I32v", "I321v", "I322v", "I1v_and_I3v", "I11v", "I12v", "private_v")}
    vp["I1v_and_I3v"] = I13v
    xp = {"I1x_message": _first(x.I(1), m12)}
    links = []
    if case in ("A1", "A2"):
        extra = m0 - len(I3w)
        # public V bits: I_3^v minus I_1^v first, then overflow into the shared part
        I31v = _arr(np.concatenate([I3F1v, I13v])[:extra])
        P = _arr(np.setdiff1d(I13v, I31v))
        vp["I31v"] = I31v
        vp["I32v"] = _arr(np.setdiff1d(I3v, I31v))
        Bw1 = _first(Bpool, m0 - len(A))
        wp["B_w1"] = Bw1
        wp["B_w2"] = _arr(np.setdiff1d(Bpool, Bw1))
        if case == "A1":
            need = m11 - len(P)
            I321 = _first(np.setdiff1d(I3F1v, I31v), need)
            I11 = _first(I1F3v, len(I321))
            vp["I321v"] = I321
            vp["I322v"] = _arr(np.setdiff1d(vp["I32v"], np.union1d(I321, P)))
            vp["I11v"] = I11
            vp["I12v"] = _arr(np.setdiff1d(I1F3v, I11))
            vp["private_v"] = P
        else:
            vp["I322v"] = _arr(np.setdiff1d(vp["I32v"], P))
            vp["I12v"] = I1F3v
            vp["private_v"] = _first(P, m11)
        if k > 1:
            if len(Bw1):
                links.append(CopyLink((("W", C_all), ("V", I31v)), "W", Bw1))
            if case == "A1" and len(vp["I321v"]):
                links.append(CopyLink((("V", vp["I321v"]),), "V", vp["I11v"]))
    else:
        vp["private_v"] = _first(I1v, m11)
        if case == "B1":
            need = m0 - len(A)
            wp["I3w_and_F2w"] = _first(C_all, need)
            Bw1 = _first(Bpool, need)
            wp["B_w1"] = Bw1
            wp["B_w2"] = _arr(np.setdiff1d(Bpool, Bw1))
            if k > 1 and need:
                links.append(CopyLink((("W", wp["I3w_and_F2w"]),), "W", Bw1))
        else:
            wp["I3w_and_I2w"] = _first(A, m0)
    return ChainingLayout(case, k, sets.N, (m0, m11, m12), wp, vp, xp, links)


def _roles(lay: ChainingLayout, t: int) -> dict:
    last = t == lay.k - 1
    first = t == 0
    wp, vp, xp = lay.w_parts, lay.v_parts, lay.x_parts
    r = {L: {"public": _E, "private": _E, "dest": _E} for L in LAYER_ORDER}
    case = lay.case_tag
    if case in ("A1", "A2"):
        r["W"]["public"] = wp["I3w_and_I2w"] if last else _arr(np.union1d(wp["I3w_and_I2w"], wp["I3w_and_F2w"]))
        r["V"]["public"] = _E if last else vp["I31v"]
        priv = vp["private_v"]
        if case == "A1" and not last:
            priv = _arr(np.union1d(priv, vp["I321v"]))
        r["V"]["private"] = priv
    elif case == "B1":
        r["W"]["public"] = wp["I3w_and_I2w"] if last else _arr(np.union1d(wp["I3w_and_I2w"], wp["I3w_and_F2w"]))
        r["V"]["private"] = vp["private_v"]
    else:
        r["W"]["public"] = wp["I3w_and_I2w"]
        r["V"]["private"] = vp["private_v"]
    r["X"]["private"] = xp["I1x_message"]
    if not first:
        for ln in lay.copy_links:
            r[ln.dest_layer]["dest"] = _arr(np.union1d(r[ln.dest_layer]["dest"], ln.dest))
    return r


def message_bit_budget(lay: ChainingLayout) -> tuple[int, int]:
    """(public_total, private_total) over all k blocks, counted from the roles."""
    pub = priv = 0
    for t in range(lay.k):
        r = lay.roles(t)
        pub += sum(len(r[L]["public"]) for L in LAYER_ORDER)
        priv += sum(len(r[L]["private"]) for L in LAYER_ORDER)
    return pub, priv


def budget_formula(case: str, k: int, counts: tuple, sets: BitChannelSets) -> tuple[int, int]:
    """Closed-form totals per case, used to cross-check ``message_bit_budget``."""
    m0, m11, m12 = counts
    w, v = sets["W"], sets["V"]
    A = len(np.intersect1d(w.I(3), w.I(2)))
    if case in ("A1", "A2", "B1"):
        pub = (k - 1) * m0 + A
    else:
        pub = k * m0
    if case == "A1":
        extra = m0 - len(w.I(3))
        f1 = len(np.setdiff1d(v.I(3), v.I(1)))
        p = len(np.intersect1d(v.I(1), v.I(3))) - max(0, extra - f1)
        priv = (k - 1) * m11 + k * m12 + p
    else:
        priv = k * (m11 + m12)
    return pub, priv
