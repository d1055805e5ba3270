"""Rate regions: the capacity region, the split-rate region and the constructive rate split."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channels import BroadcastChannel, induced_output_joints
from .probability import LayeredDistribution, conditional_mutual_information, mutual_information

DEFAULT_SLACK = 1e-9


class NotAchievableError(ValueError):
    pass


@dataclass(frozen=True)
class RatePair:
    r0: float
    r1: float

    def __post_init__(self):
        if self.r0 < 0 or self.r1 < 0:
            raise ValueError("rates must be non-negative")


@dataclass(frozen=True)
class RateSplit:
    r11: float
    r12: float

    def __post_init__(self):
        if self.r11 < 0 or self.r12 < 0:
            raise ValueError("split rates must be non-negative")


@dataclass(frozen=True)
class MutualInfoProfile:
    i_w_y1: float
    i_w_y2: float
    i_w_y3: float
    i_v_y3: float
    i_v_y1_given_w: float
    i_x_y1_given_w: float
    i_x_y1_given_v: float
    i_x_y1: float

    def check(self, tol: float = 1e-10):
        gap = self.i_v_y1_given_w + self.i_x_y1_given_v - self.i_x_y1_given_w
        if abs(gap) > tol:
            raise ValueError(f"chain rule violated by {gap:.3e}")
        if self.i_w_y2 > self.i_w_y1 + tol:
            raise ValueError("receiver 2 is not degraded with respect to receiver 1")
        return self

    def as_dict(self):
        return asdict(self)


def profile(layered: LayeredDistribution, ch: BroadcastChannel) -> MutualInfoProfile:
    j = induced_output_joints(ch, layered)   # p[w, v, x, y]
    j1, j2, j3 = j[1], j[2], j[3]
    return MutualInfoProfile(
        i_w_y1=mutual_information(j1.sum(axis=(1, 2))),
        i_w_y2=mutual_information(j2.sum(axis=(1, 2))),
        i_w_y3=mutual_information(j3.sum(axis=(1, 2))),
        i_v_y3=mutual_information(j3.sum(axis=(0, 2))),
        # I(A; Y | C) takes joint[a, y, c]
        i_v_y1_given_w=conditional_mutual_information(j1.sum(axis=2).transpose(1, 2, 0)),
        i_x_y1_given_w=conditional_mutual_information(j1.sum(axis=1).transpose(1, 2, 0)),
        i_x_y1_given_v=conditional_mutual_information(j1.sum(axis=0).transpose(1, 2, 0)),
        i_x_y1=mutual_information(j1.sum(axis=(0, 1))),
    )


def _below(rate: float, bound: float, slack: float = 0.0) -> bool:
    """Strict rate bound, except that a zero rate is always achievable."""
    return rate < bound - slack or (rate == 0 and bound >= 0)


def capacity_violations(pair: RatePair, prof: MutualInfoProfile, slack: float = 0.0) -> list[str]:
    """Names of the capacity-region inequalities that fail (empty when inside)."""
    bad = []
    if not _below(pair.r0, min(prof.i_w_y2, prof.i_v_y3), slack):
        bad.append("public rate bound R0 < min(I(W;Y2), I(V;Y3))")
    if not _below(pair.r1, prof.i_x_y1_given_w, slack):
        bad.append("private rate bound R1 < I(X;Y1|W)")
    if not _below(pair.r0 + pair.r1, prof.i_v_y3 + prof.i_x_y1_given_v, slack):
        bad.append("sum rate bound R0 + R1 < I(V;Y3) + I(X;Y1|V)")
    return bad


def in_capacity_region(pair: RatePair, prof: MutualInfoProfile, slack: float = 0.0) -> bool:
    return not capacity_violations(pair, prof, slack)


def in_split_region(r0: float, r11: float, r12: float, prof: MutualInfoProfile) -> bool:
    return (_below(r0, prof.i_w_y2)
            and _below(r12, prof.i_x_y1_given_v)
            and _below(r11 + r12, prof.i_x_y1_given_w)
            and _below(r0 + r11 + r12, prof.i_x_y1)
            and _below(r0 + r11, prof.i_v_y3))


def split_identities(r0: float, split: RateSplit, prof: MutualInfoProfile) -> tuple[bool, bool, bool]:
    return (_below(split.r11, prof.i_v_y1_given_w),
            _below(split.r12, prof.i_x_y1_given_v),
            _below(r0 + split.r11, prof.i_v_y3))


def constructive_rate_split(pair: RatePair, prof: MutualInfoProfile, slack: float = DEFAULT_SLACK,
                            margin: float = 1e-9) -> RateSplit:
    """Split R1 = R11 + R12 with R11 < I(V;Y1|W), R12 < I(X;Y1|V), R0 + R11 < I(V;Y3).

    Start from a split meeting the first two bounds; if the third fails by
    delta, move delta+ (midpoint of its open interval) from R11 to R12.
    """
    bad = capacity_violations(pair, prof, slack)
    if bad:
        raise NotAchievableError("not achievable: " + "; ".join(bad))
    r0, r1 = pair.r0, pair.r1
    a, b, c = prof.i_v_y1_given_w, prof.i_x_y1_given_v, prof.i_v_y3
    r11 = min(r1, max(0.0, a - margin))
    r12 = r1 - r11
    if not _below(r12, b):
        # move toward R11: put R12 halfway inside its admissible window
        lo = max(0.0, r1 - a)
        r12 = 0.5 * (lo + b)
        r11 = r1 - r12
    if not (_below(r11, a) and _below(r12, b)):
        raise NotAchievableError(f"no split meets the layer bounds (R11'={r11!r}, R12'={r12!r})")
    if not _below(r0 + r11, c):
        delta = r0 + r11 - c
        delta1 = b - r12
        hi = min(r11, delta1)
        if not delta < hi:
            raise NotAchievableError(
                f"empty shift interval ({delta!r}, {hi!r}) for R11'={r11!r}, R12'={r12!r}")
        shift = 0.5 * (delta + hi)
        r11, r12 = r11 - shift, r12 + shift
    out = RateSplit(max(r11, 0.0), r12)
    if not all(split_identities(r0, out, prof)):
        raise NotAchievableError(f"split {out} misses a bound after adjustment")
    return out


def split_interval(pair: RatePair, prof: MutualInfoProfile):
    """Admissible R11 values of the split region as (lo, lo_open, hi, hi_open), or None."""
    r0, r1 = pair.r0, pair.r1
    if not (r0 < prof.i_w_y2 and r1 < prof.i_x_y1_given_w and r0 + r1 < prof.i_x_y1):
        return None
    lo, lo_open = 0.0, False
    if r1 - prof.i_x_y1_given_v >= 0:
        lo, lo_open = r1 - prof.i_x_y1_given_v, True
    hi, hi_open = r1, False
    if prof.i_v_y3 - r0 <= r1:
        hi, hi_open = prof.i_v_y3 - r0, True
    if lo < hi or (lo == hi and not lo_open and not hi_open):
        return lo, lo_open, hi, hi_open
    return None


def fm_equivalence_check(prof: MutualInfoProfile, trials: int, rng: np.random.Generator,
                         slack: float = DEFAULT_SLACK) -> dict:
    """Sample both directions of the projection claim and collect counterexamples.

    (a) pairs inside the capacity region (with slack) must admit a split in
        the split region; the split is the midpoint of the exact R11 interval.
    (b) split-region triples must project into the capacity region.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    # each coordinate is drawn over 1.2x its own bound so both directions get hits
    top0 = max(min(prof.i_w_y2, prof.i_v_y3), 1e-3) * 1.2
    top1 = max(prof.i_x_y1_given_w, 1e-3) * 1.2
    top11 = max(prof.i_v_y1_given_w, 1e-3) * 1.2
    top12 = max(prof.i_x_y1_given_v, 1e-3) * 1.2
    forward = backward = checked_a = checked_b = 0
    bad = []
    for _ in range(trials):
        r0, r1 = rng.uniform(0, top0), rng.uniform(0, top1)
        pair = RatePair(r0, r1)
        if in_capacity_region(pair, prof, slack):
            checked_a += 1
            iv = split_interval(pair, prof)
            ok = False
            if iv is not None:
                lo, _, hi, _ = iv
                r11 = 0.5 * (lo + hi)
                ok = in_split_region(r0, r11, r1 - r11, prof)
            if not ok:
                forward += 1
                bad.append(("capacity->split", r0, r1))
        r11, r12 = rng.uniform(0, top11), rng.uniform(0, top12)
        if in_split_region(r0, r11, r12, prof):
            checked_b += 1
            if not in_capacity_region(RatePair(r0, r11 + r12), prof, 0.0):
                backward += 1
                bad.append(("split->capacity", r0, r11, r12))
    return {"trials": trials, "checked_forward": checked_a, "checked_backward": checked_b,
            "forward_counterexamples": forward, "backward_counterexamples": backward,
            "counterexamples": bad[:10]}


def region_corner(prof: MutualInfoProfile) -> RatePair:
    """Corner with the largest public rate, then the largest private rate there."""
    r0 = min(prof.i_w_y2, prof.i_v_y3)
    r1 = min(prof.i_x_y1_given_w, prof.i_v_y3 + prof.i_x_y1_given_v - r0)
    return RatePair(max(r0, 0.0), max(r1, 0.0))


def max_private_rate(r0: float, prof: MutualInfoProfile) -> float:
    """Supremum of R1 at public rate r0 (0 if r0 is outside)."""
    if not r0 < min(prof.i_w_y2, prof.i_v_y3):
        return 0.0
    return max(0.0, min(prof.i_x_y1_given_w, prof.i_v_y3 + prof.i_x_y1_given_v - r0))


def bit_counts(N: int, r0: float, split: RateSplit) -> tuple[int, int, int]:
    """Per-block message bit counts floor(N * rate)."""
    f = lambda r: int(math.floor(N * r + 1e-12))
    return f(r0), f(split.r11), f(split.r12)
