"""End-to-end code construction: rates -> split -> bit-channel sets -> instance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import BroadcastChannel
from .codec.instance import CodeInstance, create_instance
from .polarization import (EXACT_MAX_N, exact_layer_stats, monte_carlo_layer_stats, rank_targets,
                           rate_matched_targets, select_sets)
from .probability import LayeredDistribution
from .region import RatePair, constructive_rate_split, profile


@dataclass
class CodeSpec:
    n: int
    k: int = 1
    r0: float = 0.0
    r1: float = 0.0
    selection_mode: str = "rank"
    beta: float = 0.3
    source_gap: float = 0.1
    receiver_gap: float = 0.2
    target_rule: str = "gap"     # "gap": MI-based receiver sets; "rate": sized to the rates
    rate_margin: float = 0.01
    targets: dict | None = None
    stats_samples: int = 20000
    stats_seed: int = 0
    frozen_seed: int = 0
    cr_seed: int = 0
    backoff: bool = False
    exact_stats: bool = True     # use the enumeration oracle when n is small enough
    extra: dict = field(default_factory=dict)


def layer_stats(layered: LayeredDistribution, ch: BroadcastChannel, spec: CodeSpec) -> dict:
    if spec.exact_stats and spec.n <= EXACT_MAX_N:
        return exact_layer_stats(layered, ch, spec.n)
    return monte_carlo_layer_stats(layered, ch, spec.n, spec.stats_samples,
                                   np.random.default_rng(spec.stats_seed))


def construct(layered: LayeredDistribution, ch: BroadcastChannel, spec: CodeSpec,
              stats: dict | None = None) -> CodeInstance:
    prof = profile(layered, ch)
    pair = RatePair(spec.r0, spec.r1)
    split = constructive_rate_split(pair, prof)
    if stats is None:
        stats = layer_stats(layered, ch, spec)
    targets = spec.targets
    if spec.selection_mode == "rank" and targets is None:
        if spec.target_rule == "rate":
            targets = rate_matched_targets(layered, ch, spec.r0, split.r11, split.r12,
                                           spec.source_gap, spec.rate_margin)
        elif spec.target_rule == "gap":
            targets = rank_targets(layered, ch, spec.source_gap, spec.receiver_gap)
        else:
            raise ValueError(f"unknown target rule {spec.target_rule!r}")
    sets = select_sets(stats, spec.selection_mode, spec.beta, targets)
    inst = create_instance(layered, ch, sets, spec.r0, split, spec.k, spec.frozen_seed,
                           spec.cr_seed, spec.backoff)
    inst.meta.update({"profile": prof.as_dict(), "split": (split.r11, split.r12),
                      "requested": (spec.r0, spec.r1)})
    return inst
