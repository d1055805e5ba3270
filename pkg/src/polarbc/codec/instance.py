"""Code instance: everything the encoder and the three decoders share."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..channels import BroadcastChannel
from ..models import letter_models
from ..polarization import BitChannelSets
from ..probability import LayeredDistribution
from ..region import RateSplit, bit_counts
from .layout import (LAYER_ORDER, ChainingLayout, RateBackoffError, budget_formula, build_layout,
                     check_counts, max_feasible_scale, message_bit_budget)

log = logging.getLogger(__name__)


@dataclass(eq=False)
class CodeInstance:
    N: int
    k: int
    sets: BitChannelSets
    layout: ChainingLayout
    budget: tuple                 # (public_total, private_total)
    frozen_bits: np.ndarray       # (k, 3, N) uint8, zero off the frozen positions
    common_randomness_seed: int
    layered: LayeredDistribution
    channel: BroadcastChannel
    rates: tuple                  # (r0, r11, r12) actually used
    frozen_seed: int = 0
    backoff_scale: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def case_tag(self) -> str:
        return self.layout.case_tag

    @cached_property
    def models(self) -> dict:
        return letter_models(self.layered, self.channel)

    @cached_property
    def _roles(self) -> list:
        return [self.layout.roles(t) for t in range(self.k)]

    def roles(self, t: int) -> dict:
        return self._roles[t]

    @cached_property
    def frozen_masks(self) -> np.ndarray:
        """(k, 3, N) bool: H positions carrying neither message bits nor copies."""
        return frozen_masks(self.sets, self.layout)

    def public_slots(self):
        """[(t, layer, indices)] in stream order."""
        return [(t, L, self.roles(t)[L]["public"]) for t in range(self.k) for L in LAYER_ORDER
                if len(self.roles(t)[L]["public"])]

    def private_slots(self):
        return [(t, L, self.roles(t)[L]["private"]) for t in range(self.k) for L in LAYER_ORDER
                if len(self.roles(t)[L]["private"])]

    def realized_rates(self) -> tuple[float, float]:
        return self.budget[0] / (self.k * self.N), self.budget[1] / (self.k * self.N)


def frozen_masks(sets: BitChannelSets, layout: ChainingLayout) -> np.ndarray:
    N, k = sets.N, layout.k
    out = np.zeros((k, 3, N), bool)
    for t in range(k):
        r = layout.roles(t)
        for q, L in enumerate(LAYER_ORDER):
            m = np.zeros(N, bool)
            m[sets[L].H] = True
            for role in ("public", "private", "dest"):
                m[r[L][role]] = False
            out[t, q] = m
    return out


def create_instance(layered: LayeredDistribution, ch: BroadcastChannel, sets: BitChannelSets,
                    r0: float, split: RateSplit, k: int, frozen_seed: int = 0, cr_seed: int = 0,
                    backoff: bool = False) -> CodeInstance:
    """Turn rates into bit counts, lay out the chain and draw the frozen bits.

    With ``backoff`` the rates are scaled down by the largest feasible
    common factor when the finite-N set sizes cannot hold them.
    """
    N = sets.N
    rates = (r0, split.r11, split.r12)
    counts = bit_counts(N, r0, split)
    scale = 1.0
    try:
        check_counts(sets, *counts, rates=rates)
    except RateBackoffError as exc:
        if not backoff:
            raise
        scale = exc.max_scale if exc.max_scale is not None else max_feasible_scale(sets, *rates)
        rates = tuple(r * scale for r in rates)
        counts = bit_counts(N, rates[0], RateSplit(rates[1], rates[2]))
        log.info("rates scaled by %.3f to fit the finite-length sets", scale)
    layout = build_layout(sets, counts, k)
    budget = message_bit_budget(layout)
    if budget != budget_formula(layout.case_tag, k, counts, sets):
        raise AssertionError("message budget disagrees with the per-case formula")
    masks = frozen_masks(sets, layout)
    rng = np.random.default_rng(frozen_seed)
    frozen = (rng.integers(0, 2, size=(k, 3, N), dtype=np.uint8) * masks).astype(np.uint8)
    return CodeInstance(N, k, sets, layout, budget, frozen, cr_seed, layered, ch, rates,
                        frozen_seed, scale)
