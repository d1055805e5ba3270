"""Monte Carlo campaigns: block error rates, encoder TV trend, rate-region sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .channels import BroadcastChannel, bec, bsc, identity, make_product_channel, transmit
from .codec import decode_receiver1, decode_receiver2, decode_receiver3, encode_chain
from .codec.encoder import encode_layer
from .construction import CodeSpec, construct, layer_stats
from .enumeration import block_tv
from .models import LAYERS
from .polar import polar_transform
from .probability import ConditionalPmf, LayeredDistribution, ValidationError
from .region import RatePair, profile, region_corner

log = logging.getLogger(__name__)

WILSON_Z = 1.959963984540054
RECEIVER_KEYS = ("1", "2", "3", "joint")


# ---------------------------------------------------------------- config

def kernel_from_spec(spec) -> ConditionalPmf:
    """{"kind": "bsc" | "bec" | "identity" | "matrix", ...} -> kernel."""
    kind = spec.get("kind")
    if kind == "bsc":
        return bsc(float(spec["p"]))
    if kind == "bec":
        return bec(float(spec["p"]))
    if kind == "identity":
        return identity(int(spec.get("size", 2)))
    if kind == "matrix":
        return ConditionalPmf(np.asarray(spec["rows"], dtype=float))
    raise ValidationError(f"unknown kernel kind {kind!r}")


@dataclass
class ExperimentConfig:
    channel: dict
    distribution: dict
    rates: dict
    k: int = 4
    n: list = field(default_factory=lambda: [6, 8, 10])
    trials: int = 10000
    seeds: dict = field(default_factory=lambda: {"stats": 0, "frozen": 0, "cr": 0, "trials": 0})
    selection: dict = field(default_factory=dict)
    backoff: bool = False
    batch: int = 2000

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        for key in ("stats", "frozen", "cr", "trials"):
            if key not in self.seeds:
                raise ValidationError(f"seed {key!r} must be given explicitly")

    def build_channel(self) -> BroadcastChannel:
        c = self.channel
        return make_product_channel(kernel_from_spec(c["c1"]), kernel_from_spec(c["c3"]),
                                    kernel_from_spec(c["c2"]))

    def build_distribution(self) -> LayeredDistribution:
        d = self.distribution
        return LayeredDistribution.from_params(float(d["pw1"]), tuple(d["pv1_given_w"]),
                                               tuple(d["px1_given_v"]))

    def rate_pair(self, layered=None, ch=None) -> RatePair:
        r = self.rates
        if "corner_fraction" in r:
            layered = layered or self.build_distribution()
            ch = ch or self.build_channel()
            c = region_corner(profile(layered, ch))
            f = float(r["corner_fraction"])
            return RatePair(f * c.r0, f * c.r1)
        return RatePair(float(r["r0"]), float(r["r1"]))

    def code_spec(self, n: int, pair: RatePair | None = None, k: int | None = None) -> CodeSpec:
        pair = pair or self.rate_pair()
        s = dict(self.selection)
        return CodeSpec(n=n, k=self.k if k is None else k, r0=pair.r0, r1=pair.r1,
                        selection_mode=s.get("mode", "rank"), beta=s.get("beta", 0.3),
                        source_gap=s.get("source_gap", 0.1), receiver_gap=s.get("receiver_gap", 0.2),
                        target_rule=s.get("target_rule", "gap"), rate_margin=s.get("rate_margin", 0.01),
                        stats_samples=s.get("stats_samples", 20000), stats_seed=int(self.seeds["stats"]),
                        frozen_seed=int(self.seeds["frozen"]), cr_seed=int(self.seeds["cr"]),
                        backoff=self.backoff)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------- error rates

def wilson_interval(errors: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = errors / trials
    den = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    lo = 0.0 if errors == 0 else max(0.0, mid - half)
    hi = 1.0 if errors == trials else min(1.0, mid + half)
    return lo, hi


@dataclass
class ResultRecord:
    n: int
    N: int
    k: int
    case_tag: str
    trials: int
    errors: dict              # receiver key -> block errors
    error_rate: dict
    wilson: dict
    realized_rates: tuple
    requested_rates: tuple
    budget: tuple
    backoff_scale: float = 1.0
    wall_clock: float = 0.0   # seconds; diagnostic only, never serialized

    def check(self):
        for key in RECEIVER_KEYS:
            if self.error_rate[key] != self.errors[key] / self.trials:
                raise AssertionError(f"error rate for {key} is not errors / trials")
        if self.errors["joint"] > self.errors["1"] + self.errors["2"] + self.errors["3"]:
            raise AssertionError("joint errors exceed the union bound")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("wall_clock")
        d["realized_rates"] = list(self.realized_rates)
        d["requested_rates"] = list(self.requested_rates)
        d["budget"] = list(self.budget)
        d["wilson"] = {k: list(v) for k, v in self.wilson.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResultRecord":
        d = dict(d)
        d["realized_rates"] = tuple(d["realized_rates"])
        d["requested_rates"] = tuple(d["requested_rates"])
        d["budget"] = tuple(d["budget"])
        d["wilson"] = {k: tuple(v) for k, v in d["wilson"].items()}
        return cls(**d)


def trial_draws(inst, seed: int, n: int, trials: np.ndarray):
    """Messages and per-trial generators; trial t depends only on (seed, n, t)."""
    pub = np.zeros((len(trials), inst.budget[0]), np.uint8)
    pri = np.zeros((len(trials), inst.budget[1]), np.uint8)
    gens = []
    for r, t in enumerate(trials):
        g = np.random.default_rng([seed, n, int(t)])
        pub[r] = g.integers(0, 2, inst.budget[0], dtype=np.uint8)
        pri[r] = g.integers(0, 2, inst.budget[1], dtype=np.uint8)
        gens.append(g)
    return pub, pri, gens


def simulate_instance(inst, trials: int, seed: int, batch: int = 2000, channel=None,
                      noiseless: bool = False) -> dict:
    """Block error counts per receiver and for the union event."""
    ch = channel or inst.channel
    n = int(round(math.log2(inst.N)))
    counts = dict.fromkeys(RECEIVER_KEYS, 0)
    for start in range(0, trials, batch):
        ids = np.arange(start, min(trials, start + batch))
        pub, pri, gens = trial_draws(inst, seed, n, ids)
        x = encode_chain(inst, pub, pri, sessions=ids)
        if noiseless:
            y1 = y2 = y3 = x
        else:
            samples = [transmit(ch, x[r], g) for r, g in enumerate(gens)]
            y1, y2, y3 = (np.stack([s[j] for s in samples]) for j in (1, 2, 3))
        p1, q1 = decode_receiver1(inst, y1, sessions=ids)
        p2 = decode_receiver2(inst, y2, sessions=ids)
        p3 = decode_receiver3(inst, y3, sessions=ids)
        e1 = (p1 != pub).any(axis=1) | (q1 != pri).any(axis=1)
        e2 = (p2 != pub).any(axis=1)
        e3 = (p3 != pub).any(axis=1)
        counts["1"] += int(e1.sum())
        counts["2"] += int(e2.sum())
        counts["3"] += int(e3.sum())
        counts["joint"] += int((e1 | e2 | e3).sum())
    return counts


def run_error_rate(config: ExperimentConfig, stats: dict | None = None,
                   noiseless: bool = False) -> list[ResultRecord]:
    """One ResultRecord per n in the config.

    ``stats`` may map n to precomputed bit-channel statistics.
    """
    layered, ch = config.build_distribution(), config.build_channel()
    pair = config.rate_pair(layered, ch)
    out = []
    for n in config.n:
        t0 = time.perf_counter()
        spec = config.code_spec(n, pair)
        inst = construct(layered, ch, spec, stats=None if stats is None else stats.get(n))
        counts = simulate_instance(inst, config.trials, int(config.seeds["trials"]), config.batch,
                                   noiseless=noiseless)
        rec = ResultRecord(
            n=n, N=inst.N, k=inst.k, case_tag=inst.case_tag, trials=config.trials, errors=counts,
            error_rate={key: counts[key] / config.trials for key in RECEIVER_KEYS},
            wilson={key: wilson_interval(counts[key], config.trials) for key in RECEIVER_KEYS},
            realized_rates=inst.realized_rates(), requested_rates=(pair.r0, pair.r1),
            budget=tuple(int(b) for b in inst.budget), backoff_scale=inst.backoff_scale,
            wall_clock=time.perf_counter() - t0)
        out.append(rec.check())
        log.info("n=%d case %s error rates %s", n, rec.case_tag, rec.error_rate)
    return out


def records_csv(records: list[ResultRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "N", "k", "case", "receiver", "trials", "errors", "rate", "wilson_lo", "wilson_hi",
                "realized_r0", "realized_r1"])
    for r in records:
        for key in RECEIVER_KEYS:
            lo, hi = r.wilson[key]
            w.writerow([r.n, r.N, r.k, r.case_tag, key, r.trials, r.errors[key], repr(r.error_rate[key]),
                        repr(lo), repr(hi), repr(r.realized_rates[0]), repr(r.realized_rates[1])])
    return buf.getvalue()


def non_increasing(values, sigmas, allowed_inversions: int = 1, nsigma: float = 2.0) -> bool:
    """True when every rise is covered by ``nsigma`` combined standard errors,
    except for at most ``allowed_inversions`` of them."""
    bad = 0
    for (a, sa), (b, sb) in zip(zip(values, sigmas), zip(values[1:], sigmas[1:])):
        if b > a:
            if b - a > nsigma * math.hypot(sa, sb):
                return False
            bad += 1
    return bad <= allowed_inversions


def binomial_sigma(rate: float, trials: int) -> float:
    return math.sqrt(max(rate * (1 - rate), 0.0) / trials)


# ---------------------------------------------------------------- TV trend

def sample_encoder_letters(layered: LayeredDistribution, sets, models: dict, samples: int,
                           rng: np.random.Generator, chunk: int = 10000) -> list[np.ndarray]:
    """Per chunk, counts of the 8 (w, v, x) letters pooled over block positions.

    Every sample uses fresh uniform H bits and fresh randomness for the
    sampled positions, i.e. one draw from the ensemble-averaged encoder.
    """
    N = sets.N
    out = []
    for start in range(0, samples, chunk):
        B = min(chunk, samples - start)
        prior = None
        seqs = []
        for L in LAYERS:
            h = rng.integers(0, 2, (B, N), dtype=np.uint8)
            unif = rng.random((B, N))
            u = encode_layer(models[(L, None)], sets[L], prior, h, unif)
            prior = polar_transform(u)
            seqs.append(prior)
        w, v, x = seqs
        idx = (w.astype(np.intp) * 4 + v * 2 + x).ravel()
        out.append(np.bincount(idx, minlength=8))
    return out


def letter_tv(counts: np.ndarray, target: np.ndarray) -> float:
    emp = counts / counts.sum()
    return 0.5 * float(np.abs(emp - target.ravel()).sum())


def run_tv_trend(config: ExperimentConfig, samples: int = 100000, rng: np.random.Generator | None = None,
                 batches: int = 20, stats: dict | None = None) -> dict:
    """Single-letter TV of the encoder output against p(w)p(v|w)p(x|v), per n.

    For n <= 3 the exact block-level TV and the summation bound are added.
    sigma is the batch-means standard error of the TV estimate.
    """
    if list(config.n) != sorted(config.n):
        raise ValidationError("n list must be ascending")
    rng = rng or np.random.default_rng(int(config.seeds["trials"]))
    layered, ch = config.build_distribution(), config.build_channel()
    pair = config.rate_pair(layered, ch)
    target = layered.joint()
    rows = []
    for n in config.n:
        spec = config.code_spec(n, pair, k=1)
        inst = construct(layered, ch, spec, stats=None if stats is None else stats.get(n))
        chunk = max(1, samples // batches)
        parts = sample_encoder_letters(layered, inst.sets, inst.models, samples, rng, chunk)
        pooled = np.sum(parts, axis=0)
        per_batch = [letter_tv(p, target) for p in parts]
        sigma = float(np.std(per_batch, ddof=1) / math.sqrt(len(per_batch))) if len(parts) > 1 else 0.0
        row = {"n": n, "N": inst.N, "samples": samples, "tv": letter_tv(pooled, target), "sigma": sigma}
        if n <= 3:
            ex = block_tv(layered, inst.sets)
            row.update({"exact_block_tv": ex["tv"], "bound": ex["bound"], "bound_terms": ex["bound_terms"]})
        rows.append(row)
    tvs = [r["tv"] for r in rows]
    return {"rows": rows, "non_increasing": non_increasing(tvs, [r["sigma"] for r in rows])}


# ---------------------------------------------------------------- region sweep

def distribution_vertices(prof) -> list[tuple[float, float]]:
    """Pareto vertices of one distribution's region (closure of the strict bounds)."""
    a = max(0.0, min(prof.i_w_y2, prof.i_v_y3))
    b = max(0.0, prof.i_x_y1_given_w)
    c = max(0.0, prof.i_v_y3 + prof.i_x_y1_given_v)
    pts = {(0.0, min(b, c)), (min(a, c), max(0.0, min(b, c - min(a, c))))}
    r0 = min(a, max(0.0, c - b))
    pts.add((r0, min(b, c - r0)))
    return sorted(pts)


def pareto_front(points) -> list[tuple]:
    pts = sorted(set(points), key=lambda p: (-p[0], -p[1]))
    front, best = [], -1.0
    for p in pts:
        if p[1] > best + 1e-12:
            front.append(p)
            best = p[1]
    return sorted(front)


def sweep_region(ch: BroadcastChannel, resolution: int = 5, rng: np.random.Generator | None = None,
                 random_points: int = 0) -> list[dict]:
    """Grid over (pw1, p(v|w), p(x|v)) and flag the union's Pareto frontier.

    ``random_points`` adds that many uniformly drawn distributions from ``rng``.
    """
    if resolution < 2:
        raise ValidationError("resolution must be >= 2")
    grid = np.linspace(0.0, 1.0, resolution)
    params = [tuple(float(v) for v in p) for p in itertools.product(grid, repeat=5)]
    if random_points:
        rng = rng or np.random.default_rng(0)
        params += [tuple(float(v) for v in rng.random(5)) for _ in range(random_points)]
    rows = []
    for pw1, a, b, c, d in params:
        lay = LayeredDistribution.from_params(pw1, (a, b), (c, d))
        prof = profile(lay, ch)
        for r0, r1 in distribution_vertices(prof):
            rows.append({"r0": r0, "r1": r1, "pw1": pw1, "pv1_w0": a, "pv1_w1": b,
                         "px1_v0": c, "px1_v1": d})
    front = set(pareto_front((r["r0"], r["r1"]) for r in rows))
    seen = set()
    for r in rows:
        key = (r["r0"], r["r1"])
        r["frontier"] = int(key in front and key not in seen)
        if r["frontier"]:
            seen.add(key)
    return rows


def region_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    cols = ["r0", "r1", "frontier", "pw1", "pv1_w0", "pv1_w1", "px1_v0", "px1_v1"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols])
    return buf.getvalue()
