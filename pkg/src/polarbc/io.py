"""On-disk formats: packed bit arrays, instance JSON, result JSON and config YAML.

Bit arrays are an 8-byte little-endian bit count followed by the bits
packed little-endian within each byte.  Symbol streams over an alphabet of
size q use ceil(log2 q) bits per symbol, least significant bit first.
"""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np
import yaml

from .channels import BroadcastChannel
from .codec.instance import CodeInstance
from .codec.layout import ChainingLayout, CopyLink
from .harness import ExperimentConfig, ResultRecord
from .polarization import BitChannelSets, LayerSets
from .probability import ConditionalPmf, LayeredDistribution, Pmf, ValidationError

FORMAT_VERSION = 1
CONFIG_VERSION = 1


# ---------------------------------------------------------------- bit arrays

def pack_bits(bits) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size and bits.max() > 1:
        raise ValidationError("bit array holds values other than 0 and 1")
    return struct.pack("<Q", bits.size) + np.packbits(bits, bitorder="little").tobytes()


def unpack_bits(data: bytes) -> np.ndarray:
    if len(data) < 8:
        raise ValidationError("bit file shorter than its 8-byte header")
    (count,) = struct.unpack("<Q", data[:8])
    body = data[8:]
    if len(body) != (count + 7) // 8:
        raise ValidationError(f"bit file holds {len(body)} bytes, header says {count} bits")
    return np.unpackbits(np.frombuffer(body, np.uint8), count=count, bitorder="little")


def write_bits(path, bits):
    Path(path).write_bytes(pack_bits(bits))


def read_bits(path) -> np.ndarray:
    return unpack_bits(Path(path).read_bytes())


def symbol_width(alphabet: int) -> int:
    return max(1, math.ceil(math.log2(alphabet)))


def symbols_to_bits(symbols, alphabet: int) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.int64).ravel()
    if s.size and (s.min() < 0 or s.max() >= alphabet):
        raise ValidationError(f"symbol outside alphabet of size {alphabet}")
    width = symbol_width(alphabet)
    return ((s[:, None] >> np.arange(width)) & 1).astype(np.uint8).ravel()


def bits_to_symbols(bits, alphabet: int) -> np.ndarray:
    width = symbol_width(alphabet)
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % width:
        raise ValidationError(f"{bits.size} bits do not split into {width}-bit symbols")
    s = (bits.reshape(-1, width) << np.arange(width)).sum(axis=1)
    if s.size and s.max() >= alphabet:
        raise ValidationError(f"symbol outside alphabet of size {alphabet}")
    return s.astype(np.uint8)


def write_symbols(path, symbols, alphabet: int):
    write_bits(path, symbols_to_bits(symbols, alphabet))


def read_symbols(path, alphabet: int) -> np.ndarray:
    return bits_to_symbols(read_bits(path), alphabet)


# ---------------------------------------------------------------- instance JSON

def _ints(a) -> list:
    return [int(v) for v in np.asarray(a).ravel()]


def _arr(v) -> np.ndarray:
    return np.asarray(v, dtype=np.int64)


def sets_to_dict(sets: BitChannelSets) -> dict:
    layers = {}
    for name, s in sets.layers.items():
        layers[name] = {"H": _ints(s.H), "L": _ints(s.L),
                        "L_rx": {str(j): _ints(v) for j, v in s.L_rx.items()},
                        "H_rx": {str(j): _ints(v) for j, v in s.H_rx.items()}}
    return {"N": sets.N, "selection_mode": sets.selection_mode, "delta_n": sets.delta_n,
            "nesting_removed": [int(i) for i in sets.nesting_removed], "layers": layers}


def sets_from_dict(d: dict) -> BitChannelSets:
    layers = {}
    for name, s in d["layers"].items():
        layers[name] = LayerSets(_arr(s["H"]), _arr(s["L"]),
                                 {int(j): _arr(v) for j, v in s["L_rx"].items()},
                                 {int(j): _arr(v) for j, v in s["H_rx"].items()}, d["N"])
    return BitChannelSets(layers, d["N"], d["selection_mode"], d["delta_n"], list(d["nesting_removed"]))


def layout_to_dict(lay: ChainingLayout) -> dict:
    part = lambda p: {k: _ints(v) for k, v in p.items()}
    return {"case_tag": lay.case_tag, "k": lay.k, "N": lay.N, "counts": [int(c) for c in lay.counts],
            "w_parts": part(lay.w_parts), "v_parts": part(lay.v_parts), "x_parts": part(lay.x_parts),
            "copy_links": [{"sources": [[L, _ints(i)] for L, i in ln.sources],
                            "dest_layer": ln.dest_layer, "dest": _ints(ln.dest)}
                           for ln in lay.copy_links]}


def layout_from_dict(d: dict) -> ChainingLayout:
    part = lambda p: {k: _arr(v) for k, v in p.items()}
    links = [CopyLink(tuple((L, _arr(i)) for L, i in ln["sources"]), ln["dest_layer"], _arr(ln["dest"]))
             for ln in d["copy_links"]]
    return ChainingLayout(d["case_tag"], d["k"], d["N"], tuple(d["counts"]), part(d["w_parts"]),
                          part(d["v_parts"]), part(d["x_parts"]), links)


def _rows(a) -> list:
    return [[float(v) for v in row] for row in np.asarray(a)]


def instance_to_dict(inst: CodeInstance) -> dict:
    ch = inst.channel
    lay = inst.layered
    return {
        "format": "polarbc-instance", "version": FORMAT_VERSION,
        "N": inst.N, "k": inst.k,
        "channel": {"y1_size": ch.y1_size, "y3_size": ch.y3_size,
                    "k13": _rows(ch.k13.rows), "k2": _rows(ch.k2.rows)},
        "distribution": {"pw": [float(v) for v in lay.pw.mass],
                         "pv_given_w": _rows(lay.pv_given_w.rows),
                         "px_given_v": _rows(lay.px_given_v.rows)},
        "rates": [float(r) for r in inst.rates],
        "budget": [int(b) for b in inst.budget],
        "seeds": {"frozen": int(inst.frozen_seed), "common_randomness": int(inst.common_randomness_seed)},
        "backoff_scale": float(inst.backoff_scale),
        "sets": sets_to_dict(inst.sets),
        "layout": layout_to_dict(inst.layout),
        "frozen_bits": [[_ints(row) for row in blk] for blk in inst.frozen_bits],
    }


def instance_from_dict(d: dict) -> CodeInstance:
    if d.get("format") != "polarbc-instance":
        raise ValidationError("not an instance document")
    if d.get("version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported instance version {d.get('version')!r}")
    c = d["channel"]
    ch = BroadcastChannel(c["y1_size"], c["y3_size"], ConditionalPmf(np.asarray(c["k13"])),
                          ConditionalPmf(np.asarray(c["k2"])))
    dist = d["distribution"]
    layered = LayeredDistribution(Pmf(np.asarray(dist["pw"])), ConditionalPmf(np.asarray(dist["pv_given_w"])),
                                  ConditionalPmf(np.asarray(dist["px_given_v"])))
    frozen = np.asarray(d["frozen_bits"], dtype=np.uint8)
    return CodeInstance(d["N"], d["k"], sets_from_dict(d["sets"]), layout_from_dict(d["layout"]),
                        tuple(d["budget"]), frozen, d["seeds"]["common_randomness"], layered, ch,
                        tuple(d["rates"]), d["seeds"]["frozen"], d["backoff_scale"])


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def save_instance(path, inst: CodeInstance):
    Path(path).write_text(dumps_json(instance_to_dict(inst)))


def load_instance(path) -> CodeInstance:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"instance file is not valid JSON: {exc}") from exc
    try:
        return instance_from_dict(d)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed instance document: {exc}") from exc


def instances_equal(a: CodeInstance, b: CodeInstance) -> bool:
    return instance_to_dict(a) == instance_to_dict(b)


def records_to_json(records: list[ResultRecord], config: ExperimentConfig | None = None) -> str:
    doc = {"format": "polarbc-results", "version": FORMAT_VERSION,
           "records": [r.to_dict() for r in records]}
    if config is not None:
        doc["config"] = config.to_dict()
    return dumps_json(doc)


def records_from_json(text: str) -> list[ResultRecord]:
    doc = json.loads(text)
    if doc.get("format") != "polarbc-results" or doc.get("version") != FORMAT_VERSION:
        raise ValidationError("not a version-1 results document")
    return [ResultRecord.from_dict(r) for r in doc["records"]]


# ---------------------------------------------------------------- config YAML

_SCHEMA = {
    "version": None,
    "channel": {"c1": "kernel", "c3": "kernel", "c2": "kernel"},
    "distribution": {"pw1": None, "pv1_given_w": None, "px1_given_v": None},
    "rates": {"r0": None, "r1": None, "corner_fraction": None},
    "code": {"n": None, "k": None, "selection_mode": None, "beta": None, "source_gap": None,
             "receiver_gap": None, "target_rule": None, "rate_margin": None, "stats_samples": None,
             "backoff": None},
    "experiment": {"trials": None, "batch": None, "seeds": {"stats": None, "frozen": None, "cr": None,
                                                           "trials": None}},
}
_KERNEL_KEYS = {"kind", "p", "size", "rows"}
_REQUIRED = ("version", "channel", "distribution", "rates", "code", "experiment")


def _check_keys(doc, schema, where: str):
    if not isinstance(doc, dict):
        raise ValidationError(f"{where or 'config'} must be a mapping")
    for key, value in doc.items():
        path = f"{where}.{key}" if where else str(key)
        if key not in schema:
            raise ValidationError(f"unknown config key {path!r}")
        sub = schema[key]
        if sub == "kernel":
            if not isinstance(value, dict):
                raise ValidationError(f"{path} must be a mapping")
            extra = set(value) - _KERNEL_KEYS
            if extra:
                raise ValidationError(f"unknown config key {path}.{sorted(extra)[0]!r}")
        elif isinstance(sub, dict):
            _check_keys(value, sub, path)


def config_from_dict(doc: dict) -> ExperimentConfig:
    _check_keys(doc, _SCHEMA, "")
    for key in _REQUIRED:
        if key not in doc:
            raise ValidationError(f"config is missing section {key!r}")
    if doc["version"] != CONFIG_VERSION:
        raise ValidationError(f"unsupported config version {doc['version']!r}")
    rates = doc["rates"]
    if "corner_fraction" in rates and ("r0" in rates or "r1" in rates):
        raise ValidationError("give either corner_fraction or r0/r1, not both")
    if "corner_fraction" not in rates and not {"r0", "r1"} <= set(rates):
        raise ValidationError("rates need r0 and r1 or corner_fraction")
    code = dict(doc["code"])
    exp = doc["experiment"]
    if "seeds" not in exp:
        raise ValidationError("experiment.seeds must be given")
    n = code.pop("n", [6, 8, 10])
    n = [int(v) for v in (n if isinstance(n, list) else [n])]
    k = int(code.pop("k", 4))
    backoff = bool(code.pop("backoff", False))
    selection = {("mode" if key == "selection_mode" else key): v for key, v in code.items()}
    try:
        return ExperimentConfig(channel=doc["channel"], distribution=doc["distribution"], rates=dict(rates),
                                k=k, n=n, trials=int(exp.get("trials", 10000)), seeds=dict(exp["seeds"]),
                                selection=selection, backoff=backoff, batch=int(exp.get("batch", 2000)))
    except TypeError as exc:
        raise ValidationError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ValidationError(f"config is not valid YAML: {exc}") from exc
    return config_from_dict(doc)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    code = {"n": list(cfg.n), "k": cfg.k, "backoff": cfg.backoff}
    for key, v in cfg.selection.items():
        code["selection_mode" if key == "mode" else key] = v
    return {"version": CONFIG_VERSION, "channel": cfg.channel, "distribution": cfg.distribution,
            "rates": cfg.rates, "code": code,
            "experiment": {"trials": cfg.trials, "batch": cfg.batch, "seeds": cfg.seeds}}


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
