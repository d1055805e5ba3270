"""Command-line interface: ``polarbc <command> [options]``.

Exit codes: 0 success, 1 internal error or failed verification,
2 invalid input or infeasible rates.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import io as pio
from .channels import transmit
from .codec import RateBackoffError, decode_receiver1, decode_receiver2, decode_receiver3, encode_chain
from .construction import construct
from .harness import records_csv, region_csv, run_error_rate, sweep_region
from .polarization import polarization_diagnostics
from .probability import ValidationError
from .region import NotAchievableError

log = logging.getLogger("polarbc")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad files or arguments; maps to exit code 2."""


def default_config_path() -> Path:
    return Path(str(resources.files("polarbc") / "data" / "default.yaml"))


def jsonable(obj):
    """Plain JSON types; non-finite floats become strings so output stays strict JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def load_cfg(args):
    cfg = pio.load_config(args.config or default_config_path())
    if args.seed is not None:
        cfg.seeds = dict.fromkeys(cfg.seeds, int(args.seed))
    if getattr(args, "backoff", False):
        cfg.backoff = True
    return cfg


# ---------------------------------------------------------------- commands

def cmd_construct(args) -> int:
    cfg = load_cfg(args)
    n = args.n if args.n is not None else cfg.n[0]
    layered, ch = cfg.build_distribution(), cfg.build_channel()
    inst = construct(layered, ch, cfg.code_spec(n, cfg.rate_pair(layered, ch)))
    if not args.out:
        raise InputError("construct needs --out for the instance file")
    pio.save_instance(args.out, inst)
    diag = {"case_tag": inst.case_tag, "N": inst.N, "k": inst.k, "budget": inst.budget,
            "rates": inst.rates, "realized_rates": inst.realized_rates(),
            "backoff_scale": inst.backoff_scale,
            "polarization": polarization_diagnostics(inst.sets, layered, ch)}
    sys.stdout.write(pio.dumps_json(jsonable(diag)))
    return EXIT_OK


def _session_ids(args, count: int) -> np.ndarray:
    return np.arange(args.session, args.session + count)


def cmd_encode(args) -> int:
    inst = pio.load_instance(args.instance)
    pub, pri = pio.read_bits(args.public), pio.read_bits(args.private)
    m0, m1 = inst.budget
    # the batch size comes from whichever message is non-empty
    if m0:
        B = pub.size // m0
    elif m1:
        B = pri.size // m1
    else:
        B = 1
    if B < 1 or pub.size != B * m0 or pri.size != B * m1:
        raise InputError(f"message files hold {pub.size} and {pri.size} bits; "
                         f"expected a common number of blocks of {m0} and {m1} bits")
    x = encode_chain(inst, pub.reshape(B, m0), pri.reshape(B, m1), sessions=_session_ids(args, B))
    pio.write_bits(args.out, x.reshape(-1))
    return EXIT_OK


def cmd_transmit(args) -> int:
    inst = pio.load_instance(args.instance)
    x = pio.read_bits(args.input)
    block = inst.k * inst.N
    if x.size == 0 or x.size % block:
        raise InputError(f"codeword file holds {x.size} bits, not a multiple of k*N = {block}")
    x = x.reshape(-1, inst.k, inst.N)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.noiseless:
        ys = {j: x for j in (1, 2, 3)}
    else:
        s = transmit(inst.channel, x, np.random.default_rng(0 if args.seed is None else args.seed))
        ys = {j: s[j] for j in (1, 2, 3)}
    for j, y in ys.items():
        pio.write_symbols(out / f"y{j}.bin", y.reshape(-1), inst.channel.output_size(j))
    return EXIT_OK


def cmd_decode(args) -> int:
    inst = pio.load_instance(args.instance)
    j = args.receiver
    y = pio.read_symbols(args.input, inst.channel.output_size(j))
    block = inst.k * inst.N
    if y.size == 0 or y.size % block:
        raise InputError(f"receiver file holds {y.size} symbols, not a multiple of k*N = {block}")
    y = y.reshape(-1, inst.k, inst.N)
    ids = _session_ids(args, y.shape[0])
    if j == 1:
        if not args.private_out:
            raise InputError("receiver 1 decodes the private message too; give --private-out")
        pub, pri = decode_receiver1(inst, y, sessions=ids)
        pio.write_bits(args.private_out, pri.reshape(-1))
    else:
        pub = (decode_receiver2 if j == 2 else decode_receiver3)(inst, y, sessions=ids)
    pio.write_bits(args.out, pub.reshape(-1))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_cfg(args)
    if args.trials is not None:
        cfg.trials = args.trials
    if args.n is not None:
        cfg.n = [args.n]
    records = run_error_rate(cfg, noiseless=args.noiseless)
    emit(pio.records_to_json(records, cfg), args.out)
    if args.csv:
        Path(args.csv).write_text(records_csv(records))
    return EXIT_OK


def cmd_region(args) -> int:
    cfg = load_cfg(args)
    rng = np.random.default_rng(int(cfg.seeds["stats"]))
    rows = sweep_region(cfg.build_channel(), args.resolution, rng, args.random_points)
    emit(region_csv(rows), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all

    seed = args.seed
    if seed is None:
        seed = int(pio.load_config(args.config).seeds["stats"]) if args.config else 0
    report = run_all(quick=args.quick, seed=seed)
    emit(pio.dumps_json(jsonable(report)), args.out)
    for name, r in report["suites"].items():
        log.info("%s: %s", name, "pass" if r["ok"] else "FAIL")
    return EXIT_OK if report["ok"] else EXIT_INTERNAL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polarbc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="YAML config (default: the shipped one)")
        sp.add_argument("--seed", type=int, help="override every seed in the config")
        sp.add_argument("--out", help="output path (stdout when omitted, where allowed)")

    sp = sub.add_parser("construct", help="build a code instance")
    common(sp)
    sp.add_argument("--n", type=int, help="log2 block length (default: first n in the config)")
    sp.add_argument("--backoff", action="store_true", help="scale rates down to fit the finite-N sets")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("encode", help="encode packed message bits")
    common(sp, config=False)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--public", required=True)
    sp.add_argument("--private", required=True)
    sp.add_argument("--session", type=int, default=0, help="first common-randomness session id")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("transmit", help="pass codewords through the instance's channel")
    common(sp, config=False)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--noiseless", action="store_true", help="y_j = x for every receiver")
    sp.set_defaults(func=cmd_transmit)

    sp = sub.add_parser("decode", help="decode one receiver's output file")
    common(sp, config=False)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--receiver", type=int, choices=(1, 2, 3), required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--private-out", help="receiver 1 only: private message output")
    sp.add_argument("--session", type=int, default=0)
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("simulate", help="block error rates over the configured n values")
    common(sp)
    sp.add_argument("--backoff", action="store_true")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--noiseless", action="store_true")
    sp.add_argument("--csv", help="also write a CSV summary here")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("region", help="sweep layered distributions for the capacity-region hull")
    common(sp)
    sp.add_argument("--resolution", type=int, default=5)
    sp.add_argument("--random-points", type=int, default=0)
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("verify", help="run the property suites; nonzero exit if any fails")
    common(sp)
    sp.add_argument("--quick", action="store_true", help="smaller sample counts")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "out", None) == "-":
        args.out = None
    try:
        return args.func(args)
    except NotAchievableError as exc:
        print(f"error: rates are not achievable for this channel: {exc}", file=sys.stderr)
    except RateBackoffError as exc:
        print(f"error: {exc} (use --backoff to scale the rates down)", file=sys.stderr)
    except (InputError, ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except ValueError as exc:
        # codec length checks and malformed numeric input
        print(f"error: {exc}", file=sys.stderr)
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
