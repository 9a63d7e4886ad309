"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 format error, 4 crypto/constraint error.
There is no integrity check: decrypting with the wrong key "succeeds" and
produces noise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import stats
from .channel import CorruptionPlan, bench_throughput, difference_trace, measure_resync, trace_csv
from .cipher import Cipher, decrypt_container, encrypt_image
from .errors import FormatError, PlcieError, UsageError
from .imageio import MAGIC, Container, GrayImage, bytes_to_symbols, read_pgm, write_pgm
from .keys import generate_iv, generate_key, read_key_file, write_key_file
from .kernel import MODES, SELFSYNC

ALL_METRICS = ("histogram", "entropy", "npcr", "uaci", "correlation", "sensitivity")


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str | None, data) -> None:
    if path is None or path == "-":
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    try:
        Path(path).write_bytes(data) if isinstance(data, bytes) else Path(path).write_text(data)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def _load_key(path: str):
    try:
        return read_key_file(_read(path).decode("ascii"))
    except UnicodeDecodeError:
        raise FormatError("key file is not ASCII") from None


def _load_image(path: str) -> GrayImage:
    data = _read(path)
    if data[:4] == MAGIC:
        return Container.from_bytes(data).cipher_image()
    return read_pgm(data)


def _seed(args) -> int:
    if args.seed is None:
        args.seed = stats.new_seed()
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def cmd_keygen(args) -> int:
    rng = np.random.default_rng(args.seed)  # OS entropy when no seed
    km = generate_key(args.prec, args.triples, args.ell, rng)
    _write(args.out, write_key_file(km, args.ell))
    return 0


def cmd_encrypt(args) -> int:
    km, ell = _load_key(args.key)
    img = read_pgm(_read(args.input))
    if args.seed is None:
        c = encrypt_image(km, img, ell=ell, mode=args.mode, iota=args.iota)
    else:
        rng = np.random.default_rng(args.seed)
        c = encrypt_image(km, img, ell=ell, mode=args.mode, iota=args.iota, iv=generate_iv(ell, rng), rng=rng)
    _write(args.out, c.to_bytes())
    return 0


def cmd_decrypt(args) -> int:
    km, ell = _load_key(args.key)
    c = Container.from_bytes(_read(args.input))
    if c.ell != ell:
        raise UsageError(f"container uses ell={c.ell}, key file says ell={ell}")
    _write(args.out, write_pgm(decrypt_container(km, c, mode=args.mode)))
    return 0


def cmd_analyze(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = set(metrics) - set(ALL_METRICS)
    if unknown:
        raise UsageError(f"unknown metrics: {', '.join(sorted(unknown))}")
    images = [_load_image(p) for p in args.inputs]
    if len(images) > 2:
        raise UsageError("analyze takes one or two images")
    first = images[0]
    reports = []
    for m in metrics:
        if m == "histogram":
            h = stats.histogram(first)
            if args.histogram_csv:
                _write(args.histogram_csv, stats.histogram_csv(h))
            nz = h[h > 0]
            reports.append(stats.AnalysisReport("histogram", {}, {"max_bin": int(h.max()), "mean_bin": float(h.mean()), "levels_used": int(nz.size)}))
        elif m == "entropy":
            reports.append(stats.entropy_report(first))
        elif m in ("npcr", "uaci"):
            if len(images) != 2:
                raise UsageError(f"{m} needs two images")
            fn = stats.npcr if m == "npcr" else stats.uaci
            reports.append(stats.AnalysisReport(m, {"granularity": args.granularity}, {m: fn(images[0], images[1], args.granularity)}))
        elif m == "correlation":
            reports.append(stats.correlation_report(first, args.samples, _seed(args)))
        elif m == "sensitivity":
            if not args.key:
                raise UsageError("sensitivity needs --key")
            km, ell = _load_key(args.key)
            seed = _seed(args)
            pos = "random" if args.position is None else args.position
            for kind in args.kinds.split(","):
                reports.append(stats.sensitivity_experiment(kind.strip(), km, first, seed, position=pos, ell=ell, granularity=args.granularity))
    out = stats.reports_to_json(reports) if args.format == "json" else stats.reports_to_csv(reports)
    _write(args.out, out)
    return 0


def cmd_channel(args) -> int:
    km, ell = _load_key(args.key)
    img = read_pgm(_read(args.input))
    seed = _seed(args)
    if args.plan:
        try:
            plan = CorruptionPlan.from_json(json.loads(_read(args.plan)))
        except json.JSONDecodeError as e:
            raise FormatError(f"corruption plan is not JSON: {e}") from None
    else:
        plan = CorruptionPlan([], args.rate, seed)
    cipher = Cipher.from_key(km, ell, args.mode, args.iota)
    rng = np.random.default_rng(seed)
    iv = generate_iv(ell, rng)
    whitening = rng.integers(0, 16, size=cipher.iota)
    plain = bytes_to_symbols(img.tobytes()).symbols
    report, sent, received = measure_resync(cipher.params, iv, plain, plan, whitening=whitening, cipher=cipher)
    _write(args.out, report.to_csv())
    if args.trace:
        _write(args.trace, trace_csv(difference_trace(sent, received)))
    print(f"events: {len(report.events)}  max delay: {report.max_delay}  bound: {report.bound}  wrong symbols: {report.total_wrong}", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    km, ell = _load_key(args.key)
    cipher = Cipher.from_key(km, ell, args.mode)
    seed = _seed(args)
    res = bench_throughput(cipher.params, args.megabytes, seed)
    _write(args.out, json.dumps(res, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plcie", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("keygen", help="write a random key file")
    k.add_argument("--prec", type=int, choices=(16, 32), default=16)
    k.add_argument("--triples", type=int, default=None, help="sparse E entries (default 6 for prec 16, 5 for 32)")
    k.add_argument("--ell", type=int, default=8)
    k.add_argument("--seed", type=int)
    k.add_argument("-o", "--out")
    k.set_defaults(func=cmd_keygen)

    for name, fn in (("encrypt", cmd_encrypt), ("decrypt", cmd_decrypt)):
        e = sub.add_parser(name, help=f"{name} a PGM image / PLC1 container")
        e.add_argument("--key", required=True)
        e.add_argument("-i", "--in", dest="input", required=True)
        e.add_argument("-o", "--out")
        e.add_argument("--mode", choices=MODES, default=SELFSYNC)
        if name == "encrypt":
            e.add_argument("--iota", type=int, help="whitening prefix length (default 4*ell)")
            e.add_argument("--seed", type=int, help="derive IV and whitening from a seed (testing only)")
        e.set_defaults(func=fn)

    a = sub.add_parser("analyze", help="statistical report on PGM images or PLC1 cipher images")
    a.add_argument("inputs", nargs="+")
    a.add_argument("--metrics", default="histogram,entropy,correlation")
    a.add_argument("--key", help="key file, needed for sensitivity")
    a.add_argument("--kinds", default="plaintext,key", help="sensitivity experiments to run")
    a.add_argument("--position", type=int, help="pixel index for the plaintext flip (default random)")
    a.add_argument("--samples", type=int, default=2500, help="adjacent pairs for correlation")
    a.add_argument("--granularity", choices=("byte", "symbol"), default="byte")
    a.add_argument("--format", choices=("csv", "json"), default="csv")
    a.add_argument("--histogram-csv")
    a.add_argument("--seed", type=int)
    a.add_argument("-o", "--out")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("channel", help="corrupt an encrypted image in transit and measure resynchronization")
    c.add_argument("--key", required=True)
    c.add_argument("-i", "--in", dest="input", required=True)
    c.add_argument("--plan", help="JSON corruption plan: {events: [[vector, component, value], ...], rate, seed}")
    c.add_argument("--rate", type=float, default=0.0)
    c.add_argument("--mode", choices=MODES, default=SELFSYNC)
    c.add_argument("--iota", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--trace", help="write |sent - received| per cipher symbol as CSV")
    c.add_argument("-o", "--out")
    c.set_defaults(func=cmd_channel)

    b = sub.add_parser("bench", help="throughput and field-operation count")
    b.add_argument("--key", required=True)
    b.add_argument("--megabytes", type=float, default=1.0)
    b.add_argument("--mode", choices=MODES, default=SELFSYNC)
    b.add_argument("--seed", type=int)
    b.add_argument("-o", "--out")
    b.set_defaults(func=cmd_bench)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except PlcieError as e:
        print(f"plcie: {e}", file=sys.stderr)
        return e.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
