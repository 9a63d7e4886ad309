"""Lossy-channel harness: corrupt cipher symbols in transit, measure how long the
observer takes to resynchronize, and benchmark encryption cost."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .cipher import Cipher
from .errors import UsageError
from .gf import count_ops
from .imageio import SymbolStream
from .keys import generate_iv, init_from_iv
from .kernel import CipherParams, encrypt_symbols

# Moustique: 6000N field operations per 4N plaintext bits
MOUSTIQUE_OPS_PER_SYMBOL = 6000 / 4


@dataclass
class CorruptionPlan:
    """Explicit substitutions ``(vector index, component, replacement)`` plus an
    optional i.i.d. per-symbol substitution rate drawn from ``seed``."""

    events: list = field(default_factory=list)
    rate: float = 0.0
    seed: int | None = None

    def realize(self, symbols, ell: int, q: int = 16) -> list:
        """All substitutions as (flat symbol index, new value); explicit events applied last."""
        n = len(symbols)
        subs = []
        if self.rate:
            if not 0 <= self.rate <= 1:
                raise UsageError("corruption rate must lie in [0, 1]")
            rng = np.random.default_rng(self.seed)
            hit = np.flatnonzero(rng.random(n) < self.rate)
            offsets = rng.integers(1, q, size=hit.size)
            subs += [(int(i), (int(symbols[i]) + int(o)) % q) for i, o in zip(hit, offsets)]
        for t, comp, value in self.events:
            if not 0 <= comp < ell:
                raise UsageError(f"component {comp} outside 0..{ell - 1}")
            idx = t * ell + comp
            if not 0 <= idx < n:
                raise UsageError(f"vector index {t} outside the stream")
            if not 0 <= value < q:
                raise UsageError(f"replacement {value} is not a field element")
            subs.append((idx, int(value)))
        return subs

    def to_json(self) -> dict:
        return {"events": [list(e) for e in self.events], "rate": self.rate, "seed": self.seed}

    @classmethod
    def from_json(cls, doc: dict) -> "CorruptionPlan":
        try:
            events = [tuple(int(x) for x in e) for e in doc.get("events", [])]
            if any(len(e) != 3 for e in events):
                raise ValueError
            return cls(events, float(doc.get("rate", 0.0)), doc.get("seed"))
        except (TypeError, ValueError):
            raise UsageError("corruption plan events must be [vector, component, value] triples") from None


def corrupt_stream(cipher, plan: CorruptionPlan, ell: int = 8, q: int = 16):
    """Copy of ``cipher`` (SymbolStream or symbol array) with the plan's substitutions.

    Rate-drawn corruptions replace a symbol by a different, uniformly chosen value.
    """
    is_stream = isinstance(cipher, SymbolStream)
    sym = np.array(cipher.symbols if is_stream else cipher, dtype=np.uint8)
    for idx, v in plan.realize(sym, ell, q):
        sym[idx] = v
    return SymbolStream(sym, cipher.nbytes) if is_stream else sym


@dataclass
class ResyncEvent:
    vector: int
    first_bad: int | None
    recovered_at: int
    delay: int
    wrong: int
    isolated: bool


@dataclass
class ResyncReport:
    events: list
    total_wrong: int
    bound: int

    @property
    def max_delay(self) -> int:
        return max((e.delay for e in self.events), default=0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vector", "first_bad", "recovered_at", "delay", "wrong", "isolated"])
        for e in self.events:
            w.writerow([e.vector, "" if e.first_bad is None else e.first_bad, e.recovered_at, e.delay, e.wrong, int(e.isolated)])
        return buf.getvalue()


def _compare(reference, decoded, touched_vectors, bound) -> ResyncReport:
    bad = np.flatnonzero(np.asarray(reference) != np.asarray(decoded))
    starts = sorted(set(touched_vectors))
    events = []
    for k, tau in enumerate(starts):
        end = starts[k + 1] if k + 1 < len(starts) else len(reference)
        mine = bad[(bad >= tau) & (bad < end)]
        isolated = end - tau > bound and (k == 0 or tau - starts[k - 1] > bound)
        if mine.size:
            last = int(mine[-1])
            events.append(ResyncEvent(tau, int(mine[0]), last + 1, last - tau, int(mine.size), isolated))
        else:
            events.append(ResyncEvent(tau, None, tau, 0, 0, isolated))
    return ResyncReport(events, int(bad.size), bound)


def measure_resync(params: CipherParams, iv, plaintext, plan: CorruptionPlan, whitening=None, cipher: Cipher | None = None):
    """Encrypt, corrupt per plan, decrypt; report recovery per corrupted vector.

    Indices count cipher vectors from the start of the stream, whitening
    included.  ``delay`` is the number of outputs after the corrupted one up to
    and including the last wrong output; the bound is ell + n0.

    Returns (report, sent symbols, received symbols).
    """
    cipher = Cipher(params) if cipher is None else cipher
    whitening = np.zeros(params.iota, dtype=np.uint8) if whitening is None else np.asarray(whitening, dtype=np.uint8)
    reference = np.concatenate([whitening, np.asarray(plaintext, dtype=np.uint8)])
    sent = cipher.encrypt(plaintext, iv, whitening=whitening)
    received = corrupt_stream(sent, plan, params.ell, params.field.q)
    decoded = cipher.decrypt(received, iv, keep_whitening=True)
    changed = np.flatnonzero(sent != received) // params.ell
    report = _compare(reference, decoded, changed.tolist(), params.ell + params.n0)
    return report, sent, received


def difference_trace(sent, received) -> np.ndarray:
    return np.abs(np.asarray(sent, dtype=np.int16) - np.asarray(received, dtype=np.int16))


def trace_csv(trace) -> str:
    return "index,abs_diff\n" + "".join(f"{i},{int(v)}\n" for i, v in enumerate(trace))


def count_field_ops(params: CipherParams, n_symbols: int, seed: int = 0):
    """Field operations the reference kernel spends on iota + n_symbols steps."""
    rng = np.random.default_rng(seed)
    st = init_from_iv(generate_iv(params.ell, rng), params)
    plain = rng.integers(0, params.field.q, size=params.iota + n_symbols).tolist()
    with count_ops() as ops:
        encrypt_symbols(params, st, plain)
    return ops


def bench_throughput(params: CipherParams, megabytes: float = 1.0, seed: int = 0, op_sample: int = 1024) -> dict:
    """Time bulk encryption of ``megabytes`` of random bytes and count field operations.

    Operation counts come from the instrumented reference kernel over
    ``op_sample`` plaintext symbols (the count per step is data independent).
    """
    rng = np.random.default_rng(seed)
    nbytes = max(1, int(megabytes * 2**20))
    sym = rng.integers(0, params.field.q, size=2 * nbytes).astype(np.uint8)
    cipher = Cipher(params)
    iv = generate_iv(params.ell, rng)
    t0 = time.perf_counter()
    cipher.encrypt(sym, iv, rng=rng)
    elapsed = time.perf_counter() - t0
    ops = count_field_ops(params, op_sample, seed)
    steps = params.iota + op_sample
    per_symbol = ops.total / steps
    return {
        "plain_symbols": int(sym.size),
        "seconds": elapsed,
        "symbols_per_sec": sym.size / elapsed,
        "bytes_per_sec": nbytes / elapsed,
        "field_ops_per_plain_symbol": per_symbol,
        "field_muls_per_plain_symbol": ops.muls / steps,
        "field_adds_per_plain_symbol": ops.adds / steps,
        "moustique_ops_per_symbol": MOUSTIQUE_OPS_PER_SYMBOL,
        "op_ratio_vs_moustique": MOUSTIQUE_OPS_PER_SYMBOL / per_symbol,
        "seed": seed,
    }
