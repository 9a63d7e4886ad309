"""Secret-key layout, parameter derivation and IV handling.

Key bit layout, MSB first::

    prec flag (1)  | r0 (prec) | l0 (prec) | a (4) | n x [ i (b) | j (b) | e (4) ]

with prec = 16 (flag 0) or 32 (flag 1) and b = ceil(log2 ell).  For ell = 8
that is 1 + 2 prec + 4 + 10 n bits: 97 bits for (16, n=6), 119 for (32, n=5).

Everything except E is derived from the keyed chaotic orbit: the permutation
from the first q post-transient iterates, then B, F, W (and the synchronous
feedback matrix) from the top nibbles of the iterates that follow.
"""

from __future__ import annotations

import re
import secrets
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chaos import ChaoticState, cycle_length, generate_window, stream_nibbles
from .errors import FormatError, KeyConstraintError, KeyRejected, RetryNeeded, SingularMatrixError, UsageError, WeakKeyError
from .gf import FieldMatrix, FieldSpec, mat_inv, mat_mul
from .kernel import MODES, SELFSYNC, SYNC, CipherParams, CipherState
from .permutation import build_permutation

PREC_BY_FLAG = {0: 16, 1: 32}
FLAG_BY_PREC = {16: 0, 32: 1}
MAX_ATTEMPTS = 64
MIN_CYCLE = 1 << 10  # orbit must outlast the window plus all matrix draws
KEY_HEADER = "plcie-key v1 ell={ell} field=gf16"


def index_bits(ell: int) -> int:
    return max(1, (ell - 1).bit_length())


def triple_bits(ell: int) -> int:
    return 2 * index_bits(ell) + 4


def default_iota(ell: int) -> int:
    return 4 * ell


@dataclass(frozen=True)
class KeyMaterial:
    prec: int
    r0: int
    l0: int
    a: int
    triples: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.prec not in FLAG_BY_PREC:
            raise KeyConstraintError(f"prec must be 16 or 32, got {self.prec}")
        if not (0 <= self.r0 < 1 << self.prec and 0 <= self.l0 < 1 << self.prec):
            raise KeyConstraintError("r0 and l0 must fit in prec bits")
        if not 0 <= self.a < 16:
            raise KeyConstraintError("a must be a GF(16) element")
        object.__setattr__(self, "triples", tuple(tuple(t) for t in self.triples))

    def validate(self, ell: int) -> None:
        if 2 * len(self.triples) >= ell * ell:
            raise KeyConstraintError(f"{len(self.triples)} triples; need n < ell^2/2 = {ell * ell / 2:g}")
        for i, j, e in self.triples:
            if not (0 <= i < ell and 0 <= j < ell and 0 <= e < 16):
                raise KeyConstraintError(f"triple {(i, j, e)} out of range for ell={ell}")
        if self.r0 == 0:
            raise WeakKeyError("r0 = 0 is a fixed point of the map")
        if self.l0 == 0:
            raise WeakKeyError("l0 must be at least 1")

    def bit_length(self, ell: int) -> int:
        return 1 + 2 * self.prec + 4 + triple_bits(ell) * len(self.triples)

    def to_bits(self, ell: int) -> str:
        b = index_bits(ell)
        parts = [
            str(FLAG_BY_PREC[self.prec]),
            format(self.r0, f"0{self.prec}b"),
            format(self.l0, f"0{self.prec}b"),
            format(self.a, "04b"),
        ]
        for i, j, e in self.triples:
            if i >= 1 << b or j >= 1 << b:
                raise KeyConstraintError(f"triple index does not fit in {b} bits")
            parts += [format(i, f"0{b}b"), format(j, f"0{b}b"), format(e, "04b")]
        return "".join(parts)


def parse_key(bits: str, ell: int) -> KeyMaterial:
    if not bits or set(bits) - {"0", "1"}:
        raise FormatError("key must be a non-empty string of 0/1 characters")
    prec = PREC_BY_FLAG[int(bits[0])]
    head = 1 + 2 * prec + 4
    width = triple_bits(ell)
    rest = len(bits) - head
    if rest < 0 or rest % width:
        raise FormatError(f"{len(bits)}-bit key does not match the layout for prec={prec}, ell={ell}")
    r0 = int(bits[1 : 1 + prec], 2)
    l0 = int(bits[1 + prec : 1 + 2 * prec], 2)
    a = int(bits[1 + 2 * prec : head], 2)
    b = index_bits(ell)
    triples = []
    for k in range(head, len(bits), width):
        chunk = bits[k : k + width]
        triples.append((int(chunk[:b], 2), int(chunk[b : 2 * b], 2), int(chunk[2 * b :], 2)))
    km = KeyMaterial(prec, r0, l0, a, tuple(triples))
    km.validate(ell)
    return km


def generate_key(prec: int = 16, n: int | None = None, ell: int = 8, rng: np.random.Generator | None = None) -> KeyMaterial:
    """Random valid key.  Triples hit distinct cells and never repeat the default ``a``."""
    rng = np.random.default_rng() if rng is None else rng
    if n is None:
        n = 6 if prec == 16 else 5
    if 2 * n >= ell * ell:
        raise KeyConstraintError(f"n = {n} triples violates n < ell^2/2")
    top = 1 << prec
    r0 = int(rng.integers(1, top))
    l0 = int(rng.integers(1, top))
    a = int(rng.integers(0, 16))
    cells = rng.choice(ell * ell, size=n, replace=False)
    triples = []
    for c in cells:
        e = int(rng.integers(0, 15))
        triples.append((int(c) // ell, int(c) % ell, e if e < a else e + 1))
    km = KeyMaterial(prec, r0, l0, a, tuple(triples))
    km.validate(ell)
    return km


def write_key_file(km: KeyMaterial, ell: int = 8) -> str:
    bits = km.to_bits(ell)
    padded = bits + "0" * (-len(bits) % 4)
    hexstr = "".join(format(int(padded[k : k + 4], 2), "x") for k in range(0, len(padded), 4))
    return KEY_HEADER.format(ell=ell) + "\n" + hexstr + "\n"


_HEADER_RE = re.compile(r"^plcie-key v1 ell=(\d+) field=gf16$")


def read_key_file(text: str) -> tuple[KeyMaterial, int]:
    """Parse a key file; the bit length is recovered from the hex length and prec flag."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) != 2:
        raise FormatError("key file must hold a header line and one hex line")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise FormatError(f"bad key file header {lines[0]!r}")
    ell = int(m.group(1))
    hexstr = lines[1].lower()
    if not re.fullmatch(r"[0-9a-f]+", hexstr):
        raise FormatError("key body is not lowercase hex")
    padded = "".join(format(int(ch, 16), "04b") for ch in hexstr)
    prec = PREC_BY_FLAG[int(padded[0])]
    head = 1 + 2 * prec + 4
    n = (len(padded) - head) // triple_bits(ell)
    if n < 0:
        raise FormatError("key file is too short")
    nbits = head + n * triple_bits(ell)
    if len(padded) - nbits >= 4 or "1" in padded[nbits:]:
        raise FormatError("key hex length or padding is inconsistent with the layout")
    return parse_key(padded[:nbits], ell), ell


def _matrix_from(nibbles, field: FieldSpec, ell: int) -> FieldMatrix:
    return FieldMatrix.from_flat(field, ell, [next(nibbles) for _ in range(ell * ell)])


def shift_matrix(field: FieldSpec, ell: int) -> FieldMatrix:
    """Ones on the superdiagonal; nilpotent of index exactly ell."""
    return FieldMatrix(field, tuple(tuple(int(j == i + 1) for j in range(ell)) for i in range(ell)))


def derive_params(km: KeyMaterial, ell: int = 8, field: FieldSpec | None = None, mode: str = SELFSYNC, iota: int | None = None) -> CipherParams:
    field = FieldSpec.gf16() if field is None else field
    if field.kind != "binary":
        raise UsageError("key material encodes GF(16) entries; other fields are library-only")
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}")
    km.validate(ell)
    q = field.q
    mask = (1 << km.prec) - 1

    window = None
    for attempt in range(MAX_ATTEMPTS):
        # retries move the perturbation off bit 0 so a key and its low-bit
        # neighbour can't land on the same seed
        x0 = km.r0 if attempt == 0 else ((km.r0 ^ (attempt << (km.prec // 2))) | 1) & mask
        if x0 == 0 or cycle_length(x0, km.prec) < MIN_CYCLE:
            continue
        try:
            window = generate_window(ChaoticState(x0, km.prec), km.l0, q)
            break
        except RetryNeeded:
            continue
    if window is None:
        raise KeyRejected("no duplicate-free orbit window within the retry bound")
    pi = build_permutation(window)
    nib = stream_nibbles(window.values[-1], km.prec)

    B = _matrix_from(nib, field, ell)
    for _ in range(MAX_ATTEMPTS):
        F = _matrix_from(nib, field, ell)
        try:
            F_inv = mat_inv(F)
            break
        except SingularMatrixError:
            continue
    else:
        raise KeyRejected("no invertible F within the retry bound")
    W = _matrix_from(nib, field, ell)
    A_sync = _matrix_from(nib, field, ell)

    e = [[km.a] * ell for _ in range(ell)]
    for i, j, v in km.triples:
        e[i][j] = v
    E = FieldMatrix(field, tuple(tuple(r) for r in e))
    D = shift_matrix(field, ell)
    zero = FieldMatrix.zeros(field, ell)
    iota = default_iota(ell) if iota is None else iota
    if iota < 0:
        raise UsageError("iota must be non-negative")

    if mode == SYNC:
        return CipherParams(ell, field, pi, A_sync, B, D, zero, F, zero, iota, SYNC, F_inv)
    A = mat_mul(mat_mul(E, F_inv), B)
    return CipherParams(ell, field, pi, A, B, D, E, F, W, iota, SELFSYNC, F_inv)


def generate_iv(ell: int = 8, rng: np.random.Generator | None = None) -> tuple:
    """2*ell uniformly random GF(16) words."""
    if rng is None:
        return tuple(secrets.randbelow(16) for _ in range(2 * ell))
    return tuple(int(v) for v in rng.integers(0, 16, size=2 * ell))


def init_from_iv(iv: Sequence[int], params: CipherParams) -> CipherState:
    ell = params.ell
    if len(iv) != 2 * ell:
        raise FormatError(f"IV must hold {2 * ell} words, got {len(iv)}")
    for w in iv:
        params.field.check(int(w))
    return CipherState(tuple(int(w) for w in iv[:ell]), tuple(int(w) for w in iv[ell:]), -params.iota)
