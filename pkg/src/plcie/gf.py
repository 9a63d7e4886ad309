"""Arithmetic in GF(16) and small prime fields, plus dense matrix algebra over them.

Elements are plain ints in ``[0, q)``; a :class:`FieldSpec` carries the tables
and performs the operations.  :class:`FieldElement` is a thin checked wrapper
for code that wants operator syntax and protection against mixing fields.

Field operations can be tallied with :func:`count_ops`; the cipher benchmark
uses this to report operations per plaintext symbol.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import FieldDomainError, SingularMatrixError, UsageError

GF16_POLY = 0b10011  # x^4 + x + 1

Vector = tuple  # tuple[int, ...] of length ell


@dataclass
class OpCount:
    adds: int = 0
    muls: int = 0
    invs: int = 0

    @property
    def total(self) -> int:
        return self.adds + self.muls + self.invs


_counter: OpCount | None = None


@contextlib.contextmanager
def count_ops() -> Iterator[OpCount]:
    """Tally every add/sub/mul/inv performed through a FieldSpec inside the block.

    The counter is process-global; don't nest or run concurrently.
    """
    global _counter
    prev, _counter = _counter, OpCount()
    try:
        yield _counter
    finally:
        _counter = prev


def _clmul(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _poly_mod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def is_irreducible(poly: int) -> bool:
    """Irreducibility over GF(2) by trial division with every polynomial of degree <= deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(2, 1 << (deg // 2 + 1)):
        if _poly_mod(poly, d) == 0:
            return False
    return True


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, int(n**0.5) + 1))


class FieldSpec:
    """GF(16) with a fixed reduction polynomial, or GF(p) for a prime p < 256."""

    def __init__(self, kind: str, q: int, reduction_poly: int | None = None):
        if kind == "binary":
            if q != 16 or reduction_poly is None:
                raise UsageError("binary fields are GF(16) with an explicit reduction polynomial")
            if reduction_poly.bit_length() != 5 or not is_irreducible(reduction_poly):
                raise UsageError(f"{reduction_poly:#b} is not an irreducible degree-4 polynomial")
            self._mul = [[_poly_mod(_clmul(a, b), reduction_poly) for b in range(16)] for a in range(16)]
        elif kind == "prime":
            if not _is_prime(q) or q >= 256:
                raise UsageError(f"prime fields need a prime modulus below 256, got {q}")
            self._mul = [[(a * b) % q for b in range(q)] for a in range(q)]
            reduction_poly = None
        else:
            raise UsageError(f"unknown field kind {kind!r}")
        self.kind = kind
        self.q = q
        self.reduction_poly = reduction_poly
        self._inv = [0] * q
        for a in range(1, q):
            self._inv[a] = next(b for b in range(1, q) if self._mul[a][b] == 1)

    @classmethod
    def gf16(cls) -> "FieldSpec":
        return _GF16

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls("prime", p)

    @property
    def modulus(self) -> int | None:
        return self.q if self.kind == "prime" else None

    @property
    def field_id(self) -> int:
        """Identifier written into ciphertext headers (0 = GF(16), else the prime)."""
        return 0 if self.kind == "binary" else self.q

    @property
    def name(self) -> str:
        return "gf16" if self.kind == "binary" else f"gf{self.q}"

    def __repr__(self) -> str:
        if self.kind == "binary":
            return f"FieldSpec(GF(16), poly={self.reduction_poly:#07b})"
        return f"FieldSpec(GF({self.q}))"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldSpec)
            and (self.kind, self.q, self.reduction_poly) == (other.kind, other.q, other.reduction_poly)
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.q, self.reduction_poly))

    @property
    def mul_table(self) -> list[list[int]]:
        return self._mul

    @property
    def inv_table(self) -> list[int]:
        return self._inv

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise UsageError(f"{a} is not an element of GF({self.q})")
        return a

    def add(self, a: int, b: int) -> int:
        if _counter is not None:
            _counter.adds += 1
        if self.kind == "binary":
            return a ^ b
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        if _counter is not None:
            _counter.adds += 1
        if self.kind == "binary":
            return a ^ b
        return (a - b) % self.q

    def neg(self, a: int) -> int:
        return a if self.kind == "binary" else (-a) % self.q

    def mul(self, a: int, b: int) -> int:
        if _counter is not None:
            _counter.muls += 1
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldDomainError("zero has no multiplicative inverse")
        if _counter is not None:
            _counter.invs += 1
        return self._inv[a]


_GF16 = FieldSpec("binary", 16, GF16_POLY)


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: FieldSpec

    def __post_init__(self):
        self.field.check(self.value)

    def _same(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise UsageError("operands belong to different fields")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._same(other)
        return FieldElement(self.field.add(self.value, other.value), self.field)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._same(other)
        return FieldElement(self.field.sub(self.value, other.value), self.field)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._same(other)
        return FieldElement(self.field.mul(self.value, other.value), self.field)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)

    def __int__(self) -> int:
        return self.value


def ff_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def ff_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def ff_inv(a: FieldElement) -> FieldElement:
    return a.inverse()


@dataclass(frozen=True)
class FieldMatrix:
    """Dense row-major matrix over ``field``; ``rows`` is a tuple of int tuples."""

    field: FieldSpec
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise UsageError("matrix rows must be non-empty and of equal length")
        for r in rows:
            for a in r:
                self.field.check(a)
        object.__setattr__(self, "rows", rows)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "FieldMatrix":
        return cls(field, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, field: FieldSpec, n: int, m: int | None = None) -> "FieldMatrix":
        return cls(field, tuple((0,) * (n if m is None else m) for _ in range(n)))

    @classmethod
    def from_flat(cls, field: FieldSpec, n: int, entries: Sequence[int]) -> "FieldMatrix":
        if len(entries) != n * n:
            raise UsageError(f"need {n * n} entries, got {len(entries)}")
        return cls(field, tuple(tuple(entries[i * n : (i + 1) * n]) for i in range(n)))

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.rows)

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)

    def flat(self) -> tuple:
        return tuple(a for r in self.rows for a in r)


def _same_field(*objs) -> FieldSpec:
    f = objs[0].field
    if any(o.field != f for o in objs[1:]):
        raise UsageError("operands belong to different fields")
    return f


def mat_vec_mul(m: FieldMatrix, v: Sequence[int]) -> Vector:
    if m.ncols != len(v):
        raise UsageError(f"cannot multiply {m.nrows}x{m.ncols} matrix by length-{len(v)} vector")
    f = m.field
    out = []
    for row in m.rows:
        acc = f.mul(row[0], v[0])
        for a, b in zip(row[1:], v[1:]):
            acc = f.add(acc, f.mul(a, b))
        out.append(acc)
    return tuple(out)


def vec_add(f: FieldSpec, u: Sequence[int], v: Sequence[int]) -> Vector:
    if len(u) != len(v):
        raise UsageError("vector lengths differ")
    return tuple(f.add(a, b) for a, b in zip(u, v))


def vec_sub(f: FieldSpec, u: Sequence[int], v: Sequence[int]) -> Vector:
    if len(u) != len(v):
        raise UsageError("vector lengths differ")
    return tuple(f.sub(a, b) for a, b in zip(u, v))


def mat_mul(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    f = _same_field(a, b)
    if a.ncols != b.nrows:
        raise UsageError(f"shape mismatch {a.shape} @ {b.shape}")
    cols = [b.column(j) for j in range(b.ncols)]
    return FieldMatrix(f, tuple(tuple(_dot(f, r, c) for c in cols) for r in a.rows))


def _dot(f: FieldSpec, u: Sequence[int], v: Sequence[int]) -> int:
    acc = 0
    for a, b in zip(u, v):
        acc = f.add(acc, f.mul(a, b))
    return acc


def mat_add(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    f = _same_field(a, b)
    if a.shape != b.shape:
        raise UsageError("shape mismatch")
    return FieldMatrix(f, tuple(vec_add(f, r, s) for r, s in zip(a.rows, b.rows)))


def mat_sub(a: FieldMatrix, b: FieldMatrix) -> FieldMatrix:
    f = _same_field(a, b)
    if a.shape != b.shape:
        raise UsageError("shape mismatch")
    return FieldMatrix(f, tuple(vec_sub(f, r, s) for r, s in zip(a.rows, b.rows)))


def mat_pow(m: FieldMatrix, k: int) -> FieldMatrix:
    if m.nrows != m.ncols:
        raise UsageError("power of a non-square matrix")
    out = FieldMatrix.identity(m.field, m.nrows)
    for _ in range(k):
        out = mat_mul(out, m)
    return out


def mat_inv(m: FieldMatrix) -> FieldMatrix:
    """Gauss-Jordan inversion; raises SingularMatrixError when no pivot exists."""
    if m.nrows != m.ncols:
        raise UsageError("only square matrices can be inverted")
    f = m.field
    n = m.nrows
    aug = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(m.rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        scale = f.inv(aug[col][col])
        aug[col] = [f.mul(scale, a) for a in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                k = aug[r][col]
                aug[r] = [f.sub(a, f.mul(k, b)) for a, b in zip(aug[r], aug[col])]
    return FieldMatrix(f, tuple(tuple(r[n:]) for r in aug))


def nilpotency_index(m: FieldMatrix) -> int | None:
    """Smallest k <= n with m^k = 0, or None if m is not nilpotent."""
    p = m
    for k in range(1, m.nrows + 1):
        if p.is_zero():
            return k
        p = mat_mul(p, m)
    return None
