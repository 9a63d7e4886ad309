"""Rényi map x -> 3x mod 1 and its prec-bit fixed-point discretization.

A state is the integer numerator ``X`` of ``x = X / 2**prec``.  Truncating to
prec bits leaves such an x unchanged, so one discrete step is exactly
``X -> 3X mod 2**prec``; no floating point is involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import RetryNeeded, UsageError


@dataclass(frozen=True)
class ChaoticState:
    x_int: int
    prec: int

    def __post_init__(self):
        if self.prec < 1:
            raise UsageError("prec must be positive")
        if not 0 < self.x_int < (1 << self.prec):
            raise UsageError(f"state must lie in [1, 2^{self.prec} - 1], got {self.x_int}")

    @property
    def x(self) -> Fraction:
        return Fraction(self.x_int, 1 << self.prec)


@dataclass(frozen=True)
class OrbitWindow:
    values: tuple
    start_index: int

    def __len__(self) -> int:
        return len(self.values)


def renyi_step_exact(x):
    """Fractional part of 3x for 0 < x < 1.  Exact when given a Fraction."""
    if not 0 < x < 1:
        raise UsageError(f"x must lie in (0, 1), got {x}")
    y = 3 * x
    return y - int(y)


def truncate(x, prec: int) -> Fraction:
    """g(x) = floor(2^prec x) / 2^prec."""
    return Fraction(int(Fraction(x) * (1 << prec)), 1 << prec)


def renyi_step_disc(s: ChaoticState) -> ChaoticState:
    return ChaoticState((3 * s.x_int) % (1 << s.prec), s.prec)


def jump(x_int: int, steps: int, prec: int) -> int:
    """State after ``steps`` discrete iterations, in O(log steps)."""
    mod = 1 << prec
    return (x_int * pow(3, steps, mod)) % mod


def orbit(x_int: int, prec: int) -> Iterator[int]:
    """Infinite discrete orbit starting *after* x_int."""
    mod = 1 << prec
    while True:
        x_int = (3 * x_int) % mod
        yield x_int


def generate_window(r0: ChaoticState, l0: int, q: int) -> OrbitWindow:
    """Discard l0 iterates, then return the next q (iterates l0+1 .. l0+q).

    Raises RetryNeeded if the window repeats a value.
    """
    if l0 < 0 or q < 1:
        raise UsageError("need l0 >= 0 and q >= 1")
    x = jump(r0.x_int, l0, r0.prec)
    it = orbit(x, r0.prec)
    values = tuple(next(it) for _ in range(q))
    if len(set(values)) != q:
        raise RetryNeeded(f"orbit window from seed {r0.x_int} repeats within {q} values")
    return OrbitWindow(values, l0 + 1)


def cycle_length(x_int: int, prec: int) -> int:
    """Period of the orbit through x_int: the order of 3 modulo 2^(prec - v2(x_int))."""
    if x_int % (1 << prec) == 0:
        return 1
    m = prec - ((x_int & -x_int).bit_length() - 1)
    return 1 << (m - 2) if m >= 3 else m


def stream_nibbles(x_int: int, prec: int) -> Iterator[int]:
    """Top 4 bits of each successive iterate after ``x_int``."""
    shift = prec - 4
    for x in orbit(x_int, prec):
        yield x >> shift


def export_bits(r0: ChaoticState, l0: int, nbits: int) -> bytes:
    """Raw orbit bitstream (each post-transient iterate's full prec bits, MSB first).

    Output is packed into bytes for external randomness test suites.
    """
    x = jump(r0.x_int, l0, r0.prec)
    it = orbit(x, r0.prec)
    acc = 0
    have = 0
    while have < nbits:
        acc = (acc << r0.prec) | next(it)
        have += r0.prec
    acc >>= have - nbits
    nbytes = (nbits + 7) // 8
    return (acc << (nbytes * 8 - nbits)).to_bytes(nbytes, "big")
