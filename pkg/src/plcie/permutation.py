"""Keyed permutation of GF(q) from a sorted chaotic orbit window.

Each window value is identified with its rank in the sorted window.  The
permutation sends the rank of every orbit value to the rank of its orbit
successor, and the last window value wraps around to the first, so the
result is always a single q-cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .chaos import OrbitWindow
from .errors import UsageError


@dataclass(frozen=True)
class KeyPermutation:
    forward: tuple
    inverse: tuple

    @classmethod
    def from_forward(cls, forward: Sequence[int]) -> "KeyPermutation":
        q = len(forward)
        if sorted(forward) != list(range(q)):
            raise UsageError("forward table is not a permutation")
        inverse = [0] * q
        for i, j in enumerate(forward):
            inverse[j] = i
        return cls(tuple(forward), tuple(inverse))

    @classmethod
    def identity(cls, q: int) -> "KeyPermutation":
        return cls.from_forward(range(q))

    @property
    def q(self) -> int:
        return len(self.forward)

    def cycles(self) -> list[list[int]]:
        seen = set()
        out = []
        for start in range(self.q):
            if start in seen:
                continue
            cyc = []
            i = start
            while i not in seen:
                seen.add(i)
                cyc.append(i)
                i = self.forward[i]
            out.append(cyc)
        return out


def build_permutation(w: OrbitWindow) -> KeyPermutation:
    values = w.values
    if len(set(values)) != len(values):
        raise UsageError("window values must be pairwise distinct")
    rank = {v: r for r, v in enumerate(sorted(values))}
    q = len(values)
    forward = [0] * q
    for t in range(q):
        forward[rank[values[t]]] = rank[values[(t + 1) % q]]
    return KeyPermutation.from_forward(forward)


def apply_perm_vec(p: KeyPermutation, v: Sequence[int]) -> tuple:
    fwd = p.forward
    return tuple(fwd[a] for a in v)


def invert_perm_vec(p: KeyPermutation, v: Sequence[int]) -> tuple:
    inv = p.inverse
    return tuple(inv[a] for a in v)
