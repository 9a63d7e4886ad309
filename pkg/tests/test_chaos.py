from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plcie.chaos import (
    ChaoticState,
    cycle_length,
    export_bits,
    generate_window,
    jump,
    orbit,
    renyi_step_disc,
    renyi_step_exact,
    stream_nibbles,
    truncate,
)
from plcie.errors import RetryNeeded, UsageError


@pytest.mark.parametrize("x,y", [(Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 5), Fraction(3, 5)), (Fraction(9, 10), Fraction(7, 10))])
def test_exact_step(x, y):
    assert renyi_step_exact(x) == y


@pytest.mark.parametrize("x", [0, 1, Fraction(-1, 3), Fraction(3, 2)])
def test_exact_step_domain(x):
    with pytest.raises(UsageError):
        renyi_step_exact(x)


@pytest.mark.parametrize("X,Y", [(8, 8), (5, 15), (6, 2)])
def test_discrete_step_prec4(X, Y):
    assert renyi_step_disc(ChaoticState(X, 4)).x_int == Y


@pytest.mark.parametrize("prec", [4, 8])
def test_discrete_matches_exact_exhaustive(prec):
    for X in range(1, 1 << prec):
        s = ChaoticState(X, prec)
        y = renyi_step_exact(s.x)
        nxt = renyi_step_disc(s) if y else None
        if y == 0:
            continue  # orbit hit 0; the map leaves the open interval
        assert nxt.x == truncate(y, prec)


def test_discrete_matches_exact_sampled_prec16():
    rng = np.random.default_rng(7)
    for X in rng.integers(1, 1 << 16, size=2000):
        s = ChaoticState(int(X), 16)
        y = renyi_step_exact(s.x)
        if y:
            assert renyi_step_disc(s).x == truncate(y, 16)


def test_state_bounds():
    with pytest.raises(UsageError):
        ChaoticState(0, 4)
    with pytest.raises(UsageError):
        ChaoticState(16, 4)


def test_window_examples():
    assert generate_window(ChaoticState(1, 4), 0, 4).values == (3, 9, 11, 1)
    with pytest.raises(RetryNeeded):
        generate_window(ChaoticState(4, 4), 0, 4)
    assert len(generate_window(ChaoticState(12345, 16), 99, 1)) == 1


@given(st.integers(1, 2**16 - 1), st.integers(0, 5000))
def test_jump_equals_iteration(x, steps):
    it = orbit(x, 16)
    y = x
    for _ in range(min(steps, 50)):
        y = next(it)
    assert jump(x, min(steps, 50), 16) == y


@pytest.mark.parametrize("prec", [4, 8, 16])
def test_odd_cycle_length(prec):
    rng = np.random.default_rng(prec)
    for x in rng.integers(0, 1 << (prec - 1), size=20) * 2 + 1:
        x = int(x)
        n = cycle_length(x, prec)
        assert n == 1 << (prec - 2)
        assert jump(x, n, prec) == x
        assert all(jump(x, k, prec) != x for k in range(1, min(n, 300)))


@given(st.integers(1, 2**16 - 1))
def test_cycle_length_general(x):
    n = cycle_length(x, 16)
    assert jump(x, n, 16) == x
    if n > 1:
        assert jump(x, n // 2, 16) != x


def test_odd_seed_windows_duplicate_free():
    for x in range(1, 256, 2):
        generate_window(ChaoticState(x, 8), 17, 16)


def test_step_bijective_on_odd_residues():
    img = {renyi_step_disc(ChaoticState(x, 8)).x_int for x in range(1, 256, 2)}
    assert img == set(range(1, 256, 2))


def test_stream_nibbles_are_top_bits():
    it = stream_nibbles(777, 16)
    o = orbit(777, 16)
    for _ in range(20):
        assert next(it) == next(o) >> 12


def test_export_bits():
    x = jump(0x1234, 10, 16)
    v1, v2 = (jump(x, k, 16) for k in (1, 2))
    assert export_bits(ChaoticState(0x1234, 16), 10, 32) == v1.to_bytes(2, "big") + v2.to_bytes(2, "big")
    out = export_bits(ChaoticState(0x1234, 16), 10, 12)
    assert out == bytes([v1 >> 8, v1 & 0xF0])
