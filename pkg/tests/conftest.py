from pathlib import Path

import numpy as np
import pytest

from plcie.gf import FieldMatrix, FieldSpec, mat_inv, mat_mul
from plcie.errors import SingularMatrixError
from plcie.imageio import read_pgm
from plcie.keys import KeyMaterial, shift_matrix
from plcie.kernel import SELFSYNC, SYNC, CipherParams
from plcie.permutation import KeyPermutation

DATA = Path(__file__).parent / "data"
GF16 = FieldSpec.gf16()


@pytest.fixture(scope="session")
def camera():
    return read_pgm((DATA / "camera256.pgm").read_bytes())


@pytest.fixture(scope="session")
def gradient():
    return read_pgm((DATA / "gradient256.pgm").read_bytes())


@pytest.fixture(scope="session")
def test_key():
    # fixed 97-bit key used across tests
    return KeyMaterial(16, 0xB5E3, 0x2C41, 0x7, ((0, 3, 2), (1, 6, 9), (2, 2, 12), (4, 0, 1), (5, 7, 14), (7, 5, 3)))


def rand_matrix(rng, ell, field=GF16):
    return FieldMatrix.from_flat(field, ell, rng.integers(0, field.q, size=ell * ell).tolist())


def rand_invertible(rng, ell, field=GF16):
    while True:
        m = rand_matrix(rng, ell, field)
        try:
            return m, mat_inv(m)
        except SingularMatrixError:
            pass


def random_params(rng, ell=8, mode=SELFSYNC, iota=0):
    """Random valid kernel parameters, independent of the key schedule."""
    pi = KeyPermutation.from_forward(rng.permutation(16).tolist())
    B = rand_matrix(rng, ell)
    F, F_inv = rand_invertible(rng, ell)
    D = shift_matrix(GF16, ell)
    if mode == SYNC:
        z = FieldMatrix.zeros(GF16, ell)
        return CipherParams(ell, GF16, pi, rand_matrix(rng, ell), B, D, z, F, z, iota, SYNC, F_inv)
    E = rand_matrix(rng, ell)
    W = rand_matrix(rng, ell)
    A = mat_mul(mat_mul(E, F_inv), B)
    return CipherParams(ell, GF16, pi, A, B, D, E, F, W, iota, SELFSYNC, F_inv)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
