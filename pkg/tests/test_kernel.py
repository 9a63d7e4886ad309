import numpy as np
import pytest

from conftest import GF16, rand_matrix, random_params
from plcie.errors import UsageError
from plcie.fastkernel import FastKernel, pack, unpack
from plcie.gf import FieldMatrix, mat_add, mat_mul, mat_pow, mat_vec_mul, vec_add
from plcie.kernel import (
    SELFSYNC,
    SYNC,
    CipherParams,
    CipherState,
    decrypt_symbols,
    encrypt_symbols,
    memory_update,
    observer_error,
    ss_decrypt_symbol,
    ss_encrypt_symbol,
    sync_encrypt_symbol,
    sync_step,
)
from plcie.keys import shift_matrix
from plcie.permutation import KeyPermutation

I8 = KeyPermutation.identity(16)


def xmul(a, b):
    r = 0
    for _ in range(4):
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & 0x10:
            a ^= 0b10011
    return r


def xmv(m, v):
    out = []
    for row in m.rows:
        acc = 0
        for a, b in zip(row, v):
            acc ^= xmul(a, b)
        out.append(acc)
    return out


def xor(*vs):
    return [int(np.bitwise_xor.reduce(col)) for col in zip(*vs)]


def oracle_encrypt(P, s, mem, plain):
    """Straight-line re-evaluation of the self-synchronizing encryptor."""
    s, mem, out = list(s), list(mem), []
    e0 = [0] * P.ell
    for p in plain:
        ps = [P.pi.forward[x] for x in s]
        pp = [P.pi.forward[x] for x in [p] + e0[1:]]
        wc = xmv(P.W, mem)
        c = xor(wc, xmv(P.B, ps), xmv(P.F, pp))
        s = xor(wc, xmv(P.D, s), xmv(P.A, ps), xmv(P.E, pp))
        mem = [c[0]] + mem[:-1]
        out.append(tuple(c))
    return out


def zero(ell=2):
    return FieldMatrix.zeros(GF16, ell)


def test_memory_update_examples():
    st = CipherState((0, 0, 0), (4, 7, 2))
    assert memory_update(st, 9).mem == (9, 4, 7)
    assert memory_update(CipherState((0,) * 3, (0,) * 3), 0).mem == (0, 0, 0)
    assert memory_update(CipherState((0, 0), (10, 11)), 12).mem == (12, 10)


def test_sync_step_examples():
    I2 = FieldMatrix.identity(GF16, 2)
    P = CipherParams(2, GF16, I8, zero(), I2, zero(), zero(), I2, zero(), 0, SYNC)
    st, z = sync_step(P, CipherState((5, 7), (0, 0)))
    assert z == (5, 7) and st.s == (0, 0)
    P0 = CipherParams(2, GF16, I8, zero(), zero(), zero(), zero(), I2, zero(), 0, SYNC)
    assert sync_step(P0, CipherState((9, 3), (0, 0)))[1] == (0, 0)


def test_selfsync_encrypt_examples():
    I = FieldMatrix.identity(GF16, 4)
    z4 = zero(4)
    P = CipherParams(4, GF16, I8, z4, z4, z4, z4, I, z4, 0, SELFSYNC)
    assert ss_encrypt_symbol(P, CipherState((1, 2, 3, 4), (5, 6, 7, 8)), 3)[1] == (3, 0, 0, 0)
    Pb = CipherParams(4, GF16, I8, z4, I, z4, z4, I, z4, 0, SELFSYNC)
    c = ss_encrypt_symbol(Pb, CipherState((1, 2, 3, 4), (0,) * 4), 3)[1]
    assert c[0] == 1 ^ 3 == 2


def test_mode_mismatch_and_param_validation():
    rng = np.random.default_rng(0)
    P = random_params(rng, 4, SELFSYNC)
    with pytest.raises(UsageError):
        sync_step(P, CipherState((0,) * 4, (0,) * 4))
    with pytest.raises(UsageError):
        CipherParams(4, GF16, P.pi, rand_matrix(rng, 4), P.B, P.D, P.E, P.F, P.W, 0, SELFSYNC)
    with pytest.raises(UsageError):
        CipherParams(4, GF16, P.pi, P.A, P.B, P.D, P.E, P.F, P.W, 0, SYNC)
    with pytest.raises(UsageError):
        CipherParams(4, GF16, P.pi, P.A, P.B, FieldMatrix.identity(GF16, 4), P.E, P.F, P.W, 0, SELFSYNC)


def test_reference_matches_straight_line_oracle():
    rng = np.random.default_rng(11)
    for ell in (2, 8):
        P = random_params(rng, ell)
        s0 = tuple(rng.integers(0, 16, ell).tolist())
        m0 = tuple(rng.integers(0, 16, ell).tolist())
        plain = rng.integers(0, 16, 100).tolist()
        _, ref = encrypt_symbols(P, CipherState(s0, m0), plain)
        assert ref == oracle_encrypt(P, s0, m0, plain)


@pytest.mark.parametrize("ell", [2, 3, 5, 8, 11, 16])
@pytest.mark.parametrize("mode", [SELFSYNC, SYNC])
def test_fast_engine_matches_reference(ell, mode):
    rng = np.random.default_rng(ell * 7 + len(mode))
    P = random_params(rng, ell, mode)
    fk = FastKernel(P)
    s0 = tuple(rng.integers(0, 16, ell).tolist())
    m0 = tuple(rng.integers(0, 16, ell).tolist())
    plain = rng.integers(0, 16, 60).tolist()
    _, ref = encrypt_symbols(P, CipherState(s0, m0), plain)
    vecs, _, _ = fk.encrypt_packed(pack(s0), pack(m0), plain)
    assert [unpack(v, ell) for v in vecs] == ref
    back, _, _ = fk.decrypt_packed(pack(s0), pack(m0), vecs)
    assert back == plain
    _, ref_back = decrypt_symbols(P, CipherState(s0, m0), ref)
    assert ref_back == plain


def test_fast_round_trip_long_stream():
    rng = np.random.default_rng(5)
    P = random_params(rng, 8)
    fk = FastKernel(P)
    plain = rng.integers(0, 16, 20000).tolist()
    vecs, _, _ = fk.encrypt_packed(3, 5, plain)
    assert len(fk.vectors_to_symbols(vecs)) == 8 * len(plain)
    assert fk.decrypt_packed(3, 5, vecs)[0] == plain


def test_observer_error_follows_shift():
    rng = np.random.default_rng(3)
    for _ in range(30):
        P = random_params(rng, 8)
        enc = CipherState(tuple(rng.integers(0, 16, 8).tolist()), tuple(rng.integers(0, 16, 8).tolist()))
        dec = CipherState(tuple(rng.integers(0, 16, 8).tolist()), enc.mem)
        e = observer_error(P, enc.s, dec.s)
        for t in range(1, 20):
            enc, c = ss_encrypt_symbol(P, enc, int(rng.integers(0, 16)))
            dec, _ = ss_decrypt_symbol(P, dec, c)
            e_next = observer_error(P, enc.s, dec.s)
            assert e_next == mat_vec_mul(P.D, e)
            if t >= P.n0:
                assert e_next == (0,) * 8
            e = e_next


def test_closed_form_state():
    rng = np.random.default_rng(9)
    ell = 5
    P = random_params(rng, ell)
    EF = mat_mul(P.E, P.F_inv)
    G = mat_mul(mat_add(FieldMatrix.identity(GF16, ell), EF), P.W)  # I - EF^-1 in characteristic 2
    st = CipherState(tuple(rng.integers(0, 16, ell).tolist()), tuple(rng.integers(0, 16, ell).tolist()))
    s1 = st.s
    mems, cs = [], []
    for t in range(1, 13):
        mems.append(st.mem)
        st, c = ss_encrypt_symbol(P, st, int(rng.integers(0, 16)))
        cs.append(c)
        acc = mat_vec_mul(mat_pow(P.D, t), s1)
        for j in range(1, t + 1):
            k = t - j  # zero-based index of step t-j+1
            term = vec_add(GF16, mat_vec_mul(G, mems[k]), mat_vec_mul(EF, cs[k]))
            acc = vec_add(GF16, acc, mat_vec_mul(mat_pow(P.D, j - 1), term))
        assert st.s == acc


def test_sync_keystream_ignores_ciphertext():
    rng = np.random.default_rng(4)
    P = random_params(rng, 8, SYNC)
    st0 = CipherState(tuple(rng.integers(0, 16, 8).tolist()), (0,) * 8)
    plain = rng.integers(0, 16, 50).tolist()
    _, cvecs = encrypt_symbols(P, st0, plain)
    bad = [list(c) for c in cvecs]
    for k in rng.choice(50, 10, replace=False):
        bad[k][0] ^= 1 + int(rng.integers(0, 15))
    _, out = decrypt_symbols(P, st0, bad)
    wrong = {i for i, (a, b) in enumerate(zip(out, plain)) if a != b}
    assert wrong <= {i for i in range(50) if bad[i] != list(cvecs[i])}
    # the keystream depends only on the state
    s = st0
    for _ in range(5):
        s, z = sync_step(P, s)
    s2 = st0
    for p in plain[:5]:
        s2, _ = sync_encrypt_symbol(P, s2, p)
    assert s.s == s2.s


def test_expansion_is_ell():
    rng = np.random.default_rng(1)
    P = random_params(rng, 8)
    _, out = encrypt_symbols(P, CipherState((0,) * 8, (0,) * 8), [1, 2, 3])
    assert len(out) == 3 and all(len(c) == 8 for c in out)
