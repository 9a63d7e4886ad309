import numpy as np
import pytest

from plcie.chaos import cycle_length
from plcie.errors import FormatError, KeyConstraintError, UsageError, WeakKeyError
from plcie.gf import FieldSpec, mat_mul, mat_pow
from plcie.keys import (
    KeyMaterial,
    derive_params,
    generate_iv,
    generate_key,
    init_from_iv,
    parse_key,
    read_key_file,
    write_key_file,
)
from plcie.kernel import SYNC


def test_key_lengths():
    rng = np.random.default_rng(0)
    assert generate_key(16, 6, rng=rng).bit_length(8) == len(generate_key(16, 6, rng=rng).to_bits(8)) == 97
    assert len(generate_key(32, 5, rng=rng).to_bits(8)) == 119


def test_layout_round_trip(test_key):
    bits = test_key.to_bits(8)
    assert bits[0] == "0"
    assert int(bits[1:17], 2) == 0xB5E3
    assert int(bits[17:33], 2) == 0x2C41
    assert int(bits[33:37], 2) == 7
    assert bits[37:47] == "000" + "011" + "0010"
    assert parse_key(bits, 8) == test_key
    rng = np.random.default_rng(1)
    for _ in range(50):
        km = generate_key(int(rng.choice([16, 32])), rng=rng)
        assert parse_key(km.to_bits(8), 8).to_bits(8) == km.to_bits(8)


def test_parse_errors(test_key):
    bits = test_key.to_bits(8)
    with pytest.raises(FormatError):
        parse_key(bits[:-1], 8)
    with pytest.raises(FormatError):
        parse_key("", 8)
    with pytest.raises(FormatError):
        parse_key(bits.replace("1", "2", 1), 8)
    many = bits[:37] + "0000010001" * 33
    with pytest.raises(KeyConstraintError):
        parse_key(many, 8)
    with pytest.raises(WeakKeyError):
        parse_key(bits[0] + "0" * 16 + bits[17:], 8)
    with pytest.raises(WeakKeyError):
        parse_key(bits[:17] + "0" * 16 + bits[33:], 8)


def test_key_file_round_trip(test_key):
    text = write_key_file(test_key)
    assert text.splitlines()[0] == "plcie-key v1 ell=8 field=gf16"
    assert len(text.splitlines()[1]) == 25  # 97 bits -> 25 hex digits
    assert read_key_file(text) == (test_key, 8)
    km32 = generate_key(32, rng=np.random.default_rng(2))
    assert read_key_file(write_key_file(km32))[0] == km32


@pytest.mark.parametrize("text", ["", "plcie-key v2 ell=8 field=gf16\nabc\n", "plcie-key v1 ell=8 field=gf16\nXYZ\n", "plcie-key v1 ell=8 field=gf16\n12\n"])
def test_key_file_errors(text):
    with pytest.raises(FormatError):
        read_key_file(text)


def test_derived_structure(test_key):
    P = derive_params(test_key)
    assert P.A == mat_mul(mat_mul(P.E, P.F_inv), P.B)
    assert mat_pow(P.D, 8).is_zero() and not mat_pow(P.D, 7).is_zero()
    assert P.n0 == 8 and P.iota == 32
    assert P.E.rows[0][3] == 2 and P.E.rows[7][5] == 3 and P.E.rows[3][3] == 7
    S = derive_params(test_key, mode=SYNC)
    assert S.W.is_zero() and S.E.is_zero() and not S.A.is_zero()


def test_derivation_is_deterministic(test_key):
    assert derive_params(test_key) == derive_params(KeyMaterial(**test_key.__dict__))


def test_every_key_bit_matters(test_key):
    """Each bit changes the derived parameters, except two cases.

    The precision flag changes the layout length and is rejected.  l0 is a
    jump along an orbit of period 2^14 (odd seed, prec 16), so l0 bits worth
    2^14 and 2^15 land on the same window; those flips must give identical
    parameters.
    """
    base = derive_params(test_key)
    bits = test_key.to_bits(8)
    assert cycle_length(test_key.r0, 16) == 1 << 14
    period_bits = {17, 18}  # l0 occupies bits 17..32, MSB first
    rejected, same = [], []
    for b in range(len(bits)):
        flipped = bits[:b] + ("1" if bits[b] == "0" else "0") + bits[b + 1 :]
        try:
            P = derive_params(parse_key(flipped, 8))
        except FormatError:
            rejected.append(b)
            continue
        if (P.pi, P.A, P.B, P.E, P.F, P.W) == (base.pi, base.A, base.B, base.E, base.F, base.W):
            same.append(b)
    assert rejected == [0]
    assert set(same) == period_bits


def test_prime_field_key_is_library_only(test_key):
    with pytest.raises(UsageError):
        derive_params(test_key, field=FieldSpec.prime(17))


def test_iv_split():
    P = derive_params(generate_key(rng=np.random.default_rng(3)))
    iv = tuple(range(1, 16)) + (0,)  # 16 is not a GF(16) element
    st = init_from_iv(iv, P)
    assert st.s == tuple(range(1, 9)) and st.mem == tuple(range(9, 16)) + (0,)
    with pytest.raises(UsageError):
        init_from_iv(tuple(range(1, 17)), P)
    z = init_from_iv((0,) * 16, P)
    assert z.s == (0,) * 8 and z.mem == (0,) * 8
    with pytest.raises(FormatError):
        init_from_iv((0,) * 15, P)
    assert len(generate_iv(8)) == 16 and all(0 <= w < 16 for w in generate_iv(8))


def test_generate_key_constraint():
    with pytest.raises(KeyConstraintError):
        generate_key(16, 32, 8)
