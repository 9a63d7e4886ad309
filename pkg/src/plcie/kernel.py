"""Reference state machines: synchronous generator, self-synchronizing encryptor
and its unknown-input-observer decryptor.

These evaluate the kernel equations literally through :mod:`plcie.gf`, so every
field operation is visible to :func:`plcie.gf.count_ops`.  They are slow; bulk
work goes through :mod:`plcie.fastkernel`, which is checked against this module.

Conventions:
  * plaintext symbol p is embedded as the vector (p, 0, ..., 0) before the
    permutation is applied component-wise;
  * memory holds the first components of the last ell ciphertext vectors,
    newest in slot 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .errors import UsageError
from .gf import FieldMatrix, FieldSpec, Vector, mat_inv, mat_mul, mat_vec_mul, nilpotency_index, vec_add, vec_sub
from .permutation import KeyPermutation, apply_perm_vec, invert_perm_vec

SYNC = "sync"
SELFSYNC = "selfsync"
MODES = (SYNC, SELFSYNC)


@dataclass(frozen=True)
class CipherParams:
    ell: int
    field: FieldSpec
    pi: KeyPermutation
    A: FieldMatrix
    B: FieldMatrix
    D: FieldMatrix
    E: FieldMatrix
    F: FieldMatrix
    W: FieldMatrix
    iota: int
    mode: str = SELFSYNC
    F_inv: FieldMatrix | None = None
    n0: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}")
        if self.pi.q != self.field.q:
            raise UsageError("permutation size does not match the field")
        for name in "ABDEFW":
            m = getattr(self, name)
            if m.shape != (self.ell, self.ell) or m.field != self.field:
                raise UsageError(f"matrix {name} must be {self.ell}x{self.ell} over {self.field}")
        if self.F_inv is None:
            object.__setattr__(self, "F_inv", mat_inv(self.F))
        elif mat_mul(self.F, self.F_inv) != FieldMatrix.identity(self.field, self.ell):
            raise UsageError("F_inv is not the inverse of F")
        n0 = nilpotency_index(self.D)
        if n0 is None:
            raise UsageError("D must be nilpotent")
        object.__setattr__(self, "n0", n0)
        if self.mode == SELFSYNC:
            if self.A != mat_mul(mat_mul(self.E, self.F_inv), self.B):
                raise UsageError("self-synchronous mode needs A = E F^-1 B")
        elif not (self.W.is_zero() and self.E.is_zero()):
            raise UsageError("synchronous mode needs W = E = 0")


@dataclass(frozen=True)
class CipherState:
    s: Vector
    mem: Vector
    t: int = 0


def embed(params: CipherParams, p: int) -> Vector:
    params.field.check(p)
    return (p,) + (0,) * (params.ell - 1)


def memory_update(state: CipherState, new_first_component: int) -> CipherState:
    return replace(state, mem=(new_first_component,) + tuple(state.mem[:-1]))


def _require(params: CipherParams, mode: str) -> None:
    if params.mode != mode:
        raise UsageError(f"operation needs {mode} mode, params are {params.mode}")


def sync_step(params: CipherParams, state: CipherState) -> tuple[CipherState, Vector]:
    """One step of the synchronous generator; returns (next state, keystream z_t)."""
    _require(params, SYNC)
    f = params.field
    ps = apply_perm_vec(params.pi, state.s)
    z = mat_vec_mul(params.B, ps)
    s_next = vec_add(f, mat_vec_mul(params.D, state.s), mat_vec_mul(params.A, ps))
    return replace(state, s=s_next, t=state.t + 1), z


def sync_encrypt_symbol(params: CipherParams, state: CipherState, p: int) -> tuple[CipherState, Vector]:
    state, z = sync_step(params, state)
    c = vec_add(params.field, z, mat_vec_mul(params.F, apply_perm_vec(params.pi, embed(params, p))))
    return state, c


def sync_decrypt_symbol(params: CipherParams, state: CipherState, c: Sequence[int]) -> tuple[CipherState, int]:
    state, z = sync_step(params, state)
    u = mat_vec_mul(params.F_inv, vec_sub(params.field, c, z))
    return state, params.pi.inverse[u[0]]


def ss_encrypt_symbol(params: CipherParams, state: CipherState, p: int) -> tuple[CipherState, Vector]:
    _require(params, SELFSYNC)
    f = params.field
    pi = params.pi
    ps = apply_perm_vec(pi, state.s)
    pp = apply_perm_vec(pi, embed(params, p))
    wc = mat_vec_mul(params.W, state.mem)
    z = vec_add(f, wc, mat_vec_mul(params.B, ps))
    c = vec_add(f, z, mat_vec_mul(params.F, pp))
    s_next = vec_add(f, wc, mat_vec_mul(params.D, state.s))
    s_next = vec_add(f, s_next, mat_vec_mul(params.A, ps))
    s_next = vec_add(f, s_next, mat_vec_mul(params.E, pp))
    nxt = memory_update(replace(state, s=s_next, t=state.t + 1), c[0])
    return nxt, c


def ss_decrypt_symbol(params: CipherParams, state: CipherState, c: Sequence[int]) -> tuple[CipherState, int]:
    _require(params, SELFSYNC)
    if len(c) != params.ell:
        raise UsageError(f"cipher vector must have {params.ell} components")
    f = params.field
    ps = apply_perm_vec(params.pi, state.s)
    wc = mat_vec_mul(params.W, state.mem)
    z_hat = vec_add(f, wc, mat_vec_mul(params.B, ps))
    u = mat_vec_mul(params.F_inv, vec_sub(f, c, z_hat))
    p_hat = invert_perm_vec(params.pi, u)[0]
    s_next = vec_add(f, wc, mat_vec_mul(params.D, state.s))
    s_next = vec_add(f, s_next, mat_vec_mul(params.A, ps))
    s_next = vec_add(f, s_next, mat_vec_mul(params.E, u))
    nxt = memory_update(replace(state, s=s_next, t=state.t + 1), c[0])
    return nxt, p_hat


def observer_error(params: CipherParams, s: Sequence[int], s_hat: Sequence[int]) -> Vector:
    return vec_sub(params.field, s, s_hat)


def encrypt_symbols(params: CipherParams, state: CipherState, symbols: Sequence[int]) -> tuple[CipherState, list]:
    """Encrypt a symbol sequence; returns the final state and the list of cipher vectors."""
    step = ss_encrypt_symbol if params.mode == SELFSYNC else sync_encrypt_symbol
    out = []
    for p in symbols:
        state, c = step(params, state, p)
        out.append(c)
    return state, out


def decrypt_symbols(params: CipherParams, state: CipherState, vectors: Sequence[Sequence[int]]) -> tuple[CipherState, list]:
    step = ss_decrypt_symbol if params.mode == SELFSYNC else sync_decrypt_symbol
    out = []
    for c in vectors:
        state, p = step(params, state, c)
        out.append(p)
    return state, out
