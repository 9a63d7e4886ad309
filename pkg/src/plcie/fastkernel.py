"""Table-driven GF(16) engine for bulk encryption.

An ell-vector is packed into one int, component i in bits 4i..4i+3.  Every
matrix product the kernel needs is linear in the input vector, and the
permutation acts component-wise, so ``M @ perm(v)`` splits into a XOR of
per-chunk lookups over 16-bit (four component) slices of the packed vector.
Tables are built once per key with numpy.

Results are bit-identical to :mod:`plcie.kernel`; the tests hold it to that.
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .gf import FieldMatrix, mat_mul, mat_vec_mul
from .kernel import SELFSYNC, CipherParams

CHUNK = 4  # components per table slice


def pack(v) -> int:
    x = 0
    for i, a in enumerate(v):
        x |= int(a) << (4 * i)
    return x


def unpack(x: int, ell: int) -> tuple:
    return tuple((x >> (4 * i)) & 15 for i in range(ell))


def _colmul(m: FieldMatrix) -> np.ndarray:
    """colmul[j, a] = packed (column j of m) * a."""
    mul = np.array(m.field.mul_table, dtype=np.uint64)
    cols = np.array(m.rows, dtype=np.int64).T  # cols[j, i] = m[i, j]
    shifts = (4 * np.arange(m.nrows)).astype(np.uint64)
    prod = mul[cols[:, :, None], np.arange(16)[None, None, :]]  # (j, i, a)
    return np.bitwise_or.reduce(prod << shifts[None, :, None], axis=1)


def _chunk_tables(ell: int, parts) -> list:
    """Lookup tables over raw 16-bit input chunks.

    ``parts`` is a list of (colmul, perm, bit offset); component j with nibble
    value a contributes ``colmul[j, perm[a]] << offset``.
    """
    nchunks = max(2, -(-ell // CHUNK))
    offsets = sorted({off for _, _, off in parts})
    narrow = offsets[-1] + 4 * ell <= 64
    tables = []
    for k in range(nchunks):
        comps = [j for j in range(k * CHUNK, (k + 1) * CHUNK) if j < ell]
        if not comps:
            tables.append([0])
            continue
        halves = {}
        for off in offsets:
            # per-component 16-entry tables, combined by broadcasting into 65536
            acc = np.zeros((16,) * CHUNK, dtype=np.uint64)
            for j in comps:
                nib = np.zeros(16, dtype=np.uint64)
                for colmul, perm, o in parts:
                    if o == off:
                        nib ^= colmul[j][perm]
                shape = [1] * CHUNK
                shape[CHUNK - 1 - (j - k * CHUNK)] = 16
                acc = acc ^ nib.reshape(shape)
            halves[off] = acc.reshape(-1)
        if narrow:
            acc = np.zeros(1 << (4 * CHUNK), dtype=np.uint64)
            for off in offsets:
                acc |= halves[off] << np.uint64(off)
            tables.append(acc.tolist())
        else:
            cols = [halves[off].tolist() for off in offsets]
            tables.append([sum(v << off for v, off in zip(vals, offsets)) for vals in zip(*cols)])
    return tables


class FastKernel:
    """Packed-int implementation of the encryptor/decryptor for GF(16), ell <= 16."""

    def __init__(self, params: CipherParams):
        if params.field.kind != "binary":
            raise UsageError("the fast engine only supports GF(16)")
        if not 2 <= params.ell <= 16:
            raise UsageError("the fast engine supports 2 <= ell <= 16")
        self.params = params
        ell = self.ell = params.ell
        self.mask = (1 << (4 * ell)) - 1
        self.shift = sh = 4 * ell
        pi = np.array(params.pi.forward, dtype=np.int64)
        ident = np.arange(16, dtype=np.int64)
        cB, cA, cD, cW = (_colmul(m) for m in (params.B, params.A, params.D, params.W))
        cFi = _colmul(params.F_inv)
        cEFi = _colmul(mat_mul(params.E, params.F_inv))
        # state table: B perm(s) in the low half, A perm(s) + D s in the high half
        self.state_t = _chunk_tables(ell, [(cB, pi, 0), (cA, pi, sh), (cD, ident, sh)])
        self.mem_t = _chunk_tables(ell, [(cW, ident, 0)])
        # recovers F^-1 d (low) and E F^-1 d (high) from d = c - z_hat
        self.obs_t = _chunk_tables(ell, [(cFi, ident, 0), (cEFi, ident, sh)])
        # plaintext contribution: F perm(p,0,..,0) low, E perm(p,0,..,0) high
        fe = []
        for p in range(16):
            e = (p,) + (0,) * (ell - 1)
            pe = [params.pi.forward[a] for a in e]
            fe.append(pack(mat_vec_mul(params.F, pe)) | (pack(mat_vec_mul(params.E, pe)) << sh))
        self.plain_t = fe
        self.pi_inv = list(params.pi.inverse)

    # -- single steps on packed ints ---------------------------------------------

    def _lookup(self, tables, x: int) -> int:
        acc = 0
        for k, t in enumerate(tables):
            acc ^= t[(x >> (16 * k)) & 0xFFFF]
        return acc

    def enc_step(self, s: int, mem: int, p: int) -> tuple[int, int, int]:
        t = self._lookup(self.state_t, s)
        fe = self.plain_t[p]
        if self.params.mode == SELFSYNC:
            wc = self._lookup(self.mem_t, mem)
            x = t ^ fe
            c = (wc ^ x) & self.mask
            return wc ^ (x >> self.shift), ((mem << 4) & self.mask) | (c & 15), c
        c = (t ^ fe) & self.mask
        return t >> self.shift, mem, c

    def dec_step(self, s: int, mem: int, c: int) -> tuple[int, int, int]:
        t = self._lookup(self.state_t, s)
        if self.params.mode == SELFSYNC:
            wc = self._lookup(self.mem_t, mem)
            g = self._lookup(self.obs_t, c ^ wc ^ (t & self.mask))
            s = wc ^ (t >> self.shift) ^ (g >> self.shift)
            return s, ((mem << 4) & self.mask) | (c & 15), self.pi_inv[g & 15]
        g = self._lookup(self.obs_t, c ^ (t & self.mask))
        return t >> self.shift, mem, self.pi_inv[g & 15]

    # -- bulk ----------------------------------------------------------------------

    def encrypt_packed(self, s: int, mem: int, symbols) -> tuple[list, int, int]:
        if len(self.state_t) != 2:
            out = []
            for p in symbols:
                s, mem, c = self.enc_step(s, mem, p)
                out.append(c)
            return out, s, mem
        T0, T1 = self.state_t
        W0, W1 = self.mem_t
        FE = self.plain_t
        M = self.mask
        sh = self.shift
        out = []
        append = out.append
        if self.params.mode == SELFSYNC:
            for p in symbols:
                x = T0[s & 0xFFFF] ^ T1[s >> 16] ^ FE[p]
                wc = W0[mem & 0xFFFF] ^ W1[mem >> 16]
                c = (wc ^ x) & M
                s = wc ^ (x >> sh)
                mem = ((mem << 4) & M) | (c & 15)
                append(c)
        else:
            for p in symbols:
                x = T0[s & 0xFFFF] ^ T1[s >> 16]
                append((x ^ FE[p]) & M)
                s = x >> sh
        return out, s, mem

    def decrypt_packed(self, s: int, mem: int, vectors) -> tuple[list, int, int]:
        if len(self.state_t) != 2:
            out = []
            for c in vectors:
                s, mem, p = self.dec_step(s, mem, c)
                out.append(p)
            return out, s, mem
        T0, T1 = self.state_t
        W0, W1 = self.mem_t
        G0, G1 = self.obs_t
        PI = self.pi_inv
        M = self.mask
        sh = self.shift
        out = []
        append = out.append
        if self.params.mode == SELFSYNC:
            for c in vectors:
                t = T0[s & 0xFFFF] ^ T1[s >> 16]
                wc = W0[mem & 0xFFFF] ^ W1[mem >> 16]
                d = c ^ wc ^ (t & M)
                g = G0[d & 0xFFFF] ^ G1[d >> 16]
                s = wc ^ ((t ^ g) >> sh)
                mem = ((mem << 4) & M) | (c & 15)
                append(PI[g & 15])
        else:
            for c in vectors:
                t = T0[s & 0xFFFF] ^ T1[s >> 16]
                d = c ^ (t & M)
                append(PI[(G0[d & 0xFFFF] ^ G1[d >> 16]) & 15])
                s = t >> sh
        return out, s, mem

    # -- symbol-array helpers ---------------------------------------------------------

    def vectors_to_symbols(self, vectors) -> np.ndarray:
        arr = np.array(vectors, dtype=np.uint64)
        shifts = (4 * np.arange(self.ell)).astype(np.uint64)
        return ((arr[:, None] >> shifts[None, :]) & np.uint64(15)).astype(np.uint8).reshape(-1)

    def symbols_to_vectors(self, symbols) -> list:
        sym = np.asarray(symbols, dtype=np.uint64)
        if sym.size % self.ell:
            raise UsageError(f"cipher symbol count {sym.size} is not a multiple of ell={self.ell}")
        comps = sym.reshape(-1, self.ell)
        shifts = (4 * np.arange(self.ell)).astype(np.uint64)
        return np.bitwise_or.reduce(comps << shifts[None, :], axis=1).tolist() if comps.size else []
