"""End-to-end encryption of symbol streams and images."""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import FormatError, UsageError
from .fastkernel import FastKernel, pack
from .imageio import Container, GrayImage, bytes_to_symbols, symbols_to_bytes
from .keys import KeyMaterial, derive_params, generate_iv, init_from_iv
from .kernel import SELFSYNC, CipherParams


class Cipher:
    """A key's derived parameters bound to the fast engine.

    ``encrypt`` prepends ``iota`` whitening symbols; ``decrypt`` drops them.
    """

    def __init__(self, params: CipherParams):
        self.params = params
        self.engine = FastKernel(params)

    @classmethod
    def from_key(cls, km: KeyMaterial, ell: int = 8, mode: str = SELFSYNC, iota: int | None = None) -> "Cipher":
        return _cached_cipher(km, ell, mode, iota)

    @property
    def ell(self) -> int:
        return self.params.ell

    @property
    def iota(self) -> int:
        return self.params.iota

    def _start(self, iv: Sequence[int]) -> tuple[int, int]:
        st = init_from_iv(iv, self.params)
        return pack(st.s), pack(st.mem)

    def encrypt(self, symbols, iv: Sequence[int], whitening=None, rng: np.random.Generator | None = None) -> np.ndarray:
        """Cipher symbol stream (vector-major) for whitening + ``symbols``."""
        if whitening is None:
            rng = np.random.default_rng() if rng is None else rng
            whitening = rng.integers(0, 16, size=self.iota)
        if len(whitening) != self.iota:
            raise UsageError(f"whitening prefix must be {self.iota} symbols")
        plain = np.concatenate([np.asarray(whitening, dtype=np.uint8), np.asarray(symbols, dtype=np.uint8)])
        if plain.size and plain.max() > 15:
            raise UsageError("plaintext symbols must be GF(16) elements")
        s, mem = self._start(iv)
        vectors, _, _ = self.engine.encrypt_packed(s, mem, plain.tolist())
        if not vectors:
            return np.zeros(0, dtype=np.uint8)
        return self.engine.vectors_to_symbols(vectors)

    def decrypt(self, cipher_symbols, iv: Sequence[int], keep_whitening: bool = False) -> np.ndarray:
        s, mem = self._start(iv)
        vectors = self.engine.symbols_to_vectors(cipher_symbols)
        plain, _, _ = self.engine.decrypt_packed(s, mem, vectors)
        out = np.array(plain, dtype=np.uint8)
        return out if keep_whitening else out[self.iota :]


@lru_cache(maxsize=4)  # each engine holds ~16 MB of lookup tables
def _cached_cipher(km: KeyMaterial, ell: int, mode: str, iota: int | None) -> Cipher:
    return Cipher(derive_params(km, ell, mode=mode, iota=iota))


def encrypt_image(
    km: KeyMaterial,
    img: GrayImage,
    *,
    ell: int = 8,
    mode: str = SELFSYNC,
    iota: int | None = None,
    iv: Sequence[int] | None = None,
    rng: np.random.Generator | None = None,
) -> Container:
    """Encrypt a grayscale image.  With ``rng`` given the whole run is reproducible."""
    cipher = Cipher.from_key(km, ell, mode, iota)
    if iv is None:
        iv = generate_iv(ell, rng)
    sym = bytes_to_symbols(img.tobytes()).symbols
    rng = np.random.default_rng() if rng is None else rng
    payload = cipher.encrypt(sym, iv, rng=rng)
    return Container(0, ell, km.prec, cipher.iota, img.width, img.height, tuple(iv), payload)


def decrypt_container(km: KeyMaterial, c: Container, *, mode: str = SELFSYNC) -> GrayImage:
    if c.prec != km.prec:
        raise FormatError(f"container was written for prec={c.prec}, key has prec={km.prec}")
    cipher = Cipher.from_key(km, c.ell, mode, c.iota)
    plain = cipher.decrypt(c.payload, c.iv)
    if plain.size != 2 * c.width * c.height:
        raise FormatError("payload size does not match the image dimensions")
    raster = np.frombuffer(symbols_to_bytes(plain), dtype=np.uint8)
    return GrayImage(c.width, c.height, raster.reshape(c.height, c.width).copy())
