"""PGM reading/writing, byte <-> GF(16) nibble streams, and the PLC1 container."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, UsageError

MAGIC = b"PLC1"
VERSION = 1
_HEAD = struct.Struct(">4sBBBBIII")


@dataclass
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if self.width <= 0 or self.height <= 0:
            raise UsageError("image must have positive dimensions")
        if px.size != self.width * self.height:
            raise UsageError(f"{px.size} pixels for a {self.width}x{self.height} image")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise UsageError("pixel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        self.pixels = px.reshape(self.height, self.width)

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise UsageError("expected a 2-D array")
        return cls(arr.shape[1], arr.shape[0], arr)

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GrayImage)
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )


def _tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` whitespace-separated header tokens, skipping # comments."""
    toks = []
    i = 0
    n = len(data)
    while len(toks) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i >= n:
            raise FormatError("truncated PGM header")
        if data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        toks.append(data[i:j])
        i = j
    return toks, i


def read_pgm(data: bytes) -> GrayImage:
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise FormatError(f"not a PGM file (magic {magic!r})")
    toks, pos = _tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in toks[1:4])
    except ValueError:
        raise FormatError("non-numeric PGM header field") from None
    if width <= 0 or height <= 0:
        raise FormatError("PGM dimensions must be positive")
    if maxval != 255:
        raise FormatError(f"only 8-bit PGM (maxval 255) is supported, got {maxval}")
    npix = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        raster = data[pos + 1 : pos + 1 + npix]
        if len(raster) != npix:
            raise FormatError(f"truncated P5 raster: {len(raster)} of {npix} bytes")
        px = np.frombuffer(raster, dtype=np.uint8)
    else:
        body = b" ".join(line.split(b"#", 1)[0] for line in data[pos:].splitlines())
        try:
            vals = [int(t) for t in body.split()]
        except ValueError:
            raise FormatError("non-numeric P2 sample") from None
        if len(vals) < npix:
            raise FormatError(f"truncated P2 raster: {len(vals)} of {npix} samples")
        px = np.array(vals[:npix])
        if px.min() < 0 or px.max() > 255:
            raise FormatError("P2 sample out of range")
    return GrayImage(width, height, px.astype(np.uint8).copy())


def write_pgm(img: GrayImage) -> bytes:
    return b"P5\n%d %d\n255\n" % (img.width, img.height) + img.tobytes()


@dataclass
class SymbolStream:
    symbols: np.ndarray  # uint8 values in [0, 16)
    nbytes: int

    def __len__(self) -> int:
        return int(self.symbols.size)


def bytes_to_symbols(data) -> SymbolStream:
    b = np.frombuffer(bytes(data), dtype=np.uint8)
    out = np.empty(2 * b.size, dtype=np.uint8)
    out[0::2] = b >> 4
    out[1::2] = b & 15
    return SymbolStream(out, int(b.size))


def symbols_to_bytes(s) -> bytes:
    sym = np.asarray(s.symbols if isinstance(s, SymbolStream) else s, dtype=np.uint8)
    if sym.size % 2:
        raise FormatError("odd symbol count cannot be packed into bytes")
    if sym.size and sym.max() > 15:
        raise FormatError("symbol outside GF(16)")
    return ((sym[0::2] << 4) | sym[1::2]).astype(np.uint8).tobytes()


def _pack_nibbles(sym) -> bytes:
    sym = np.asarray(sym, dtype=np.uint8)
    if sym.size % 2:
        sym = np.append(sym, np.uint8(0))
    return symbols_to_bytes(sym)


def _unpack_nibbles(data: bytes, count: int) -> np.ndarray:
    return bytes_to_symbols(data).symbols[:count]


@dataclass
class Container:
    """PLC1 ciphertext: header, IV and ell * (iota + 2 W H) packed GF(16) symbols."""

    field_id: int
    ell: int
    prec: int
    iota: int
    width: int
    height: int
    iv: tuple
    payload: np.ndarray
    version: int = VERSION

    @property
    def payload_len(self) -> int:
        return self.ell * (self.iota + 2 * self.width * self.height)

    def to_bytes(self) -> bytes:
        if len(self.payload) != self.payload_len:
            raise UsageError(f"payload has {len(self.payload)} symbols, header implies {self.payload_len}")
        flag = {16: 0, 32: 1}[self.prec]
        head = _HEAD.pack(MAGIC, self.version, self.field_id, self.ell, flag, self.iota, self.width, self.height)
        return head + _pack_nibbles(self.iv) + _pack_nibbles(self.payload)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Container":
        if len(data) < _HEAD.size:
            raise FormatError("truncated PLC1 header")
        magic, version, field_id, ell, flag, iota, w, h = _HEAD.unpack_from(data)
        if magic != MAGIC:
            raise FormatError(f"not a PLC1 container (magic {magic!r})")
        if version != VERSION:
            raise FormatError(f"unsupported container version {version}")
        if field_id != 0:
            raise FormatError("only GF(16) containers are supported")
        if flag not in (0, 1) or ell < 2 or w == 0 or h == 0:
            raise FormatError("invalid PLC1 header fields")
        iv_bytes = (2 * ell + 1) // 2
        n = ell * (iota + 2 * w * h)
        body = data[_HEAD.size :]
        if len(body) != iv_bytes + (n + 1) // 2:
            raise FormatError(f"PLC1 body has {len(body)} bytes, expected {iv_bytes + (n + 1) // 2}")
        iv = tuple(int(v) for v in _unpack_nibbles(body[:iv_bytes], 2 * ell))
        payload = _unpack_nibbles(body[iv_bytes:], n)
        return cls(field_id, ell, 16 if flag == 0 else 32, iota, w, h, iv, payload, version)

    def cipher_image(self) -> GrayImage:
        """Payload after the whitening prefix as an (ell*W) x H byte image.

        Each pixel's 2*ell cipher symbols become ell horizontally adjacent bytes.
        """
        body = self.payload[self.ell * self.iota :]
        raster = np.frombuffer(symbols_to_bytes(body), dtype=np.uint8)
        return GrayImage(self.ell * self.width, self.height, raster.reshape(self.height, -1))


def gradient_image(width: int = 256, height: int = 256) -> GrayImage:
    """Synthetic test image: diagonal ramp (x + y) scaled onto 0..255."""
    y, x = np.mgrid[0:height, 0:width]
    span = max(1, width + height - 2)
    return GrayImage(width, height, ((x + y) * 255 // span).astype(np.uint8))
