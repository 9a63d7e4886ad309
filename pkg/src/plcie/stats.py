"""Statistical evaluation: histogram, entropy, NPCR/UACI, adjacent-pixel
correlation and the plaintext/key sensitivity experiments.

NPCR and UACI default to byte granularity (alphabet 0..255); pass
``granularity="symbol"`` to compare GF(16) nibbles with denominator 15.
"""

from __future__ import annotations

import csv
import io
import json
import secrets
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CryptoError, FormatError, UndefinedCorrelationError, UsageError
from .imageio import GrayImage, bytes_to_symbols

DIRECTIONS = {"horizontal": (0, 1), "vertical": (1, 0), "diagonal": (1, 1)}


@dataclass
class AnalysisReport:
    metric: str
    params: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    seed: int | None = None

    def rows(self):
        p = ";".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        for name, v in self.values.items():
            yield {"name": f"{self.metric}.{name}" if name != self.metric else name, "params": p, "value": v, "seed": "" if self.seed is None else self.seed}


def new_seed() -> int:
    return secrets.randbits(63)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["name", "params", "value", "seed"], lineterminator="\n")
    w.writeheader()
    for r in reports:
        for row in r.rows():
            w.writerow(row)
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps({"reports": [asdict(r) for r in reports]}, indent=2, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def histogram(img: GrayImage) -> np.ndarray:
    return np.bincount(img.pixels.reshape(-1), minlength=256)


def histogram_csv(hist) -> str:
    return "level,count\n" + "".join(f"{k},{int(n)}\n" for k, n in enumerate(hist))


def _as_bytes(data) -> np.ndarray:
    if isinstance(data, GrayImage):
        return data.pixels.reshape(-1)
    if isinstance(data, np.ndarray):
        return data.astype(np.uint8, copy=False).reshape(-1)
    return np.frombuffer(bytes(data), dtype=np.uint8)


def entropy(data, width: int = 8) -> float:
    """Shannon entropy in bits of the empirical distribution of ``width``-bit symbols."""
    b = _as_bytes(data)
    if b.size == 0:
        raise UsageError("entropy of empty data is undefined")
    if width == 8:
        sym = b
    elif width == 4:
        sym = bytes_to_symbols(b.tobytes()).symbols
    elif width == 1:
        sym = np.unpackbits(b)
    else:
        raise UsageError("width must be 1, 4 or 8 bits")
    counts = np.bincount(sym, minlength=1 << width)
    p = counts[counts > 0] / sym.size
    return float(-(p * np.log2(p)).sum()) + 0.0


def _pair(c1: GrayImage, c2: GrayImage, granularity: str):
    if (c1.width, c1.height) != (c2.width, c2.height):
        raise UsageError(f"image sizes differ: {c1.width}x{c1.height} vs {c2.width}x{c2.height}")
    a = c1.pixels.reshape(-1).astype(np.int64)
    b = c2.pixels.reshape(-1).astype(np.int64)
    if granularity == "byte":
        return a, b, 255
    if granularity == "symbol":
        a = np.stack([a >> 4, a & 15], axis=1).reshape(-1)
        b = np.stack([b >> 4, b & 15], axis=1).reshape(-1)
        return a, b, 15
    raise UsageError("granularity must be 'byte' or 'symbol'")


def npcr(c1: GrayImage, c2: GrayImage, granularity: str = "byte") -> float:
    a, b, _ = _pair(c1, c2, granularity)
    return 100.0 * float(np.count_nonzero(a != b)) / a.size


def uaci(c1: GrayImage, c2: GrayImage, granularity: str = "byte") -> float:
    a, b, top = _pair(c1, c2, granularity)
    return 100.0 * float(np.abs(a - b).sum()) / (top * a.size)


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float((dx * dx).sum())
    syy = float((dy * dy).sum())
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation undefined: a marginal has zero variance")
    return float((dx * dy).sum()) / np.sqrt(sxx * syy)


def adjacent_pairs(img: GrayImage, direction: str, n: int, seed: int):
    try:
        dy, dx = DIRECTIONS[direction]
    except KeyError:
        raise UsageError(f"direction must be one of {sorted(DIRECTIONS)}") from None
    h, w = img.height - dy, img.width - dx
    if h <= 0 or w <= 0 or n < 2:
        raise UsageError("image too small to sample adjacent pairs")
    rng = np.random.default_rng(seed)
    ys = rng.integers(0, h, size=n)
    xs = rng.integers(0, w, size=n)
    px = img.pixels
    return px[ys, xs], px[ys + dy, xs + dx]


def adjacent_correlation(img: GrayImage, direction: str = "horizontal", n: int = 2500, seed: int = 0) -> float:
    """Pearson coefficient over ``n`` uniformly sampled adjacent pixel pairs."""
    x, y = adjacent_pairs(img, direction, n, seed)
    return pearson(x, y)


def correlation_report(img: GrayImage, n: int = 2500, seed: int | None = None, directions=None) -> AnalysisReport:
    seed = new_seed() if seed is None else seed
    directions = list(DIRECTIONS) if directions is None else directions
    vals = {d: adjacent_correlation(img, d, n, seed) for d in directions}
    return AnalysisReport("correlation", {"n": n}, vals, seed)


def entropy_report(data, widths=(1, 4, 8)) -> AnalysisReport:
    names = {1: "bit", 4: "symbol", 8: "byte"}
    return AnalysisReport("entropy", {}, {names[w]: entropy(data, w) for w in widths})


def sensitivity_experiment(
    kind: str,
    km,
    img: GrayImage,
    seed: int | None = None,
    *,
    position: int | str = "random",
    ell: int = 8,
    mode: str | None = None,
    granularity: str = "byte",
) -> AnalysisReport:
    """Encrypt twice under one IV and whitening prefix, with one change in between.

    kind="plaintext": flip the low bit of one pixel (``position`` is a raster
    index, or "random").  kind="key": flip one key bit, moving on to the next
    bit while the flipped key is rejected.  Reports NPCR/UACI of the two cipher
    images.
    """
    from .cipher import encrypt_image
    from .keys import generate_iv, parse_key
    from .kernel import SELFSYNC

    mode = SELFSYNC if mode is None else mode
    seed = new_seed() if seed is None else seed
    rng = np.random.default_rng(seed)
    iv = generate_iv(ell, rng)
    enc_seed = int(rng.integers(0, 2**63))
    params = {"kind": kind, "mode": mode, "granularity": granularity}

    def enc(k, im):
        return encrypt_image(k, im, ell=ell, mode=mode, iv=iv, rng=np.random.default_rng(enc_seed)).cipher_image()

    c1 = enc(km, img)
    if kind == "plaintext":
        npx = img.width * img.height
        pos = int(rng.integers(0, npx)) if position == "random" else int(position)
        if not 0 <= pos < npx:
            raise UsageError(f"pixel index {pos} outside the image")
        flat = img.pixels.reshape(-1).copy()
        flat[pos] ^= 1
        c2 = enc(km, GrayImage(img.width, img.height, flat))
        params["pixel"] = pos
    elif kind == "key":
        bits = km.to_bits(ell)
        start = int(rng.integers(0, len(bits)))
        for k in range(len(bits)):
            b = (start + k) % len(bits)
            flipped = bits[:b] + ("1" if bits[b] == "0" else "0") + bits[b + 1 :]
            try:
                km2 = parse_key(flipped, ell)
                c2 = enc(km2, img)
            except (CryptoError, FormatError):
                continue
            params["bit"] = b
            break
        else:
            raise CryptoError("every single-bit neighbour of the key is rejected")
    else:
        raise UsageError("kind must be 'plaintext' or 'key'")
    vals = {"npcr": npcr(c1, c2, granularity), "uaci": uaci(c1, c2, granularity)}
    return AnalysisReport("sensitivity", params, vals, seed)
