"""Netpbm I/O, gray-scale normalization, seeded noise and boundary overlays.

Supported encodings: PGM ``P5``/``P2`` and PPM ``P6`` with maxval 255 for
images. Label maps additionally allow any maxval up to 65535 so that more
than 256 labels fit in a plain ``P2`` file.
"""
from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np

from ._validation import LUMA, check_gray_image
from .errors import FormatError, InvalidArgumentError

__all__ = [
    "RawImage",
    "read_image",
    "decode_image",
    "write_image",
    "read_label_map",
    "write_label_map",
    "to_gray_normalized",
    "from_gray",
    "add_gaussian_noise",
    "add_salt_pepper",
    "boundary_mask",
    "render_overlay",
    "atomic_write",
]

_WS = b" \t\n\r\v\f"


@dataclass(frozen=True)
class RawImage:
    """8-bit samples, shape ``(height, width)`` or ``(height, width, 3)``."""

    width: int
    height: int
    channels: int
    data: np.ndarray

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise InvalidArgumentError(f"channels must be 1 or 3, got {self.channels}")
        shape = (self.height, self.width) if self.channels == 1 else (self.height, self.width, 3)
        if self.data.shape != shape or self.data.dtype != np.uint8:
            raise InvalidArgumentError(f"expected uint8 samples of shape {shape}, got {self.data.dtype} {self.data.shape}")

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=np.uint8)
        channels = 1 if arr.ndim == 2 else arr.shape[2]
        return cls(arr.shape[1], arr.shape[0], channels, arr)


def _header_tokens(data, count, pos):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    while len(tokens) < count:
        while pos < len(data) and (data[pos] in _WS or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                end = data.find(b"\n", pos)
                pos = len(data) if end < 0 else end + 1
            else:
                pos += 1
        if pos >= len(data):
            raise FormatError("truncated header", pos)
        start = pos
        while pos < len(data) and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise FormatError(f"expected a decimal number, found {tok[:16]!r}", start)
        tokens.append((int(tok), start))
    return tokens, pos


def parse_netpbm(data):
    """Decode a PGM/PPM byte string.

    Returns
    -------
    magic : str
    samples : ndarray of uint16, shape ``(h, w)`` or ``(h, w, 3)``
    maxval : int
    """
    if len(data) < 2 or data[:1] != b"P" or data[1:2] not in (b"2", b"5", b"6"):
        raise FormatError("not a P2/P5/P6 Netpbm file", 0)
    magic = data[:2].decode()
    tokens, pos = _header_tokens(data, 3, 2)
    (width, w_at), (height, h_at), (maxval, m_at) = tokens
    if width < 1:
        raise FormatError("width must be positive", w_at)
    if height < 1:
        raise FormatError("height must be positive", h_at)
    if not 0 < maxval < 65536:
        raise FormatError(f"maxval {maxval} out of range", m_at)
    channels = 3 if magic == "P6" else 1
    count = width * height * channels
    if magic == "P2":
        values, _ = _header_tokens(data, count, pos) if count else ([], pos)
        samples = np.array([v for v, _ in values], dtype=np.int64)
        bad = np.flatnonzero(samples > maxval)
        if len(bad):
            raise FormatError("sample exceeds maxval", values[bad[0]][1])
    else:
        if pos >= len(data) or data[pos] not in _WS:
            raise FormatError("missing whitespace after maxval", pos)
        pos += 1
        width_bytes = 1 if maxval < 256 else 2
        need = count * width_bytes
        if len(data) - pos < need:
            raise FormatError(f"truncated raster: need {need} bytes, have {len(data) - pos}", len(data))
        raw = np.frombuffer(data, dtype=np.uint8 if width_bytes == 1 else ">u2", count=count, offset=pos)
        samples = raw.astype(np.int64)
        if samples.max(initial=0) > maxval:
            raise FormatError("sample exceeds maxval", pos + int(np.argmax(samples > maxval)) * width_bytes)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return magic, samples.reshape(shape).astype(np.uint16), maxval


def read_image(path):
    """Read an 8-bit PGM (P5/P2) or PPM (P6) file into a :class:`RawImage`."""
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def decode_image(data):
    """Decode 8-bit PGM/PPM bytes into a :class:`RawImage`."""
    magic, samples, maxval = parse_netpbm(data)
    if maxval != 255:
        raise FormatError(f"maxval must be 255, got {maxval}", data.find(str(maxval).encode(), 2))
    return RawImage.from_array(samples.astype(np.uint8))


def _encode(raw, plain=False):
    if plain:
        if raw.channels != 1:
            raise InvalidArgumentError("plain encoding is only written for gray images")
        body = "\n".join(" ".join(map(str, row)) for row in raw.data.tolist())
        return f"P2\n{raw.width} {raw.height}\n255\n{body}\n".encode()
    magic = "P5" if raw.channels == 1 else "P6"
    return f"{magic}\n{raw.width} {raw.height}\n255\n".encode() + raw.data.tobytes()


def atomic_write(path, payload):
    """Write bytes via a temporary file and rename, so no partial file remains."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_image(raw, path, plain=False):
    """Write ``raw`` as P5 (gray), P6 (color) or, with ``plain``, P2."""
    atomic_write(path, _encode(raw, plain))


def read_label_map(path):
    """Read a gray Netpbm label map (any maxval up to 65535) as int64."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, samples, _ = parse_netpbm(data)
    if magic == "P6":
        raise FormatError("label maps must be gray (P2/P5)", 0)
    return samples.astype(np.int64)


def encode_label_map(labels):
    labels = np.asarray(labels)
    k = int(labels.max()) + 1
    h, w = labels.shape
    if k <= 256:
        return f"P5\n{w} {h}\n255\n".encode() + labels.astype(np.uint8).tobytes()
    if k > 65536:
        raise InvalidArgumentError(f"{k} labels do not fit a 16-bit label map")
    body = "\n".join(" ".join(map(str, row)) for row in labels.tolist())
    return f"P2\n{w} {h}\n{k - 1}\n{body}\n".encode()


def write_label_map(labels, path):
    """Write labels as P5 when ``k <= 256``, else plain P2 with maxval ``k - 1``."""
    atomic_write(path, encode_label_map(labels))


def to_gray_normalized(raw):
    """Luminance ``0.299 R + 0.587 G + 0.114 B`` (or the gray value) over 255."""
    data = raw.data.astype(float)
    if raw.channels == 3:
        data = data @ LUMA
    return np.clip(data / 255.0, 0.0, 1.0)


def from_gray(img):
    """Quantize a [0, 1] image back to an 8-bit gray :class:`RawImage`."""
    y = check_gray_image(img)
    return RawImage.from_array(np.rint(y * 255.0).astype(np.uint8))


def add_gaussian_noise(img, sigma, seed=None):
    """Add ``N(0, sigma^2)`` noise per pixel and clamp to [0, 1]."""
    y = check_gray_image(img)
    if sigma < 0:
        raise InvalidArgumentError(f"noise standard deviation must be nonnegative, got {sigma}")
    if sigma == 0:
        return y.copy()
    rng = np.random.default_rng(seed)
    return np.clip(y + rng.normal(0.0, sigma, size=y.shape), 0.0, 1.0)


def salt_pepper_count(shape, fraction):
    """Number of pixels overwritten: ``fraction * m * n`` rounded half up."""
    return int(np.floor(fraction * shape[0] * shape[1] + 0.5))


def add_salt_pepper(img, fraction, seed=None):
    """Overwrite ``round(fraction * m * n)`` distinct pixels with 0 or 1.

    Pixels are drawn uniformly without replacement and each gets salt or
    pepper with equal probability.
    """
    y = check_gray_image(img)
    if not 0.0 <= fraction <= 1.0:
        raise InvalidArgumentError(f"salt-and-pepper fraction must be in [0, 1], got {fraction}")
    rng = np.random.default_rng(seed)
    count = salt_pepper_count(y.shape, fraction)
    hit = rng.choice(y.size, size=count, replace=False)
    out = y.copy().ravel()
    out[hit] = rng.integers(0, 2, size=count).astype(float)
    return out.reshape(y.shape)


def boundary_mask(labels):
    """Pixels with a 4-neighbor carrying a different label."""
    labels = np.asarray(labels)
    mask = np.zeros(labels.shape, dtype=bool)
    dr = labels[:, 1:] != labels[:, :-1]
    dc = labels[1:, :] != labels[:-1, :]
    mask[:, 1:] |= dr
    mask[:, :-1] |= dr
    mask[1:, :] |= dc
    mask[:-1, :] |= dc
    return mask


def render_overlay(img, labels):
    """Gray image as RGB with segment-boundary pixels painted red."""
    y = check_gray_image(img)
    labels = np.asarray(labels)
    if labels.shape != y.shape:
        raise InvalidArgumentError(f"label map shape {labels.shape} does not match image {y.shape}")
    gray = np.rint(y * 255.0).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    rgb[boundary_mask(labels)] = (255, 0, 0)
    return RawImage.from_array(rgb)
