"""Binary PGM (P5) reading and writing, 8- and 16-bit."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .validation import FormatError


def write_pgm(path, image, maxval=255):
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError(f"PGM image must be 2-D, got shape {image.shape}")
    if not 0 < maxval < 65536:
        raise ValueError(f"maxval must be in [1, 65535], got {maxval}")
    if image.size and (image.min() < 0 or image.max() > maxval):
        raise ValueError(f"pixel values must lie in [0, {maxval}]")
    dtype = ">u1" if maxval < 256 else ">u2"  # 16-bit samples are big-endian
    h, w = image.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + image.astype(dtype).tobytes())


def _tokens(data):
    """Yield (token, end_offset) for the PGM header, skipping comments."""
    i, n = 0, len(data)
    while i < n:
        c = data[i : i + 1]
        if c == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            start = i
            while i < n and not data[i : i + 1].isspace() and data[i : i + 1] != b"#":
                i += 1
            yield data[start:i], i


def read_pgm(path):
    """Return ``(image, maxval)``; ``image`` is uint8 or uint16."""
    path = Path(path)
    data = path.read_bytes()
    header = []
    end = 0
    for tok, end in _tokens(data):
        header.append(tok)
        if len(header) == 4:
            break
    if len(header) < 4 or header[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    try:
        w, h, maxval = (int(t) for t in header[1:])
    except ValueError:
        raise FormatError(f"{path}: malformed PGM header") from None
    if not 0 < maxval < 65536:
        raise FormatError(f"{path}: maxval {maxval} out of range")
    dtype = np.dtype(">u1") if maxval < 256 else np.dtype(">u2")
    body = data[end + 1 :]  # exactly one whitespace byte after maxval
    expected = w * h * dtype.itemsize
    if len(body) < expected:
        raise FormatError(f"{path}: expected {expected} pixel bytes, found {len(body)}")
    image = np.frombuffer(body[:expected], dtype=dtype).reshape(h, w)
    return image.astype(np.uint8 if maxval < 256 else np.uint16), maxval
