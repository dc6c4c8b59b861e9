"""Binary PGM (P5, maxval 255) reading and writing.

Frames enter the tracker as row-major float grids in [0, 1]; 8-bit PGM
values are divided by 255 on load and quantized back on save.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comment lines between header tokens
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ParseError("unexpected end of PGM header")
    return data[start:pos], pos


def read_pgm(path) -> np.ndarray:
    """Load a binary PGM file as a (H, W) float64 array in [0, 1]."""
    data = Path(path).read_bytes()
    magic, pos = _read_token(data, 0)
    if magic != b"P5":
        raise ParseError(f"{path}: not a binary PGM (magic {magic!r})")
    try:
        w_tok, pos = _read_token(data, pos)
        h_tok, pos = _read_token(data, pos)
        maxval_tok, pos = _read_token(data, pos)
        width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except ValueError as e:
        raise ParseError(f"{path}: malformed PGM header") from e
    if maxval != 255:
        raise ParseError(f"{path}: only maxval 255 is supported (got {maxval})")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise ParseError(f"{path}: truncated PGM raster")
    img = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return img.astype(np.float64) / 255.0


def write_pgm(path, image: np.ndarray) -> None:
    """Write a (H, W) array in [0, 1] as binary PGM with maxval 255."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("PGM image must be 2-d")
    q = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    Path(path).write_bytes(header + q.tobytes())


def read_frame_dir(directory) -> list[np.ndarray]:
    """Load every *.pgm file in a directory in lexicographic name order."""
    paths = sorted(Path(directory).glob("*.pgm"))
    if not paths:
        raise ParseError(f"{directory}: no .pgm files found")
    return [read_pgm(p) for p in paths]
