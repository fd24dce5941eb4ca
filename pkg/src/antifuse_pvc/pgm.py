"""Binary PGM (P5, maxval 255) reader and writer."""

import numpy as np

from .errors import ImageFormatError

__all__ = ["read_pgm", "write_pgm", "decode_pgm", "encode_pgm"]


def _tokens(data, count):
    """Pull ``count`` whitespace-separated header tokens, skipping comments."""
    pos = 0
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PGM header")
        out.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    if pos >= n or not data[pos:pos + 1].isspace():
        raise ImageFormatError("truncated PGM header")
    return out, pos + 1


def decode_pgm(data):
    if not data.startswith(b"P5"):
        raise ImageFormatError("not a binary PGM (P5) file")
    (magic, w, h, maxval), offset = _tokens(data, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise ImageFormatError("non-numeric PGM header field") from None
    if width < 1 or height < 1:
        raise ImageFormatError("PGM dimensions must be positive")
    if maxval != 255:
        raise ImageFormatError(f"only maxval 255 is supported, got {maxval}")
    raster = data[offset:offset + width * height]
    if len(raster) < width * height:
        raise ImageFormatError(
            f"truncated PGM raster: expected {width * height} bytes, got {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def encode_pgm(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ImageFormatError("PGM images must be 2-D uint8 arrays")
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def read_pgm(path):
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def write_pgm(path, img):
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img))
