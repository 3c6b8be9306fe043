# vfold/serializers/pnm.py
"""
Binary PGM (P5) codec

8-bit (maxval <= 255) and 16-bit big-endian (maxval <= 65535) grayscale.
Headers are written as ``P5\\n<width> <height>\\n<maxval>\\n`` with no
comments, so identical arrays always encode to identical bytes.
"""

import re
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..config import Config
from ..exceptions import MalformedHeaderError, VFoldValidationError
from ..segmentation import BinaryMask
from ..utils import read_bytes, write_bytes

# magic, then width / height / maxval separated by whitespace or comments
_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def encode_pgm(array: np.ndarray, maxval: int = 255) -> bytes:
    """
    Encode a 2-D array of integers in ``[0, maxval]`` as P5

    Raises:
        VFoldValidationError: Wrong shape or values out of range
    """
    array = np.asarray(array)
    if array.ndim != 2:
        raise VFoldValidationError("PGM data must be 2-D", context={"shape": tuple(array.shape)})
    if not 1 <= maxval <= Config.PGM16_MAXVAL:
        raise VFoldValidationError(f"PGM maxval must lie in [1, 65535], got {maxval}")
    if array.size and (array.min() < 0 or array.max() > maxval):
        raise VFoldValidationError(
            f"PGM values must lie in [0, {maxval}]",
            context={"min": int(array.min()), "max": int(array.max())},
        )

    height, width = array.shape
    dtype = ">u1" if maxval < 256 else ">u2"
    header = b"P5\n%d %d\n%d\n" % (width, height, maxval)
    return header + array.astype(dtype).tobytes()


def decode_pgm(payload: bytes) -> Tuple[np.ndarray, int]:
    """
    Decode P5 bytes

    Returns:
        Tuple of (``uint8`` or ``uint16`` array, maxval)

    Raises:
        MalformedHeaderError: Not a P5 file or truncated raster
    """
    tokens = []
    position = 0
    for _ in range(4):
        match = _TOKEN.match(payload, position)
        if match is None:
            raise MalformedHeaderError("Truncated PGM header")
        tokens.append(match.group(1))
        position = match.end()

    if tokens[0] != b"P5":
        raise MalformedHeaderError(f"Not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise MalformedHeaderError("Non-numeric PGM header field")
    if width <= 0 or height <= 0 or not 1 <= maxval <= Config.PGM16_MAXVAL:
        raise MalformedHeaderError(f"Bad PGM geometry {width}x{height} maxval {maxval}")

    # exactly one whitespace byte separates header and raster
    position += 1
    sample = 1 if maxval < 256 else 2
    expected = width * height * sample
    raster = payload[position:position + expected]
    if len(raster) != expected:
        raise MalformedHeaderError(f"PGM raster has {len(raster)} bytes, expected {expected}")

    dtype = ">u1" if sample == 1 else ">u2"
    array = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return array.astype(np.uint8 if sample == 1 else np.uint16), maxval


def write_pgm(path: Union[str, Path], array: np.ndarray, maxval: int = 255) -> Path:
    path = Path(path)
    write_bytes(path, encode_pgm(array, maxval))
    return path


def read_pgm(path: Union[str, Path]) -> Tuple[np.ndarray, int]:
    try:
        return decode_pgm(read_bytes(path))
    except MalformedHeaderError as e:
        e.filepath = str(path)
        raise


# =========================================================================
# MASKS
# =========================================================================

def encode_mask(mask: BinaryMask) -> bytes:
    """Mask as an 8-bit PGM with values 0 and 255."""
    return encode_pgm(mask.bits.astype(np.uint8) * 255, maxval=255)


def decode_mask(payload: bytes) -> BinaryMask:
    """
    Read a mask written by ``encode_mask``

    Raises:
        VFoldValidationError: Values other than 0 and 255
    """
    array, _ = decode_pgm(payload)
    if not np.isin(array, (0, 255)).all():
        raise VFoldValidationError("Mask PGM must hold only 0 and 255")
    return BinaryMask(array == 255)
