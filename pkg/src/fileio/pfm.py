"""
PFM reader/writer for dense float fields.

Header: ``Pf`` (one channel) or ``PF`` (three channels), then
``<width> <height>``, then the scale whose sign gives the byte order
(negative = little-endian). Rows are stored bottom-up as 32-bit floats.
NaN marks invalid pixels of a depth field.
"""
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from src.errors import MissingInputError, PfmFormatError
from src.geometry.models import DepthField

logger = logging.getLogger(__name__)


def _split_header(data: bytes, path) -> tuple[list[str], int]:
    lines = []
    cursor = 0
    for _ in range(3):
        end = data.find(b"\n", cursor)
        if end < 0:
            raise PfmFormatError(f"{path}: truncated PFM header")
        try:
            lines.append(data[cursor:end].decode("ascii").strip())
        except UnicodeDecodeError as e:
            raise PfmFormatError(f"{path}: PFM header is not ASCII") from e
        cursor = end + 1
    return lines, cursor


def read_pfm(path) -> np.ndarray:
    """Read a PFM file into an H×W (``Pf``) or H×W×3 (``PF``) float32 array, top row first."""
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(path, "PFM file")
    data = path.read_bytes()
    (tag, dims, scale_text), offset = _split_header(data, path)

    if tag == "Pf":
        channels = 1
    elif tag == "PF":
        channels = 3
    else:
        raise PfmFormatError(f"{path}: unknown PFM identifier {tag!r}")
    try:
        width, height = (int(v) for v in dims.split())
        scale = float(scale_text)
    except ValueError as e:
        raise PfmFormatError(f"{path}: malformed PFM header {dims!r} / {scale_text!r}") from e
    if width <= 0 or height <= 0 or scale == 0:
        raise PfmFormatError(f"{path}: invalid PFM dimensions {width}x{height} or zero scale")

    expected = width * height * channels * 4
    payload = len(data) - offset
    if payload != expected:
        raise PfmFormatError(f"{path}: payload is {payload} bytes, header implies {expected}")

    dtype = "<f4" if scale < 0 else ">f4"
    values = np.frombuffer(data, dtype=dtype, count=width * height * channels, offset=offset)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return np.flipud(values.reshape(shape)).astype(np.float32)


def _atomic_write(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_pfm(path, values: np.ndarray) -> Path:
    """Write an H×W or H×W×3 array as little-endian PFM (values cast to float32)."""
    path = Path(path)
    values = np.asarray(values)
    if values.ndim == 2:
        tag = "Pf"
    elif values.ndim == 3 and values.shape[2] == 3:
        tag = "PF"
    else:
        raise PfmFormatError(f"PFM stores H×W or H×W×3 arrays, got {values.shape}")
    height, width = values.shape[:2]
    header = f"{tag}\n{width} {height}\n-1.0\n".encode("ascii")
    body = np.flipud(values).astype("<f4").tobytes()
    _atomic_write(path, header + body)
    logger.debug("wrote %s (%dx%d %s)", path, width, height, tag)
    return path


def read_depth(path) -> DepthField:
    """Depth field from a PFM; NaN (and non-positive) pixels are invalid."""
    values = read_pfm(path)
    if values.ndim != 2:
        raise PfmFormatError(f"{path}: depth fields are single-channel")
    return DepthField(values.astype(np.float64))


def write_depth(path, depth: DepthField) -> Path:
    return write_pfm(path, depth.filled(np.nan))
