"""
Intrinsics as a UTF-8 key=value file with keys fx, fy, cx, cy and size=WxH.
"""
from pathlib import Path

from pydantic import ValidationError

from src.errors import IntrinsicsFormatError, MissingInputError
from src.geometry.models import Intrinsics

KEYS = ("fx", "fy", "cx", "cy", "size")


def parse_intrinsics(text: str, source: str = "<string>") -> Intrinsics:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise IntrinsicsFormatError(f"{source}:{lineno}: expected key=value, got {line!r}")
        if key not in KEYS:
            raise IntrinsicsFormatError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise IntrinsicsFormatError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value.strip()

    missing = [key for key in KEYS if key not in values]
    if missing:
        raise IntrinsicsFormatError(f"{source}: missing keys {', '.join(missing)}")
    try:
        width, height = (int(v) for v in values["size"].lower().split("x"))
        return Intrinsics(
            fx=float(values["fx"]),
            fy=float(values["fy"]),
            cx=float(values["cx"]),
            cy=float(values["cy"]),
            width=width,
            height=height,
        )
    except (ValueError, ValidationError) as e:
        raise IntrinsicsFormatError(f"{source}: {e}") from e


def read_intrinsics(path) -> Intrinsics:
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(path, "intrinsics file")
    return parse_intrinsics(path.read_text(encoding="utf-8"), str(path))


def format_intrinsics(k: Intrinsics) -> str:
    return (
        f"fx={k.fx:.17g}\nfy={k.fy:.17g}\ncx={k.cx:.17g}\ncy={k.cy:.17g}\n"
        f"size={k.width}x{k.height}\n"
    )


def write_intrinsics(path, k: Intrinsics) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        f.write(format_intrinsics(k))
    return path
