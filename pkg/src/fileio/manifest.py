"""
Dataset manifest: a YAML list of (role, relative path, SHA-256) entries.
"""
import hashlib
import logging
from pathlib import Path
from typing import Literal, Mapping

import yaml
from pydantic import BaseModel, Field, ValidationError

from src.errors import ManifestError, MissingInputError

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.yaml"


class ManifestEntry(BaseModel):
    role: str = Field(..., min_length=1)
    path: str = Field(..., min_length=1, description="Relative to the manifest directory")
    checksum: str = Field(..., pattern="^[0-9a-f]{64}$", description="SHA-256 hex digest")


class Manifest(BaseModel):
    version: Literal[1] = 1
    entries: list[ManifestEntry] = []

    def paths(self, role: str) -> list[str]:
        return [e.path for e in self.entries if e.role == role]


def sha256(path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(root, files: Mapping[str, list]) -> Manifest:
    """Checksum every file of each role, storing paths relative to ``root``."""
    root = Path(root)
    entries = []
    for role, paths in files.items():
        for p in paths:
            p = Path(p)
            entries.append(ManifestEntry(role=role, path=p.relative_to(root).as_posix(), checksum=sha256(p)))
    return Manifest(entries=entries)


def write_manifest(root, manifest: Manifest) -> Path:
    path = Path(root) / MANIFEST_FILE
    with path.open("w", encoding="utf-8", newline="\n") as f:
        yaml.safe_dump(manifest.model_dump(), f, sort_keys=False)
    return path


def read_manifest(root, verify: bool = True) -> Manifest:
    root = Path(root)
    path = root / MANIFEST_FILE
    if not path.is_file():
        raise MissingInputError(path, "manifest")
    try:
        manifest = Manifest.model_validate(yaml.safe_load(path.read_text(encoding="utf-8")))
    except (ValidationError, yaml.YAMLError) as e:
        raise ManifestError(f"{path}: {e}") from e
    if verify:
        for entry in manifest.entries:
            target = root / entry.path
            if not target.is_file():
                raise MissingInputError(target, entry.role)
            if sha256(target) != entry.checksum:
                raise ManifestError(f"{target}: checksum mismatch")
        logger.debug("verified %d manifest entries under %s", len(manifest.entries), root)
    return manifest
