"""
Probability volumes on disk: ``planes.txt`` with one hypothesis depth per
line and ``plane_XXX.pfm`` holding each plane's probability slice.
"""
from pathlib import Path

import numpy as np

from src.errors import MissingInputError, PfmFormatError
from src.fileio.pfm import read_pfm, write_pfm
from src.probvolume.models import DepthHypotheses, ProbabilityVolume

PLANES_FILE = "planes.txt"


def _slice_name(index: int) -> str:
    return f"plane_{index:03d}.pfm"


def write_volume(directory, volume: ProbabilityVolume) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / PLANES_FILE).open("w", encoding="utf-8", newline="\n") as f:
        for depth in volume.hypotheses.planes:
            f.write(f"{float(depth):.17g}\n")
    for j in range(volume.hypotheses.count):
        write_pfm(directory / _slice_name(j), volume.probs[:, :, j])
    return directory


def read_volume(directory) -> ProbabilityVolume:
    directory = Path(directory)
    planes_path = directory / PLANES_FILE
    if not planes_path.is_file():
        raise MissingInputError(planes_path, "volume planes file")
    text = planes_path.read_text(encoding="utf-8").split()
    try:
        hypotheses = DepthHypotheses(np.array([float(v) for v in text]))
    except ValueError as e:
        raise PfmFormatError(f"{planes_path}: {e}") from e
    slices = [read_pfm(directory / _slice_name(j)) for j in range(hypotheses.count)]
    if any(s.ndim != 2 or s.shape != slices[0].shape for s in slices):
        raise PfmFormatError(f"{directory}: volume slices differ in shape")
    return ProbabilityVolume(np.stack(slices, axis=2).astype(np.float64), hypotheses)
