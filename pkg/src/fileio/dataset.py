"""
Directory layout of a fusion dataset and of a run's outputs.

    <root>/intrinsics.txt
    <root>/poses.txt                    camera-to-first-frame, KITTI format
    <root>/image/000000.pfm             colour PF
    <root>/gt/000000.pfm                optional ground truth
    <root>/prior/000000.pfm             monocular depth
    <root>/prior_uncertainty/000000.pfm
    <root>/mvs/000000_0.pfm             MVS depth of frame 0 for view set 0
    <root>/volume/000000/               optional probability volume
    <root>/manifest.yaml
"""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.consistency.models import Observation
from src.errors import MissingInputError
from src.fileio.pfm import read_pfm, write_pfm


def frame_name(frame: int) -> str:
    return f"{frame:06d}"


@dataclass(frozen=True)
class DatasetLayout:
    root: Path

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))

    @property
    def intrinsics(self) -> Path:
        return self.root / "intrinsics.txt"

    @property
    def poses(self) -> Path:
        return self.root / "poses.txt"

    def image(self, frame: int) -> Path:
        return self.root / "image" / f"{frame_name(frame)}.pfm"

    def gt(self, frame: int) -> Path:
        return self.root / "gt" / f"{frame_name(frame)}.pfm"

    def prior(self, frame: int) -> Path:
        return self.root / "prior" / f"{frame_name(frame)}.pfm"

    def prior_uncertainty(self, frame: int) -> Path:
        return self.root / "prior_uncertainty" / f"{frame_name(frame)}.pfm"

    def mvs(self, frame: int, view_set: int) -> Path:
        return self.root / "mvs" / f"{frame_name(frame)}_{view_set}.pfm"

    def volume(self, frame: int) -> Path:
        return self.root / "volume" / frame_name(frame)


@dataclass(frozen=True)
class OutputLayout:
    root: Path

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))

    def depth(self, frame: int) -> Path:
        return self.root / "depth" / f"{frame_name(frame)}.pfm"

    def uncertainty(self, frame: int) -> Path:
        return self.root / "uncertainty" / f"{frame_name(frame)}.pfm"

    def curves(self, frame: int, stage: str) -> Path:
        return self.root / "curves" / f"{frame_name(frame)}_{stage}.csv"

    def state(self, frame: int) -> Path:
        return self.root / "state" / f"{frame_name(frame)}.npz"

    @property
    def metrics(self) -> Path:
        return self.root / "metrics.csv"

    @property
    def report(self) -> Path:
        return self.root / "run_report.yaml"


def write_observation(directory, index: int, obs: Observation) -> tuple[Path, Path]:
    """Store an observation as two PFMs; NaN marks unobserved pixels."""
    directory = Path(directory)
    return (
        write_pfm(directory / f"{index:03d}_inv_depth.pfm", np.where(obs.mask, obs.inv_depth, np.nan)),
        write_pfm(directory / f"{index:03d}_variance.pfm", np.where(obs.mask, obs.variance, np.nan)),
    )


def read_observations(directory) -> list[Observation]:
    """All observations in a directory, in index order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingInputError(directory, "observation directory")
    observations = []
    for inv_path in sorted(directory.glob("*_inv_depth.pfm")):
        var_path = inv_path.with_name(inv_path.name.replace("_inv_depth", "_variance"))
        inv = read_pfm(inv_path).astype(np.float64)
        var = read_pfm(var_path).astype(np.float64)
        mask = np.isfinite(inv) & np.isfinite(var) & (inv > 0) & (var > 0)
        observations.append(Observation(inv, var, mask))
    return observations
