"""On-disk formats: PFM fields, KITTI poses, intrinsics, CSV, volumes, checkpoints, manifests."""
from src.fileio.checkpoint import load_state, save_state
from src.fileio.dataset import DatasetLayout, OutputLayout, read_observations, write_observation
from src.fileio.intrinsics import read_intrinsics, write_intrinsics
from src.fileio.manifest import Manifest, ManifestEntry, build_manifest, read_manifest, write_manifest
from src.fileio.pfm import read_depth, read_pfm, write_depth, write_pfm
from src.fileio.poses import read_poses, write_poses
from src.fileio.tables import read_csv, write_csv, write_curves
from src.fileio.volume import read_volume, write_volume

__all__ = [
    "DatasetLayout",
    "OutputLayout",
    "read_observations",
    "write_observation",
    "Manifest",
    "ManifestEntry",
    "build_manifest",
    "load_state",
    "read_csv",
    "read_depth",
    "read_intrinsics",
    "read_manifest",
    "read_pfm",
    "read_poses",
    "read_volume",
    "save_state",
    "write_csv",
    "write_curves",
    "write_depth",
    "write_intrinsics",
    "write_manifest",
    "write_pfm",
    "write_poses",
    "write_volume",
]
