"""
Filter state checkpoints as a single ``.npz`` archive, float64 throughout
so a resumed run continues bit-identically.
"""
from pathlib import Path

import numpy as np

from src.bayesfilter.models import FilterState
from src.errors import MissingInputError


def save_state(path, state: FilterState) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as f:
        np.savez(f, **state.arrays())
    return path


def load_state(path) -> FilterState:
    path = Path(path)
    if not path.is_file():
        raise MissingInputError(path, "filter state checkpoint")
    with np.load(path, allow_pickle=False) as archive:
        return FilterState(**{name: archive[name].copy() for name in archive.files})
