import numpy as np
import pytest
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from src.geometry.models import DepthField, Intrinsics, RigidTransform
from src.pipeline.config import build_config
from src.synth.models import SceneSpec
from src.synth.service import forward_trajectory, make_scene


def random_transform(rng: np.random.Generator, scale: float = 1.0) -> RigidTransform:
    rotation = Rotation.random(random_state=rng).as_matrix()
    return RigidTransform(rotation, rng.uniform(-scale, scale, size=3))


@st.composite
def transforms(draw) -> RigidTransform:
    quaternion = draw(
        st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4).filter(
            lambda q: np.linalg.norm(q) > 0.1
        )
    )
    translation = draw(st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3))
    return RigidTransform(Rotation.from_quat(quaternion).as_matrix(), translation)


def fronto_depth(k: Intrinsics, depth: float) -> DepthField:
    return DepthField(np.full(k.shape, depth))


@pytest.fixture
def k() -> Intrinsics:
    return Intrinsics(fx=50.0, fy=50.0, cx=31.5, cy=23.5, width=64, height=48)


@pytest.fixture
def k_wide() -> Intrinsics:
    return Intrinsics(fx=100.0, fy=100.0, cx=320.0, cy=96.0, width=640, height=192)


@pytest.fixture
def scene_k() -> Intrinsics:
    return Intrinsics(fx=120.0, fy=120.0, cx=95.5, cy=63.5, width=192, height=128)


@pytest.fixture
def scene(scene_k):
    return make_scene(SceneSpec(depth_range=(4.0, 30.0), seed=3), scene_k, forward_trajectory(5, 0.5))


@pytest.fixture
def small_config(tmp_path):
    """Pipeline config over a tiny synthetic sequence inside tmp_path."""
    return build_config(
        {
            "data_dir": str(tmp_path / "data"),
            "output_dir": str(tmp_path / "out"),
            "view_sets": [[-1, 1], [-2, 1]],
            "synth": {
                "frames": 5,
                "camera": {"width": 64, "height": 48, "fx": 50.0, "fy": 50.0},
            },
        }
    )
