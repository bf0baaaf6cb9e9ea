"""
Counter-based random numbers keyed by (seed, stream, draw, index).

Every value is a pure function of its key, so results do not depend on
evaluation order, chunking or thread count. The mixer is SplitMix64's
finaliser on unsigned 64-bit integers; uniforms take the top 53 bits,
normals use Box-Muller on two independent uniforms.
"""
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_MASK64 = (1 << 64) - 1


def mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 step on a uint64 array (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + _GOLDEN
        z = (z ^ (z >> _S30)) * _MUL1
        z = (z ^ (z >> _S27)) * _MUL2
        return z ^ (z >> _S31)


def _key(value: int) -> np.ndarray:
    return np.array([int(value) & _MASK64], dtype=np.uint64)


class PixelRNG:
    """Deterministic per-element random source for one seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._base = mix64(_key(self.seed))

    def bits(self, stream: int, index: np.ndarray, draw: int = 0) -> np.ndarray:
        key = mix64(mix64(self._base ^ _key(stream)) ^ _key(draw))
        idx = np.asarray(index, dtype=np.int64).astype(np.uint64)
        return mix64(key ^ idx)

    def uniform(self, stream: int, index: np.ndarray, draw: int = 0) -> np.ndarray:
        """Uniforms in the open interval (0, 1)."""
        top = (self.bits(stream, index, draw) >> _S11).astype(np.float64)
        return (top + 0.5) * 2.0**-53

    def normal(self, stream: int, index: np.ndarray, draw: int = 0) -> np.ndarray:
        """Standard normals; consumes draws 2·draw and 2·draw + 1."""
        u1 = self.uniform(stream, index, 2 * draw)
        u2 = self.uniform(stream, index, 2 * draw + 1)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def grid_uniform(self, stream: int, shape: tuple[int, ...], draw: int = 0) -> np.ndarray:
        return self.uniform(stream, np.arange(int(np.prod(shape))), draw).reshape(shape)

    def grid_normal(self, stream: int, shape: tuple[int, ...], draw: int = 0) -> np.ndarray:
        return self.normal(stream, np.arange(int(np.prod(shape))), draw).reshape(shape)


def lattice_values(seed: int, stream: int, coords: np.ndarray) -> np.ndarray:
    """
    Uniform value in (0, 1) for each integer lattice point; ``coords`` has
    shape (..., D). Used by the procedural textures.
    """
    coords = np.asarray(coords, dtype=np.int64)
    key = mix64(mix64(_key(seed)) ^ _key(stream))
    h = np.broadcast_to(key, coords.shape[:-1]).copy()
    for axis in range(coords.shape[-1]):
        h = mix64(h ^ coords[..., axis].astype(np.uint64))
    return ((h >> _S11).astype(np.float64) + 0.5) * 2.0**-53
