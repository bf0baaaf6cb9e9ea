"""
Exception hierarchy shared by all depth-fusion packages.
"""


class DepthFusionError(Exception):
    """Base class for every error raised by the depth-fusion engine."""


class BehindCameraError(DepthFusionError, ValueError):
    """A point with non-positive depth was projected."""


class InvalidDepthError(DepthFusionError, ValueError):
    """A depth value or depth field violates its invariants."""


class DimensionMismatchError(DepthFusionError, ValueError):
    """Two fields that must share a shape do not."""


class UnnormalizedVolumeError(DepthFusionError, ValueError):
    """A probability volume does not sum to one per pixel."""


class EmptyInputError(DepthFusionError, ValueError):
    """An operation that needs at least one input got none."""


class ZeroBaselineError(DepthFusionError, ValueError):
    """A view pair has no translation, so triangulation is undefined."""


class PfmFormatError(DepthFusionError, ValueError):
    """A PFM file is malformed or truncated."""


class PoseFormatError(DepthFusionError, ValueError):
    """A pose file line is not a valid 3x4 matrix."""


class IntrinsicsFormatError(DepthFusionError, ValueError):
    """An intrinsics file has missing, duplicate or malformed keys."""


class ManifestError(DepthFusionError, ValueError):
    """A manifest is malformed or a checksum does not verify."""


class QuadratureError(DepthFusionError, ValueError):
    """The numerical posterior has zero total mass."""


class ConfigValidationError(DepthFusionError, ValueError):
    """Pipeline configuration is invalid; carries every problem found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.problems))


class MissingInputError(DepthFusionError, FileNotFoundError):
    """A required input file does not exist."""

    def __init__(self, path, role: str = "input"):
        self.path = path
        self.role = role
        super().__init__(f"missing {role}: {path}")


class InvalidUncertaintyError(DepthFusionError, ValueError):
    """An uncertainty map holds non-positive or non-finite values where evaluated."""


class SceneGeometryError(DepthFusionError, ValueError):
    """A synthetic camera sits on or behind the scene's surfaces."""
