"""Exception types raised across the tv-spectrum package."""


class TVSpectrumError(Exception):
    """Base class for all package errors"""


class IncompatibleFieldsError(TVSpectrumError, ValueError):
    """Two fields that must share a grid have different dimensions"""


class SolverDivergenceError(TVSpectrumError, RuntimeError):
    """Non-finite values appeared in the primal-dual iteration"""

    def __init__(self, iteration, stage=None):
        self.iteration = iteration
        self.stage = stage
        where = f"iteration {iteration}"
        if stage is not None:
            where = f"stage {stage}, {where}"
        super().__init__(f"Solver diverged at {where}")

    def at_stage(self, stage):
        """Return a copy of this error tagged with a scale-space stage index"""
        return SolverDivergenceError(self.iteration, stage)


class ForeignScaleSpaceError(TVSpectrumError, ValueError):
    """A scale-space was decomposed against data it was not computed from"""


class SpectralModeError(TVSpectrumError, ValueError):
    """An operation was applied to a decomposition of the wrong fidelity"""


class ImageFormatError(TVSpectrumError, ValueError):
    """An image file could not be decoded"""

    REASONS = ("unknown-format", "truncated", "zero-dimensions", "unsupported-mode")

    def __init__(self, reason, path, detail=""):
        if reason not in self.REASONS:
            raise ValueError(f"Unknown image format error reason: {reason}")
        self.reason = reason
        self.path = str(path)
        message = f"{self.path}: {reason}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class InstanceTooLargeError(TVSpectrumError, ValueError):
    """Exhaustive search was requested on too many pixels"""
