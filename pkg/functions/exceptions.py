"""Exceptions raised by the tracking pipeline.

All of them subclass ValueError, so callers that only care about bad input can
keep catching ValueError.
"""

from __future__ import annotations


class InvalidBoxError(ValueError):
    """Raised when a bounding box has no extent or non-finite coordinates."""


class EmptyRegionError(ValueError):
    """Raised when a box does not cover a single pixel of the frame."""


class EmptyHistogramError(ValueError):
    """Raised when a colour histogram has no counts in a channel."""


class CollapsedStateError(ValueError):
    """Raised when a Kalman state no longer describes a box with positive size."""


class ConfigurationError(ValueError):
    """Raised when a configuration value is out of its allowed range."""


class FrameOrderError(ValueError):
    """Raised when frames are not fed to the tracker in increasing order."""


class DuplicateGroundTruthError(ValueError):
    """Raised when a ground truth object appears twice in the same frame."""


class SceneError(ValueError):
    """Raised when a synthetic scene script is inconsistent."""


class DetectionFormatError(ValueError):
    """Raised when a detection, ground truth or re-ID file cannot be parsed.

    Args:
        message (str): description of the problem.
        line_number (int | None): 1-based line number in the offending file.
    """

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
