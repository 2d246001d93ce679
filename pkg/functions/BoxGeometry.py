"""Domain types and geometric primitives shared by the whole pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, NamedTuple, Optional

from functions.exceptions import InvalidBoxError

if TYPE_CHECKING:
    from functions.ColorFunctions import ColorHistogram
    from functions.CostFunctions import ReidEmbedding
    from functions.KalmanFilter import KalmanState

# Column layout of detection files and of ground truth / track files:
DETECTION_COLUMNS = ["frame", "x_min", "y_min", "x_max", "y_max", "confidence", "label"]
GT_COLUMNS = [
    "frame",
    "object_id",
    "x_min",
    "y_min",
    "x_max",
    "y_max",
    "confidence",
    "label",
]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixel coordinates, corner representation.

    Raises:
        InvalidBoxError: if the box has no extent or a coordinate is not finite.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self: BoundingBox) -> None:
        coordinates = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(value) for value in coordinates):
            raise InvalidBoxError(f"Box coordinates have to be finite: {coordinates}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidBoxError(
                f"Box has to satisfy x_min < x_max and y_min < y_max: {coordinates}"
            )

    @classmethod
    def from_xywh(cls, x: float, y: float, width: float, height: float) -> BoundingBox:
        """Build a box from its top-left corner and size."""
        return cls(x, y, x + width, y + height)

    @property
    def width(self: BoundingBox) -> float:
        return self.x_max - self.x_min

    @property
    def height(self: BoundingBox) -> float:
        return self.y_max - self.y_min

    def area(self: BoundingBox) -> float:
        return self.width * self.height

    def center(self: BoundingBox) -> tuple[float, float]:
        return center(self)

    def translate(self: BoundingBox, dx: float, dy: float) -> BoundingBox:
        return BoundingBox(
            self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy
        )

    def as_tuple(self: BoundingBox) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes.

    Args:
        a (BoundingBox): first box.
        b (BoundingBox): second box.

    Returns:
        float: value in [0, 1], 0 for disjoint boxes.
    """
    inter_width = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    inter_height = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if inter_width <= 0 or inter_height <= 0:
        return 0.0

    intersection = inter_width * inter_height
    union = a.area() + b.area() - intersection
    return min(1.0, intersection / union)


def center(b: BoundingBox) -> tuple[float, float]:
    """Midpoint of the box along each axis."""
    return ((b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2)


@dataclass(frozen=True)
class ClassLabel:
    """Object category. A missing name means no label is available."""

    name: Optional[str] = None

    @property
    def is_null(self: ClassLabel) -> bool:
        return self.name is None

    @classmethod
    def parse(cls, text: str | None) -> ClassLabel:
        """Read a label as written in detection files (`null` for no label)."""
        if text is None:
            return NULL_LABEL
        text = str(text).strip()
        if text == "" or text.lower() == "null":
            return NULL_LABEL
        return cls(text)

    def __str__(self: ClassLabel) -> str:
        return "null" if self.name is None else self.name


NULL_LABEL = ClassLabel(None)


@dataclass(frozen=True, eq=False)
class Detection:
    """One candidate object in one frame.

    Raises:
        ValueError: if the frame index is negative or the confidence is outside [0, 1].
    """

    frame_index: int
    box: BoundingBox
    label: ClassLabel = NULL_LABEL
    confidence: float = 0.0
    embedding: Optional[ReidEmbedding] = None
    histogram: Optional[ColorHistogram] = None

    def __post_init__(self: Detection) -> None:
        if self.frame_index < 0:
            raise ValueError(
                f"Frame index has to be non-negative. Got: {self.frame_index}"
            )
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(
                f"Detection confidence has to be in [0, 1]. Got: {self.confidence}"
            )


class ObservationSource(str, Enum):
    MATCHED = "matched"
    PREDICTED = "predicted"


class TrackStatus(str, Enum):
    ACTIVE = "active"
    OCCLUDED = "occluded"
    TERMINATED = "terminated"


class Observation(NamedTuple):
    frame_index: int
    box: BoundingBox
    source: ObservationSource


@dataclass(eq=False)
class Track:
    """Identity of a tracked object together with its history and motion state.

    Mutated only by the tracker; every other module treats it as read-only.
    """

    id: int
    kalman: KalmanState
    observations: list[Observation] = field(default_factory=list)
    label: ClassLabel = NULL_LABEL
    label_confidence: float = 0.0
    histogram: Optional[ColorHistogram] = None
    embedding: Optional[ReidEmbedding] = None
    missed_count: int = 0
    matched_count: int = 0
    status: TrackStatus = TrackStatus.ACTIVE

    @property
    def last_frame(self: Track) -> int:
        return self.observations[-1].frame_index

    def last_matched_index(self: Track) -> int:
        """Position of the most recent matched observation, -1 when there is none."""
        for position in range(len(self.observations) - 1, -1, -1):
            if self.observations[position].source is ObservationSource.MATCHED:
                return position
        return -1
