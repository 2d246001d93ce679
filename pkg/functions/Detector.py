"""Detection inputs: filtering, median background subtraction and label transfer."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import ndimage

from functions.BoxGeometry import NULL_LABEL, BoundingBox, Detection, iou
from functions.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

# 8-connectivity for foreground components:
EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


class DetectionSource(str, Enum):
    SUPERVISED = "supervised"
    UNSUPERVISED = "unsupervised"


@dataclass
class DetectionFilterConfig:
    """Validity thresholds for detector output.

    Supervised detections below min_confidence and unsupervised detections with an
    area not above min_area (pixels^2) are dropped.
    """

    min_confidence: float = 0.4
    min_area: float = 2000.0

    def __post_init__(self: DetectionFilterConfig) -> None:
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ConfigurationError(
                f"min_confidence has to be in [0, 1]. Got: {self.min_confidence}"
            )
        if self.min_area < 0:
            raise ConfigurationError(f"min_area has to be non-negative. Got: {self.min_area}")


def filter_detections(
    dets: Iterable[Detection],
    cfg: DetectionFilterConfig,
    source: DetectionSource = DetectionSource.SUPERVISED,
) -> list[Detection]:
    """Drop detections that are not valid in confidence (supervised) or size (unsupervised)."""
    if source is DetectionSource.SUPERVISED:
        return [det for det in dets if det.confidence >= cfg.min_confidence]
    return [det for det in dets if det.box.area() > cfg.min_area]


def filter_by_class(
    dets: Iterable[Detection], allowed: Optional[Iterable[str]]
) -> list[Detection]:
    """Keep detections of the allowed classes; unlabelled detections always pass."""
    if allowed is None:
        return list(dets)
    allowed = set(allowed)
    return [det for det in dets if det.label.is_null or det.label.name in allowed]


@dataclass(frozen=True, eq=False)
class BackgroundModel:
    """Per-pixel, per-channel median image of a static camera scene."""

    median: np.ndarray
    diff_threshold: float = 30.0
    learned_from: tuple[int, ...] = ()

    @property
    def shape(self: BackgroundModel) -> tuple[int, ...]:
        return tuple(self.median.shape)


def learn_background(
    frames: Sequence[np.ndarray],
    k: int,
    seed: int | None = 0,
    diff_threshold: float = 30.0,
) -> BackgroundModel:
    """Median background over k frames drawn uniformly without replacement.

    Args:
        frames (Sequence[np.ndarray]): the whole video, (height, width, channels) frames.
        k (int): number of frames to learn from.
        seed (int | None): seed of the frame sampling.
        diff_threshold (float): intensity difference that makes a pixel foreground.

    Returns:
        BackgroundModel: median image and the sampled frame indices.

    Raises:
        ValueError: if k is not in [1, len(frames)].
    """
    n_frames = len(frames)
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k has to be a positive integer. Got: {k}")
    if k > n_frames:
        raise ValueError(
            f"Cannot sample {k} background frames from a sequence of {n_frames} frames."
        )
    if not 0 <= diff_threshold <= 255:
        raise ConfigurationError(f"diff_threshold has to be in [0, 255]. Got: {diff_threshold}")

    rng = np.random.default_rng(seed)
    sampled = np.sort(rng.choice(n_frames, size=k, replace=False))
    logger.info(f"Learning background from {k:,} of {n_frames:,} frames.")
    logger.debug(f"Background frames: {sampled.tolist()}")

    stack = np.stack([np.asarray(frames[index]) for index in sampled]).astype(float)
    median = np.median(stack, axis=0)

    return BackgroundModel(
        median=median,
        diff_threshold=float(diff_threshold),
        learned_from=tuple(int(index) for index in sampled),
    )


def foreground_mask(frame: np.ndarray, model: BackgroundModel) -> np.ndarray:
    """Pixels whose largest channel difference to the background exceeds the threshold.

    Raises:
        ValueError: if the frame and the model differ in shape.
    """
    frame = np.asarray(frame)
    if frame.shape != model.shape:
        raise ValueError(
            f"Frame shape {frame.shape} does not match the background model {model.shape}."
        )
    difference = np.abs(frame.astype(float) - model.median)
    if difference.ndim == 3:
        difference = difference.max(axis=2)
    return difference > model.diff_threshold


def detect_foreground(
    frame: np.ndarray,
    model: BackgroundModel,
    min_area: float = 2000.0,
    frame_index: int = 0,
) -> list[Detection]:
    """Bounding boxes of the 8-connected foreground components of a frame.

    Boxes are unlabelled with confidence 0; components whose box area is not above
    min_area are discarded.
    """
    mask = foreground_mask(frame, model)
    labels, n_components = ndimage.label(mask, structure=EIGHT_CONNECTED)

    detections = []
    for component in ndimage.find_objects(labels):
        if component is None:
            continue
        rows, cols = component
        box = BoundingBox(cols.start, rows.start, cols.stop, rows.stop)
        if box.area() <= min_area:
            continue
        detections.append(
            Detection(frame_index=frame_index, box=box, label=NULL_LABEL, confidence=0.0)
        )

    logger.debug(
        f"Frame {frame_index}: {n_components} foreground components, "
        f"{len(detections)} above {min_area} px."
    )
    return detections


def transfer_labels(
    unsup: Sequence[Detection], sup: Sequence[Detection]
) -> list[Detection]:
    """Give each unsupervised box the label of its most overlapping supervised box.

    Ties in IoU go to the more confident supervised box, then to the lower index.
    Boxes overlapping no supervised box keep a null label.
    """
    labelled = []
    for detection in unsup:
        best = None
        best_key = None
        for index, candidate in enumerate(sup):
            overlap = iou(detection.box, candidate.box)
            if overlap <= 0:
                continue
            key = (overlap, candidate.confidence, -index)
            if best_key is None or key > best_key:
                best, best_key = candidate, key

        if best is None:
            labelled.append(replace(detection, label=NULL_LABEL, confidence=0.0))
        else:
            labelled.append(
                replace(detection, label=best.label, confidence=best.confidence)
            )
    return labelled
