"""Per-frame tracking: association, track creation, occlusion handling, termination."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from functions.Assignment import FORBIDDEN, gate, solve
from functions.BoxGeometry import (
    Detection,
    Observation,
    ObservationSource,
    Track,
    TrackStatus,
    center,
)
from functions.ColorFunctions import color_cost, extract_histogram
from functions.CostFunctions import (
    CostConfig,
    final_cost,
    label_cost,
    reid_cost,
    spatial_cost,
)
from functions.exceptions import ConfigurationError, FrameOrderError
from functions.KalmanFilter import MotionModel, MotionParameters, to_box

logger = logging.getLogger(__name__)


@dataclass
class TrackerConfig:
    """Settings of the tracker.

    frame_bounds is (width, height) in pixels; it provides the default spatial
    normaliser and the exit test. Without it, cost.t_d has to be set.
    """

    cost: CostConfig = field(default_factory=CostConfig)
    tau_match: float = 0.8
    max_missed: int = 10
    min_hits: int = 3
    frame_bounds: Optional[tuple[int, int]] = None
    histogram_bins: int = 256
    motion: MotionParameters = field(default_factory=MotionParameters)

    def __post_init__(self: TrackerConfig) -> None:
        if not 0.0 < self.tau_match <= 1.0:
            raise ConfigurationError(f"tau_match has to be in (0, 1]. Got: {self.tau_match}")
        if self.max_missed < 1:
            raise ConfigurationError(f"max_missed has to be at least 1. Got: {self.max_missed}")
        if self.min_hits < 1:
            raise ConfigurationError(f"min_hits has to be at least 1. Got: {self.min_hits}")
        if self.histogram_bins < 1:
            raise ConfigurationError(
                f"histogram_bins has to be at least 1. Got: {self.histogram_bins}"
            )
        if self.frame_bounds is None and self.cost.t_d is None:
            raise ConfigurationError(
                "Either the frame size or t_d has to be given to normalise spatial costs."
            )

    @property
    def t_d(self: TrackerConfig) -> float:
        if self.frame_bounds is None:
            return float(self.cost.t_d)
        return self.cost.resolve_t_d(*self.frame_bounds)


@dataclass
class TrackSet:
    """Live (active or occluded) tracks, the archive of terminated ones, id counter."""

    tracks: list[Track] = field(default_factory=list)
    terminated: list[Track] = field(default_factory=list)
    next_id: int = 1
    last_frame: Optional[int] = None


def _needs_histograms(cfg: TrackerConfig, frame_pixels: Optional[np.ndarray]) -> bool:
    return frame_pixels is not None and cfg.cost.beta > 0


def prepare_detections(
    detections: Sequence[Detection],
    cfg: TrackerConfig,
    frame_pixels: Optional[np.ndarray],
) -> list[Detection]:
    """Attach colour histograms to detections that lack one."""
    if not _needs_histograms(cfg, frame_pixels):
        return list(detections)
    return [
        detection
        if detection.histogram is not None
        else replace(
            detection,
            histogram=extract_histogram(
                frame_pixels, detection.box, cfg.histogram_bins
            ),
        )
        for detection in detections
    ]


def pair_cost(track: Track, detection: Detection, cfg: TrackerConfig) -> float:
    """Fused cost of a track (at its current Kalman box) and a detection.

    Returns FORBIDDEN when the boxes are further apart than t_d.
    """
    cost_cfg = cfg.cost
    c_d = spatial_cost(detection.box, to_box(track.kalman), cfg.t_d)
    if c_d >= 1.0:
        return FORBIDDEN

    c_c = None
    if cost_cfg.beta > 0 and track.histogram is not None and detection.histogram is not None:
        c_c = color_cost(detection.histogram, track.histogram)

    c_l = label_cost(
        track.label,
        track.label_confidence,
        detection.label,
        detection.confidence,
        cost_cfg.null_label_cost,
    )

    c_r = None
    if track.embedding is not None and detection.embedding is not None:
        c_r = reid_cost(detection.embedding, track.embedding, cost_cfg.reid_mode)

    return final_cost(c_d, c_c, c_l, c_r, cost_cfg)


def build_cost_matrix(
    tracks: TrackSet,
    detections: Sequence[Detection],
    cfg: TrackerConfig,
    frame_pixels: Optional[np.ndarray] = None,
) -> np.ndarray:
    """(live tracks, detections) matrix of fused costs.

    Detections without a histogram get one extracted from frame_pixels when the
    colour cost is enabled.
    """
    detections = prepare_detections(detections, cfg, frame_pixels)
    matrix = np.zeros((len(tracks.tracks), len(detections)))
    for row, track in enumerate(tracks.tracks):
        for col, detection in enumerate(detections):
            matrix[row, col] = pair_cost(track, detection, cfg)
    return matrix


def _outside_frame(track: Track, cfg: TrackerConfig) -> bool:
    if cfg.frame_bounds is None:
        return False
    width, height = cfg.frame_bounds
    cx, cy = center(track.observations[-1].box)
    return not (0 <= cx <= width and 0 <= cy <= height)


def _new_track(
    track_id: int, detection: Detection, frame_index: int, motion: MotionModel
) -> Track:
    return Track(
        id=track_id,
        kalman=motion.init(detection.box),
        observations=[
            Observation(frame_index, detection.box, ObservationSource.MATCHED)
        ],
        label=detection.label,
        label_confidence=detection.confidence if not detection.label.is_null else 0.0,
        histogram=detection.histogram,
        embedding=detection.embedding,
        matched_count=1,
    )


def _absorb(
    track: Track, detection: Detection, frame_index: int, motion: MotionModel
) -> None:
    track.kalman = motion.update(track.kalman, detection.box)
    track.observations.append(
        Observation(frame_index, detection.box, ObservationSource.MATCHED)
    )
    if detection.histogram is not None:
        track.histogram = detection.histogram
    if detection.embedding is not None:
        track.embedding = detection.embedding

    # The label of the most confident labelled detection wins:
    if not detection.label.is_null and (
        track.label.is_null or detection.confidence >= track.label_confidence
    ):
        track.label = detection.label
        track.label_confidence = detection.confidence

    track.missed_count = 0
    track.matched_count += 1
    track.status = TrackStatus.ACTIVE


def _coast(track: Track, frame_index: int) -> None:
    track.observations.append(
        Observation(frame_index, to_box(track.kalman), ObservationSource.PREDICTED)
    )
    track.missed_count += 1
    track.status = TrackStatus.OCCLUDED


def step(
    tracks: TrackSet,
    detections: Sequence[Detection],
    frame_index: int,
    cfg: TrackerConfig,
    frame_pixels: Optional[np.ndarray] = None,
    motion: MotionModel | None = None,
) -> TrackSet:
    """Process the detections of one frame.

    Skipped frames (a jump of more than one in frame_index) are bridged with
    predictions so track histories stay gap free.

    Raises:
        FrameOrderError: if frame_index does not increase.
    """
    if tracks.last_frame is not None and frame_index <= tracks.last_frame:
        raise FrameOrderError(
            f"Frame {frame_index} comes after frame {tracks.last_frame}; "
            "frames have to be processed in increasing order."
        )
    motion = motion if motion is not None else MotionModel(cfg.motion)

    # Bridging frames without any call:
    if tracks.last_frame is not None:
        for skipped in range(tracks.last_frame + 1, frame_index):
            for track in tracks.tracks:
                track.kalman = motion.predict(track.kalman)
                _coast(track, skipped)
            _terminate(tracks, cfg, skipped)

    for track in tracks.tracks:
        track.kalman = motion.predict(track.kalman)

    detections = prepare_detections(detections, cfg, frame_pixels)
    matrix = build_cost_matrix(tracks, detections, cfg)
    assignment = gate(solve(matrix), matrix, cfg.tau_match)

    for row, col, _ in assignment.matched:
        _absorb(tracks.tracks[row], detections[col], frame_index, motion)

    for row in assignment.unmatched_tracks:
        _coast(tracks.tracks[row], frame_index)

    for col in assignment.unmatched_detections:
        tracks.tracks.append(
            _new_track(tracks.next_id, detections[col], frame_index, motion)
        )
        tracks.next_id += 1

    _terminate(tracks, cfg, frame_index)
    tracks.last_frame = frame_index

    logger.debug(
        f"Frame {frame_index}: {len(detections)} detections, "
        f"{len(assignment.matched)} matched, "
        f"{len(assignment.unmatched_detections)} new tracks, "
        f"{len(tracks.tracks)} live tracks."
    )
    return tracks


def _terminate(tracks: TrackSet, cfg: TrackerConfig, frame_index: int) -> None:
    live = []
    for track in tracks.tracks:
        if track.missed_count > 0 and (
            track.missed_count > cfg.max_missed or _outside_frame(track, cfg)
        ):
            track.status = TrackStatus.TERMINATED
            tracks.terminated.append(track)
            logger.debug(f"Track {track.id} terminated at frame {frame_index}.")
        else:
            live.append(track)
    tracks.tracks = live


def finalize(tracks: TrackSet, cfg: TrackerConfig) -> list[Track]:
    """Close every track and keep the valid ones.

    Tracks with fewer than min_hits matched observations are dropped; predictions
    after the last match are trimmed from the others.
    """
    for track in tracks.tracks:
        track.status = TrackStatus.TERMINATED
    tracks.terminated.extend(tracks.tracks)
    tracks.tracks = []

    emitted = []
    for track in sorted(tracks.terminated, key=lambda item: item.id):
        if track.matched_count < cfg.min_hits:
            continue
        last_match = track.last_matched_index()
        track.observations = track.observations[: last_match + 1]
        track.missed_count = 0
        emitted.append(track)

    logger.info(
        f"Tracks kept: {len(emitted):,} of {len(tracks.terminated):,} "
        f"(min_hits={cfg.min_hits})."
    )
    return emitted


class MFTracker(object):
    """Runs the tracker over a whole sequence."""

    def __init__(self: MFTracker, config: TrackerConfig) -> None:
        self.config = config
        self.motion = MotionModel(config.motion)
        self.track_set = TrackSet()

        logger.info(
            "Fusion weights alpha={}, beta={}, gamma={}, lambda={}; t_d={:.2f}px".format(
                *config.cost.weights(), config.t_d
            )
        )

    def step(
        self: MFTracker,
        detections: Sequence[Detection],
        frame_index: int,
        frame_pixels: Optional[np.ndarray] = None,
    ) -> TrackSet:
        return step(
            self.track_set,
            detections,
            frame_index,
            self.config,
            frame_pixels,
            motion=self.motion,
        )

    def run(
        self: MFTracker,
        detections_by_frame: dict[int, list[Detection]],
        n_frames: int,
        frames: Optional[Sequence[np.ndarray]] = None,
    ) -> list[Track]:
        """Track every frame in [0, n_frames) and return the finalized tracks."""
        logger.info(f"Tracking {n_frames:,} frames.")
        for frame_index in range(n_frames):
            frame_pixels = frames[frame_index] if frames is not None else None
            self.step(detections_by_frame.get(frame_index, []), frame_index, frame_pixels)
        return finalize(self.track_set, self.config)
