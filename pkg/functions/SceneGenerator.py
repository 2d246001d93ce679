"""Synthetic static-camera scenes with scripted moving rectangles and their ground truth."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from functions.BoxGeometry import GT_COLUMNS, BoundingBox
from functions.exceptions import SceneError

logger = logging.getLogger(__name__)


@dataclass
class ObjectScript:
    """One scripted object: visible from entry_frame to exit_frame inclusive."""

    object_id: int
    entry_frame: int
    exit_frame: int
    initial_box: BoundingBox
    velocity: tuple[float, float] = (0.0, 0.0)
    intensity: tuple[int, int, int] = (220, 220, 220)
    label: Optional[str] = "car"

    def box_at(self: ObjectScript, frame_index: int) -> BoundingBox:
        elapsed = frame_index - self.entry_frame
        return self.initial_box.translate(
            self.velocity[0] * elapsed, self.velocity[1] * elapsed
        )

    def visible(self: ObjectScript, frame_index: int) -> bool:
        return self.entry_frame <= frame_index <= self.exit_frame


@dataclass
class SyntheticScene:
    """Frame size, object scripts, noise and seed of a synthetic video.

    Raises:
        SceneError: if a script leaves the frame while visible or the frame
            range is inconsistent.
    """

    width: int
    height: int
    n_frames: int
    objects: list[ObjectScript] = field(default_factory=list)
    noise_std: float = 2.0
    texture_amplitude: float = 20.0
    background_level: float = 60.0
    seed: int = 0

    def __post_init__(self: SyntheticScene) -> None:
        if self.width < 1 or self.height < 1 or self.n_frames < 1:
            raise SceneError(
                f"Scene needs a positive size and length. Got: "
                f"{self.width}x{self.height}, {self.n_frames} frames"
            )
        if self.noise_std < 0 or self.texture_amplitude < 0:
            raise SceneError("Noise and texture amplitudes have to be non-negative.")

        ids = [script.object_id for script in self.objects]
        if len(ids) != len(set(ids)):
            raise SceneError(f"Object ids have to be unique. Got: {ids}")

        for script in self.objects:
            if not 0 <= script.entry_frame <= script.exit_frame < self.n_frames:
                raise SceneError(
                    f"Object {script.object_id}: frames {script.entry_frame}-"
                    f"{script.exit_frame} outside the {self.n_frames} frame video."
                )
            for frame_index in (script.entry_frame, script.exit_frame):
                box = script.box_at(frame_index)
                if (
                    box.x_min < 0
                    or box.y_min < 0
                    or box.x_max > self.width
                    or box.y_max > self.height
                ):
                    raise SceneError(
                        f"Object {script.object_id} leaves the frame at frame "
                        f"{frame_index}: {box.as_tuple()}"
                    )


def render_background(scene: SyntheticScene) -> np.ndarray:
    """Static textured background, identical for every frame of the scene."""
    rng = np.random.default_rng(scene.seed)
    texture = rng.random((scene.height, scene.width, 3)) * scene.texture_amplitude
    return scene.background_level + texture


def generate_scene(scene: SyntheticScene) -> tuple[list[np.ndarray], pd.DataFrame]:
    """Render the frames of a scene and its per-frame ground truth.

    Objects are painted in script order over the background, then seeded Gaussian
    pixel noise is added to every frame.

    Returns:
        tuple[list[np.ndarray], pd.DataFrame]: uint8 RGB frames and ground truth rows
            in the ground truth file layout.
    """
    background = render_background(scene)
    # Separate stream for the per-frame noise:
    noise_rng = np.random.default_rng([scene.seed, 1])

    frames = []
    rows = []
    for frame_index in range(scene.n_frames):
        canvas = background.copy()
        for script in scene.objects:
            if not script.visible(frame_index):
                continue
            box = script.box_at(frame_index)
            x0, y0 = int(round(box.x_min)), int(round(box.y_min))
            x1, y1 = int(round(box.x_max)), int(round(box.y_max))
            canvas[y0:y1, x0:x1] = script.intensity
            rows.append(
                {
                    "frame": frame_index,
                    "object_id": script.object_id,
                    "x_min": box.x_min,
                    "y_min": box.y_min,
                    "x_max": box.x_max,
                    "y_max": box.y_max,
                    "confidence": 1.0,
                    "label": script.label if script.label is not None else "null",
                }
            )

        if scene.noise_std > 0:
            canvas = canvas + noise_rng.normal(0.0, scene.noise_std, canvas.shape)
        frames.append(np.clip(np.rint(canvas), 0, 255).astype(np.uint8))

    gt = pd.DataFrame(rows, columns=GT_COLUMNS)
    logger.info(
        f"Generated {scene.n_frames:,} frames with {len(scene.objects):,} objects "
        f"({len(gt):,} ground truth boxes)."
    )
    return frames, gt
