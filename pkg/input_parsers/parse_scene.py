"""Loading synthetic scene descriptions from JSON files."""

from __future__ import annotations

import json
import logging

from functions.BoxGeometry import BoundingBox
from functions.exceptions import SceneError
from functions.SceneGenerator import ObjectScript, SyntheticScene

logger = logging.getLogger(__name__)

SCENE_KEYS = (
    "width",
    "height",
    "n_frames",
    "noise_std",
    "texture_amplitude",
    "background_level",
    "seed",
)


def parse_object(entry: dict) -> ObjectScript:
    """Object script from its JSON form.

    The box is given as [x_min, y_min, x_max, y_max] at the entry frame.
    """
    try:
        script = ObjectScript(
            object_id=int(entry["object_id"]),
            entry_frame=int(entry["entry_frame"]),
            exit_frame=int(entry["exit_frame"]),
            initial_box=BoundingBox(*(float(value) for value in entry["box"])),
            velocity=tuple(float(value) for value in entry.get("velocity", (0.0, 0.0))),
            intensity=tuple(int(value) for value in entry.get("intensity", (220, 220, 220))),
            label=entry.get("label", "car"),
        )
    except KeyError as error:
        raise SceneError(f"Object script is missing the {error} field: {entry}") from None
    except TypeError as error:
        raise SceneError(f"Invalid object script {entry}: {error}") from None

    if len(script.velocity) != 2 or len(script.intensity) != 3:
        raise SceneError(
            f"Object {script.object_id}: velocity needs 2 and intensity 3 values."
        )
    return script


def load_scene(path: str) -> SyntheticScene:
    """Read a scene description.

    Example:
        {"width": 320, "height": 240, "n_frames": 30, "seed": 7,
         "objects": [{"object_id": 1, "entry_frame": 0, "exit_frame": 29,
                      "box": [10, 20, 60, 70], "velocity": [2, 0]}]}

    Raises:
        SceneError: if the file is not a valid scene description.
    """
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as error:
        raise SceneError(f"Scene file {path} is not valid JSON: {error}") from None

    if not isinstance(data, dict):
        raise SceneError(f"Scene file {path} has to hold a JSON object.")
    unknown = set(data) - set(SCENE_KEYS) - {"objects"}
    if unknown:
        raise SceneError(f"Unknown scene keys in {path}: {', '.join(sorted(unknown))}")

    try:
        parameters = {key: data[key] for key in SCENE_KEYS if key in data}
        scene = SyntheticScene(
            objects=[parse_object(entry) for entry in data.get("objects", [])],
            **parameters,
        )
    except TypeError as error:
        raise SceneError(f"Invalid scene description in {path}: {error}") from None

    logger.info(
        f"Scene: {scene.width}x{scene.height}, {scene.n_frames:,} frames, "
        f"{len(scene.objects):,} objects."
    )
    return scene
