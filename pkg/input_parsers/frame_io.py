"""Reading and writing video frames stored as numbered PNG files."""

from __future__ import annotations

import io
import logging
import sys
from pathlib import Path

import cairo
import numpy as np

logger = logging.getLogger(__name__)

FRAME_NAME = "{:06d}.png"

# Position of the red, green and blue bytes in a cairo pixel:
if sys.byteorder == "little":
    RGB_BYTES = [2, 1, 0]
else:
    RGB_BYTES = [1, 2, 3]


def _pixel_view(surface: cairo.ImageSurface) -> np.ndarray:
    height, width = surface.get_height(), surface.get_width()
    data = np.ndarray(
        shape=(height, surface.get_stride() // 4, 4),
        dtype=np.uint8,
        buffer=surface.get_data(),
    )
    return data[:, :width, :]


def frame_to_surface(frame: np.ndarray) -> cairo.ImageSurface:
    """Copy an RGB (or grey) uint8 frame into a cairo image surface."""
    frame = np.asarray(frame)
    if frame.ndim == 2:
        frame = np.repeat(frame[:, :, None], 3, axis=2)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"Frames have to be (height, width, 3) arrays. Got: {frame.shape}")
    if frame.dtype != np.uint8:
        raise TypeError(f"Frames have to be uint8 arrays. Got: {frame.dtype}")

    height, width = frame.shape[:2]
    surface = cairo.ImageSurface(cairo.FORMAT_RGB24, width, height)
    surface.flush()
    pixels = _pixel_view(surface)
    pixels[...] = 255
    pixels[:, :, RGB_BYTES] = frame
    surface.mark_dirty()
    return surface


def surface_to_frame(surface: cairo.ImageSurface) -> np.ndarray:
    surface.flush()
    return _pixel_view(surface)[:, :, RGB_BYTES].copy()


def encode_png(frame: np.ndarray) -> bytes:
    """PNG encoding of a frame."""
    buffer = io.BytesIO()
    frame_to_surface(frame).write_to_png(buffer)
    return buffer.getvalue()


def read_frame(path: str | Path) -> np.ndarray:
    surface = cairo.ImageSurface.create_from_png(str(path))
    return surface_to_frame(surface)


def read_frames(folder: str | Path) -> list[np.ndarray]:
    """Read every PNG of a folder, ordered by the number in the file name.

    Returns:
        list[np.ndarray]: (height, width, 3) uint8 RGB frames.

    Raises:
        ValueError: if the folder has no frames, a file name is not a number or the
            frames differ in size.
    """
    folder = Path(folder)
    if not folder.is_dir():
        raise ValueError(f"Frame folder ({folder}) doesn't exists.")

    files = []
    for path in folder.glob("*.png"):
        if not path.stem.isdigit():
            raise ValueError(f"Frame file name has to be a frame number: {path}")
        files.append((int(path.stem), path))
    if not files:
        raise ValueError(f"No PNG frames found in {folder}.")

    frames = [read_frame(path) for _, path in sorted(files)]
    shapes = {frame.shape for frame in frames}
    if len(shapes) > 1:
        raise ValueError(f"Frames in {folder} differ in size: {sorted(shapes)}")

    logger.info(
        f"Read {len(frames):,} frames of {frames[0].shape[1]}x{frames[0].shape[0]} "
        f"pixels from {folder}."
    )
    return frames


def write_frames(folder: str | Path, frames: list[np.ndarray]) -> None:
    """Save frames as zero padded, numbered PNG files (000000.png, 000001.png ...)."""
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    for index, frame in enumerate(frames):
        frame_to_surface(frame).write_to_png(str(folder / FRAME_NAME.format(index)))
    logger.info(f"Saved {len(frames):,} frames into {folder}.")
