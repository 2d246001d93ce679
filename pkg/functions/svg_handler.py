"""Drawing tracked boxes over video frames as SVG, saved as PNG."""

from __future__ import annotations

import base64
import logging
from pathlib import Path
from typing import Iterable

import cairosvg
import numpy as np

from functions.BoxGeometry import Observation, ObservationSource, Track
from functions.ColorFunctions import track_color
from input_parsers.frame_io import FRAME_NAME, encode_png

logger = logging.getLogger(__name__)


class svg_handler(object):
    """Functions to manipulate svg"""

    __svg_rect__ = (
        '<rect x="{}" y="{}" width="{}" height="{}" '
        'style="stroke-width:{};stroke:{}; fill: none" {}/>\n'
    )
    __svg_label__ = (
        '<text x="{}" y="{}" text-anchor="{}" font-family="sans-serif" '
        'font-size="{}px" fill="{}">{}</text>\n'
    )
    __svg_image__ = (
        '<image x="0" y="0" width="{}" height="{}" '
        'xlink:href="data:image/png;base64,{}" />\n'
    )

    def __init__(self, svg_string: str, width: int, height: int) -> None:
        self.__svg__ = svg_string
        self.__width__ = width
        self.__height__ = height

    def __closeSvg(self) -> str:
        svg_header = (
            '<svg version="1.1" xmlns="http://www.w3.org/2000/svg" '
            'xmlns:xlink="http://www.w3.org/1999/xlink" '
            f'xml:space="preserve" width="{self.__width__}" height="{self.__height__}">\n'
        )
        return svg_header + self.__svg__ + "\n</svg>\n"

    def savePng(self, filename: str = "test.png") -> None:
        cairosvg.svg2png(bytestring=self.__closeSvg().encode(), write_to=filename)

    def getSvg(self) -> str:
        return self.__svg__

    def add_image(self, frame: np.ndarray) -> None:
        """Embed a frame as the background of the drawing."""
        encoded = base64.b64encode(encode_png(frame)).decode("ascii")
        self.__svg__ += self.__svg_image__.format(
            self.__width__, self.__height__, encoded
        )

    def draw_rectangle(
        self, x, y, width, height, stroke, stroke_width=2, dashed=False
    ) -> None:
        extra = 'stroke-dasharray="6,4" ' if dashed else ""
        self.__svg__ += self.__svg_rect__.format(
            x, y, width, height, stroke_width, stroke, extra
        )

    def add_text(self, x, y, text, size=12, fill="#000000", anchor="start") -> None:
        self.__svg__ += self.__svg_label__.format(x, y, anchor, size, fill, text)


def render_overlay(
    frames: list[np.ndarray], tracks: Iterable[Track], folder: str | Path
) -> int:
    """Write one PNG per frame with the track boxes and ids drawn on it.

    Predicted observations are drawn dashed.

    Returns:
        int: number of images written.
    """
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)

    by_frame: dict[int, list[tuple[int, Observation]]] = {}
    for track in tracks:
        for observation in track.observations:
            by_frame.setdefault(observation.frame_index, []).append(
                (track.id, observation)
            )

    for frame_index, frame in enumerate(frames):
        height, width = frame.shape[:2]
        svg = svg_handler("", width, height)
        svg.add_image(frame)
        for track_id, observation in by_frame.get(frame_index, []):
            box = observation.box
            color = track_color(track_id)
            svg.draw_rectangle(
                round(box.x_min, 1),
                round(box.y_min, 1),
                round(box.width, 1),
                round(box.height, 1),
                color,
                dashed=observation.source is ObservationSource.PREDICTED,
            )
            svg.add_text(
                round(box.x_min, 1), round(max(box.y_min - 3, 10), 1), track_id, fill=color
            )
        svg.savePng(str(folder / FRAME_NAME.format(frame_index)))

    logger.info(f"Overlay of {len(frames):,} frames saved into {folder}.")
    return len(frames)
