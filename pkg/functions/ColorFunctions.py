from __future__ import annotations

import colorsys
import logging
from dataclasses import dataclass

import numpy as np

from functions.BoxGeometry import BoundingBox
from functions.exceptions import EmptyHistogramError, EmptyRegionError

logger = logging.getLogger(__name__)

# Golden ratio conjugate, spreads consecutive track ids over the hue circle:
HUE_STEP = 0.618033988749895


@dataclass(frozen=True, eq=False)
class ColorHistogram:
    """Per-channel colour histogram of an image region.

    counts is a (channels, bins) float array with non-negative entries.
    """

    counts: np.ndarray

    def __post_init__(self: ColorHistogram) -> None:
        counts = np.asarray(self.counts, dtype=float)
        if counts.ndim != 2 or counts.shape[1] == 0:
            raise ValueError(
                f"Histogram counts have to be a (channels, bins) array. Got shape: {counts.shape}"
            )
        if (counts < 0).any():
            raise ValueError("Histogram counts have to be non-negative.")
        object.__setattr__(self, "counts", counts)

    @property
    def bins_per_channel(self: ColorHistogram) -> int:
        return int(self.counts.shape[1])

    @property
    def channels(self: ColorHistogram) -> int:
        return int(self.counts.shape[0])


def clip_box_to_frame(
    box: BoundingBox, width: int, height: int
) -> tuple[int, int, int, int]:
    """Pixel index range (x0, y0, x1, y1) covered by a box, clipped to the frame.

    A pixel with column c is covered when floor(x_min) <= c < ceil(x_max).

    Raises:
        EmptyRegionError: if no pixel of the frame is covered.
    """
    x0 = max(0, int(np.floor(box.x_min)))
    y0 = max(0, int(np.floor(box.y_min)))
    x1 = min(width, int(np.ceil(box.x_max)))
    y1 = min(height, int(np.ceil(box.y_max)))

    if x0 >= x1 or y0 >= y1:
        raise EmptyRegionError(
            f"empty region: box {box.as_tuple()} does not overlap the {width}x{height} frame"
        )
    return x0, y0, x1, y1


def extract_histogram(
    frame_pixels: np.ndarray, box: BoundingBox, bins: int = 256
) -> ColorHistogram:
    """Counting pixel values per colour channel inside a box

    Params:
        frame_pixels (np.ndarray): frame as a (height, width, channels) uint8 array
        box (BoundingBox): region to describe, clipped to the frame
        bins (int): number of bins per channel, 256 keeps one bin per intensity

    Returns:
        ColorHistogram: counts per channel, each channel summing to the pixel count

    Raises:
        EmptyRegionError: if the box lies entirely outside the frame
    """
    if not isinstance(bins, int) or bins < 1:
        raise ValueError(f"The number of bins has to be a positive integer. Got: {bins}")

    height, width = frame_pixels.shape[:2]
    x0, y0, x1, y1 = clip_box_to_frame(box, width, height)

    region = frame_pixels[y0:y1, x0:x1]
    if region.ndim == 2:
        region = region[:, :, np.newaxis]

    # Values are mapped onto the bins proportionally:
    values = region.reshape(-1, region.shape[2]).astype(np.int64)
    indices = values * bins // 256

    counts = np.stack(
        [
            np.bincount(indices[:, channel], minlength=bins)
            for channel in range(values.shape[1])
        ]
    ).astype(float)

    return ColorHistogram(counts)


def color_cost(hd: ColorHistogram, ht: ColorHistogram) -> float:
    """Bhattacharyya distance of two colour histograms, averaged over channels.

    The normalisation by sqrt(mean_d * mean_t * N^2) is evaluated through the channel
    sums (mean * N), which is the same quantity without the rounding of the means.

    Params:
        hd (ColorHistogram): histogram of the detection
        ht (ColorHistogram): histogram of the track

    Returns:
        float: 0 for identical histograms, 1 for histograms without shared bins

    Raises:
        ValueError: if the histograms have different shapes
        EmptyHistogramError: if a channel of either histogram has no counts
    """
    if hd.counts.shape != ht.counts.shape:
        raise ValueError(
            f"Histograms have to share their shape. Got: {hd.counts.shape} and {ht.counts.shape}"
        )

    sums_d = hd.counts.sum(axis=1)
    sums_t = ht.counts.sum(axis=1)
    if (sums_d <= 0).any() or (sums_t <= 0).any():
        raise EmptyHistogramError("empty histogram: a channel has no counts")

    coefficients = np.sqrt(hd.counts * ht.counts).sum(axis=1) / np.sqrt(sums_d * sums_t)
    radicands = np.clip(1.0 - coefficients, 0.0, 1.0)

    return float(np.mean(np.sqrt(radicands)))


def rgb_to_hex(rgb_color: list) -> str:
    """Converting rgb color to hexadecimal representation

    params:
        rgb_color (list): RGB color representation, list with 3 integers

    returns:
        str: color represented in hexadecimal values eg. '#ffffff'
    """
    # Components need to be integers for hex to make sense
    rgb_color = [int(x) for x in rgb_color]
    return "#" + "".join(
        ["0{0:x}".format(v) if v < 16 else "{0:x}".format(v) for v in rgb_color]
    )


def track_color(track_id: int) -> str:
    """Stable, well separated colour for a track id

    params:
        track_id (int): positive track identifier

    returns:
        str: color in hexadecimal format
    """
    hue = (track_id * HUE_STEP) % 1.0
    rgb = colorsys.hsv_to_rgb(hue, 0.85, 0.95)
    return rgb_to_hex([round(x * 255) for x in rgb])
