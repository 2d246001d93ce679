from __future__ import annotations

import math
import re
import unittest

import numpy as np

from functions.BoxGeometry import BoundingBox
from functions.ColorFunctions import (
    ColorHistogram,
    color_cost,
    extract_histogram,
    rgb_to_hex,
    track_color,
)
from functions.exceptions import EmptyHistogramError, EmptyRegionError


class TestExtractHistogram(unittest.TestCase):
    def test_uniform_black_region(self):
        frame = np.zeros((20, 20, 3), dtype=np.uint8)
        histogram = extract_histogram(frame, BoundingBox(5, 5, 15, 15))

        self.assertEqual(histogram.counts.shape, (3, 256))
        self.assertEqual(histogram.bins_per_channel, 256)
        for channel in range(3):
            self.assertEqual(histogram.counts[channel, 0], 100)
            self.assertEqual(histogram.counts[channel, 1:].sum(), 0)

    def test_two_tone_region(self):
        frame = np.zeros((10, 10, 3), dtype=np.uint8)
        frame[:, 5:] = 255
        histogram = extract_histogram(frame, BoundingBox(0, 0, 10, 10))

        for channel in range(3):
            self.assertEqual(histogram.counts[channel, 0], 50)
            self.assertEqual(histogram.counts[channel, 255], 50)

    def test_gradient_patch_matches_pixel_count(self):
        rng = np.random.default_rng(3)
        frame = rng.integers(0, 256, size=(40, 50, 3), dtype=np.uint8)
        box = BoundingBox(3.5, 7.2, 31.1, 22.0)
        histogram = extract_histogram(frame, box)

        # Pixels with floor(min) <= index < ceil(max):
        expected = np.zeros((3, 256))
        for row in range(7, 22):
            for col in range(3, 32):
                for channel in range(3):
                    expected[channel, frame[row, col, channel]] += 1
        np.testing.assert_array_equal(histogram.counts, expected)

    def test_clipping_and_empty_region(self):
        frame = np.zeros((10, 10, 3), dtype=np.uint8)
        histogram = extract_histogram(frame, BoundingBox(-5, -5, 5, 5))
        self.assertEqual(histogram.counts[0].sum(), 25)

        with self.assertRaises(EmptyRegionError) as context:
            extract_histogram(frame, BoundingBox(20, 20, 30, 30))
        self.assertIn("empty region", str(context.exception))

    def test_coarser_bins(self):
        frame = np.full((4, 4, 3), 200, dtype=np.uint8)
        histogram = extract_histogram(frame, BoundingBox(0, 0, 4, 4), bins=8)
        self.assertEqual(histogram.counts.shape, (3, 8))
        self.assertEqual(histogram.counts[0, 200 * 8 // 256], 16)

        with self.assertRaises(ValueError):
            extract_histogram(frame, BoundingBox(0, 0, 4, 4), bins=0)


class TestColorCost(unittest.TestCase):
    def test_examples(self):
        counts = np.array([[3.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 0.0, 5.0]])
        self.assertEqual(color_cost(ColorHistogram(counts), ColorHistogram(counts)), 0.0)

        disjoint_a = ColorHistogram(np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]))
        disjoint_b = ColorHistogram(np.array([[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]]))
        self.assertEqual(color_cost(disjoint_a, disjoint_b), 1.0)

        one_channel = color_cost(
            ColorHistogram(np.array([[3.0, 1.0]])), ColorHistogram(np.array([[1.0, 3.0]]))
        )
        self.assertAlmostEqual(one_channel, math.sqrt(1 - math.sqrt(3) / 2), places=12)
        self.assertAlmostEqual(one_channel, 0.3660, places=4)

    def test_errors(self):
        a = ColorHistogram(np.ones((3, 4)))
        with self.assertRaises(ValueError):
            color_cost(a, ColorHistogram(np.ones((3, 5))))

        empty = np.ones((3, 4))
        empty[1] = 0
        with self.assertRaises(EmptyHistogramError) as context:
            color_cost(a, ColorHistogram(empty))
        self.assertIn("empty histogram", str(context.exception))

        with self.assertRaises(ValueError):
            ColorHistogram(-np.ones((3, 4)))

    def test_range_symmetry_and_scaling(self):
        rng = np.random.default_rng(5)
        for _ in range(10_000):
            bins = int(rng.integers(1, 16))
            a = rng.integers(0, 5, size=(3, bins)).astype(float)
            b = rng.integers(0, 5, size=(3, bins)).astype(float)
            a[:, 0] += 1
            b[:, -1] += 1
            ha, hb = ColorHistogram(a), ColorHistogram(b)

            value = color_cost(ha, hb)
            self.assertGreaterEqual(value, 0.0)
            self.assertLessEqual(value, 1.0)
            self.assertAlmostEqual(value, color_cost(hb, ha), delta=1e-12)

        scaled = color_cost(ColorHistogram(a * 7.0), ColorHistogram(b * 7.0))
        self.assertAlmostEqual(scaled, color_cost(ha, hb), places=7)


class TestColorHelpers(unittest.TestCase):
    def test_rgb_to_hex(self):
        # Test for good output:
        hex_col = rgb_to_hex([0, 0, 0])
        self.assertIsInstance(hex_col, str)
        self.assertEqual(hex_col, "#000000")
        self.assertEqual(rgb_to_hex([255, 15, 16]), "#ff0f10")

    def test_track_color(self):
        colors = [track_color(track_id) for track_id in range(1, 20)]
        for color in colors:
            self.assertTrue(re.match(r"^#[0-9a-f]{6}$", color))

        # Stable for an id, different for neighbouring ids:
        self.assertEqual(track_color(3), track_color(3))
        self.assertEqual(len(set(colors)), len(colors))


if __name__ == "__main__":
    unittest.main()
