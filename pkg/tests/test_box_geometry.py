from __future__ import annotations

import unittest

import numpy as np

from functions.BoxGeometry import (
    NULL_LABEL,
    BoundingBox,
    ClassLabel,
    Detection,
    center,
    iou,
)
from functions.exceptions import InvalidBoxError


class TestBoundingBox(unittest.TestCase):
    def test_degenerate_boxes_rejected(self):
        for coordinates in [(0, 0, 0, 10), (0, 0, 10, 0), (5, 5, 1, 10), (0, 0, np.nan, 1)]:
            with self.assertRaises(InvalidBoxError):
                BoundingBox(*coordinates)

        # The error is a ValueError too:
        with self.assertRaises(ValueError):
            BoundingBox(0, 0, -1, 1)

    def test_from_xywh(self):
        box = BoundingBox.from_xywh(10, 20, 30, 40)
        self.assertEqual(box.as_tuple(), (10, 20, 40, 60))
        self.assertEqual(box.width, 30)
        self.assertEqual(box.height, 40)
        self.assertEqual(box.area(), 1200)

    def test_translate(self):
        box = BoundingBox(0, 0, 10, 10).translate(2.5, -1)
        self.assertEqual(box.as_tuple(), (2.5, -1, 12.5, 9))


class TestIou(unittest.TestCase):
    def test_examples(self):
        a = BoundingBox(0, 0, 10, 10)
        self.assertEqual(iou(a, BoundingBox(0, 0, 10, 10)), 1.0)
        self.assertEqual(iou(a, BoundingBox(20, 20, 30, 30)), 0.0)
        self.assertAlmostEqual(iou(a, BoundingBox(5, 0, 15, 10)), 1 / 3, places=12)

        # Touching edges do not intersect:
        self.assertEqual(iou(a, BoundingBox(10, 0, 20, 10)), 0.0)

    def test_properties(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            x, y = rng.uniform(-100, 100, 2)
            w, h = rng.uniform(0.5, 50, 2)
            a = BoundingBox.from_xywh(x, y, w, h)
            x, y = rng.uniform(-100, 100, 2)
            w, h = rng.uniform(0.5, 50, 2)
            b = BoundingBox.from_xywh(x, y, w, h)

            value = iou(a, b)
            self.assertGreaterEqual(value, 0.0)
            self.assertLessEqual(value, 1.0)
            self.assertEqual(value, iou(b, a))
            self.assertAlmostEqual(iou(a, a), 1.0, places=12)

            dx, dy = rng.uniform(-30, 30, 2)
            self.assertAlmostEqual(
                iou(a.translate(dx, dy), b.translate(dx, dy)), value, places=9
            )


class TestCenter(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(center(BoundingBox(0, 0, 10, 10)), (5, 5))
        self.assertEqual(center(BoundingBox(10, 20, 30, 60)), (20, 40))
        self.assertEqual(BoundingBox(2, 2, 4, 8).center(), (3, 5))


class TestLabelsAndDetections(unittest.TestCase):
    def test_label_parsing(self):
        self.assertTrue(ClassLabel.parse("null").is_null)
        self.assertTrue(ClassLabel.parse("").is_null)
        self.assertIs(ClassLabel.parse(None), NULL_LABEL)
        self.assertEqual(ClassLabel.parse(" car "), ClassLabel("car"))
        self.assertEqual(str(NULL_LABEL), "null")
        self.assertEqual(str(ClassLabel("bus")), "bus")

    def test_detection_validation(self):
        box = BoundingBox(0, 0, 1, 1)
        detection = Detection(frame_index=0, box=box)
        self.assertTrue(detection.label.is_null)
        self.assertEqual(detection.confidence, 0.0)

        with self.assertRaises(ValueError):
            Detection(frame_index=-1, box=box)
        with self.assertRaises(ValueError):
            Detection(frame_index=0, box=box, confidence=1.2)


if __name__ == "__main__":
    unittest.main()
