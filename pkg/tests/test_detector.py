from __future__ import annotations

import unittest

import numpy as np

from functions.BoxGeometry import BoundingBox, ClassLabel, Detection, iou
from functions.Detector import (
    DetectionFilterConfig,
    DetectionSource,
    detect_foreground,
    filter_by_class,
    filter_detections,
    foreground_mask,
    learn_background,
    transfer_labels,
)
from functions.exceptions import ConfigurationError
from functions.SceneGenerator import ObjectScript, SyntheticScene, generate_scene


def box_of_area(side: float) -> BoundingBox:
    return BoundingBox(0, 0, side, side)


class TestFilterDetections(unittest.TestCase):
    def test_defaults(self):
        cfg = DetectionFilterConfig()
        self.assertEqual(cfg.min_confidence, 0.4)
        self.assertEqual(cfg.min_area, 2000.0)

        with self.assertRaises(ConfigurationError):
            DetectionFilterConfig(min_confidence=1.5)
        with self.assertRaises(ConfigurationError):
            DetectionFilterConfig(min_area=-1)

    def test_confidence_threshold(self):
        cfg = DetectionFilterConfig()
        box = BoundingBox(0, 0, 10, 10)
        detections = [Detection(0, box, confidence=value) for value in (0.39, 0.4, 0.41)]
        kept = filter_detections(detections, cfg, DetectionSource.SUPERVISED)
        self.assertEqual([det.confidence for det in kept], [0.4, 0.41])

    def test_area_threshold(self):
        cfg = DetectionFilterConfig()
        detections = [
            Detection(0, BoundingBox(0, 0, 50, 50)),
            Detection(0, BoundingBox(0, 0, 40, 40)),
            Detection(0, BoundingBox(0, 0, 1999, 1)),
            Detection(0, BoundingBox(0, 0, 2000, 1)),
            Detection(0, BoundingBox(0, 0, 2001, 1)),
        ]
        kept = filter_detections(detections, cfg, DetectionSource.UNSUPERVISED)
        self.assertEqual([det.box.area() for det in kept], [2500, 2001])

    def test_empty_and_idempotent(self):
        cfg = DetectionFilterConfig()
        self.assertEqual(filter_detections([], cfg), [])

        rng = np.random.default_rng(4)
        detections = [
            Detection(0, box_of_area(float(rng.uniform(1, 100))), confidence=float(rng.uniform()))
            for _ in range(50)
        ]
        for source in DetectionSource:
            once = filter_detections(detections, cfg, source)
            self.assertEqual(filter_detections(once, cfg, source), once)

    def test_class_whitelist(self):
        box = BoundingBox(0, 0, 10, 10)
        detections = [
            Detection(0, box, ClassLabel("car"), 0.9),
            Detection(0, box, ClassLabel("person"), 0.9),
            Detection(0, box),
        ]
        kept = filter_by_class(detections, ["car", "bus"])
        self.assertEqual([str(det.label) for det in kept], ["car", "null"])
        self.assertEqual(filter_by_class(detections, None), detections)


class TestBackground(unittest.TestCase):
    def test_constant_sequence(self):
        image = np.random.default_rng(0).integers(0, 256, (12, 16, 3), dtype=np.uint8)
        model = learn_background([image] * 6, k=4, seed=1)
        np.testing.assert_array_equal(model.median, image)
        self.assertEqual(len(model.learned_from), 4)
        self.assertEqual(list(model.learned_from), sorted(model.learned_from))

    def test_median_outvotes_moving_object(self):
        frames = [np.full((1, 1, 3), value, dtype=np.uint8) for value in (10, 10, 200)]
        model = learn_background(frames, k=3, seed=0)
        np.testing.assert_array_equal(model.median, np.full((1, 1, 3), 10))

    def test_moving_square_recovers_clean_background(self):
        rng = np.random.default_rng(8)
        background = rng.integers(0, 100, (60, 120, 3), dtype=np.uint8)
        frames = []
        for frame in range(20):
            image = background.copy()
            image[20:40, 5 * frame : 5 * frame + 20] = 250
            frames.append(image)

        model = learn_background(frames, k=10, seed=3)
        covered = np.zeros((60, 120), dtype=int)
        for index in model.learned_from:
            covered += (frames[index] != background).any(axis=2)
        mostly_free = covered < len(model.learned_from) / 2
        np.testing.assert_array_equal(model.median[mostly_free], background[mostly_free])

    def test_sampling_is_seeded(self):
        frames = [np.full((2, 2, 3), value, dtype=np.uint8) for value in range(10)]
        first = learn_background(frames, k=5, seed=42)
        second = learn_background(frames, k=5, seed=42)
        self.assertEqual(first.learned_from, second.learned_from)
        np.testing.assert_array_equal(first.median, second.median)

    def test_k_out_of_range(self):
        frames = [np.zeros((2, 2, 3), dtype=np.uint8)] * 3
        with self.assertRaises(ValueError):
            learn_background(frames, k=4)
        with self.assertRaises(ValueError):
            learn_background(frames, k=0)


class TestDetectForeground(unittest.TestCase):
    def setUp(self):
        self.background = np.full((200, 200, 3), 40, dtype=np.uint8)
        self.model = learn_background([self.background] * 3, k=3)

    def test_background_frame(self):
        self.assertEqual(detect_foreground(self.background, self.model, 0), [])

    def test_single_square(self):
        frame = self.background.copy()
        frame[50:110, 70:130] = 230
        detections = detect_foreground(frame, self.model, 2000, frame_index=4)

        self.assertEqual(len(detections), 1)
        detection = detections[0]
        self.assertGreaterEqual(iou(detection.box, BoundingBox(70, 50, 130, 110)), 0.9)
        self.assertTrue(detection.label.is_null)
        self.assertEqual(detection.confidence, 0.0)
        self.assertEqual(detection.frame_index, 4)

    def test_two_squares_and_area_filter(self):
        frame = self.background.copy()
        frame[10:60, 10:60] = 230
        frame[10:60, 62:112] = 230
        frame[150:160, 150:160] = 230
        detections = detect_foreground(frame, self.model, 2000)
        self.assertEqual(len(detections), 2)
        self.assertEqual(
            sorted(det.box.as_tuple() for det in detections),
            [(10, 10, 60, 60), (62, 10, 112, 60)],
        )

        # Small component kept without the area filter:
        self.assertEqual(len(detect_foreground(frame, self.model, 0)), 3)

    def test_diagonal_pixels_connect(self):
        frame = self.background.copy()
        frame[10, 10] = 230
        frame[11, 11] = 230
        self.assertEqual(len(detect_foreground(frame, self.model, 0)), 1)

    def test_shape_mismatch(self):
        with self.assertRaises(ValueError):
            foreground_mask(np.zeros((10, 10, 3), dtype=np.uint8), self.model)


class TestGeneratedScene(unittest.TestCase):
    def test_boxes_recovered_with_half_the_frames(self):
        scene = SyntheticScene(
            width=400,
            height=240,
            n_frames=40,
            seed=8,
            objects=[
                ObjectScript(1, 0, 39, BoundingBox(10, 10, 60, 70), (8.0, 0.0), (230, 40, 40)),
                ObjectScript(2, 0, 39, BoundingBox(340, 90, 390, 150), (-8.0, 0.0), (40, 40, 230)),
                ObjectScript(3, 0, 34, BoundingBox(150, 170, 190, 230), (6.0, 0.0), (40, 230, 40)),
            ],
        )
        frames, gt = generate_scene(scene)
        model = learn_background(frames, k=20, seed=4)

        for frame_index, expected in gt.groupby("frame"):
            detections = detect_foreground(frames[frame_index], model, 2000, frame_index)
            self.assertEqual(len(detections), len(expected), msg=f"frame {frame_index}")
            for row in expected.itertuples(index=False):
                truth = BoundingBox(row.x_min, row.y_min, row.x_max, row.y_max)
                best = max(iou(truth, det.box) for det in detections)
                self.assertGreaterEqual(best, 0.8, msg=f"frame {frame_index}, object {row.object_id}")



class TestTransferLabels(unittest.TestCase):
    def test_rules(self):
        unsup = [
            Detection(0, BoundingBox(0, 0, 10, 10)),
            Detection(0, BoundingBox(100, 100, 110, 110)),
        ]
        sup = [Detection(0, BoundingBox(1, 1, 11, 11), ClassLabel("car"), 0.8)]
        labelled = transfer_labels(unsup, sup)

        self.assertEqual(labelled[0].label, ClassLabel("car"))
        self.assertEqual(labelled[0].confidence, 0.8)
        self.assertTrue(labelled[1].label.is_null)
        self.assertEqual(
            [det.box for det in labelled], [det.box for det in unsup]
        )

    def test_max_iou_wins(self):
        unsup = [Detection(0, BoundingBox(0, 0, 100, 100))]
        sup = [
            Detection(0, BoundingBox(0, 0, 100, 20), ClassLabel("bus"), 0.99),
            Detection(0, BoundingBox(0, 0, 100, 60), ClassLabel("car"), 0.5),
        ]
        labelled = transfer_labels(unsup, sup)
        self.assertEqual(labelled[0].label, ClassLabel("car"))

    def test_ties(self):
        unsup = [Detection(0, BoundingBox(0, 0, 10, 10))]
        same_box = BoundingBox(0, 0, 10, 10)
        sup = [
            Detection(0, same_box, ClassLabel("car"), 0.6),
            Detection(0, same_box, ClassLabel("bus"), 0.9),
            Detection(0, same_box, ClassLabel("van"), 0.9),
        ]
        self.assertEqual(transfer_labels(unsup, sup)[0].label, ClassLabel("bus"))


if __name__ == "__main__":
    unittest.main()
