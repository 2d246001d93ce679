from __future__ import annotations

import os
import unittest
from tempfile import TemporaryDirectory

import numpy as np

from functions.BoxGeometry import BoundingBox, Observation, ObservationSource, Track
from functions.KalmanFilter import MotionModel
from functions.svg_handler import render_overlay, svg_handler
from input_parsers.frame_io import read_frames


class TestSvgHandler(unittest.TestCase):
    def test_drawing(self):
        svg = svg_handler("", 100, 50)
        svg.draw_rectangle(10, 10, 20, 20, "#ff0000")
        svg.draw_rectangle(40, 10, 20, 20, "#00ff00", dashed=True)
        svg.add_text(10, 8, 3)

        content = svg.getSvg()
        self.assertEqual(content.count("<rect"), 2)
        self.assertEqual(content.count("stroke-dasharray"), 1)
        self.assertIn(">3</text>", content)

    def test_overlay(self):
        frames = [np.full((40, 60, 3), 30, dtype=np.uint8) for _ in range(3)]
        box = BoundingBox(10, 10, 30, 30)
        track = Track(
            id=1,
            kalman=MotionModel().init(box),
            observations=[
                Observation(0, box, ObservationSource.MATCHED),
                Observation(1, box.translate(5, 0), ObservationSource.PREDICTED),
            ],
        )
        with TemporaryDirectory() as folder:
            self.assertEqual(render_overlay(frames, [track], folder), 3)
            drawn = read_frames(folder)

        self.assertEqual(len(drawn), 3)
        self.assertEqual(drawn[0].shape, (40, 60, 3))
        self.assertFalse(np.array_equal(drawn[0], frames[0]))
        # Nothing is drawn on the last frame:
        np.testing.assert_array_equal(drawn[2], frames[2])


if __name__ == "__main__":
    unittest.main()
