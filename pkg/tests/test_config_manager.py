from __future__ import annotations

import os
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory

from functions.ConfigManager import RunConfig, load_config
from functions.exceptions import ConfigurationError

SHIPPED_CONFIG = Path(__file__).resolve().parent.parent / "config.cfg"


class TestConfigManager(unittest.TestCase):
    def setUp(self):
        self.tmp = TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write(self, text: str) -> str:
        path = os.path.join(self.tmp.name, "run.cfg")
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_defaults(self):
        config = load_config()
        self.assertEqual(
            (config.cost.alpha, config.cost.beta, config.cost.gamma, config.cost.lambda_),
            (0.7, 0.1, 0.1, 0.1),
        )
        self.assertEqual(config.tracker.tau_match, 0.8)
        self.assertEqual(config.tracker.max_missed, 10)
        self.assertEqual(config.tracker.min_hits, 3)
        self.assertEqual(config.detection.min_confidence, 0.4)
        self.assertEqual(config.detection.min_area, 2000.0)
        self.assertEqual(config.basic.iou_threshold, 0.3)
        self.assertIsNone(config.background.k)
        self.assertIsNone(config.frame_bounds)
        self.assertIsNone(config.allowed_classes)

    def test_shipped_config_matches_defaults(self):
        self.assertEqual(load_config(str(SHIPPED_CONFIG)), RunConfig())

    def test_parse_file(self):
        config = load_config(
            self.write(
                "# weights\n"
                "alpha = 0.4  # spatial\n"
                "beta=0.2\n"
                "gamma = 0.2\n"
                "lambda = 0.2\n"
                "\n"
                "k = 25\n"
                "classes = car, bus\n"
                "emit_predicted = no\n"
                "frame_width = 640\n"
                "frame_height = 480\n"
                "t_d = 40\n"
            )
        )
        self.assertEqual(config.cost.lambda_, 0.2)
        self.assertEqual(config.cost.t_d, 40.0)
        self.assertEqual(config.background.k, 25)
        self.assertEqual(config.allowed_classes, ["car", "bus"])
        self.assertFalse(config.tracker.emit_predicted)
        self.assertEqual(config.frame_bounds, (640, 480))
        self.assertEqual(config.tracker_config().frame_bounds, (640, 480))
        self.assertEqual(config.tracker_config((100, 50)).frame_bounds, (100, 50))

    def test_file_errors(self):
        cases = [
            "alpha = 0.7\ncolour = red\n",
            "alpha = 0.7\nalpha = 0.7\n",
            "lambda = 0.1\nlambda_ = 0.1\n",
            "alpha 0.7\n",
            "max_missed = many\n",
            "emit_predicted = maybe\n",
            "tau_match = 1.5\n",
            "max_missed = 0\n",
            "iou_threshold = 1.0\n",
            "input_format = kitti\n",
            "k = 0\n",
            "diff_threshold = 300\n",
            "alpha = 0.9\n",
            "features = everything\n",
            "min_confidence = 2\n",
        ]
        for text in cases:
            with self.assertRaises(ConfigurationError, msg=text):
                load_config(self.write(text))

    def test_error_names_line(self):
        with self.assertRaises(ConfigurationError) as context:
            load_config(self.write("alpha = 0.7\n\nmystery = 1\n"))
        self.assertIn("line 3", str(context.exception))

    def test_features_preset(self):
        config = load_config(self.write("features = spatial\n"))
        self.assertEqual(
            (config.cost.alpha, config.cost.beta, config.cost.gamma, config.cost.lambda_),
            (1.0, 0.0, 0.0, 0.0),
        )
        self.assertEqual(config.basic.features, "spatial")

        # Preset first, then the individual weights:
        config = load_config(
            self.write("alpha = 0.5\nbeta = 0.5\nfeatures = color\ngamma = 0.0\n")
        )
        self.assertEqual((config.cost.alpha, config.cost.beta), (0.5, 0.5))

    def test_update_from_command_line(self):
        config = load_config()
        config.update(
            features="label",
            alpha=None,
            tau_match=0.6,
            max_missed="4",
            lambda_=None,
            output="ignored",
            command="track",
        )
        self.assertEqual(config.cost.gamma, 1.0)
        self.assertEqual(config.cost.alpha, 0.0)
        self.assertEqual(config.tracker.tau_match, 0.6)
        self.assertEqual(config.tracker.max_missed, 4)
        config.validate()

        config.update(alpha=0.5, gamma=0.5)
        self.assertEqual((config.cost.alpha, config.cost.gamma), (0.5, 0.5))

    def test_set_value_unknown(self):
        with self.assertRaises(ConfigurationError):
            RunConfig().set_value("colour", "red")

    def test_builders(self):
        config = load_config(self.write("min_confidence = 0.6\nstd_weight_position = 0.1\n"))
        self.assertEqual(config.filter_config().min_confidence, 0.6)
        self.assertEqual(config.motion_parameters().std_weight_position, 0.1)
        tracker = config.tracker_config((640, 480))
        self.assertEqual(tracker.cost.alpha, 0.7)
        self.assertEqual(tracker.tau_match, 0.8)
        self.assertAlmostEqual(tracker.t_d, 64.0)

    def test_tracker_config_needs_a_normaliser(self):
        config = RunConfig()
        with self.assertRaises(ConfigurationError):
            config.tracker_config()

        config.set_value("t_d", "40")
        self.assertEqual(config.tracker_config().t_d, 40.0)

    def test_save_and_load(self):
        config = load_config(
            self.write("features = reid\nk = 12\nclasses = person\nseed = 5\n")
        )
        path = os.path.join(self.tmp.name, "saved.cfg")
        config.save(path)
        self.assertEqual(load_config(path), config)

    def test_sections_from_dictionaries(self):
        config = RunConfig(cost={"alpha": 1.0, "beta": 0.0, "gamma": 0.0, "lambda_": 0.0})
        self.assertEqual(config.cost.alpha, 1.0)
        config.validate()


if __name__ == "__main__":
    unittest.main()
