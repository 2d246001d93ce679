"""Command line entry points of the multi-feature tracker.

Sub-commands:
    synth   render a synthetic scene (frames + ground truth)
    detect  median background subtraction over a frame folder
    track   track supervised or background subtraction detections
    eval    CLEAR MOT evaluation of track files against ground truth
"""

from __future__ import annotations

import argparse
import logging
import logging.config
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from functions.BoxGeometry import Detection
from functions.ConfigManager import RunConfig, load_config
from functions.CostFunctions import FEATURE_PRESETS, REID_MODES
from functions.Detector import (
    DetectionSource,
    detect_foreground,
    filter_by_class,
    filter_detections,
    learn_background,
    transfer_labels,
)
from functions.MotEvaluator import MotReport, evaluate, write_report
from functions.SceneGenerator import generate_scene
from functions.svg_handler import render_overlay
from functions.Tracker import MFTracker
from input_parsers.frame_io import read_frames, write_frames
from input_parsers.parse_detections import (
    INPUT_FORMATS,
    load_detections,
    load_ground_truth,
    write_detections,
    write_tracks,
)
from input_parsers.parse_scene import load_scene

logger = logging.getLogger(__name__)

LOGGER_CONFIG = Path(__file__).parent / "logger_config.yaml"


def setup_logging(config_file: Optional[str] = None) -> None:
    """Initialise logging from a YAML dictConfig, falling back to basicConfig."""
    path = Path(config_file) if config_file is not None else LOGGER_CONFIG
    if path.is_file():
        with open(path, "r") as stream:
            logger_config = yaml.safe_load(stream)
        logging.config.dictConfig(logger_config)
    else:
        logging.basicConfig(
            level=logging.INFO,
            format="%(asctime)s %(levelname)s %(module)s - %(funcName)s: %(message)s",
        )


def frame_size(text: str) -> tuple[int, int]:
    """Parse a `WIDTHxHEIGHT` frame size."""
    try:
        width, height = (int(value) for value in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"Frame size has to look like 640x480. Got: {text}"
        ) from None
    return width, height


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, overwritten by the config file, overwritten by the command line."""
    config = load_config(args.config)
    config.update(**vars(args))
    if getattr(args, "frame_size", None) is not None:
        config.basic.frame_width, config.basic.frame_height = args.frame_size
    config.validate()
    return config


def read_detections(
    path: str,
    config: RunConfig,
    reid_path: Optional[str] = None,
    source: DetectionSource = DetectionSource.SUPERVISED,
) -> dict[int, list[Detection]]:
    """Detections of a file after the filter of their source and the class filter.

    Supervised files are cut at min_confidence, files written by `detect`
    (unsupervised) at min_area.
    """
    detections = load_detections(path, config.basic.input_format, reid_path)
    filter_config = config.filter_config()
    kept = {
        frame: filter_by_class(
            filter_detections(items, filter_config, source),
            config.allowed_classes,
        )
        for frame, items in detections.items()
    }
    n_before = sum(len(items) for items in detections.values())
    n_after = sum(len(items) for items in kept.values())
    logger.info(
        f"{source.value.capitalize()} detections kept after filtering: "
        f"{n_after:,} of {n_before:,}."
    )
    return kept


def background_detections(
    frames: list[np.ndarray],
    config: RunConfig,
    supervised: Optional[dict[int, list[Detection]]] = None,
) -> dict[int, list[Detection]]:
    """Foreground boxes of every frame, area filtered, then labelled from supervised boxes."""
    if config.background.k is None:
        raise ValueError("The number of background frames (--k) has to be given.")

    model = learn_background(
        frames,
        config.background.k,
        seed=config.basic.seed,
        diff_threshold=config.background.diff_threshold,
    )
    logger.info(f"Background learned from frames: {list(model.learned_from)}")

    filter_config = config.filter_config()
    detections = {}
    for frame_index, frame in enumerate(frames):
        found = filter_detections(
            detect_foreground(frame, model, filter_config.min_area, frame_index),
            filter_config,
            DetectionSource.UNSUPERVISED,
        )
        if supervised is not None:
            found = transfer_labels(found, supervised.get(frame_index, []))
        if found:
            detections[frame_index] = found

    n_detections = sum(len(items) for items in detections.values())
    logger.info(f"Foreground detections over {len(frames):,} frames: {n_detections:,}")
    return detections


def cmd_synth(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    if args.seed is not None:
        scene.seed = args.seed

    output = Path(args.output)
    frames, gt = generate_scene(scene)
    write_frames(output / "frames", frames)
    gt.to_csv(output / "gt.csv", index=False, header=False)
    logger.info(f"Ground truth saved into {output / 'gt.csv'}.")
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    frames = read_frames(args.frames)
    supervised = (
        read_detections(args.transfer, config) if args.transfer is not None else None
    )
    detections = background_detections(frames, config, supervised)
    write_detections(args.output, detections)
    return 0


def cmd_track(args: argparse.Namespace) -> int:
    config = load_run_config(args)

    if config.cost.beta > 0 and args.frames is None:
        raise ValueError(
            "Colour costs are enabled (beta > 0): --frames has to be given."
        )
    if args.bgsub and args.frames is None:
        raise ValueError("--bgsub needs the video frames (--frames).")
    if args.bgsub and args.unsupervised:
        raise ValueError("--unsupervised only applies to a --detections file.")

    frames = read_frames(args.frames) if args.frames is not None else None

    if args.bgsub:
        supervised = (
            read_detections(args.transfer, config) if args.transfer is not None else None
        )
        detections = background_detections(frames, config, supervised)
    else:
        source = (
            DetectionSource.UNSUPERVISED if args.unsupervised else DetectionSource.SUPERVISED
        )
        detections = read_detections(args.detections, config, args.reid, source)

    if frames is not None:
        n_frames = len(frames)
        frame_bounds = (frames[0].shape[1], frames[0].shape[0])
        beyond = [frame for frame in detections if frame >= n_frames]
        if beyond:
            raise ValueError(
                f"Detections refer to frame {beyond[0]} but only {n_frames:,} frames "
                f"were read from {args.frames}."
            )
    else:
        n_frames = max(detections) + 1 if detections else 0
        frame_bounds = config.frame_bounds

    tracker = MFTracker(config.tracker_config(frame_bounds))
    tracks = tracker.run(detections, n_frames, frames)
    write_tracks(args.output, tracks, config.tracker.emit_predicted)

    if args.overlay is not None:
        if frames is None:
            raise ValueError("--overlay needs the video frames (--frames).")
        render_overlay(frames, tracks, args.overlay)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    if len(args.gt) != len(args.tracks):
        raise ValueError(
            f"Every --gt needs a matching --tracks: got {len(args.gt)} and {len(args.tracks)}."
        )

    reports: dict[str, MotReport] = {}
    for gt_file, track_file in zip(args.gt, args.tracks):
        name = Path(gt_file).stem
        if name in reports or name in ("pooled", "average"):
            name = f"{name}_{len(reports)}"
        gt = load_ground_truth(gt_file, config.basic.input_format)
        hyp = load_ground_truth(track_file)
        reports[name] = evaluate(gt, hyp, config.basic.iou_threshold)

    if args.output is not None:
        headline = write_report(reports, args.output)
    else:
        headline = next(iter(reports.values())).summary_line()
        if len(reports) > 1:
            logger.warning("Several videos without --output: only the first is printed.")
    print(headline)
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument(
        "--config", help="Configuration file with `key = value` lines.", type=str
    )
    shared.add_argument("--seed", help="Random seed.", type=int)
    shared.add_argument(
        "--log-config",
        help="YAML logging configuration (default: logger_config.yaml).",
        type=str,
    )

    parser = argparse.ArgumentParser(
        description="Multi-feature multiple object tracker with CLEAR MOT evaluation."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser(
        "synth", parents=[shared], help="Render a synthetic scene."
    )
    synth.add_argument("--scene", help="Scene description (JSON).", required=True)
    synth.add_argument(
        "--output", help="Folder for frames/ and gt.csv.", required=True, type=str
    )
    synth.set_defaults(handler=cmd_synth)

    detect = commands.add_parser(
        "detect", parents=[shared], help="Background subtraction detections."
    )
    detect.add_argument("--frames", help="Folder of numbered PNG frames.", required=True)
    detect.add_argument("--k", help="Number of frames to learn the background from.", type=int)
    detect.add_argument("--diff-threshold", dest="diff_threshold", type=float)
    detect.add_argument("--min-area", dest="min_area", type=float)
    detect.add_argument("--transfer", help="Supervised detections to take labels from.")
    detect.add_argument("--format", dest="input_format", choices=INPUT_FORMATS)
    detect.add_argument("--min-confidence", dest="min_confidence", type=float)
    detect.add_argument("--classes", help="Comma separated classes to keep.")
    detect.add_argument("--output", help="Detection file to write.", required=True)
    detect.set_defaults(handler=cmd_detect)

    track = commands.add_parser("track", parents=[shared], help="Track detections.")
    source = track.add_mutually_exclusive_group(required=True)
    source.add_argument("--detections", help="Supervised detection file.")
    source.add_argument(
        "--bgsub", help="Detect by background subtraction.", action="store_true"
    )
    track.add_argument(
        "--unsupervised",
        help="The --detections file was written by `detect`: filter on area, not confidence.",
        action="store_true",
    )
    track.add_argument("--frames", help="Folder of numbered PNG frames.")
    track.add_argument("--format", dest="input_format", choices=INPUT_FORMATS)
    track.add_argument("--reid", help="Re-ID embedding sidecar file.")
    track.add_argument("--transfer", help="Supervised detections to label --bgsub boxes.")
    track.add_argument("--k", help="Number of background frames (--bgsub).", type=int)
    track.add_argument("--diff-threshold", dest="diff_threshold", type=float)
    track.add_argument("--features", choices=sorted(FEATURE_PRESETS))
    track.add_argument("--alpha", type=float)
    track.add_argument("--beta", type=float)
    track.add_argument("--gamma", type=float)
    track.add_argument("--lambda", dest="lambda_", type=float)
    track.add_argument("--t-d", dest="t_d", type=float, help="Spatial normaliser in pixels.")
    track.add_argument("--reid-mode", dest="reid_mode", choices=REID_MODES)
    track.add_argument("--tau-match", dest="tau_match", type=float)
    track.add_argument("--max-missed", dest="max_missed", type=int)
    track.add_argument("--min-hits", dest="min_hits", type=int)
    track.add_argument("--min-confidence", dest="min_confidence", type=float)
    track.add_argument("--min-area", dest="min_area", type=float)
    track.add_argument("--classes", help="Comma separated classes to keep.")
    track.add_argument(
        "--frame-size", dest="frame_size", type=frame_size, help="WIDTHxHEIGHT"
    )
    track.add_argument(
        "--emit-predicted",
        dest="emit_predicted",
        action=argparse.BooleanOptionalAction,
        help="Write occlusion bridging predictions (default: yes).",
    )
    track.add_argument("--overlay", help="Folder for frames with the tracks drawn.")
    track.add_argument("--output", help="Track file to write.", required=True)
    track.set_defaults(handler=cmd_track)

    evaluation = commands.add_parser(
        "eval", parents=[shared], help="CLEAR MOT evaluation."
    )
    evaluation.add_argument(
        "--gt", help="Ground truth file (repeatable).", action="append", required=True
    )
    evaluation.add_argument(
        "--tracks", help="Track file (repeatable).", action="append", required=True
    )
    evaluation.add_argument("--iou", dest="iou_threshold", type=float)
    evaluation.add_argument(
        "--format", dest="input_format", choices=INPUT_FORMATS, help="Ground truth format."
    )
    evaluation.add_argument("--output", help="Report file to write.")
    evaluation.set_defaults(handler=cmd_eval)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_config)

    try:
        return args.handler(args)
    except (ValueError, OSError) as error:
        message = " ".join(str(error).split())
        logger.error(f"{args.command} failed: {message}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
