"""Reading and writing detection, ground truth, track and re-ID files.

Detection files hold one detection per line:
    frame,x_min,y_min,x_max,y_max,confidence,label
Ground truth and track files add an object_id column after the frame; track files
end with a source column (matched/predicted). Frames are 0-based. MOTChallenge
files (frame,id,x,y,w,h,conf,...; 1-based frames) are converted on load.
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from functions.BoxGeometry import (
    DETECTION_COLUMNS,
    GT_COLUMNS,
    BoundingBox,
    ClassLabel,
    Detection,
    ObservationSource,
    Track,
)
from functions.CostFunctions import ReidEmbedding
from functions.exceptions import DetectionFormatError

logger = logging.getLogger(__name__)

INPUT_FORMATS = ("mf", "mot")
TRACK_COLUMNS = GT_COLUMNS + ["source"]
# Minimum number of fields of a MOTChallenge row:
MOT_MIN_FIELDS = 7


def _read_rows(path: str, skiprows: int = 0) -> list[tuple[int, list[str]]]:
    """Non-blank rows of a CSV file with their 1-based line numbers.

    A leading header row (first field `frame`) is skipped.
    """
    try:
        table = pd.read_csv(
            path,
            header=None,
            skiprows=skiprows,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        return []
    except pd.errors.ParserError as error:
        raise DetectionFormatError(f"{path}: {error}") from None

    rows = []
    for index, values in enumerate(table.itertuples(index=False, name=None)):
        fields = ["" if pd.isna(value) else str(value).strip() for value in values]
        while fields and fields[-1] == "":
            fields.pop()
        if not fields:
            continue
        if not rows and fields[0].lower() == "frame":
            continue
        rows.append((index + skiprows + 1, fields))
    return rows


def _number(text: str, name: str, line_number: int, path: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DetectionFormatError(
            f"{path}: {name} is not a number: {text!r}", line_number
        ) from None


def _frame(text: str, line_number: int, path: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DetectionFormatError(
            f"{path}: frame is not an integer: {text!r}", line_number
        ) from None


def _parse_mf_row(fields: list[str], line_number: int, path: str) -> Optional[Detection]:
    if len(fields) != len(DETECTION_COLUMNS):
        raise DetectionFormatError(
            f"{path}: expected {len(DETECTION_COLUMNS)} fields, got {len(fields)}",
            line_number,
        )
    frame = _frame(fields[0], line_number, path)
    coordinates = [
        _number(text, name, line_number, path)
        for text, name in zip(fields[1:5], DETECTION_COLUMNS[1:5])
    ]
    confidence = _number(fields[5], "confidence", line_number, path)
    return Detection(
        frame_index=frame,
        box=BoundingBox(*coordinates),
        label=ClassLabel.parse(fields[6]),
        confidence=confidence,
    )


def _parse_mot_row(fields: list[str], line_number: int, path: str) -> Optional[Detection]:
    if len(fields) < MOT_MIN_FIELDS:
        raise DetectionFormatError(
            f"{path}: MOTChallenge rows need at least {MOT_MIN_FIELDS} fields, "
            f"got {len(fields)}",
            line_number,
        )
    frame = _frame(fields[0], line_number, path) - 1
    x, y, width, height = (
        _number(text, name, line_number, path)
        for text, name in zip(fields[2:6], ("x", "y", "w", "h"))
    )
    if width <= 0 or height <= 0:
        logger.warning(f"{path} line {line_number}: box without area skipped.")
        return None
    raw_confidence = _number(fields[6], "conf", line_number, path)
    confidence = float(np.clip(raw_confidence, 0.0, 1.0))
    if confidence != raw_confidence:
        logger.warning(
            f"{path} line {line_number}: confidence {raw_confidence} clipped to {confidence}."
        )
    return Detection(
        frame_index=frame,
        box=BoundingBox.from_xywh(x, y, width, height),
        confidence=confidence,
    )


def load_reid(path: str) -> dict[tuple[int, int], np.ndarray]:
    """Re-ID sidecar: `dim=D` header, then `frame,det_row_index,v0,...,v{D-1}` rows.

    Raises:
        DetectionFormatError: for a missing header, a wrong vector length or a
            repeated (frame, det_row_index) key.
    """
    with open(path) as f:
        header = f.readline().strip()
    if not header.startswith("dim="):
        raise DetectionFormatError(f"{path}: first line has to be `dim=D`, got {header!r}", 1)
    try:
        dimension = int(header[len("dim="):])
    except ValueError:
        raise DetectionFormatError(f"{path}: invalid dimension {header!r}", 1) from None
    if dimension < 1:
        raise DetectionFormatError(f"{path}: dimension has to be positive", 1)

    vectors: dict[tuple[int, int], np.ndarray] = {}
    for line_number, fields in _read_rows(path, skiprows=1):
        if len(fields) != dimension + 2:
            raise DetectionFormatError(
                f"{path}: expected {dimension} values after frame and row index, "
                f"got {len(fields) - 2}",
                line_number,
            )
        key = (_frame(fields[0], line_number, path), _frame(fields[1], line_number, path))
        if key in vectors:
            raise DetectionFormatError(
                f"{path}: embedding of frame {key[0]} row {key[1]} is given twice",
                line_number,
            )
        vectors[key] = np.array(
            [_number(text, "value", line_number, path) for text in fields[2:]]
        )
    return vectors


def load_detections(
    path: str,
    fmt: str = "mf",
    reid_path: Optional[str] = None,
    normalize: bool = True,
) -> dict[int, list[Detection]]:
    """Read a detection file, grouped by frame.

    Args:
        path (str): detection file.
        fmt (str): `mf` for the native layout or `mot` for MOTChallenge rows.
        reid_path (Optional[str]): re-ID sidecar joined by (frame, row order within the frame).
        normalize (bool): scale embeddings to unit length.

    Returns:
        dict[int, list[Detection]]: detections per frame in file order, frames ascending.

    Raises:
        DetectionFormatError: for a malformed row (with its line number) or when the
            sidecar does not cover exactly the detections of the file.
    """
    if fmt not in INPUT_FORMATS:
        raise ValueError(f"Unknown detection format: {fmt}. Use one of {INPUT_FORMATS}")
    parse_row = _parse_mf_row if fmt == "mf" else _parse_mot_row

    grouped: dict[int, list[Detection]] = {}
    for line_number, fields in _read_rows(path):
        try:
            detection = parse_row(fields, line_number, path)
        except DetectionFormatError:
            raise
        except ValueError as error:
            raise DetectionFormatError(f"{path}: {error}", line_number) from None
        if detection is not None:
            grouped.setdefault(detection.frame_index, []).append(detection)

    if reid_path is not None:
        grouped = _join_reid(grouped, load_reid(reid_path), normalize, reid_path)

    n_detections = sum(len(detections) for detections in grouped.values())
    logger.info(
        f"Read {n_detections:,} detections over {len(grouped):,} frames from {path}."
    )
    return dict(sorted(grouped.items()))


def _join_reid(
    grouped: dict[int, list[Detection]],
    vectors: dict[tuple[int, int], np.ndarray],
    normalize: bool,
    reid_path: str,
) -> dict[int, list[Detection]]:
    n_detections = sum(len(detections) for detections in grouped.values())
    if len(vectors) != n_detections:
        raise DetectionFormatError(
            f"{reid_path}: {len(vectors):,} embeddings for {n_detections:,} detections"
        )

    joined = {}
    for frame, detections in grouped.items():
        with_embeddings = []
        for row, detection in enumerate(detections):
            if (frame, row) not in vectors:
                raise DetectionFormatError(
                    f"{reid_path}: no embedding for frame {frame} row {row}"
                )
            embedding = ReidEmbedding.from_values(vectors[(frame, row)], normalize)
            with_embeddings.append(
                Detection(
                    frame_index=detection.frame_index,
                    box=detection.box,
                    label=detection.label,
                    confidence=detection.confidence,
                    embedding=embedding,
                )
            )
        joined[frame] = with_embeddings
    return joined


def write_detections(path: str, detections_by_frame: dict[int, list[Detection]]) -> None:
    """Save detections in the native layout, frames ascending."""
    rows = [
        [
            detection.frame_index,
            *detection.box.as_tuple(),
            detection.confidence,
            str(detection.label),
        ]
        for frame in sorted(detections_by_frame)
        for detection in detections_by_frame[frame]
    ]
    pd.DataFrame(rows, columns=DETECTION_COLUMNS).to_csv(path, index=False, header=False)
    logger.info(f"Saved {len(rows):,} detections into {path}.")


def load_ground_truth(path: str, fmt: str = "mf") -> pd.DataFrame:
    """Ground truth (or track) boxes as a table with the ground truth columns.

    A trailing source column of track files is ignored. MOTChallenge ground truth
    rows flagged as not considered (conf 0) are dropped.

    Raises:
        DetectionFormatError: for a malformed row, with its line number.
    """
    if fmt not in INPUT_FORMATS:
        raise ValueError(f"Unknown ground truth format: {fmt}. Use one of {INPUT_FORMATS}")

    records = []
    for line_number, fields in _read_rows(path):
        try:
            record = (
                _parse_gt_row(fields, line_number, path)
                if fmt == "mf"
                else _parse_mot_gt_row(fields, line_number, path)
            )
        except DetectionFormatError:
            raise
        except ValueError as error:
            raise DetectionFormatError(f"{path}: {error}", line_number) from None
        if record is not None:
            records.append(record)

    table = pd.DataFrame(records, columns=GT_COLUMNS)
    table = table.astype({"frame": int, "object_id": int})
    logger.info(f"Read {len(table):,} boxes from {path}.")
    return table


def _parse_gt_row(fields: list[str], line_number: int, path: str) -> dict:
    if len(fields) not in (len(GT_COLUMNS), len(TRACK_COLUMNS)):
        raise DetectionFormatError(
            f"{path}: expected {len(GT_COLUMNS)} fields, got {len(fields)}", line_number
        )
    box = BoundingBox(
        *(
            _number(text, name, line_number, path)
            for text, name in zip(fields[2:6], GT_COLUMNS[2:6])
        )
    )
    return {
        "frame": _frame(fields[0], line_number, path),
        "object_id": _frame(fields[1], line_number, path),
        "x_min": box.x_min,
        "y_min": box.y_min,
        "x_max": box.x_max,
        "y_max": box.y_max,
        "confidence": _number(fields[6], "confidence", line_number, path),
        "label": str(ClassLabel.parse(fields[7])),
    }


def _parse_mot_gt_row(fields: list[str], line_number: int, path: str) -> Optional[dict]:
    if len(fields) < MOT_MIN_FIELDS:
        raise DetectionFormatError(
            f"{path}: MOTChallenge rows need at least {MOT_MIN_FIELDS} fields, "
            f"got {len(fields)}",
            line_number,
        )
    if _number(fields[6], "conf", line_number, path) == 0:
        return None
    x, y, width, height = (
        _number(text, name, line_number, path)
        for text, name in zip(fields[2:6], ("x", "y", "w", "h"))
    )
    box = BoundingBox.from_xywh(x, y, width, height)
    return {
        "frame": _frame(fields[0], line_number, path) - 1,
        "object_id": _frame(fields[1], line_number, path),
        "x_min": box.x_min,
        "y_min": box.y_min,
        "x_max": box.x_max,
        "y_max": box.y_max,
        "confidence": 1.0,
        "label": "null",
    }


def tracks_to_frame(tracks: Iterable[Track], emit_predicted: bool = True) -> pd.DataFrame:
    """Track observations as rows of the track file, ordered by frame then id."""
    rows = []
    for track in tracks:
        for observation in track.observations:
            if not emit_predicted and observation.source is ObservationSource.PREDICTED:
                continue
            rows.append(
                [
                    observation.frame_index,
                    track.id,
                    *observation.box.as_tuple(),
                    track.label_confidence,
                    str(track.label),
                    observation.source.value,
                ]
            )
    table = pd.DataFrame(rows, columns=TRACK_COLUMNS)
    return table.sort_values(["frame", "object_id"], kind="stable").reset_index(drop=True)


def write_tracks(path: str, tracks: Iterable[Track], emit_predicted: bool = True) -> pd.DataFrame:
    """Save finalized tracks in the ground truth layout plus the source column."""
    table = tracks_to_frame(tracks, emit_predicted)
    table.to_csv(path, index=False, header=False)
    logger.info(
        f"Saved {table.object_id.nunique():,} tracks ({len(table):,} boxes) into {path}."
    )
    return table
