"""CLEAR MOT evaluation of tracker output against ground truth."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from functions.Assignment import FORBIDDEN, solve
from functions.BoxGeometry import BoundingBox, iou
from functions.exceptions import DuplicateGroundTruthError

logger = logging.getLogger(__name__)

PER_FRAME_COLUMNS = [
    "frame",
    "gt",
    "matches",
    "misses",
    "false_positives",
    "mismatches",
    "iou_sum",
]

# A ground truth object is correctly tracked when matched in this share of its frames:
CORRECT_TRACK_RATIO = 0.5


@dataclass
class MotReport:
    """CLEAR MOT tallies of one sequence, per frame and in total."""

    per_frame: pd.DataFrame = field(
        default_factory=lambda: pd.DataFrame(columns=PER_FRAME_COLUMNS)
    )
    correct_tracks: int = 0
    gt_objects: int = 0

    @property
    def matches(self: MotReport) -> int:
        return int(self.per_frame["matches"].sum())

    @property
    def misses(self: MotReport) -> int:
        return int(self.per_frame["misses"].sum())

    @property
    def false_positives(self: MotReport) -> int:
        return int(self.per_frame["false_positives"].sum())

    @property
    def mismatches(self: MotReport) -> int:
        return int(self.per_frame["mismatches"].sum())

    @property
    def gt_count(self: MotReport) -> int:
        return int(self.per_frame["gt"].sum())

    @property
    def iou_sum(self: MotReport) -> float:
        return float(self.per_frame["iou_sum"].sum())

    @property
    def mota(self: MotReport) -> float:
        """1 - (misses + false positives + mismatches) / ground truth boxes; NaN without ground truth."""
        return _mota(self.misses, self.false_positives, self.mismatches, self.gt_count)

    @property
    def motp(self: MotReport) -> float:
        """Mean IoU of the matched pairs, 0 when nothing was matched."""
        return _motp(self.iou_sum, self.matches)

    def summary_line(self: MotReport) -> str:
        return _summary_line(
            self.mota,
            self.motp,
            self.misses,
            self.false_positives,
            self.mismatches,
            self.gt_count,
        )


def _mota(misses: int, false_positives: int, mismatches: int, gt_count: int) -> float:
    if gt_count == 0:
        return float("nan")
    return 1.0 - (misses + false_positives + mismatches) / gt_count


def _motp(iou_sum: float, matches: int) -> float:
    return iou_sum / matches if matches > 0 else 0.0


def _summary_line(
    mota: float, motp: float, fn: int, fp: int, idsw: int, gt_count: int
) -> str:
    return f"MOTA={mota:.6f} MOTP={motp:.6f} FN={fn} FP={fp} IDSW={idsw} GT={gt_count}"


def _check_unique(table: pd.DataFrame, name: str, error: type[ValueError]) -> None:
    duplicated = table.duplicated(subset=["frame", "object_id"], keep=False)
    if duplicated.any():
        first = table.loc[duplicated].iloc[0]
        raise error(
            f"Duplicate {name} row: object {first.object_id} appears more than once "
            f"in frame {first.frame}."
        )


def _boxes(table: pd.DataFrame) -> tuple[list[int], list[BoundingBox]]:
    ids = table.object_id.astype(int).tolist()
    boxes = [
        BoundingBox(*coordinates)
        for coordinates in table[["x_min", "y_min", "x_max", "y_max"]].itertuples(
            index=False, name=None
        )
    ]
    return ids, boxes


def evaluate(
    gt: pd.DataFrame, hyp: pd.DataFrame, iou_threshold: float = 0.3
) -> MotReport:
    """CLEAR MOT tallies of a hypothesis against the ground truth.

    Correspondences of earlier frames are kept first while their IoU stays at or above
    the threshold; the remaining objects are matched by minimum total (1 - IoU) among
    pairs reaching the threshold. A mismatch is counted when a ground truth object is
    matched to a different hypothesis id than the last time it was matched.

    Args:
        gt (pd.DataFrame): ground truth with frame, object_id and box columns.
        hyp (pd.DataFrame): tracker output in the same layout.
        iou_threshold (float): minimum IoU of a valid correspondence, in (0, 1).

    Returns:
        MotReport: per-frame and total counts.

    Raises:
        ValueError: if the threshold is out of range or a hypothesis id repeats in a frame.
        DuplicateGroundTruthError: if a ground truth id repeats in a frame.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold has to be in (0, 1). Got: {iou_threshold}")

    _check_unique(gt, "ground truth", DuplicateGroundTruthError)
    _check_unique(hyp, "hypothesis", ValueError)

    gt_by_frame = {int(frame): rows for frame, rows in gt.groupby("frame")}
    hyp_by_frame = {int(frame): rows for frame, rows in hyp.groupby("frame")}
    frames = sorted(set(gt_by_frame) | set(hyp_by_frame))

    last_match: dict[int, int] = {}
    gt_frames: Counter = Counter()
    matched_frames: Counter = Counter()
    records = []

    for frame in frames:
        gt_ids, gt_boxes = _boxes(gt_by_frame[frame]) if frame in gt_by_frame else ([], [])
        hyp_ids, hyp_boxes = (
            _boxes(hyp_by_frame[frame]) if frame in hyp_by_frame else ([], [])
        )
        overlaps = np.array(
            [[iou(g, h) for h in hyp_boxes] for g in gt_boxes]
        ).reshape(len(gt_boxes), len(hyp_boxes))
        hyp_position = {hyp_id: position for position, hyp_id in enumerate(hyp_ids)}

        pairs = []
        used_gt = set()
        used_hyp = set()

        # Correspondences carried over from earlier frames:
        for gi, gt_id in enumerate(gt_ids):
            previous = last_match.get(gt_id)
            if previous is None or previous not in hyp_position:
                continue
            hi = hyp_position[previous]
            if hi not in used_hyp and overlaps[gi, hi] >= iou_threshold:
                pairs.append((gi, hi))
                used_gt.add(gi)
                used_hyp.add(hi)

        # Optimal matching of the rest:
        free_gt = [gi for gi in range(len(gt_ids)) if gi not in used_gt]
        free_hyp = [hi for hi in range(len(hyp_ids)) if hi not in used_hyp]
        mismatches = 0
        if free_gt and free_hyp:
            sub = overlaps[np.ix_(free_gt, free_hyp)]
            costs = np.where(sub >= iou_threshold, 1.0 - sub, FORBIDDEN)
            for row, col, _ in solve(costs).matched:
                gi, hi = free_gt[row], free_hyp[col]
                previous = last_match.get(gt_ids[gi])
                if previous is not None and previous != hyp_ids[hi]:
                    mismatches += 1
                pairs.append((gi, hi))

        for gi, hi in pairs:
            last_match[gt_ids[gi]] = hyp_ids[hi]
            matched_frames[gt_ids[gi]] += 1
        gt_frames.update(gt_ids)

        records.append(
            {
                "frame": frame,
                "gt": len(gt_ids),
                "matches": len(pairs),
                "misses": len(gt_ids) - len(pairs),
                "false_positives": len(hyp_ids) - len(pairs),
                "mismatches": mismatches,
                "iou_sum": float(sum(overlaps[gi, hi] for gi, hi in pairs)),
            }
        )

    correct_tracks = sum(
        1
        for gt_id, count in gt_frames.items()
        if matched_frames[gt_id] >= CORRECT_TRACK_RATIO * count
    )
    report = MotReport(
        per_frame=pd.DataFrame(records, columns=PER_FRAME_COLUMNS),
        correct_tracks=correct_tracks,
        gt_objects=len(gt_frames),
    )
    logger.info(f"Evaluated {len(frames):,} frames: {report.summary_line()}")
    return report


def aggregate_reports(reports: dict[str, MotReport]) -> pd.DataFrame:
    """One row per video plus the per-video average and the pooled tallies.

    The average row takes the mean of the per-video MOTA and MOTP; the pooled row
    recomputes them from the summed counts.
    """
    rows = []
    for name, report in reports.items():
        rows.append(
            {
                "video": name,
                "MOTA": report.mota,
                "MOTP": report.motp,
                "FN": report.misses,
                "FP": report.false_positives,
                "IDSW": report.mismatches,
                "GT": report.gt_count,
                "MATCH": report.matches,
                "CT": report.correct_tracks,
                "IOU_SUM": report.iou_sum,
            }
        )
    table = pd.DataFrame(rows)

    totals = table[["FN", "FP", "IDSW", "GT", "MATCH", "CT", "IOU_SUM"]].sum()
    pooled = {
        "video": "pooled",
        "MOTA": _mota(totals["FN"], totals["FP"], totals["IDSW"], totals["GT"]),
        "MOTP": _motp(totals["IOU_SUM"], totals["MATCH"]),
        **totals.to_dict(),
    }
    average = {
        "video": "average",
        "MOTA": float(table["MOTA"].mean()),
        "MOTP": float(table["MOTP"].mean()),
        **totals.to_dict(),
    }
    return pd.concat([table, pd.DataFrame([pooled, average])], ignore_index=True)


def write_report(reports: dict[str, MotReport], path: str) -> str:
    """Write per-frame tallies and summary lines; returns the headline summary line.

    With several videos the pooled and the averaged summaries follow the per-video
    blocks, the averaged one last.
    """
    lines = []
    for name, report in reports.items():
        lines.append(f"# video={name}")
        for row in report.per_frame.itertuples(index=False):
            lines.append(
                f"frame={row.frame} GT={row.gt} MATCH={row.matches} FN={row.misses} "
                f"FP={row.false_positives} IDSW={row.mismatches}"
            )
        lines.append(f"{report.summary_line()} CT={report.correct_tracks} video={name}")

    headline = lines[-1]
    if len(reports) > 1:
        table = aggregate_reports(reports)
        for _, row in table.loc[table["video"].isin(["pooled", "average"])].iterrows():
            headline = (
                _summary_line(
                    row["MOTA"],
                    row["MOTP"],
                    int(row["FN"]),
                    int(row["FP"]),
                    int(row["IDSW"]),
                    int(row["GT"]),
                )
                + f" CT={int(row['CT'])} video={row['video']}"
            )
            lines.append(headline)

    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    logger.info(f"Evaluation report saved into {path}.")
    return headline


def parse_summary_line(line: str) -> dict[str, float | int | str]:
    """Split a `KEY=value` summary line into a dictionary."""
    summary: dict[str, float | int | str] = {}
    for token in line.split():
        key, value = token.split("=", 1)
        if key in ("MOTA", "MOTP"):
            summary[key] = float(value)
        elif key == "video":
            summary[key] = value
        else:
            summary[key] = int(value)
    return summary


def read_summaries(path: str) -> list[dict[str, float | int | str]]:
    """Every summary line of a report file, in file order (headline last)."""
    with open(path) as f:
        return [
            parse_summary_line(line)
            for line in f.read().splitlines()
            if line.startswith("MOTA=")
        ]


def read_summary(path: str) -> dict[str, float | int | str]:
    """Headline summary of a report file.

    Raises:
        ValueError: if the file holds no summary line.
    """
    summaries = read_summaries(path)
    if not summaries:
        raise ValueError(f"No summary line found in report {path}.")
    return summaries[-1]
