"""Pairwise costs between a tracked object and a detection, and their fusion.

Every cost lies in [0, 1] where 0 means identical objects.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from functions.BoxGeometry import BoundingBox, ClassLabel
from functions.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

REID_MODES = ("corrected", "verbatim")

# Weights (alpha, beta, gamma, lambda) of the single feature ablations and the fusion:
FEATURE_PRESETS = {
    "fused": (0.7, 0.1, 0.1, 0.1),
    "spatial": (1.0, 0.0, 0.0, 0.0),
    "color": (0.0, 1.0, 0.0, 0.0),
    "label": (0.0, 0.0, 1.0, 0.0),
    "reid": (0.0, 0.0, 0.0, 1.0),
}


@dataclass
class CostConfig:
    """Fusion weights and cost parameters.

    t_d is the spatial normaliser in pixels; None means 10% of the larger frame side.
    """

    alpha: float = 0.7
    beta: float = 0.1
    gamma: float = 0.1
    lambda_: float = 0.1
    t_d: Optional[float] = None
    reid_mode: str = "corrected"
    null_label_cost: float = 0.5

    def __post_init__(self: CostConfig) -> None:
        self.validate()

    def validate(self: CostConfig) -> None:
        """Range check of the weights and parameters.

        Raises:
            ConfigurationError: if any value is out of range.
        """
        weights = self.weights()
        if any(weight < 0 for weight in weights):
            raise ConfigurationError(f"Fusion weights have to be non-negative: {weights}")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ConfigurationError(
                f"Fusion weights have to sum to 1. Got: {weights} (sum {sum(weights)})"
            )
        if self.t_d is not None and not self.t_d > 0:
            raise ConfigurationError(f"t_d has to be positive. Got: {self.t_d}")
        if self.reid_mode not in REID_MODES:
            raise ConfigurationError(
                f"reid_mode has to be one of {', '.join(REID_MODES)}. Got: {self.reid_mode}"
            )
        if not 0.0 <= self.null_label_cost <= 1.0:
            raise ConfigurationError(
                f"null_label_cost has to be in [0, 1]. Got: {self.null_label_cost}"
            )

    def weights(self: CostConfig) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.lambda_)

    def resolve_t_d(self: CostConfig, frame_width: int, frame_height: int) -> float:
        """Spatial normaliser for a given frame size."""
        if self.t_d is not None:
            return self.t_d
        return 0.1 * max(frame_width, frame_height)


def feature_preset(name: str) -> dict[str, float]:
    """Fusion weights of a named preset (`fused` or a single feature).

    Raises:
        ConfigurationError: for an unknown preset name.
    """
    if name not in FEATURE_PRESETS:
        raise ConfigurationError(
            f"Unknown feature preset: {name}. Available: {', '.join(FEATURE_PRESETS)}"
        )
    alpha, beta, gamma, lambda_ = FEATURE_PRESETS[name]
    return {"alpha": alpha, "beta": beta, "gamma": gamma, "lambda_": lambda_}


@dataclass(frozen=True, eq=False)
class ReidEmbedding:
    """Fixed-length appearance vector produced by a re-identification network."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self: ReidEmbedding) -> None:
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size == 0 or not np.isfinite(values).all():
            raise ValueError("Re-ID embedding has to be a non-empty finite vector.")
        if self.normalized and abs(np.linalg.norm(values) - 1.0) > 1e-6:
            raise ValueError(
                f"Embedding flagged as normalized has norm {np.linalg.norm(values)}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, normalize: bool = True) -> ReidEmbedding:
        """Wrap raw feature values, scaling them to unit length when asked to."""
        values = np.asarray(values, dtype=float).ravel()
        if normalize:
            norm = np.linalg.norm(values)
            if norm == 0:
                raise ValueError("A zero vector cannot be normalized.")
            return cls(values / norm, normalized=True)
        return cls(values, normalized=False)

    def __len__(self: ReidEmbedding) -> int:
        return int(self.values.size)


def spatial_cost(d: BoundingBox, t: BoundingBox, t_d: float) -> float:
    """Cost from the mean absolute difference of the four box coordinates.

    Args:
        d (BoundingBox): detection box.
        t (BoundingBox): tracked object box.
        t_d (float): distance in pixels from which the cost saturates at 1.

    Returns:
        float: 0 for identical boxes, 1 when the mean difference reaches t_d.

    Raises:
        ConfigurationError: if t_d is not positive.
    """
    if not t_d > 0:
        raise ConfigurationError(f"t_d has to be positive. Got: {t_d}")

    mean_distance = (
        abs(d.x_min - t.x_min)
        + abs(d.y_min - t.y_min)
        + abs(d.x_max - t.x_max)
        + abs(d.y_max - t.y_max)
    ) / 4
    return 1.0 - max(0.0, (t_d - mean_distance) / t_d)


def label_cost(
    l_i: ClassLabel,
    w_i: float,
    l_j: ClassLabel,
    w_j: float,
    null_label_cost: float = 0.5,
) -> float:
    """Cost from class labels weighted by the detector confidences.

    Args:
        l_i (ClassLabel): label of the first object.
        w_i (float): confidence of the first label.
        l_j (ClassLabel): label of the second object.
        w_j (float): confidence of the second label.
        null_label_cost (float): cost returned when either label is missing.

    Returns:
        float: 1 - mean confidence for equal labels, 1 for different labels.
    """
    if l_i.is_null or l_j.is_null:
        return null_label_cost
    if l_i.name == l_j.name:
        return 1.0 - (w_i + w_j) / 2
    return 1.0


def reid_cost(a: ReidEmbedding, b: ReidEmbedding, mode: str = "corrected") -> float:
    """Cost from the Euclidean distance of two re-ID embeddings.

    In `corrected` mode the distance of unit vectors (at most 2) is halved, so
    identical embeddings cost 0. `verbatim` mode returns 1 - distance clamped to
    [0, 1], which gives 1 for identical embeddings.

    Raises:
        ValueError: on length mismatch, unknown mode, or un-normalized embeddings
            in corrected mode.
    """
    if len(a) != len(b):
        raise ValueError(f"Embedding lengths differ: {len(a)} and {len(b)}")

    distance = float(np.linalg.norm(a.values - b.values))
    if mode == "corrected":
        if not (a.normalized and b.normalized):
            raise ValueError("The corrected re-ID cost expects normalized embeddings.")
        return min(1.0, distance / 2)
    if mode == "verbatim":
        return min(1.0, max(0.0, 1.0 - distance))
    raise ValueError(f"Unknown re-ID mode: {mode}")


def final_cost(
    c_d: float,
    c_c: Optional[float],
    c_l: float,
    c_r: Optional[float],
    cfg: CostConfig,
) -> float:
    """Weighted fusion of the four costs.

    A component passed as None (feature not available for this pair) is dropped and
    the remaining weights are rescaled to sum to 1.

    Raises:
        ConfigurationError: if every component with a non-zero weight is missing.
    """
    components = (c_d, c_c, c_l, c_r)
    weighted = [
        (weight, cost)
        for weight, cost in zip(cfg.weights(), components)
        if cost is not None
    ]
    total_weight = sum(weight for weight, _ in weighted)

    if total_weight <= 0:
        raise ConfigurationError(
            "None of the costs with a non-zero weight is available for this pair."
        )

    fused = sum(weight * cost for weight, cost in weighted)
    if not math.isclose(total_weight, 1.0, abs_tol=1e-12):
        fused /= total_weight

    return min(1.0, max(0.0, fused))
