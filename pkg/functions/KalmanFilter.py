"""Constant velocity Kalman filter over box center and size.

The 8 dimensional state is (cx, cy, w, h, vcx, vcy, vw, vh), in pixels and pixels
per frame. The measurement is (cx, cy, w, h). One filter step per video frame.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from functions.BoxGeometry import BoundingBox, center
from functions.exceptions import CollapsedStateError, ConfigurationError

logger = logging.getLogger(__name__)

NDIM = 4


@dataclass(frozen=True, eq=False)
class KalmanState:
    """Mean vector (8,) and covariance matrix (8, 8) of one tracked box."""

    mean: np.ndarray
    covariance: np.ndarray

    @property
    def height(self: KalmanState) -> float:
        return float(self.mean[3])


@dataclass
class MotionParameters:
    """Noise settings of the motion model.

    The init standard deviations are absolute (pixels, pixels per frame); the
    process and measurement weights are relative to the box height.
    """

    init_position_std: float = 10.0
    init_velocity_std: float = 10.0
    std_weight_position: float = 1.0 / 20
    std_weight_velocity: float = 1.0 / 160
    std_weight_measurement: float = 1.0 / 20
    min_size: float = 1.0

    def validate(self: MotionParameters) -> None:
        for name in (
            "init_position_std",
            "init_velocity_std",
            "std_weight_position",
            "std_weight_velocity",
            "std_weight_measurement",
            "min_size",
        ):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} has to be positive. Got: {getattr(self, name)}")


class MotionModel:
    """Kalman prediction and correction of box states."""

    def __init__(self: MotionModel, parameters: MotionParameters | None = None) -> None:
        self.parameters = parameters if parameters is not None else MotionParameters()
        self.parameters.validate()

        # x_{t+1} = x_t + v_t for the four measured coordinates:
        self._motion_mat = np.eye(2 * NDIM)
        for i in range(NDIM):
            self._motion_mat[i, NDIM + i] = 1.0
        self._update_mat = np.eye(NDIM, 2 * NDIM)

    def initial_covariance(self: MotionModel) -> np.ndarray:
        std = [self.parameters.init_position_std] * NDIM + [
            self.parameters.init_velocity_std
        ] * NDIM
        return np.diag(np.square(std))

    def init(self: MotionModel, box: BoundingBox) -> KalmanState:
        """State of a new track: box center and size, zero velocity."""
        cx, cy = center(box)
        mean = np.array([cx, cy, box.width, box.height, 0.0, 0.0, 0.0, 0.0])
        return KalmanState(mean, self.initial_covariance())

    def predict(self: MotionModel, s: KalmanState) -> KalmanState:
        """Advance the state by one frame."""
        height = s.height
        std_pos = [self.parameters.std_weight_position * height] * NDIM
        std_vel = [self.parameters.std_weight_velocity * height] * NDIM
        motion_cov = np.diag(np.square(np.r_[std_pos, std_vel]))

        mean = self._motion_mat @ s.mean
        covariance = (
            np.linalg.multi_dot((self._motion_mat, s.covariance, self._motion_mat.T))
            + motion_cov
        )
        return KalmanState(self._floor_size(mean), _symmetrize(covariance))

    def project(self: MotionModel, s: KalmanState) -> tuple[np.ndarray, np.ndarray]:
        """Measurement space mean and innovation covariance."""
        std = [self.parameters.std_weight_measurement * s.height] * NDIM
        innovation_cov = np.diag(np.square(std))

        mean = self._update_mat @ s.mean
        covariance = np.linalg.multi_dot(
            (self._update_mat, s.covariance, self._update_mat.T)
        )
        return mean, covariance + innovation_cov

    def update(self: MotionModel, s: KalmanState, observed: BoundingBox) -> KalmanState:
        """Correct the state with an observed box."""
        cx, cy = center(observed)
        measurement = np.array([cx, cy, observed.width, observed.height])

        projected_mean, projected_cov = self.project(s)
        chol_factor, lower = scipy.linalg.cho_factor(
            projected_cov, lower=True, check_finite=False
        )
        kalman_gain = scipy.linalg.cho_solve(
            (chol_factor, lower),
            (s.covariance @ self._update_mat.T).T,
            check_finite=False,
        ).T
        innovation = measurement - projected_mean

        mean = s.mean + kalman_gain @ innovation
        covariance = s.covariance - np.linalg.multi_dot(
            (kalman_gain, projected_cov, kalman_gain.T)
        )
        return KalmanState(self._floor_size(mean), _symmetrize(covariance))

    def to_box(self: MotionModel, s: KalmanState) -> BoundingBox:
        """Corner box of the state mean.

        Raises:
            CollapsedStateError: if the width or height is not positive.
        """
        return to_box(s)

    def _floor_size(self: MotionModel, mean: np.ndarray) -> np.ndarray:
        mean = mean.copy()
        mean[2:4] = np.maximum(mean[2:4], self.parameters.min_size)
        return mean


def to_box(s: KalmanState) -> BoundingBox:
    """Corner box of the state mean.

    Raises:
        CollapsedStateError: if the width or height is not positive.
    """
    cx, cy, width, height = (float(value) for value in s.mean[:4])
    if not (width > 0 and height > 0):
        raise CollapsedStateError(
            f"collapsed state: width {width}, height {height}"
        )
    return BoundingBox(
        cx - width / 2, cy - height / 2, cx + width / 2, cy + height / 2
    )


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2
