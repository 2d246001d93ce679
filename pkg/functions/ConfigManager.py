"""Managing configuration settings of the tracker runs."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional, Union, get_args, get_origin, get_type_hints

from functions.CostFunctions import CostConfig, feature_preset
from functions.Detector import DetectionFilterConfig
from functions.exceptions import ConfigurationError
from functions.KalmanFilter import MotionParameters
from functions.Tracker import TrackerConfig

logger = logging.getLogger(__name__)

# Keys accepted under another spelling in configuration files:
KEY_ALIASES = {"lambda": "lambda_"}

NONE_VALUES = ("none", "null", "")
TRUE_VALUES = ("true", "yes", "on", "1")
FALSE_VALUES = ("false", "no", "off", "0")


# List of dataclasses to describe the configuration file:
@dataclass
class CostParameters:
    """Fusion weights and cost parameters."""

    alpha: float = 0.7
    beta: float = 0.1
    gamma: float = 0.1
    lambda_: float = 0.1
    t_d: Optional[float] = None
    reid_mode: str = "corrected"
    null_label_cost: float = 0.5


@dataclass
class TrackerParameters:
    """Association gate, track lifecycle and motion noise."""

    tau_match: float = 0.8
    max_missed: int = 10
    min_hits: int = 3
    histogram_bins: int = 256
    emit_predicted: bool = True
    init_position_std: float = 10.0
    init_velocity_std: float = 10.0
    std_weight_position: float = 1.0 / 20
    std_weight_velocity: float = 1.0 / 160
    std_weight_measurement: float = 1.0 / 20
    min_size: float = 1.0


@dataclass
class DetectionParameters:
    """Validity filters of the detector output."""

    min_confidence: float = 0.4
    min_area: float = 2000.0
    # Comma separated class whitelist:
    classes: Optional[str] = None


@dataclass
class BackgroundParameters:
    """Median background learning."""

    k: Optional[int] = None
    diff_threshold: float = 30.0


@dataclass
class BasicParameters:
    """Run wide settings."""

    seed: int = 0
    frame_width: Optional[int] = None
    frame_height: Optional[int] = None
    iou_threshold: float = 0.3
    input_format: str = "mf"
    features: Optional[str] = None


@dataclass
class RunConfig:
    """Dataclass to store the configuration of a run."""

    cost: CostParameters = field(default_factory=CostParameters)
    tracker: TrackerParameters = field(default_factory=TrackerParameters)
    detection: DetectionParameters = field(default_factory=DetectionParameters)
    background: BackgroundParameters = field(default_factory=BackgroundParameters)
    basic: BasicParameters = field(default_factory=BasicParameters)

    def __post_init__(self: RunConfig) -> None:
        # Sections given as plain dictionaries are turned into their dataclasses:
        hints = get_type_hints(type(self))
        for section in fields(self):
            value = getattr(self, section.name)
            if isinstance(value, dict):
                setattr(self, section.name, hints[section.name](**value))

    def sections(self: RunConfig) -> list[Any]:
        return [getattr(self, section.name) for section in fields(self)]

    def _section_of(self: RunConfig, key: str) -> Any:
        for section in self.sections():
            if key in section.__dataclass_fields__:
                return section
        return None

    def set_value(self: RunConfig, key: str, value: Any) -> None:
        """Set a single parameter by its field name.

        String values are converted to the type of the field.

        Raises:
            ConfigurationError: for an unknown key or a value of the wrong type.
        """
        key = KEY_ALIASES.get(key, key)
        section = self._section_of(key)
        if section is None:
            raise ConfigurationError(f"Unknown configuration key: {key}")

        if isinstance(value, str):
            value = _coerce(value, get_type_hints(type(section))[key], key)
        setattr(section, key, value)

    def apply_features(self: RunConfig, name: str) -> None:
        """Set the fusion weights of a feature preset."""
        for key, weight in feature_preset(name).items():
            setattr(self.cost, key, weight)
        self.basic.features = name

    # Updating configuration based on command line arguments:
    def update(self: RunConfig, **kwargs: Any) -> None:
        """Update parameters from command line arguments.

        Arguments that are None (not given on the command line) or are not
        configuration keys are ignored. A feature preset is applied before the
        individual weights.

        Args:
            **kwargs: Command line arguments.
        """
        if kwargs.get("features") is not None:
            self.apply_features(kwargs["features"])

        for key, value in kwargs.items():
            key = KEY_ALIASES.get(key, key)
            if value is None or key == "features" or self._section_of(key) is None:
                continue
            self.set_value(key, value)

    @property
    def frame_bounds(self: RunConfig) -> Optional[tuple[int, int]]:
        if self.basic.frame_width is None or self.basic.frame_height is None:
            return None
        return (self.basic.frame_width, self.basic.frame_height)

    @property
    def allowed_classes(self: RunConfig) -> Optional[list[str]]:
        if self.detection.classes is None:
            return None
        return [name.strip() for name in self.detection.classes.split(",") if name.strip()]

    def cost_config(self: RunConfig) -> CostConfig:
        return CostConfig(**asdict(self.cost))

    def motion_parameters(self: RunConfig) -> MotionParameters:
        return MotionParameters(
            **{
                item.name: getattr(self.tracker, item.name)
                for item in fields(MotionParameters)
            }
        )

    def filter_config(self: RunConfig) -> DetectionFilterConfig:
        return DetectionFilterConfig(
            min_confidence=self.detection.min_confidence,
            min_area=self.detection.min_area,
        )

    def tracker_config(
        self: RunConfig, frame_bounds: Optional[tuple[int, int]] = None
    ) -> TrackerConfig:
        """Tracker settings; frame_bounds falls back to the configured frame size."""
        return TrackerConfig(
            cost=self.cost_config(),
            tau_match=self.tracker.tau_match,
            max_missed=self.tracker.max_missed,
            min_hits=self.tracker.min_hits,
            frame_bounds=frame_bounds if frame_bounds is not None else self.frame_bounds,
            histogram_bins=self.tracker.histogram_bins,
            motion=self.motion_parameters(),
        )

    def validate(self: RunConfig) -> None:
        """Range check of every parameter.

        Raises:
            ConfigurationError: naming the first value out of range.
        """
        self.cost_config()
        self.filter_config()
        self.motion_parameters().validate()

        tracker = self.tracker
        if not 0.0 < tracker.tau_match <= 1.0:
            raise ConfigurationError(f"tau_match has to be in (0, 1]. Got: {tracker.tau_match}")
        for name in ("max_missed", "min_hits", "histogram_bins"):
            if getattr(tracker, name) < 1:
                raise ConfigurationError(
                    f"{name} has to be at least 1. Got: {getattr(tracker, name)}"
                )

        background = self.background
        if background.k is not None and background.k < 1:
            raise ConfigurationError(f"k has to be at least 1. Got: {background.k}")
        if not 0.0 <= background.diff_threshold <= 255.0:
            raise ConfigurationError(
                f"diff_threshold has to be in [0, 255]. Got: {background.diff_threshold}"
            )

        basic = self.basic
        if not 0.0 < basic.iou_threshold < 1.0:
            raise ConfigurationError(
                f"iou_threshold has to be in (0, 1). Got: {basic.iou_threshold}"
            )
        if basic.input_format not in ("mf", "mot"):
            raise ConfigurationError(
                f"input_format has to be mf or mot. Got: {basic.input_format}"
            )
        for name in ("frame_width", "frame_height"):
            if getattr(basic, name) is not None and getattr(basic, name) < 1:
                raise ConfigurationError(
                    f"{name} has to be positive. Got: {getattr(basic, name)}"
                )
        if basic.features is not None:
            feature_preset(basic.features)

    # Saving the configuration file:
    def save(self: RunConfig, file_path: str) -> None:
        """Save the configuration in the flat `key = value` format.

        Args:
            file_path (str): Path to the configuration file.
        """
        lines = []
        for section in fields(self):
            lines.append(f"# {section.name}")
            for key, value in asdict(getattr(self, section.name)).items():
                lines.append(f"{key} = {_format(value)}")
            lines.append("")

        with open(file_path, "w") as file:
            file.write("\n".join(lines))


def _format(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def _coerce(text: str, annotation: Any, key: str) -> Any:
    """Convert a configuration string to the annotated field type."""
    text = text.strip()
    if get_origin(annotation) is Union:
        if text.lower() in NONE_VALUES:
            return None
        annotation = next(arg for arg in get_args(annotation) if arg is not type(None))

    if annotation is bool:
        if text.lower() in TRUE_VALUES:
            return True
        if text.lower() in FALSE_VALUES:
            return False
        raise ConfigurationError(f"{key} has to be true or false. Got: {text}")

    try:
        return annotation(text)
    except ValueError:
        raise ConfigurationError(
            f"{key} has to be of type {annotation.__name__}. Got: {text}"
        ) from None


def load_config(file_path: Optional[str] = None) -> RunConfig:
    """Read a flat `key = value` configuration file over the defaults.

    Blank lines and `#` comments are ignored. A `features` preset in the file is
    applied before the individual weights of the same file.

    Args:
        file_path (Optional[str]): configuration file, None for the defaults.

    Returns:
        RunConfig: the validated configuration.

    Raises:
        ConfigurationError: for malformed lines, unknown or repeated keys and values
            out of range.
    """
    config = RunConfig()
    if file_path is None:
        config.validate()
        return config

    entries: dict[str, tuple[int, str]] = {}
    with open(file_path) as file:
        for line_number, line in enumerate(file, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(
                    f"{file_path} line {line_number}: expected `key = value`, got: {line}"
                )
            key, value = (part.strip() for part in line.split("=", 1))
            key = KEY_ALIASES.get(key, key)
            if key in entries:
                raise ConfigurationError(
                    f"{file_path} line {line_number}: {key} is set more than once."
                )
            entries[key] = (line_number, value)

    if "features" in entries:
        _, preset = entries.pop("features")
        if preset.lower() not in NONE_VALUES:
            config.apply_features(preset)

    for key, (line_number, value) in entries.items():
        try:
            config.set_value(key, value)
        except ConfigurationError as error:
            raise ConfigurationError(f"{file_path} line {line_number}: {error}") from None

    config.validate()
    logger.info(f"Configuration read from {file_path} ({len(entries):,} keys).")
    return config
