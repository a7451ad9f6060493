"""Experiment configuration: flat ``key = value`` files and JSON round trips."""

import configparser
import dataclasses
import json
import math
from dataclasses import dataclass, field

from ..weight import AffineWeight, SmoothedRampWeight

EXPERIMENTS = ("one_soliton", "two_soliton", "rough_l2", "custom")
DT_MODES = ("cfl_three_halves", "dx_squared", "dx_linear")
INITIAL_PROFILES = ("one_soliton", "two_soliton", "rough_l2")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    x_left: float
    x_right: float
    M_list: list = field(default_factory=list)
    t_start_shift: float = 0.0
    t_final: float = 1.0
    weight_kind: str = "affine"
    weight_a: float = 50.0
    weight_b: float = 1.0
    weight_R: float = 5.0
    weight_width: float = 1.0
    dt_mode: str = "dx_squared"
    dt_c: float = 0.1
    cfl_safety: float = 0.9
    L: float = 0.5
    max_iterations: int = 50
    min_iterations: int = 1
    strict_cfl: bool = False
    R_window: float = 4.0
    quad_order: int = 6
    error_order: int = 10
    projection_order: int = 20
    soliton_a: float = 0.5
    soliton_b: float = 1.0
    initial: str = ""
    oracle_M: int = 0
    output_times: list = field(default_factory=list)
    output_dir: str = "out"
    seed: int = 0
    workers: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}; expected one of {EXPERIMENTS}")
        if self.name == "custom" and self.initial not in INITIAL_PROFILES:
            raise ConfigError(f"custom experiments need initial in {INITIAL_PROFILES}")
        if not self.x_right > self.x_left:
            raise ConfigError("x_right must exceed x_left")
        self.M_list = [int(m) for m in self.M_list]
        if any(b <= a for a, b in zip(self.M_list, self.M_list[1:])):
            raise ConfigError("M_list must be strictly increasing")
        if any(m < 4 for m in self.M_list):
            raise ConfigError("every entry of M_list must be >= 4")
        if not self.t_final > 0:
            raise ConfigError("t_final must be positive")
        if self.dt_mode not in DT_MODES:
            raise ConfigError(f"dt_mode must be one of {DT_MODES}")
        if not self.dt_c > 0:
            raise ConfigError("dt_c must be positive")
        if not 0 < self.L < 1:
            raise ConfigError("L must lie in (0, 1)")
        if self.weight_kind not in ("affine", "smoothed_ramp"):
            raise ConfigError("weight_kind must be affine or smoothed_ramp")
        if self.oracle_M and self.M_list and self.oracle_M < 4 * max(self.M_list):
            raise ConfigError("oracle_M must be at least 4 * max(M_list)")
        self.output_times = [float(t) for t in self.output_times]
        if any(not 0 <= t <= self.t_final for t in self.output_times):
            raise ConfigError("output_times must lie in [0, t_final]")

    @property
    def times(self) -> list:
        """Profile output times; an empty ``output_times`` means just t_final."""
        return self.output_times or [float(self.t_final)]

    @property
    def profile(self) -> str:
        return self.initial if self.name == "custom" else self.name

    @property
    def K(self) -> float:
        return (7.0 - self.L) / (1.0 - self.L)

    def weight(self):
        if self.weight_kind == "affine":
            return AffineWeight(self.weight_a, self.weight_b, self.x_left, self.x_right)
        return SmoothedRampWeight(self.weight_R, self.weight_width, self.x_left, self.x_right)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


DEFAULTS = {
    "one_soliton": dict(
        x_left=-10.0, x_right=10.0, M_list=[16, 32, 64, 128, 256, 512],
        t_start_shift=-1.0, t_final=2.0, R_window=5.0,
    ),
    "two_soliton": dict(
        x_left=-40.0, x_right=40.0, M_list=[64, 128, 256, 512],
        t_start_shift=-10.0, t_final=20.0, R_window=20.0,
    ),
    "rough_l2": dict(
        x_left=-5.0, x_right=5.0, M_list=[16, 32, 64, 128],
        t_start_shift=0.0, t_final=0.5, R_window=4.0, oracle_M=512,
    ),
}


def default_config(name: str, **overrides) -> ExperimentConfig:
    if name not in DEFAULTS:
        raise ConfigError(f"no defaults for experiment {name!r}")
    d = dict(DEFAULTS[name])
    d.update(overrides)
    return ExperimentConfig(name=name, **d)


def _coerce(f: dataclasses.Field, raw: str):
    raw = raw.strip()
    kind = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    if kind == "list":
        parts = [p for p in raw.replace(",", " ").split() if p]
        conv = int if f.name == "M_list" else float
        return [conv(p) for p in parts]
    if kind == "bool":
        low = raw.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"{f.name}: expected a boolean, got {raw!r}")
        return low in ("true", "1", "yes")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` lines (``#`` comments); unspecified keys take experiment defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    raw = dict(parser["config"])
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    lower = {k.lower(): k for k in fields}
    values = {}
    for key, val in raw.items():
        name = lower.get(key.lower())
        if name is None:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[name] = _coerce(fields[name], val)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    if "name" not in values:
        raise ConfigError("config must set name")
    base = dict(DEFAULTS.get(values["name"], {}))
    base.update(values)
    if "x_left" not in base or "x_right" not in base:
        raise ConfigError("config must set x_left and x_right")
    return ExperimentConfig.from_dict(base)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def config_from_json(text: str) -> ExperimentConfig:
    d = json.loads(text)
    return ExperimentConfig.from_dict(d["config"] if "config" in d else d)


def finite_or_none(x):
    return x if isinstance(x, (int, float)) and math.isfinite(x) else None
