"""Experiment configuration: a YAML document with nested sections.

Everything that influences results lives in the file.  Environment variables
may override only the output directory (``GVCSIM_OUT_DIR``) and the log level
(``GVCSIM_LOG_LEVEL``).
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .controller import make_controller, make_levels
from .simulator import PredictiveConfig
from .traces import BandwidthBand, TraceError, load_trace

ENV_OUT_DIR = "GVCSIM_OUT_DIR"
ENV_LOG_LEVEL = "GVCSIM_LOG_LEVEL"

# Tuned so the default comparison separates the controllers: higher levels
# cost more generation time and more bits.
DEFAULT_QUALITY = [1.0, 2.0, 3.0, 4.0, 5.0]
DEFAULT_GEN_DELAY = [0.1, 0.2, 0.3, 0.5, 0.8]
DEFAULT_BITRATE = [0.3, 0.7, 1.2, 2.0, 3.2]

DEFAULTS = {
    "seed": 0,
    "num_chunks": 200,
    "repetitions": 20,
    "jobs": 1,
    "output_dir": "out",
    "session": {"chunk_duration": 1.0, "b_max": 4.0},
    "levels": {
        "quality": DEFAULT_QUALITY,
        "gen_delay": DEFAULT_GEN_DELAY,
        "bitrate": DEFAULT_BITRATE,
    },
    "trace": {
        "source": "synth",
        "band": "Medium",
        "bands": ["Low", "Medium", "High"],
        "duration": 300.0,
        "step": 1.0,
        "path": None,
    },
    "predictive": {"enabled": False, "horizon": 0.0, "hit_prob": 0.0},
    "controllers": [
        {"type": "Proposed", "gamma": 1.0, "beta": 0.05, "lambda_init": 1.0},
        {"type": "BB", "reservoir": 0.5, "cushion": 0.5},
        {"type": "FBR", "level": 1},
    ],
}

CONTROLLER_KEYS = {
    "proposed": {"gamma", "beta", "lambda_init"},
    "bb": {"reservoir", "cushion"},
    "fbr": {"level"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(where, "unknown key")
        if isinstance(base[key], dict) and value is not None:
            if not isinstance(value, dict):
                raise ConfigError(where, "expected a section")
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass
class ControllerSpec:
    type: str
    params: dict
    label: str

    def build(self):
        return make_controller(self.type, **self.params)

    def to_mapping(self):
        out = {"type": self.type}
        if self.label != self.type:
            out["label"] = self.label
        out.update(self.params)
        return out


@dataclass
class ExperimentConfig:
    seed: int
    num_chunks: int
    repetitions: int
    jobs: int
    output_dir: str
    chunk_duration: float
    b_max: float
    levels: list
    trace: dict
    predictive: PredictiveConfig | None
    controllers: list = field(default_factory=list)
    raw: dict = field(default_factory=dict, repr=False)
    base_dir: Path = field(default=Path("."), repr=False)

    @property
    def band(self):
        return BandwidthBand.from_name(self.trace["band"])

    @property
    def bands(self):
        return [BandwidthBand.from_name(b) for b in self.trace["bands"]]

    def trace_path(self):
        path = Path(self.trace["path"])
        return path if path.is_absolute() else self.base_dir / path

    def to_mapping(self):
        return copy.deepcopy(self.raw)

    def dump(self):
        return yaml.safe_dump(self.to_mapping(), sort_keys=False)


def _num(value, where, *, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if integer and not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(where, f"must be > 0, got {value}")
    if nonneg and not value >= 0:
        raise ConfigError(where, f"must be >= 0, got {value}")
    return value


def from_mapping(data, base_dir="."):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a mapping")
    raw = _merge(DEFAULTS, data)

    _num(raw["seed"], "seed", integer=True)
    _num(raw["num_chunks"], "num_chunks", integer=True, positive=True)
    _num(raw["repetitions"], "repetitions", integer=True, positive=True)
    _num(raw["jobs"], "jobs", integer=True, positive=True)
    if not isinstance(raw["output_dir"], str) or not raw["output_dir"]:
        raise ConfigError("output_dir", "expected a non-empty string")
    session = raw["session"]
    _num(session["chunk_duration"], "session.chunk_duration", positive=True)
    _num(session["b_max"], "session.b_max", positive=True)

    lv = raw["levels"]
    try:
        for key in ("quality", "gen_delay", "bitrate"):
            if not isinstance(lv[key], list):
                raise ConfigError(f"levels.{key}", "expected a list")
        levels = make_levels(lv["quality"], lv["gen_delay"], lv["bitrate"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("levels", str(exc)) from None

    tr = raw["trace"]
    if tr["source"] not in ("synth", "file"):
        raise ConfigError("trace.source", f"expected 'synth' or 'file', got {tr['source']!r}")
    try:
        BandwidthBand.from_name(tr["band"])
    except ValueError as exc:
        raise ConfigError("trace.band", str(exc)) from None
    if not isinstance(tr["bands"], list) or not tr["bands"]:
        raise ConfigError("trace.bands", "expected a non-empty list")
    for i, b in enumerate(tr["bands"]):
        try:
            BandwidthBand.from_name(b)
        except ValueError as exc:
            raise ConfigError(f"trace.bands[{i}]", str(exc)) from None
    _num(tr["duration"], "trace.duration", positive=True)
    _num(tr["step"], "trace.step", positive=True)
    base_dir = Path(base_dir)
    if tr["source"] == "file":
        if not tr["path"]:
            raise ConfigError("trace.path", "required when trace.source is 'file'")
        p = Path(tr["path"])
        p = p if p.is_absolute() else base_dir / p
        if not p.is_file():
            raise ConfigError("trace.path", f"file not found: {tr['path']}")
        try:
            trace = load_trace(p)
        except TraceError as exc:
            raise ConfigError("trace.path", f"{tr['path']}: {exc}") from None
        if raw["num_chunks"] * session["chunk_duration"] > trace.duration:
            raise ConfigError(
                "num_chunks",
                f"num_chunks * chunk_duration exceeds the trace duration ({trace.duration})",
            )
    elif tr["source"] == "synth":
        if raw["num_chunks"] * session["chunk_duration"] > tr["duration"]:
            raise ConfigError(
                "num_chunks",
                f"num_chunks * chunk_duration exceeds trace.duration ({tr['duration']})",
            )

    pr = raw["predictive"]
    predictive = None
    if not isinstance(pr["enabled"], bool):
        raise ConfigError("predictive.enabled", "expected true or false")
    if pr["enabled"]:
        _num(pr["horizon"], "predictive.horizon", nonneg=True)
        _num(pr["hit_prob"], "predictive.hit_prob", nonneg=True)
        if pr["hit_prob"] > 1:
            raise ConfigError("predictive.hit_prob", f"must be in [0, 1], got {pr['hit_prob']}")
        predictive = PredictiveConfig(float(pr["horizon"]), float(pr["hit_prob"]))

    if not isinstance(raw["controllers"], list) or not raw["controllers"]:
        raise ConfigError("controllers", "expected a non-empty list")
    specs = []
    for i, entry in enumerate(raw["controllers"]):
        where = f"controllers[{i}]"
        if not isinstance(entry, dict) or "type" not in entry:
            raise ConfigError(where, "each controller needs a 'type'")
        entry = dict(entry)
        kind = str(entry.pop("type"))
        label = str(entry.pop("label", kind))
        allowed = CONTROLLER_KEYS.get(kind.lower())
        if allowed is None:
            raise ConfigError(f"{where}.type", f"unknown controller {kind!r}; expected Proposed, BB or FBR")
        for key in entry:
            if key not in allowed:
                raise ConfigError(f"{where}.{key}", "unknown key")
        spec = ControllerSpec(kind, entry, label)
        try:
            ctrl = spec.build()
            ctrl.start(levels, session["b_max"])
        except (TypeError, ValueError) as exc:
            field_name = _controller_field(kind, str(exc))
            raise ConfigError(f"{where}.{field_name}" if field_name else where, str(exc)) from None
        specs.append(spec)
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError("controllers", f"controller labels must be unique, got {labels}; add 'label' keys")

    return ExperimentConfig(
        seed=raw["seed"],
        num_chunks=raw["num_chunks"],
        repetitions=raw["repetitions"],
        jobs=raw["jobs"],
        output_dir=raw["output_dir"],
        chunk_duration=float(session["chunk_duration"]),
        b_max=float(session["b_max"]),
        levels=levels,
        trace=tr,
        predictive=predictive,
        controllers=specs,
        raw=raw,
        base_dir=base_dir,
    )


def _controller_field(kind, message):
    if kind.lower() == "bb" and "exceeds b_max" in message:
        return "reservoir+cushion"
    for key in sorted(CONTROLLER_KEYS[kind.lower()]):
        if key in message:
            return key
    return None


def load_config(path):
    """Parse and validate a config file.  Raises ``FileNotFoundError`` or
    :class:`ConfigError`."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    return from_mapping(data, base_dir=path.parent)


def resolve_output_dir(cfg, cli_out=None):
    return Path(cli_out or os.environ.get(ENV_OUT_DIR) or cfg.output_dir)
