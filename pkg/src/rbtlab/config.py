"""Run configuration: a versioned JSON document validated against a schema.

Every report embeds the configuration hash, so artifacts are diffable and a
run is a pure function of (config, seed).  All defaults equal the modeled
experiment's values: 10,000 shots in bins of 100, sequence lengths 1, 2, 3
plus the infinite-length surrogate, and 2,000 bootstrap replications.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .channels import (
    DEVICE_ASSIGNMENT_FIDELITY,
    DEVICE_GATE_TIME,
    DEVICE_T1,
    DEVICE_T2,
    NoiseModel,
    SpamModel,
)

__all__ = ["ConfigError", "RunConfig", "DEFAULT_CONFIG", "load_schema"]

DEFAULT_CONFIG = {
    "version": 1,
    "seed": 7,
    "target": {"name": "hadamard"},
    "noise": {
        "kind": "coherence_limited",
        "t1": DEVICE_T1,
        "t2": DEVICE_T2,
        "gate_time": DEVICE_GATE_TIME,
        "depolarizing": 0.995,
        "placement": "left",
    },
    "spam": {"assignment_fidelity": DEVICE_ASSIGNMENT_FIDELITY},
    "shots": 10_000,
    "bin_size": 100,
    "lengths": [1, 2, 3],
    "repeats": {"1": 12, "inf": 12},
    "bootstrap": {"replications": 2000, "samples_per_config": None},
    "qpt": {"enabled": True, "assumed_assignment_fidelity": DEVICE_ASSIGNMENT_FIDELITY},
    "witness": {"enabled": True, "variants": ["raw", "left", "right"]},
    "pulse_scan": {
        "duration": DEVICE_GATE_TIME,
        "sample_counts": [8, 16, 32, 64, 128],
        "anharmonicity_hz": -200e6,
        "levels": 5,
        "drag_coefficient": -0.5,
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` points at the offending field."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


def load_schema() -> dict:
    text = resources.files("rbtlab.data").joinpath("config.schema.json").read_text()
    return json.loads(text)


def _merge_defaults(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge_defaults(out[key], value)
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration with model-object accessors."""

    raw: dict

    @classmethod
    def from_dict(cls, data: dict, fill_defaults: bool = True) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        merged = _merge_defaults(DEFAULT_CONFIG, data) if fill_defaults else data
        validator = jsonschema.Draft202012Validator(load_schema())
        errors = sorted(validator.iter_errors(merged), key=lambda e: list(e.absolute_path))
        if errors:
            err = errors[0]
            raise ConfigError(err.message, path=err.json_path)
        if merged["shots"] % merged["bin_size"]:
            raise ConfigError("shots must be divisible by bin_size", path="$.shots")
        if merged["noise"]["t2"] > 2 * merged["noise"]["t1"]:
            raise ConfigError("t2 must not exceed 2*t1", path="$.noise.t2")
        return cls(raw=merged)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path) as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"not valid JSON ({exc})") from exc
        return cls.from_dict(data)

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    def target_spec(self):
        return self.raw["target"]

    def noise_model(self) -> NoiseModel:
        cfg = self.raw["noise"]
        if cfg["kind"] == "ideal":
            return NoiseModel.ideal()
        if cfg["kind"] == "depolarizing":
            return NoiseModel.depolarizing_model(
                cfg["depolarizing"], cfg["gate_time"], cfg["placement"]
            )
        return NoiseModel.coherence_limited(
            cfg["t1"], cfg["t2"], cfg["gate_time"], cfg["placement"]
        )

    def spam_model(self) -> SpamModel:
        return SpamModel.with_assignment_error(self.raw["spam"]["assignment_fidelity"])

    def lengths(self) -> tuple:
        return tuple(int(n) for n in self.raw["lengths"])

    def repeats(self) -> dict:
        out = {}
        for key, value in self.raw["repeats"].items():
            out[math.inf if key == "inf" else int(key)] = int(value)
        return out

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]
