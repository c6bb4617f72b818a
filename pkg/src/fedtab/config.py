"""Experiment configuration: dataclasses plus YAML loading and validation.

A configuration names which datasets, models, conditions, round budgets and
seeds make up a run.  Every field has a sensible default, so an empty file
(or none at all) reproduces the full benchmark grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import InvalidConfigError
from .models import DEFAULT_TRAIN_CONFIGS, MODEL_KINDS, TrainConfig

CONDITIONS = ("central_clean", "central_poisoned", "fl_clean", "fl_poisoned")
OUTPUT_FORMATS = ("delimited", "structured", "human")
FL_AVERAGING = ("final", "per_round")


@dataclass(frozen=True)
class OutputConfig:
    path: str | None = None
    format: str = "delimited"
    round_log: str | None = None

    def __post_init__(self) -> None:
        if self.format not in OUTPUT_FORMATS:
            raise InvalidConfigError(
                f"unknown output format {self.format!r}; expected one of {OUTPUT_FORMATS}"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...] = ("A", "B")
    data_dir: str = "data"
    models: tuple[str, ...] = MODEL_KINDS
    conditions: tuple[str, ...] = CONDITIONS
    round_budgets: tuple[int, ...] = (2, 4, 6, 8, 10)
    n_clients: int = 3
    test_fraction: float = 0.2
    epoch_budget: int = 300
    flip_fraction: float = 0.5
    malicious_clients: tuple[int, ...] = (0,)
    attack_seed: int = 0
    seeds: tuple[int, ...] = (0,)
    fl_average: str = "final"
    train_overrides: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    output: OutputConfig = OutputConfig()

    def __post_init__(self) -> None:
        if not self.datasets:
            raise InvalidConfigError("at least one dataset is required")
        if not self.models:
            raise InvalidConfigError("at least one model is required")
        for m in self.models:
            if m not in MODEL_KINDS:
                raise InvalidConfigError(f"unknown model {m!r}; expected one of {MODEL_KINDS}")
        if not self.conditions:
            raise InvalidConfigError("at least one condition is required")
        for c in self.conditions:
            if c not in CONDITIONS:
                raise InvalidConfigError(f"unknown condition {c!r}; expected one of {CONDITIONS}")
        if not self.round_budgets or any(r < 1 for r in self.round_budgets):
            raise InvalidConfigError("round_budgets must be non-empty positive integers")
        if len(set(self.round_budgets)) != len(self.round_budgets):
            raise InvalidConfigError("round_budgets must be unique")
        if not self.seeds:
            raise InvalidConfigError("at least one seed is required")
        if self.n_clients < 1:
            raise InvalidConfigError(f"n_clients must be at least 1, got {self.n_clients}")
        if not 0.0 < self.test_fraction < 1.0:
            raise InvalidConfigError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if self.epoch_budget < 1:
            raise InvalidConfigError(f"epoch_budget must be at least 1, got {self.epoch_budget}")
        if not 0.0 <= self.flip_fraction <= 1.0:
            raise InvalidConfigError(f"flip_fraction must lie in [0, 1], got {self.flip_fraction}")
        for c in self.malicious_clients:
            if not 0 <= c < self.n_clients:
                raise InvalidConfigError(f"malicious client {c} outside [0, {self.n_clients})")
        if self.fl_average not in FL_AVERAGING:
            raise InvalidConfigError(
                f"unknown fl_average {self.fl_average!r}; expected one of {FL_AVERAGING}"
            )
        for model, overrides in self.train_overrides.items():
            if model not in MODEL_KINDS:
                raise InvalidConfigError(f"train_overrides for unknown model {model!r}")
            self._merged_train_config(model, overrides)  # raises on bad fields

    @staticmethod
    def _merged_train_config(model: str, overrides: Mapping[str, Any]) -> TrainConfig:
        base = DEFAULT_TRAIN_CONFIGS[model]
        known = {f.name for f in fields(TrainConfig)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise InvalidConfigError(f"unknown train_overrides fields for {model!r}: {unknown}")
        return replace(base, **dict(overrides))

    def train_config(self, model: str) -> TrainConfig:
        """Per-model hyperparameters: package defaults plus any overrides."""
        overrides = self.train_overrides.get(model, {})
        return self._merged_train_config(model, overrides)


def _require(mapping: dict, key: str, kinds, where: str):
    value = mapping.pop(key)
    if not isinstance(value, kinds):
        raise InvalidConfigError(f"{where}: field {key!r} has wrong type {type(value).__name__}")
    return value


def _as_tuple(value, where: str) -> tuple:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    raise InvalidConfigError(f"{where} must be a list")


def config_from_dict(payload: Mapping[str, Any] | None, where: str = "config") -> ExperimentConfig:
    """Build a validated ExperimentConfig; unknown keys are hard errors."""
    data = dict(payload or {})
    kwargs: dict[str, Any] = {}

    list_fields = ("datasets", "models", "conditions", "round_budgets", "seeds", "malicious_clients")
    for name in list_fields:
        if name in data:
            kwargs[name] = _as_tuple(data.pop(name), f"{where}.{name}")
    scalar_fields = {
        "data_dir": str,
        "n_clients": int,
        "test_fraction": (int, float),
        "epoch_budget": int,
        "flip_fraction": (int, float),
        "attack_seed": int,
        "fl_average": str,
    }
    for name, kinds in scalar_fields.items():
        if name in data:
            kwargs[name] = _require(data, name, kinds, where)
    if "train_overrides" in data:
        overrides = data.pop("train_overrides")
        if not isinstance(overrides, dict):
            raise InvalidConfigError(f"{where}.train_overrides must be a mapping")
        kwargs["train_overrides"] = overrides
    if "output" in data:
        out = data.pop("output")
        if not isinstance(out, dict):
            raise InvalidConfigError(f"{where}.output must be a mapping")
        known = {"path", "format", "round_log"}
        unknown = sorted(set(out) - known)
        if unknown:
            raise InvalidConfigError(f"{where}.output has unknown fields: {unknown}")
        kwargs["output"] = OutputConfig(**out)
    if data:
        raise InvalidConfigError(f"{where} has unknown fields: {sorted(data)}")
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a YAML experiment configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InvalidConfigError(f"config file not found: {path}") from None
    try:
        payload = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise InvalidConfigError(f"{path}: invalid YAML: {err}") from None
    if payload is None:
        payload = {}
    if not isinstance(payload, dict):
        raise InvalidConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(payload, where=str(path))
