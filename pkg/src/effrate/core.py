"""Core domain model: metric registry, experiments, and record validation.

An experiment couples a configuration (task, dataset, method) with the
environment it ran in, plus one measured value per metric. The registry
fixes each metric's group, direction (+1 when higher values are better,
-1 when lower values are better), and its weight in the compound rating.
All types are immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

GROUPS = ("quality", "complexity", "resources")

GROUP_SUM_TOLERANCE = 1e-9

# Registry keys with special handling elsewhere in the pipeline.
TOP1_KEY = "top1_accuracy"
TOP5_KEY = "top5_accuracy"
F1_KEY = "f1_score"
POWER_KEY = "power_draw"
RUNTIME_KEY = "running_time"
EMISSIONS_KEY = "emissions_g"


class RegistryError(ValueError):
    """Malformed metric definition, registry, or weight configuration."""


class EmptyGroupError(RegistryError):
    """A metric group carries no weight, so it cannot be normalized."""


class UnknownMetricError(LookupError):
    """A metric key was requested that the registry does not define."""


@dataclass(frozen=True)
class Violation:
    """One record-validation failure, carrying the offending key and value."""

    code: str
    metric: str
    value: float | None
    message: str

    def __str__(self) -> str:
        return f"{self.metric}: {self.message}"


class RecordValidationError(ValueError):
    """Raised when an experiment record violates registry invariants."""

    def __init__(self, record_id: str, violations: list[Violation]):
        self.record_id = record_id
        self.violations = violations
        detail = "; ".join(str(v) for v in violations)
        super().__init__(f"invalid record '{record_id}': {detail}")


@dataclass(frozen=True)
class MetricDefinition:
    """One efficiency metric: key, group, direction, unit, and raw weight.

    ``direction`` is +1 when higher measured values are better (accuracy)
    and -1 when lower values are better (power draw). ``weight`` 0 marks a
    display-only metric that never enters the compound rating.
    """

    key: str
    display_name: str
    group: str
    direction: int
    unit: str = ""
    weight: float = 1.0
    optional: bool = False

    def __post_init__(self):
        if not self.key or not self.key.isidentifier():
            raise RegistryError(f"metric key must be an identifier: {self.key!r}")
        if self.group not in GROUPS:
            raise RegistryError(
                f"metric '{self.key}': group must be one of {GROUPS}, got {self.group!r}"
            )
        if self.direction not in (1, -1):
            raise RegistryError(
                f"metric '{self.key}': direction must be +1 or -1, got {self.direction!r}"
            )
        if not isinstance(self.weight, (int, float)) or not math.isfinite(self.weight):
            raise RegistryError(f"metric '{self.key}': weight must be finite")
        if self.weight < 0:
            raise RegistryError(f"metric '{self.key}': weight must be >= 0")

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "display_name": self.display_name,
            "group": self.group,
            "direction": self.direction,
            "unit": self.unit,
            "weight": self.weight,
            "optional": self.optional,
        }

    @staticmethod
    def from_dict(data: dict) -> MetricDefinition:
        try:
            return MetricDefinition(
                key=data["key"],
                display_name=data.get("display_name", data["key"]),
                group=data["group"],
                direction=data["direction"],
                unit=data.get("unit", ""),
                weight=data.get("weight", 1.0),
                optional=data.get("optional", False),
            )
        except KeyError as exc:
            raise RegistryError(f"metric definition missing field {exc}") from exc


@dataclass(frozen=True)
class MetricRegistry:
    """Ordered, immutable collection of metric definitions with unique keys."""

    metrics: tuple[MetricDefinition, ...]

    def __post_init__(self):
        object.__setattr__(self, "metrics", tuple(self.metrics))
        seen = set()
        for m in self.metrics:
            if m.key in seen:
                raise RegistryError(f"duplicate metric key '{m.key}'")
            seen.add(m.key)

    def __iter__(self):
        return iter(self.metrics)

    def __len__(self) -> int:
        return len(self.metrics)

    def keys(self) -> tuple[str, ...]:
        return tuple(m.key for m in self.metrics)

    def get(self, key: str) -> MetricDefinition | None:
        for m in self.metrics:
            if m.key == key:
                return m
        return None

    def __getitem__(self, key: str) -> MetricDefinition:
        metric = self.get(key)
        if metric is None:
            raise UnknownMetricError(key)
        return metric

    def groups(self) -> dict[str, tuple[MetricDefinition, ...]]:
        """Group membership in first-seen order."""
        out: dict[str, list[MetricDefinition]] = {}
        for m in self.metrics:
            out.setdefault(m.group, []).append(m)
        return {g: tuple(ms) for g, ms in out.items()}

    def highest_weighted(self) -> MetricDefinition:
        """The unique metric with the globally highest weight."""
        top = max(m.weight for m in self.metrics)
        winners = [m for m in self.metrics if m.weight == top]
        if len(winners) != 1:
            keys = ", ".join(m.key for m in winners)
            raise RegistryError(f"multiple metrics share the highest weight: {keys}")
        return winners[0]

    def to_dict(self) -> dict:
        return {"metrics": [m.to_dict() for m in self.metrics]}

    @staticmethod
    def from_dict(data: dict) -> MetricRegistry:
        metrics = data.get("metrics")
        if not isinstance(metrics, list) or not metrics:
            raise RegistryError("registry document must contain a non-empty 'metrics' list")
        return MetricRegistry(tuple(MetricDefinition.from_dict(m) for m in metrics))


_DEFAULT_METRICS = (
    MetricDefinition(TOP1_KEY, "Top-1 Accuracy", "quality", 1, "", 0.4),
    MetricDefinition(TOP5_KEY, "Top-5 Accuracy", "quality", 1, "", 0.2),
    MetricDefinition(F1_KEY, "F1 Score", "quality", 1, "", 0.4),
    MetricDefinition("flops", "FLOPs", "complexity", -1, "FLOP", 0.5),
    MetricDefinition("parameters", "Parameters", "complexity", -1, "", 0.25),
    MetricDefinition("model_size_bytes", "Model Size", "complexity", -1, "B", 0.25),
    MetricDefinition(POWER_KEY, "Power Draw", "resources", -1, "W", 0.7),
    MetricDefinition(RUNTIME_KEY, "Running Time", "resources", -1, "s", 0.3),
)

# Display-only by default: derived from power_draw x running_time and the
# environment's energy mix, excluded from the compound rating via weight 0.
EMISSIONS_METRIC = MetricDefinition(
    EMISSIONS_KEY, "CO2 Emissions", "resources", -1, "g", 0.0, optional=True
)


def default_registry() -> MetricRegistry:
    """The built-in eight-metric registry with per-group normalized weights."""
    return normalize_weights(MetricRegistry(_DEFAULT_METRICS))


def normalize_weights(registry: MetricRegistry) -> MetricRegistry:
    """Divide each weight by its group's raw sum so every group sums to one.

    Groups already summing to one (within 1e-12) are left untouched, which
    makes normalization exactly idempotent. Zero-weight metrics stay zero.
    """
    totals: dict[str, float] = {}
    for group, members in registry.groups().items():
        total = math.fsum(m.weight for m in members)
        if total <= 0:
            raise EmptyGroupError(f"group '{group}' has no weight to normalize")
        totals[group] = total
    normalized = []
    for m in registry:
        total = totals[m.group]
        if abs(total - 1.0) <= 1e-12:
            normalized.append(m)
        else:
            normalized.append(replace(m, weight=m.weight / total))
    return MetricRegistry(tuple(normalized))


def override_weights(registry: MetricRegistry, overrides: dict[str, float]) -> MetricRegistry:
    """Replace raw weights by key and renormalize. Overrides must be > 0."""
    for key, value in overrides.items():
        if registry.get(key) is None:
            raise UnknownMetricError(key)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise RegistryError(f"weight for '{key}' must be a number")
        if not math.isfinite(value) or value <= 0:
            raise RegistryError(f"weight for '{key}' must be a positive finite number")
    replaced = tuple(
        replace(m, weight=float(overrides[m.key])) if m.key in overrides else m
        for m in registry
    )
    return normalize_weights(MetricRegistry(replaced))


def load_registry_file(path: str | Path) -> MetricRegistry:
    """Load a metric registry from a JSON config file and normalize it."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise RegistryError(f"cannot read registry file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RegistryError(f"registry file {path} is not valid JSON: {exc}") from exc
    return normalize_weights(MetricRegistry.from_dict(data))


@dataclass(frozen=True)
class Configuration:
    """What was run: task, dataset, and method, plus display-only hyperparameters."""

    task: str
    dataset: str
    method: str
    hyperparameters: dict = field(default_factory=dict)
    dataset_size: int | None = None

    def __post_init__(self):
        for name in ("task", "dataset", "method"):
            if not getattr(self, name):
                raise ValueError(f"configuration field '{name}' must be non-empty")
        if self.dataset_size is not None and self.dataset_size <= 0:
            raise ValueError("dataset_size must be positive when present")


@dataclass(frozen=True)
class Environment:
    """Where it ran. References are only valid within one environment."""

    id: str
    hardware: str = ""
    software: str = ""
    energy_mix: float | None = None  # grid carbon intensity, gCO2/kWh

    def __post_init__(self):
        if not self.id:
            raise ValueError("environment id must be non-empty")
        if self.energy_mix is not None and (
            not math.isfinite(self.energy_mix) or self.energy_mix < 0
        ):
            raise ValueError("energy_mix must be >= 0 when present")


@dataclass(frozen=True)
class ExperimentRecord:
    """One configuration x environment run with one value per metric key."""

    id: str
    configuration: Configuration
    environment: Environment
    values: dict[str, float]
    flags: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValueError("experiment id must be non-empty")
        object.__setattr__(self, "values", dict(self.values))
        object.__setattr__(self, "flags", frozenset(self.flags))

    @property
    def group_key(self) -> tuple[str, str, str]:
        """The comparison group this record belongs to."""
        return (self.configuration.task, self.configuration.dataset, self.environment.id)


def record_violations(record: ExperimentRecord, registry: MetricRegistry) -> list[Violation]:
    """Collect all registry-invariant violations for one record."""
    violations = []
    for key, value in record.values.items():
        if registry.get(key) is None:
            violations.append(Violation("unknown_metric", key, value, "unknown metric"))
        elif not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            violations.append(Violation("non_finite_value", key, None, f"non-finite value {value!r}"))
        elif value <= 0:
            violations.append(
                Violation("non_positive_value", key, value, f"non-positive value {value!r}")
            )
    for metric in registry:
        if not metric.optional and metric.key not in record.values:
            violations.append(
                Violation("missing_metric", metric.key, None, "missing required metric")
            )
    return violations


def validate_record(record: ExperimentRecord, registry: MetricRegistry) -> ExperimentRecord:
    """Return the record unchanged, or raise with the full violation list."""
    violations = record_violations(record, registry)
    if violations:
        raise RecordValidationError(record.id, violations)
    return record
