"""Experiment log parsing, per-metric aggregation, and corpus loading.

Logs are single JSON documents with an explicit schema_version. Each metric
carries a list of raw samples; aggregation reduces them to one value per
metric (last sample for quality metrics, arithmetic mean for complexity and
resource metrics) and applies the top-5 fallback for methods that cannot
produce class probabilities.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .core import (
    EMISSIONS_KEY,
    EMISSIONS_METRIC,
    POWER_KEY,
    RUNTIME_KEY,
    TOP1_KEY,
    TOP5_KEY,
    Configuration,
    Environment,
    ExperimentRecord,
    MetricRegistry,
    default_registry,
    normalize_weights,
    validate_record,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Set by loggers when a method cannot emit class probabilities; allows
# reporting top-1 accuracy as the top-5 value (a tight lower bound).
NO_PROBABILITIES_FLAG = "no_probabilities"

_KNOWN_FIELDS = {"schema_version", "id", "configuration", "environment", "raw_measurements", "flags"}


class IngestError(ValueError):
    """Base class for log parsing and aggregation failures."""


class SchemaError(IngestError):
    """The document does not match the published log schema."""


class VersionError(IngestError):
    """The document declares a schema_version this toolkit does not support."""


class AggregationError(IngestError):
    """A required metric has no samples and no fallback applies."""

    def __init__(self, metric: str, message: str | None = None):
        self.metric = metric
        super().__init__(message or f"no samples for required metric '{metric}'")


class MissingMetricError(AggregationError):
    """top-5 accuracy is absent and the no-probabilities flag is not set."""


class CorpusEmptyError(IngestError):
    """No experiment records could be loaded from the given paths."""

    def __init__(self, message: str, errors: list[tuple[str, Exception]] | None = None):
        self.errors = errors or []
        super().__init__(message)


@dataclass(frozen=True)
class Sample:
    """One raw measurement sample with an optional capture timestamp."""

    value: float
    timestamp: float | None = None


@dataclass(frozen=True)
class LogDocument:
    """A parsed experiment log; unknown top-level fields survive in ``extra``."""

    schema_version: int
    experiment_id: str
    configuration: Configuration
    environment: Environment
    raw_measurements: dict[str, tuple[Sample, ...]]
    flags: frozenset[str] = frozenset()
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "flags", frozenset(self.flags))
        object.__setattr__(
            self, "raw_measurements", {k: tuple(v) for k, v in self.raw_measurements.items()}
        )


def _require(data: dict, key: str, kind, where: str):
    value = data.get(key)
    if not isinstance(value, kind) or (kind is str and not value):
        raise SchemaError(f"{where}: missing or invalid field '{key}'")
    return value


def _number(value, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise SchemaError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def parse_log(data: bytes | str) -> LogDocument:
    """Parse one log document. Unknown extra fields are preserved but ignored."""
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("log document must be a JSON object")

    version = doc.get("schema_version")
    if not isinstance(version, int) or isinstance(version, bool):
        raise SchemaError("missing or invalid field 'schema_version'")
    if version != SCHEMA_VERSION:
        raise VersionError(f"unsupported schema_version {version} (supported: {SCHEMA_VERSION})")

    experiment_id = _require(doc, "id", str, "log")

    raw_config = _require(doc, "configuration", dict, "log")
    size = raw_config.get("dataset_size")
    if size is not None and (not isinstance(size, int) or isinstance(size, bool) or size <= 0):
        raise SchemaError("configuration.dataset_size must be a positive integer")
    hyper = raw_config.get("hyperparameters", {})
    if not isinstance(hyper, dict):
        raise SchemaError("configuration.hyperparameters must be an object")
    try:
        configuration = Configuration(
            task=_require(raw_config, "task", str, "configuration"),
            dataset=_require(raw_config, "dataset", str, "configuration"),
            method=_require(raw_config, "method", str, "configuration"),
            hyperparameters=hyper,
            dataset_size=size,
        )
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc

    raw_env = _require(doc, "environment", dict, "log")
    mix = raw_env.get("energy_mix")
    try:
        environment = Environment(
            id=_require(raw_env, "id", str, "environment"),
            hardware=raw_env.get("hardware", ""),
            software=raw_env.get("software", ""),
            energy_mix=_number(mix, "environment.energy_mix") if mix is not None else None,
        )
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc

    raw_measurements = _require(doc, "raw_measurements", dict, "log")
    measurements: dict[str, tuple[Sample, ...]] = {}
    for key, samples in raw_measurements.items():
        if not isinstance(samples, list) or not samples:
            raise SchemaError(f"raw_measurements['{key}'] must be a non-empty list of samples")
        parsed = []
        for i, s in enumerate(samples):
            where = f"raw_measurements['{key}'][{i}]"
            if not isinstance(s, dict) or "value" not in s:
                raise SchemaError(f"{where}: expected an object with a 'value' field")
            ts = s.get("timestamp")
            parsed.append(
                Sample(
                    value=_number(s["value"], where),
                    timestamp=_number(ts, f"{where}.timestamp") if ts is not None else None,
                )
            )
        measurements[key] = tuple(parsed)

    flags = doc.get("flags", [])
    if not isinstance(flags, list) or not all(isinstance(f, str) for f in flags):
        raise SchemaError("flags must be a list of strings")

    extra = {k: v for k, v in doc.items() if k not in _KNOWN_FIELDS}
    return LogDocument(
        schema_version=version,
        experiment_id=experiment_id,
        configuration=configuration,
        environment=environment,
        raw_measurements=measurements,
        flags=frozenset(flags),
        extra=extra,
    )


def serialize_log(doc: LogDocument) -> bytes:
    """Serialize a LogDocument; parse(serialize(doc)) == doc."""
    config: dict = {
        "task": doc.configuration.task,
        "dataset": doc.configuration.dataset,
        "method": doc.configuration.method,
        "hyperparameters": doc.configuration.hyperparameters,
    }
    if doc.configuration.dataset_size is not None:
        config["dataset_size"] = doc.configuration.dataset_size
    env: dict = {
        "id": doc.environment.id,
        "hardware": doc.environment.hardware,
        "software": doc.environment.software,
    }
    if doc.environment.energy_mix is not None:
        env["energy_mix"] = doc.environment.energy_mix
    measurements = {
        key: [
            {"value": s.value} if s.timestamp is None else {"value": s.value, "timestamp": s.timestamp}
            for s in samples
        ]
        for key, samples in doc.raw_measurements.items()
    }
    out = {
        "schema_version": doc.schema_version,
        "id": doc.experiment_id,
        "configuration": config,
        "environment": env,
        "raw_measurements": measurements,
        "flags": sorted(doc.flags),
    }
    for key in sorted(doc.extra):
        out[key] = doc.extra[key]
    return (json.dumps(out, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def aggregate(doc: LogDocument, registry: MetricRegistry) -> ExperimentRecord:
    """Reduce raw samples to one value per metric and validate the result.

    Quality metrics take their last sample (the final evaluation); all other
    metrics take the arithmetic mean over their sampling windows.
    """
    values: dict[str, float] = {}
    for metric in registry:
        samples = doc.raw_measurements.get(metric.key)
        if not samples:
            continue
        if metric.group == "quality":
            values[metric.key] = samples[-1].value
        else:
            values[metric.key] = math.fsum(s.value for s in samples) / len(samples)
    for key, samples in doc.raw_measurements.items():
        if registry.get(key) is None:
            # kept so validation reports the unknown key instead of dropping data
            values[key] = math.fsum(s.value for s in samples) / len(samples)

    record = ExperimentRecord(
        id=doc.experiment_id,
        configuration=doc.configuration,
        environment=doc.environment,
        values=values,
        flags=doc.flags,
    )

    top5 = registry.get(TOP5_KEY)
    if top5 is not None and not top5.optional:
        record = apply_top5_fallback(record)
    for metric in registry:
        if not metric.optional and metric.key not in record.values:
            raise AggregationError(metric.key)
    return validate_record(record, registry)


def apply_top5_fallback(record: ExperimentRecord) -> ExperimentRecord:
    """Fill a missing top-5 accuracy with the top-1 value when flagged.

    Only fires when the record carries the no-probabilities flag; a missing
    top-5 without the flag is an error rather than a silent fallback.
    """
    if TOP5_KEY in record.values:
        return record
    if NO_PROBABILITIES_FLAG not in record.flags:
        raise MissingMetricError(
            TOP5_KEY,
            f"record '{record.id}': {TOP5_KEY} missing and flag "
            f"'{NO_PROBABILITIES_FLAG}' not set",
        )
    top1 = record.values.get(TOP1_KEY)
    if top1 is None:
        return record
    return replace(record, values={**record.values, TOP5_KEY: top1})


def derive_emissions(record: ExperimentRecord, environment: Environment | None = None) -> ExperimentRecord:
    """Attach derived CO2 grams when the environment declares an energy mix.

    emissions_g = power_draw [W] x running_time [s] / 3.6e6 x energy_mix
    [gCO2/kWh]. No-op when the mix is absent, inputs are missing, or the
    record already carries a measured emissions value.
    """
    env = environment if environment is not None else record.environment
    if env.energy_mix is None or EMISSIONS_KEY in record.values:
        return record
    power = record.values.get(POWER_KEY)
    seconds = record.values.get(RUNTIME_KEY)
    if power is None or seconds is None:
        return record
    grams = power * seconds / 3.6e6 * env.energy_mix
    return replace(record, values={**record.values, EMISSIONS_KEY: grams})


def ensure_emissions_metric(registry: MetricRegistry) -> MetricRegistry:
    """Registry extended with the display-only emissions metric, if absent."""
    if registry.get(EMISSIONS_KEY) is not None:
        return registry
    return MetricRegistry(registry.metrics + (EMISSIONS_METRIC,))


def _log_files(paths) -> list[Path]:
    files: list[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            files.extend(p for p in path.rglob("*.json") if p.is_file())
        else:
            files.append(path)
    return sorted(set(files), key=str)


def load_corpus(paths, registry: MetricRegistry | None = None, *, derive: bool = True) -> list[ExperimentRecord]:
    """Load, aggregate, and validate every log under the given paths.

    Directories are scanned recursively for .json files in sorted order.
    Records sharing an experiment id resolve last-parsed-wins with a
    warning; per-file failures are logged and only an entirely empty result
    is an error. Output is sorted by (dataset, method, environment, id).
    """
    registry = normalize_weights(registry if registry is not None else default_registry())
    if derive:
        registry = ensure_emissions_metric(registry)
    files = _log_files(paths)
    records: dict[str, ExperimentRecord] = {}
    errors: list[tuple[str, Exception]] = []
    for path in files:
        try:
            doc = parse_log(path.read_bytes())
            record = aggregate(doc, registry)
            if derive:
                record = derive_emissions(record)
        except (IngestError, ValueError, OSError) as exc:
            logger.warning("skipping %s: %s", path, exc)
            errors.append((str(path), exc))
            continue
        if record.id in records:
            logger.warning("duplicate experiment id '%s': %s overrides an earlier log", record.id, path)
        records[record.id] = record
    if not records:
        where = ", ".join(str(p) for p in paths)
        raise CorpusEmptyError(f"no experiment records loaded from {where}", errors)
    ordered = sorted(
        records.values(),
        key=lambda r: (r.configuration.dataset, r.configuration.method, r.environment.id, r.id),
    )
    return ordered
