"""Reference-relative index scores, five-bin letter ratings, and compound ratings.

Every metric value is projected onto a relative index against a reference
experiment measured in the same environment: index = (value / reference) **
direction, so an index above 1 always means better than the reference. The
index scale is split into five bins mapped to letters A (best) through E,
and the per-metric letters collapse into one compound rating via a lower
weighted median.
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass, field

from .core import (
    ExperimentRecord,
    MetricRegistry,
    default_registry,
    normalize_weights,
)

# Multiplicatively symmetric around 1, so inverting a metric's direction
# maps bin A to E and B to D exactly, and the reference sits mid-C.
DEFAULT_BINS = (1.5, 1.15, 1 / 1.15, 1 / 1.5)


class DomainError(ValueError):
    """An input is outside the mathematical domain of a rating operation."""


class EmptyInputError(ValueError):
    """An aggregation was asked to summarize nothing."""


class SchemeError(ValueError):
    """Invalid rating-scheme configuration (bins, weights, or references).

    Carries ``errors``: a list of (field, message) pairs.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [("scheme", errors)]
        self.errors = list(errors)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.errors))


class MissingReferenceError(LookupError):
    """No reference experiment is bound for a (task, dataset, environment) group.

    Comparing against a reference from a different environment is unsound,
    so this is always an error, never a silent fallback.
    """

    def __init__(self, group: tuple[str, str, str]):
        self.group = group
        task, dataset, environment = group
        super().__init__(
            f"no reference for task={task!r} dataset={dataset!r} environment={environment!r}"
        )


class Rating(enum.IntEnum):
    """Five-step rating scale; the ordinal is the IntEnum value, A best."""

    A = 0
    B = 1
    C = 2
    D = 3
    E = 4

    @property
    def letter(self) -> str:
        return self.name

    @classmethod
    def from_letter(cls, letter: str) -> Rating:
        try:
            return cls[letter.upper()]
        except KeyError:
            raise ValueError(f"not a rating letter: {letter!r}") from None


def compute_index(value: float, ref_value: float, direction: int) -> float:
    """Index score of a measured value against the reference value.

    Equals value/ref_value for direction +1 and its reciprocal for -1, so
    the two directions are exact reciprocals of each other.
    """
    for name, x in (("value", value), ("ref_value", ref_value)):
        if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x) or x <= 0:
            raise DomainError(f"{name} must be a positive finite number, got {x!r}")
    if direction not in (1, -1):
        raise DomainError(f"direction must be +1 or -1, got {direction!r}")
    ratio = value / ref_value
    return ratio if direction == 1 else 1.0 / ratio


def validate_boundaries(boundaries) -> tuple[float, float, float, float]:
    """Check that bin boundaries are four positive, strictly decreasing numbers."""
    try:
        bins = tuple(float(b) for b in boundaries)
    except (TypeError, ValueError):
        raise SchemeError([("bins", "boundaries must be a sequence of numbers")]) from None
    if len(bins) != 4:
        raise SchemeError([("bins", f"expected 4 boundaries, got {len(bins)}")])
    if not all(math.isfinite(b) and b > 0 for b in bins):
        raise SchemeError([("bins", "boundaries must be positive finite numbers")])
    if not (bins[0] > bins[1] > bins[2] > bins[3]):
        raise SchemeError([("bins", "boundaries must be strictly decreasing")])
    return bins


def assign_rating(index: float, boundaries=DEFAULT_BINS) -> Rating:
    """Map a positive index score to its rating bin.

    The bins partition (0, inf): A for index > b1, B for b2 < index <= b1,
    C for b3 <= index <= b2, D for b4 <= index < b3, E below b4.
    """
    b1, b2, b3, b4 = validate_boundaries(boundaries)
    if not isinstance(index, (int, float)) or isinstance(index, bool) or not math.isfinite(index) or index <= 0:
        raise DomainError(f"index must be a positive finite number, got {index!r}")
    if index > b1:
        return Rating.A
    if index > b2:
        return Rating.B
    if index >= b3:
        return Rating.C
    if index >= b4:
        return Rating.D
    return Rating.E


def weighted_median(rated_weights) -> Rating:
    """Lower weighted median of (rating, weight) pairs.

    Sorts by ordinal (A first) and returns the first rating whose cumulative
    weight reaches half the total. All weights must be strictly positive;
    drop zero-weight entries before calling.
    """
    items = list(rated_weights)
    if not items:
        raise EmptyInputError("weighted_median of an empty list")
    for rating, weight in items:
        if not isinstance(weight, (int, float)) or not math.isfinite(weight) or weight <= 0:
            raise DomainError(f"weight for {rating!r} must be positive, got {weight!r}")
    items.sort(key=lambda pair: pair[0])
    half = math.fsum(w for _, w in items) / 2.0
    cumulative = 0.0
    for rating, weight in items:
        cumulative += weight
        if cumulative >= half:
            return Rating(rating)
    return Rating(items[-1][0])  # unreachable with finite weights


@dataclass(frozen=True)
class RatingScheme:
    """Everything needed to rate a corpus: registry, references, and bins.

    ``references`` maps a (task, dataset, environment) group to the id of
    its reference experiment; ``reference_records`` binds those ids to the
    actual records so rating needs no further lookups.
    """

    registry: MetricRegistry
    references: dict[tuple[str, str, str], str]
    bins: tuple[float, float, float, float] = DEFAULT_BINS
    reference_records: dict[str, ExperimentRecord] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "bins", validate_boundaries(self.bins))

    @classmethod
    def build(
        cls,
        records: list[ExperimentRecord],
        registry: MetricRegistry | None = None,
        bins=DEFAULT_BINS,
        references: dict[tuple[str, str, str], str] | None = None,
        auto: bool = True,
    ) -> RatingScheme:
        """Assemble a validated scheme over a corpus.

        Explicit references are checked to resolve to an in-corpus record of
        the matching group; remaining groups get an auto-selected reference
        when ``auto`` is set, otherwise they stay unbound and rating them
        raises MissingReferenceError.
        """
        registry = normalize_weights(registry if registry is not None else default_registry())
        bins = validate_boundaries(bins)
        by_id: dict[str, ExperimentRecord] = {}
        groups: dict[tuple[str, str, str], list[ExperimentRecord]] = {}
        for record in records:
            if record.id in by_id:
                raise SchemeError([("corpus", f"duplicate experiment id '{record.id}'")])
            by_id[record.id] = record
            groups.setdefault(record.group_key, []).append(record)
        pending = dict(references or {})
        resolved: dict[tuple[str, str, str], str] = {}
        for group, members in groups.items():
            if group in pending:
                ref_id = pending.pop(group)
                ref = by_id.get(ref_id)
                if ref is None:
                    raise SchemeError(
                        [("references", f"reference '{ref_id}' is not in the corpus")]
                    )
                if ref.group_key != group:
                    raise SchemeError(
                        [("references", f"reference '{ref_id}' belongs to group {ref.group_key}")]
                    )
                resolved[group] = ref_id
            elif auto:
                resolved[group] = auto_select_reference(members)
        if pending:
            stray = ", ".join("/".join(g) for g in pending)
            raise SchemeError([("references", f"no corpus records for group(s): {stray}")])
        bound = {ref_id: by_id[ref_id] for ref_id in resolved.values()}
        return cls(registry, resolved, bins, bound)

    def reference_for(self, record: ExperimentRecord) -> ExperimentRecord:
        """The reference record for this record's group."""
        ref_id = self.references.get(record.group_key)
        if ref_id is None:
            raise MissingReferenceError(record.group_key)
        ref = self.reference_records.get(ref_id)
        if ref is None:
            raise MissingReferenceError(record.group_key)
        return ref

    def to_dict(self) -> dict:
        """Canonical serialized form, used for hashing and report bundles."""
        references = [
            {"task": t, "dataset": d, "environment": e, "experiment": ref_id}
            for (t, d, e), ref_id in sorted(self.references.items())
        ]
        return {
            "bins": list(self.bins),
            "metrics": [m.to_dict() for m in self.registry],
            "references": references,
        }


@dataclass(frozen=True)
class RatedExperiment:
    """A record plus its per-metric index scores, ratings, and compound rating."""

    record: ExperimentRecord
    index_scores: dict[str, float]
    metric_ratings: dict[str, Rating]
    compound: Rating

    def __post_init__(self):
        if set(self.index_scores) != set(self.metric_ratings):
            raise ValueError("index_scores and metric_ratings must share one key set")
        ordinals = [int(r) for r in self.metric_ratings.values()]
        if ordinals and not (min(ordinals) <= int(self.compound) <= max(ordinals)):
            raise ValueError("compound rating must lie between the metric ratings")


def rate_experiment(record: ExperimentRecord, scheme: RatingScheme) -> RatedExperiment:
    """Rate one record against its same-environment reference.

    Index per metric, letter per index, and a compound letter from the
    weighted median over all positively weighted metrics. The reference
    itself scores index 1 everywhere and lands mid-scale.
    """
    reference = scheme.reference_for(record)
    index_scores: dict[str, float] = {}
    ratings: dict[str, Rating] = {}
    weighted: list[tuple[Rating, float]] = []
    for metric in scheme.registry:
        value = record.values.get(metric.key)
        ref_value = reference.values.get(metric.key)
        if value is None or ref_value is None:
            continue
        index = compute_index(value, ref_value, metric.direction)
        rating = assign_rating(index, scheme.bins)
        index_scores[metric.key] = index
        ratings[metric.key] = rating
        if metric.weight > 0:
            weighted.append((rating, metric.weight))
    if not weighted:
        raise EmptyInputError(f"record '{record.id}' has no positively weighted metrics")
    return RatedExperiment(record, index_scores, ratings, weighted_median(weighted))


def auto_select_reference(records: list[ExperimentRecord]) -> str:
    """Pick the most middle-of-the-pack record of one group as reference.

    Minimizes the sum over metrics of |ln(value / per-metric median)|; ties
    break on lexicographically smallest id. Only metrics present on every
    record in the group are considered.
    """
    if not records:
        raise EmptyInputError("cannot select a reference from an empty group")
    groups = {r.group_key for r in records}
    if len(groups) > 1:
        raise ValueError(f"records span multiple groups: {sorted(groups)}")
    keys = set(records[0].values)
    for record in records[1:]:
        keys &= set(record.values)
    medians = {key: statistics.median(r.values[key] for r in records) for key in sorted(keys)}

    def distance(record: ExperimentRecord) -> float:
        return math.fsum(
            abs(math.log(record.values[key] / median)) for key, median in medians.items()
        )

    return min(records, key=lambda r: (distance(r), r.id)).id


def rate_corpus(records: list[ExperimentRecord], scheme: RatingScheme) -> list[RatedExperiment]:
    """Rate every record independently, preserving input order."""
    return [rate_experiment(record, scheme) for record in records]


@dataclass(frozen=True)
class SchemeConfig:
    """Parsed scheme overrides from a config file or API request body."""

    bins: tuple[float, float, float, float] | None = None
    weights: dict[str, float] = field(default_factory=dict)
    references: dict[tuple[str, str, str], str] | None = None


def parse_scheme_config(data: dict) -> SchemeConfig:
    """Validate a scheme-override document, collecting field-level errors."""
    if not isinstance(data, dict):
        raise SchemeError([("body", "expected a JSON object")])
    errors: list[tuple[str, str]] = []
    known = {"bins", "weights", "references"}
    for key in data:
        if key not in known:
            errors.append((key, "unknown field"))

    bins = None
    if data.get("bins") is not None:
        try:
            bins = validate_boundaries(data["bins"])
        except SchemeError as exc:
            errors.extend(exc.errors)

    weights: dict[str, float] = {}
    raw_weights = data.get("weights")
    if raw_weights is not None:
        if not isinstance(raw_weights, dict):
            errors.append(("weights", "expected an object of metric -> weight"))
        else:
            for key, value in raw_weights.items():
                if (
                    not isinstance(value, (int, float))
                    or isinstance(value, bool)
                    or not math.isfinite(value)
                    or value <= 0
                ):
                    errors.append((f"weights.{key}", "weight must be a positive finite number"))
                else:
                    weights[key] = float(value)

    references = None
    raw_refs = data.get("references")
    if raw_refs is not None:
        if not isinstance(raw_refs, list):
            errors.append(("references", "expected a list of reference bindings"))
        else:
            references = {}
            for i, entry in enumerate(raw_refs):
                field_name = f"references[{i}]"
                if not isinstance(entry, dict):
                    errors.append((field_name, "expected an object"))
                    continue
                missing = [
                    k for k in ("task", "dataset", "environment", "experiment")
                    if not isinstance(entry.get(k), str) or not entry.get(k)
                ]
                if missing:
                    errors.append((field_name, f"missing or empty field(s): {', '.join(missing)}"))
                    continue
                group = (entry["task"], entry["dataset"], entry["environment"])
                if group in references:
                    errors.append((field_name, "duplicate binding for this group"))
                    continue
                references[group] = entry["experiment"]

    if errors:
        raise SchemeError(errors)
    return SchemeConfig(bins=bins, weights=weights, references=references)


def load_scheme_file(path) -> SchemeConfig:
    """Load scheme overrides (bins, weights, references) from a JSON file."""
    import json
    from pathlib import Path

    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemeError([(str(path), f"cannot read scheme file: {exc}")]) from exc
    except json.JSONDecodeError as exc:
        raise SchemeError([(str(path), f"not valid JSON: {exc}")]) from exc
    return parse_scheme_config(data)
