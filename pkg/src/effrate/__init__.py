"""Reference-relative efficiency ratings, energy labels, and reports for ML experiment logs."""

__version__ = "0.1.0"

from .core import (
    Configuration,
    Environment,
    ExperimentRecord,
    MetricDefinition,
    MetricRegistry,
    default_registry,
    normalize_weights,
    validate_record,
)
from .rating import (
    DEFAULT_BINS,
    RatedExperiment,
    Rating,
    RatingScheme,
    assign_rating,
    auto_select_reference,
    compute_index,
    rate_corpus,
    rate_experiment,
    weighted_median,
)

__all__ = [
    "__version__",
    "Configuration",
    "Environment",
    "ExperimentRecord",
    "MetricDefinition",
    "MetricRegistry",
    "default_registry",
    "normalize_weights",
    "validate_record",
    "DEFAULT_BINS",
    "Rating",
    "RatingScheme",
    "RatedExperiment",
    "assign_rating",
    "auto_select_reference",
    "compute_index",
    "rate_corpus",
    "rate_experiment",
    "weighted_median",
]
