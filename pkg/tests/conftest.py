import argparse
from pathlib import Path

import pytest

from effrate.core import Configuration, Environment, ExperimentRecord, default_registry
from effrate.rating import rate_corpus
from effrate.report import build_bundle, build_scheme_from_args, prepare_corpus

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
LOGS_DIR = FIXTURES / "logs"
GOLDEN_REPORT = FIXTURES / "golden" / "report.json"


def make_record(
    record_id,
    values,
    dataset="ds",
    method=None,
    environment="env-1",
    task="inference",
    flags=(),
    energy_mix=None,
    dataset_size=None,
):
    """Synthetic experiment record for unit tests."""
    return ExperimentRecord(
        id=record_id,
        configuration=Configuration(
            task=task,
            dataset=dataset,
            method=method or record_id,
            dataset_size=dataset_size,
        ),
        environment=Environment(id=environment, energy_mix=energy_mix),
        values=values,
        flags=flags,
    )


def full_values(**overrides):
    """A value set covering all eight default metrics, individually overridable."""
    values = {
        "top1_accuracy": 0.80,
        "top5_accuracy": 0.92,
        "f1_score": 0.78,
        "flops": 2.0e8,
        "parameters": 1.0e5,
        "model_size_bytes": 8.0e5,
        "power_draw": 20.0,
        "running_time": 4.0,
    }
    values.update(overrides)
    return values


def default_rate_args(**overrides):
    base = {"scheme": None, "bins": None, "reference": "auto", "weights": None}
    base.update(overrides)
    return argparse.Namespace(**base)


@pytest.fixture(scope="session")
def fixture_corpus():
    """(records, registry) loaded from the shipped 100-log corpus."""
    return prepare_corpus([LOGS_DIR], default_registry())


@pytest.fixture(scope="session")
def fixture_scheme(fixture_corpus):
    records, registry = fixture_corpus
    return build_scheme_from_args(records, registry, default_rate_args())


@pytest.fixture(scope="session")
def fixture_rated(fixture_corpus, fixture_scheme):
    records, _ = fixture_corpus
    return rate_corpus(records, fixture_scheme)


@pytest.fixture(scope="session")
def fixture_bundle(fixture_rated, fixture_scheme):
    return build_bundle(fixture_rated, fixture_scheme)
