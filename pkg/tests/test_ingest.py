import json
import logging
import math

import pytest

from effrate.core import default_registry
from effrate.ingest import (
    AggregationError,
    CorpusEmptyError,
    LogDocument,
    MissingMetricError,
    SchemaError,
    Sample,
    VersionError,
    aggregate,
    apply_top5_fallback,
    derive_emissions,
    ensure_emissions_metric,
    load_corpus,
    parse_log,
    serialize_log,
)
from effrate.rating import RatingScheme, rate_experiment

from conftest import LOGS_DIR, full_values, make_record


def log_payload(**overrides):
    doc = {
        "schema_version": 1,
        "id": "ds-m1",
        "configuration": {
            "task": "inference",
            "dataset": "ds",
            "method": "m1",
            "hyperparameters": {"C": 1.0},
        },
        "environment": {"id": "env-1", "hardware": "hw", "software": "sw"},
        "raw_measurements": {
            key: [{"value": value}] for key, value in full_values().items()
        },
        "flags": [],
    }
    doc.update(overrides)
    return doc


class TestParseLog:
    def test_fixture_log_has_eight_metric_keys(self):
        doc = parse_log((LOGS_DIR / "covertype_lr.json").read_bytes())
        assert len(doc.raw_measurements) == 8
        assert doc.experiment_id == "covertype-lr"

    def test_truncated_document_is_a_schema_error(self):
        payload = json.dumps(log_payload())[:40]
        with pytest.raises(SchemaError):
            parse_log(payload)

    def test_unsupported_version_is_a_version_error(self):
        with pytest.raises(VersionError):
            parse_log(json.dumps(log_payload(schema_version=999)))

    def test_missing_required_field_is_a_schema_error(self):
        payload = log_payload()
        del payload["environment"]
        with pytest.raises(SchemaError):
            parse_log(json.dumps(payload))

    def test_empty_sample_list_is_a_schema_error(self):
        payload = log_payload()
        payload["raw_measurements"]["power_draw"] = []
        with pytest.raises(SchemaError):
            parse_log(json.dumps(payload))

    def test_unknown_extra_fields_are_preserved(self):
        payload = log_payload(annotations={"note": "rerun"})
        doc = parse_log(json.dumps(payload))
        assert doc.extra == {"annotations": {"note": "rerun"}}

    def test_round_trip_is_identity(self):
        payload = log_payload(annotations=[1, 2, 3])
        payload["raw_measurements"]["power_draw"] = [
            {"value": 10.0, "timestamp": 0.0},
            {"value": 14.0, "timestamp": 0.5},
        ]
        doc = parse_log(json.dumps(payload))
        assert parse_log(serialize_log(doc)) == doc

    def test_round_trip_on_fixture_logs(self):
        for path in sorted(LOGS_DIR.glob("*.json"))[:5]:
            doc = parse_log(path.read_bytes())
            assert parse_log(serialize_log(doc)) == doc


class TestAggregate:
    def test_resource_metrics_take_the_mean(self):
        payload = log_payload()
        payload["raw_measurements"]["power_draw"] = [{"value": 10.0}, {"value": 14.0}]
        record = aggregate(parse_log(json.dumps(payload)), default_registry())
        assert record.values["power_draw"] == 12.0

    def test_single_quality_sample_is_identity(self):
        payload = log_payload()
        payload["raw_measurements"]["f1_score"] = [{"value": 0.91}]
        record = aggregate(parse_log(json.dumps(payload)), default_registry())
        assert record.values["f1_score"] == 0.91

    def test_quality_metrics_take_the_last_sample(self):
        payload = log_payload()
        payload["raw_measurements"]["top1_accuracy"] = [{"value": 0.5}, {"value": 0.83}]
        record = aggregate(parse_log(json.dumps(payload)), default_registry())
        assert record.values["top1_accuracy"] == 0.83

    def test_missing_required_metric_is_an_aggregation_error(self):
        payload = log_payload()
        del payload["raw_measurements"]["running_time"]
        with pytest.raises(AggregationError) as exc:
            aggregate(parse_log(json.dumps(payload)), default_registry())
        assert exc.value.metric == "running_time"

    def test_mean_is_permutation_invariant(self):
        import random

        rng = random.Random(52)
        samples = [{"value": rng.uniform(1.0, 100.0)} for _ in range(25)]
        shuffled = samples[:]
        rng.shuffle(shuffled)
        means = []
        for variant in (samples, shuffled):
            payload = log_payload()
            payload["raw_measurements"]["power_draw"] = variant
            record = aggregate(parse_log(json.dumps(payload)), default_registry())
            means.append(record.values["power_draw"])
        assert abs(means[0] - means[1]) <= 1e-12


class TestTop5Fallback:
    def test_flagged_record_reports_top1_twice(self):
        values = full_values()
        del values["top5_accuracy"]
        record = make_record("r", values, flags={"no_probabilities"})
        filled = apply_top5_fallback(record)
        assert filled.values["top5_accuracy"] == filled.values["top1_accuracy"] == 0.8

    def test_fallback_never_overwrites(self):
        record = make_record("r", full_values(), flags={"no_probabilities"})
        assert apply_top5_fallback(record) == record

    def test_missing_top5_without_flag_is_an_error(self):
        values = full_values()
        del values["top5_accuracy"]
        with pytest.raises(MissingMetricError):
            apply_top5_fallback(make_record("r", values))

    def test_fallback_keeps_top5_a_tight_lower_bound(self):
        values = full_values()
        del values["top5_accuracy"]
        filled = apply_top5_fallback(make_record("r", values, flags={"no_probabilities"}))
        assert filled.values["top5_accuracy"] >= filled.values["top1_accuracy"]


class TestDeriveEmissions:
    def test_known_conversion(self):
        # oracle: 100 W * 36 s = 3600 J = 0.001 kWh; times 400 g/kWh
        record = make_record(
            "r", full_values(power_draw=100.0, running_time=36.0), energy_mix=400.0
        )
        derived = derive_emissions(record)
        assert derived.values["emissions_g"] == pytest.approx(0.4, rel=1e-12)

    def test_no_energy_mix_is_a_no_op(self):
        record = make_record("r", full_values())
        assert derive_emissions(record) == record

    def test_zero_weight_emissions_leave_the_compound_unchanged(self):
        registry = ensure_emissions_metric(default_registry())
        plain_ref = make_record("ref", full_values())
        plain = make_record("fast", full_values(power_draw=10.0))
        mixed_ref = derive_emissions(make_record("ref", full_values(), energy_mix=300.0))
        mixed = derive_emissions(
            make_record("fast", full_values(power_draw=10.0), energy_mix=300.0)
        )
        group = plain_ref.group_key
        scheme_plain = RatingScheme.build([plain_ref, plain], registry, references={group: "ref"})
        scheme_mixed = RatingScheme.build([mixed_ref, mixed], registry, references={group: "ref"})
        without = rate_experiment(plain, scheme_plain)
        withe = rate_experiment(mixed, scheme_mixed)
        assert "emissions_g" in withe.index_scores
        assert "emissions_g" not in without.index_scores
        assert withe.compound is without.compound


class TestLoadCorpus:
    def write_logs(self, directory, count=3, dataset="ds"):
        for i in range(count):
            payload = log_payload(id=f"{dataset}-m{i}")
            payload["configuration"] = dict(payload["configuration"], dataset=dataset, method=f"m{i}")
            (directory / f"{dataset}_m{i}.json").write_text(json.dumps(payload))

    def test_fixture_directory_loads_sorted(self):
        records = load_corpus([LOGS_DIR])
        assert len(records) == 100
        keys = [
            (r.configuration.dataset, r.configuration.method, r.environment.id, r.id)
            for r in records
        ]
        assert keys == sorted(keys)

    def test_duplicate_ids_resolve_last_wins_with_warning(self, tmp_path, caplog):
        payload = log_payload()
        (tmp_path / "a.json").write_text(json.dumps(payload))
        payload["raw_measurements"]["power_draw"] = [{"value": 99.0}]
        (tmp_path / "b.json").write_text(json.dumps(payload))
        with caplog.at_level(logging.WARNING, logger="effrate.ingest"):
            records = load_corpus([tmp_path])
        assert len(records) == 1
        assert records[0].values["power_draw"] == 99.0
        assert any("duplicate experiment id" in m for m in caplog.messages)

    def test_empty_directory_is_an_error(self, tmp_path):
        with pytest.raises(CorpusEmptyError):
            load_corpus([tmp_path])

    def test_broken_files_are_collected_not_fatal(self, tmp_path, caplog):
        self.write_logs(tmp_path, 2)
        (tmp_path / "zz_broken.json").write_text("{")
        with caplog.at_level(logging.WARNING, logger="effrate.ingest"):
            records = load_corpus([tmp_path])
        assert len(records) == 2

    def test_all_broken_raises_with_error_list(self, tmp_path):
        (tmp_path / "broken.json").write_text("{")
        with pytest.raises(CorpusEmptyError) as exc:
            load_corpus([tmp_path])
        assert len(exc.value.errors) == 1


class TestLogDocumentInvariants:
    def test_samples_are_immutable_tuples(self):
        doc = parse_log(json.dumps(log_payload()))
        assert isinstance(doc.raw_measurements["power_draw"], tuple)
        assert isinstance(doc.raw_measurements["power_draw"][0], Sample)
        assert isinstance(doc, LogDocument)

    def test_non_finite_sample_is_a_schema_error(self):
        payload = json.dumps(log_payload()).replace('"value": 20.0', '"value": NaN')
        with pytest.raises(SchemaError):
            parse_log(payload)
