import math

import pytest

from effrate.core import (
    EmptyGroupError,
    MetricDefinition,
    MetricRegistry,
    RecordValidationError,
    RegistryError,
    UnknownMetricError,
    default_registry,
    load_registry_file,
    normalize_weights,
    override_weights,
    record_violations,
    validate_record,
)

from conftest import full_values, make_record


def two_metric_registry(w1, w2, group="quality"):
    return MetricRegistry(
        (
            MetricDefinition("m_one", "One", group, 1, weight=w1),
            MetricDefinition("m_two", "Two", group, -1, weight=w2),
        )
    )


class TestDefaultRegistry:
    def test_has_eight_metrics_in_three_groups(self):
        registry = default_registry()
        assert len(registry) == 8
        assert set(registry.groups()) == {"quality", "complexity", "resources"}

    def test_group_weights_sum_to_one(self):
        registry = default_registry()
        for group, members in registry.groups().items():
            assert math.fsum(m.weight for m in members) == pytest.approx(1.0, abs=1e-9)

    def test_power_draw_has_the_highest_weight(self):
        assert default_registry().highest_weighted().key == "power_draw"

    def test_directions_square_to_one(self):
        assert all(m.direction**2 == 1 for m in default_registry())


class TestNormalizeWeights:
    def test_symmetric_weights_split_evenly(self):
        registry = normalize_weights(two_metric_registry(2.0, 2.0))
        assert [m.weight for m in registry] == [0.5, 0.5]

    def test_seven_three_normalizes_to_seven_tenths(self):
        # oracle: divide by the raw group sum 10
        registry = normalize_weights(two_metric_registry(7.0, 3.0))
        assert [m.weight for m in registry] == [0.7, 0.3]

    def test_idempotent_field_for_field(self):
        once = normalize_weights(two_metric_registry(7.0, 3.0))
        assert normalize_weights(once) == once
        assert normalize_weights(default_registry()) == default_registry()

    def test_zero_weight_group_is_an_error(self):
        registry = two_metric_registry(0.0, 0.0)
        with pytest.raises(EmptyGroupError):
            normalize_weights(registry)

    def test_global_weight_tie_has_no_unique_top(self):
        registry = MetricRegistry(
            (
                MetricDefinition("m_one", "One", "quality", 1, weight=1.0),
                MetricDefinition("m_two", "Two", "resources", -1, weight=1.0),
            )
        )
        assert normalize_weights(registry) == registry  # ties normalize fine
        with pytest.raises(RegistryError, match="highest weight"):
            registry.highest_weighted()

    def test_zero_weight_metric_stays_zero(self):
        registry = MetricRegistry(
            (
                MetricDefinition("m_one", "One", "quality", 1, weight=3.0),
                MetricDefinition("m_two", "Two", "quality", 1, weight=1.0),
                MetricDefinition("m_extra", "Extra", "quality", -1, weight=0.0),
            )
        )
        normalized = normalize_weights(registry)
        assert [m.weight for m in normalized] == [0.75, 0.25, 0.0]


class TestMetricDefinition:
    def test_rejects_bad_direction(self):
        with pytest.raises(RegistryError):
            MetricDefinition("m", "M", "quality", 0)

    def test_rejects_negative_weight(self):
        with pytest.raises(RegistryError):
            MetricDefinition("m", "M", "quality", 1, weight=-0.1)

    def test_rejects_unknown_group(self):
        with pytest.raises(RegistryError):
            MetricDefinition("m", "M", "speed", 1)

    def test_rejects_duplicate_keys(self):
        metric = MetricDefinition("m", "M", "quality", 1)
        with pytest.raises(RegistryError):
            MetricRegistry((metric, metric))


class TestOverrideWeights:
    def test_overrides_and_renormalizes(self):
        registry = override_weights(two_metric_registry(1.0, 1.0), {"m_one": 6.0, "m_two": 2.0})
        assert [m.weight for m in registry] == [0.75, 0.25]

    def test_unknown_key_is_an_error(self):
        with pytest.raises(UnknownMetricError):
            override_weights(two_metric_registry(1.0, 1.0), {"nope": 1.0})

    def test_non_positive_override_is_an_error(self):
        with pytest.raises(RegistryError):
            override_weights(two_metric_registry(1.0, 1.0), {"m_one": 0.0})


class TestValidateRecord:
    def test_accepts_a_complete_record(self):
        record = make_record("r1", full_values())
        assert validate_record(record, default_registry()) is record

    def test_zero_value_is_a_violation(self):
        record = make_record("r1", full_values(power_draw=0.0))
        violations = record_violations(record, default_registry())
        assert [(v.code, v.metric, v.value) for v in violations] == [
            ("non_positive_value", "power_draw", 0.0)
        ]

    def test_unknown_key_is_a_violation(self):
        record = make_record("r1", dict(full_values(), acc_top1=0.9))
        violations = record_violations(record, default_registry())
        assert [(v.code, v.metric) for v in violations] == [("unknown_metric", "acc_top1")]

    def test_missing_required_metric_is_a_violation(self):
        values = full_values()
        del values["running_time"]
        violations = record_violations(make_record("r1", values), default_registry())
        assert [(v.code, v.metric) for v in violations] == [("missing_metric", "running_time")]

    def test_raises_with_all_violations(self):
        values = full_values(power_draw=-1.0)
        del values["f1_score"]
        with pytest.raises(RecordValidationError) as exc:
            validate_record(make_record("r1", values), default_registry())
        codes = {v.code for v in exc.value.violations}
        assert codes == {"non_positive_value", "missing_metric"}


class TestRegistryFile:
    def test_round_trip(self, tmp_path):
        registry = default_registry()
        path = tmp_path / "registry.json"
        import json

        path.write_text(json.dumps(registry.to_dict()))
        assert load_registry_file(path) == registry

    def test_malformed_file_is_an_error(self, tmp_path):
        path = tmp_path / "registry.json"
        path.write_text("{not json")
        with pytest.raises(RegistryError):
            load_registry_file(path)
