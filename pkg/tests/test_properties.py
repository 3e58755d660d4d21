"""Property tests for the mathematical invariants of the rating engine."""

import math
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effrate.core import MetricDefinition, MetricRegistry, normalize_weights
from effrate.measure import corrected_total
from effrate.rating import Rating, assign_rating, compute_index, weighted_median

positive = st.floats(min_value=1e-9, max_value=1e9, allow_nan=False, allow_infinity=False)
weights = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)
ratings = st.sampled_from(list(Rating))


@st.composite
def boundaries(draw):
    values = draw(
        st.lists(
            st.floats(min_value=0.01, max_value=100.0, allow_nan=False),
            min_size=4,
            max_size=4,
            unique=True,
        )
    )
    return tuple(sorted(values, reverse=True))


class TestIndexProperties:
    @given(positive, positive)
    def test_direction_inversion(self, value, ref):
        up = compute_index(value, ref, 1)
        down = compute_index(value, ref, -1)
        assert abs(down - 1.0 / up) <= 1e-12

    @given(positive, positive, st.floats(min_value=1e-6, max_value=1e6, allow_nan=False))
    def test_scale_invariance(self, value, ref, scale):
        base = compute_index(value, ref, 1)
        scaled = compute_index(scale * value, scale * ref, 1)
        assert scaled == pytest.approx(base, rel=1e-12)

    @given(positive, positive, positive)
    def test_strict_monotonicity(self, ref, low, delta):
        high = low + max(delta, 1e-9 * low)
        if high == low:
            return
        assert compute_index(high, ref, 1) > compute_index(low, ref, 1)
        assert compute_index(high, ref, -1) < compute_index(low, ref, -1)


class TestBinProperties:
    @given(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False), boundaries())
    def test_every_index_gets_exactly_one_bin(self, index, bounds):
        b1, b2, b3, b4 = bounds
        memberships = [
            index > b1,
            b2 < index <= b1,
            b3 <= index <= b2,
            b4 <= index < b3,
            index < b4,
        ]
        assert memberships.count(True) == 1
        assert memberships.index(True) == int(assign_rating(index, bounds))

    @given(st.lists(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False), min_size=2), boundaries())
    def test_assignment_is_monotone(self, indices, bounds):
        ordered = sorted(indices)
        ordinals = [int(assign_rating(i, bounds)) for i in ordered]
        assert ordinals == sorted(ordinals, reverse=True)


class TestWeightedMedianProperties:
    @given(st.lists(st.tuples(ratings, weights), min_size=1, max_size=12))
    def test_bounded_by_inputs(self, pairs):
        result = int(weighted_median(pairs))
        ordinals = [int(r) for r, _ in pairs]
        assert min(ordinals) <= result <= max(ordinals)

    @given(
        st.lists(st.tuples(ratings, weights), min_size=1, max_size=12),
        st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
    )
    def test_weight_scale_invariance(self, pairs, scale):
        scaled = [(r, w * scale) for r, w in pairs]
        assert weighted_median(pairs) is weighted_median(scaled)

    @given(st.lists(ratings, min_size=1, max_size=11).filter(lambda xs: len(xs) % 2 == 1))
    def test_equal_weights_odd_count_is_the_standard_median(self, letters):
        pairs = [(r, 1.0) for r in letters]
        expected = statistics.median(sorted(int(r) for r in letters))
        assert int(weighted_median(pairs)) == expected


class TestNormalizationProperties:
    @given(st.lists(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False), min_size=1, max_size=9))
    def test_group_sums_and_idempotence(self, raw):
        registry = MetricRegistry(
            tuple(
                MetricDefinition(f"m_{i}", f"M{i}", "quality", 1, weight=w)
                for i, w in enumerate(raw)
            )
        )
        normalized = normalize_weights(registry)
        assert math.fsum(m.weight for m in normalized) == pytest.approx(1.0, abs=1e-9)
        assert normalize_weights(normalized) == normalized
        # relative ratios preserved
        total = math.fsum(raw)
        for metric, w in zip(normalized, raw):
            assert metric.weight == pytest.approx(w / total, rel=1e-9)


class TestWraparoundProperties:
    @settings(max_examples=200)
    @given(
        st.lists(st.integers(min_value=0, max_value=999), min_size=2, max_size=30),
        st.integers(min_value=1, max_value=1000),
    )
    def test_corrected_energy_is_non_negative_and_monotone(self, readings, max_range):
        total = corrected_total(readings, max_range)
        assert total >= 0
        prefixes = [corrected_total(readings[: i + 1], max_range) for i in range(len(readings))]
        assert prefixes == sorted(prefixes)
