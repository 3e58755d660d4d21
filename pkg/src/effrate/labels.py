"""Deterministic EU-appliance-style energy labels rendered as standalone SVG.

A label shows the experiment's header, the five color-coded A-E arrow bands
with the compound band enlarged and marked, and one row per displayed
metric with its measured value, index score, and rating color. Rendering
the same inputs always yields byte-identical output.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

from . import __version__
from .core import MetricRegistry, UnknownMetricError
from .rating import RatedExperiment, Rating

DEFAULT_COLORS = {
    0: "#00a651",  # A
    1: "#8dc63f",  # B
    2: "#ffcc00",  # C
    3: "#f7941d",  # D
    4: "#ed1c24",  # E
}

THIN_SPACE = " "

# Fixed layout style table; the geometry is not configurable.
_WIDTH = 280
_MARGIN = 14
_BAND_HEIGHT = 18
_BAND_HEIGHT_COMPOUND = 26
_BAND_GAP = 4
_BAND_BASE_LEN = 88
_BAND_STEP = 22
_ROW_HEIGHT = 30


class LabelWriteError(OSError):
    """One or more label files could not be written."""

    def __init__(self, failures: list[tuple[str, Exception]]):
        self.failures = failures
        detail = "; ".join(f"{path}: {exc}" for path, exc in failures)
        super().__init__(f"failed to write label(s): {detail}")


def format_significant(value: float, digits: int) -> str:
    """Locale-independent decimal string with a fixed number of significant digits.

    Keeps trailing zeros (1.0 at 3 digits renders as "1.00") and switches to
    scientific notation for very large or very small magnitudes.
    """
    if value == 0:
        return "0"
    exponent = math.floor(math.log10(abs(value)))
    if exponent >= digits + 3 or exponent < -4:
        return f"{value:.{digits - 1}e}"
    decimals = digits - 1 - exponent
    if decimals <= 0:
        return f"{round(value, decimals):.0f}"
    return f"{value:.{decimals}f}"


def format_value(value: float, unit: str) -> str:
    """Measured value at 4 significant digits with its unit, if any."""
    text = format_significant(value, 4)
    return f"{text}{THIN_SPACE}{unit}" if unit else text


def default_display_keys(registry: MetricRegistry) -> tuple[str, ...]:
    """The highest-weighted metric of each group, in group appearance order."""
    picked = []
    for members in registry.groups().values():
        picked.append(max(members, key=lambda m: m.weight).key)
    return tuple(picked)


@dataclass(frozen=True)
class LabelSpec:
    """Everything render_label needs: the rated experiment plus presentation."""

    rated: RatedExperiment
    method: str
    dataset: str
    environment: str
    task: str
    displayed: tuple[str, ...]
    display_names: dict[str, str] = field(default_factory=dict)
    units: dict[str, str] = field(default_factory=dict)
    colors: dict[int, str] = field(default_factory=lambda: dict(DEFAULT_COLORS))

    def __post_init__(self):
        object.__setattr__(self, "displayed", tuple(self.displayed))
        for key in self.displayed:
            if key not in self.rated.index_scores:
                raise UnknownMetricError(key)
        if sorted(self.colors) != [0, 1, 2, 3, 4]:
            raise ValueError("color map must cover exactly the five rating ordinals")

    @classmethod
    def for_rated(
        cls,
        rated: RatedExperiment,
        registry: MetricRegistry | None = None,
        displayed=None,
    ) -> LabelSpec:
        """Build a spec from a rated experiment, deriving titles from its record."""
        record = rated.record
        if displayed is None:
            if registry is not None:
                displayed = [k for k in default_display_keys(registry) if k in rated.index_scores]
            else:
                displayed = list(rated.index_scores)
        names = {}
        units = {}
        if registry is not None:
            for metric in registry:
                names[metric.key] = metric.display_name
                units[metric.key] = metric.unit
        return cls(
            rated=rated,
            method=record.configuration.method,
            dataset=record.configuration.dataset,
            environment=record.environment.id,
            task=record.configuration.task,
            displayed=tuple(displayed),
            display_names=names,
            units=units,
        )


def _text(x, y, content, size, extra="") -> str:
    attrs = f'x="{x}" y="{y}" font-size="{size}"'
    if extra:
        attrs += f" {extra}"
    return f"<text {attrs}>{escape(content)}</text>"


def render_label(spec: LabelSpec) -> bytes:
    """Render one label as a standalone, deterministic SVG document."""
    rated = spec.rated
    parts: list[str] = []
    right = _WIDTH - _MARGIN

    # Header
    parts.append(_text(_MARGIN, 28, spec.method, 17, 'font-weight="bold"'))
    parts.append(_text(_MARGIN, 46, f"{spec.dataset} · {spec.task}", 11))
    parts.append(_text(_MARGIN, 60, spec.environment, 10, 'fill="#555555"'))
    parts.append(f'<line x1="{_MARGIN}" y1="68" x2="{right}" y2="68" stroke="#000000" stroke-width="2"/>')

    # Rating bands
    y = 78
    for rating in Rating:
        compound = rating == rated.compound
        height = _BAND_HEIGHT_COMPOUND if compound else _BAND_HEIGHT
        length = _BAND_BASE_LEN + int(rating) * _BAND_STEP
        tip = length + (12 if compound else 9)
        color = spec.colors[int(rating)]
        mid = y + height // 2
        points = (
            f"{_MARGIN},{y} {_MARGIN + length},{y} {_MARGIN + tip},{mid} "
            f"{_MARGIN + length},{y + height} {_MARGIN},{y + height}"
        )
        parts.append(
            f'<g class="band" data-rating="{rating.letter}" data-compound="{str(compound).lower()}">'
        )
        parts.append(f'<polygon points="{points}" fill="{color}"/>')
        parts.append(
            _text(_MARGIN + 7, mid + 5, rating.letter, 14, 'font-weight="bold" fill="#ffffff"')
        )
        if compound:
            marker_left = right - 44
            marker_points = (
                f"{marker_left},{mid} {marker_left + 12},{y} {right},{y} "
                f"{right},{y + height} {marker_left + 12},{y + height}"
            )
            parts.append(f'<polygon points="{marker_points}" fill="#000000"/>')
            parts.append(
                _text(
                    marker_left + 24,
                    mid + 6,
                    rating.letter,
                    16,
                    'font-weight="bold" fill="#ffffff" text-anchor="middle"',
                )
            )
        parts.append("</g>")
        y += height + _BAND_GAP

    # Metric rows
    y += 8
    parts.append(f'<line x1="{_MARGIN}" y1="{y}" x2="{right}" y2="{y}" stroke="#000000" stroke-width="1"/>')
    y += 16
    parts.append(_text(right - 64, y, "measured", 8, 'fill="#555555" text-anchor="end"'))
    parts.append(_text(right, y, "index", 8, 'fill="#555555" text-anchor="end"'))
    y += 6
    for key in spec.displayed:
        rating = rated.metric_ratings[key]
        color = spec.colors[int(rating)]
        name = spec.display_names.get(key, key)
        unit = spec.units.get(key, "")
        value_text = format_value(rated.record.values[key], unit)
        index_text = format_significant(rated.index_scores[key], 3)
        mid = y + _ROW_HEIGHT // 2
        parts.append(f'<g class="metric-row" data-metric="{key}" data-rating="{rating.letter}">')
        parts.append(
            f'<rect x="{_MARGIN}" y="{mid - 9}" width="18" height="18" fill="{color}" data-role="rating-chip"/>'
        )
        parts.append(
            _text(_MARGIN + 9, mid + 5, rating.letter, 10,
                  'font-weight="bold" fill="#ffffff" text-anchor="middle"')
        )
        parts.append(_text(_MARGIN + 26, mid + 4, name, 11))
        parts.append(_text(right - 64, mid + 4, value_text, 10, 'text-anchor="end"'))
        parts.append(
            f'<text x="{right}" y="{mid + 4}" font-size="10" text-anchor="end" '
            f'class="index" data-metric="{key}">{escape(index_text)}</text>'
        )
        parts.append("</g>")
        y += _ROW_HEIGHT

    # Footer
    y += 10
    parts.append(_text(_MARGIN, y, f"effrate {__version__}", 8, 'fill="#888888"'))
    height = y + 14

    body = "\n".join(parts)
    svg = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{height}" '
        f'viewBox="0 0 {_WIDTH} {height}" font-family="sans-serif">\n'
        f'<rect x="0" y="0" width="{_WIDTH}" height="{height}" fill="#ffffff" stroke="#000000"/>\n'
        f"{body}\n</svg>\n"
    )
    return svg.encode("utf-8")


def sanitize_filename(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def render_label_batch(
    rated_list,
    out_dir: str | Path,
    registry: MetricRegistry | None = None,
    displayed=None,
) -> dict:
    """Render one SVG per rated experiment into a directory, plus a manifest.

    Files are named <dataset>_<method>_<environment>.svg (sanitized); name
    collisions get a numeric suffix. Write failures are collected across the
    whole batch and raised together.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise LabelWriteError([(str(out_dir), exc)]) from exc

    failures: list[tuple[str, Exception]] = []
    entries = []
    used: set[str] = set()
    for rated in rated_list:
        record = rated.record
        base = sanitize_filename(
            f"{record.configuration.dataset}_{record.configuration.method}_{record.environment.id}"
        )
        name = f"{base}.svg"
        suffix = 2
        while name in used:
            name = f"{base}_{suffix}.svg"
            suffix += 1
        used.add(name)
        try:
            svg = render_label(LabelSpec.for_rated(rated, registry=registry, displayed=displayed))
            (out_dir / name).write_bytes(svg)
        except OSError as exc:
            failures.append((str(out_dir / name), exc))
            continue
        entries.append({"file": name, "experiment": record.id, "compound": rated.compound.letter})

    manifest = {"files": entries}
    try:
        import json

        (out_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        failures.append((str(out_dir / "manifest.json"), exc))
    if failures:
        raise LabelWriteError(failures)
    return manifest
