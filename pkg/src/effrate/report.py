"""Report bundles, deterministic exporters, and the command-line interface.

A bundle collects everything downstream consumers need: the rated corpus,
the best method per dataset, scatter trade-off series in index coordinates,
and compound-rating histograms. Serialization is canonical: identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .core import (
    EMISSIONS_KEY,
    F1_KEY,
    POWER_KEY,
    MetricRegistry,
    UnknownMetricError,
    default_registry,
    load_registry_file,
    normalize_weights,
    override_weights,
)
from .ingest import ensure_emissions_metric, load_corpus
from .labels import (
    LabelSpec,
    format_significant,
    render_label,
    render_label_batch,
    sanitize_filename,
)
from .rating import (
    DEFAULT_BINS,
    RatedExperiment,
    Rating,
    RatingScheme,
    load_scheme_file,
    rate_corpus,
    validate_boundaries,
)

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1

SCHEME_ENV_VAR = "EFFRATE_SCHEME"


def canonical_json_bytes(obj) -> bytes:
    """The one true serialization: 2-space indent, insertion order, trailing newline."""
    return (json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")


def scheme_hash(scheme: RatingScheme | dict) -> str:
    """Content hash of a scheme's canonical form; equal schemes hash equal."""
    data = scheme.to_dict() if isinstance(scheme, RatingScheme) else scheme
    packed = json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(packed.encode("utf-8")).hexdigest()


def _rated_dict(rated: RatedExperiment, scheme: RatingScheme) -> dict:
    record = rated.record
    config = record.configuration
    entry = {
        "id": record.id,
        "task": config.task,
        "dataset": config.dataset,
        "method": config.method,
        "environment": record.environment.id,
        "reference": scheme.references.get(record.group_key) == record.id,
        "compound": rated.compound.letter,
        "values": {k: record.values[k] for k in rated.index_scores},
        "index_scores": dict(rated.index_scores),
        "ratings": {k: r.letter for k, r in rated.metric_ratings.items()},
        "flags": sorted(record.flags),
    }
    if config.dataset_size is not None:
        entry["dataset_size"] = config.dataset_size
    if config.hyperparameters:
        entry["hyperparameters"] = config.hyperparameters
    return entry


def best_per_dataset(rated_list: list[RatedExperiment]) -> list[dict]:
    """The most efficient method for each dataset.

    Best compound rating wins; ties prefer the higher power-draw index, then
    the lexicographically smallest method name. Rows are ordered by dataset
    size (largest first) when sizes are known, by name otherwise.
    """
    by_dataset: dict[str, list[RatedExperiment]] = {}
    for rated in rated_list:
        by_dataset.setdefault(rated.record.configuration.dataset, []).append(rated)

    rows = []
    for dataset, candidates in by_dataset.items():
        best = min(
            candidates,
            key=lambda r: (
                int(r.compound),
                -r.index_scores.get(POWER_KEY, float("-inf")),
                r.record.configuration.method,
            ),
        )
        config = best.record.configuration
        rows.append(
            {
                "dataset": dataset,
                "dataset_size": config.dataset_size,
                "method": config.method,
                "experiment": best.record.id,
                "environment": best.record.environment.id,
                "compound": best.compound.letter,
                "metrics": {
                    key: {
                        "value": best.record.values[key],
                        "index": best.index_scores[key],
                        "rating": best.metric_ratings[key].letter,
                    }
                    for key in best.index_scores
                },
            }
        )
    rows.sort(
        key=lambda row: (0, -row["dataset_size"], row["dataset"])
        if row["dataset_size"] is not None
        else (1, 0, row["dataset"])
    )
    return rows


def scatter_series(
    rated_list: list[RatedExperiment], x_key: str, y_key: str, scheme: RatingScheme
) -> dict:
    """Index-coordinate scatter points for a metric-vs-metric trade-off view.

    Points are (x index, y index) so that higher is better on both axes, and
    every group's reference sits at (1, 1). Grid lines belong at the
    scheme's bin boundaries on both axes; raw values ride along for
    tooltips.
    """
    points = []
    for rated in rated_list:
        for key in (x_key, y_key):
            if key not in rated.index_scores:
                raise UnknownMetricError(key)
        record = rated.record
        points.append(
            {
                "id": record.id,
                "dataset": record.configuration.dataset,
                "method": record.configuration.method,
                "environment": record.environment.id,
                "x": rated.index_scores[x_key],
                "y": rated.index_scores[y_key],
                "x_value": record.values[x_key],
                "y_value": record.values[y_key],
                "compound": rated.compound.letter,
                "reference": scheme.references.get(record.group_key) == record.id,
            }
        )
    return {
        "x_metric": x_key,
        "y_metric": y_key,
        "boundaries": list(scheme.bins),
        "points": points,
    }


def rating_distributions(rated_list: list[RatedExperiment], group_by: str) -> dict[str, dict[str, int]]:
    """Compound-rating histograms per dataset or per method, zero bins explicit."""
    if group_by not in ("dataset", "method"):
        raise ValueError(f"group_by must be 'dataset' or 'method', got {group_by!r}")
    histograms: dict[str, dict[str, int]] = {}
    for rated in rated_list:
        key = getattr(rated.record.configuration, group_by)
        hist = histograms.setdefault(key, {r.letter: 0 for r in Rating})
        hist[rated.compound.letter] += 1
    return {key: histograms[key] for key in sorted(histograms)}


def _default_axes(registry: MetricRegistry) -> tuple[str, str]:
    """Power draw vs F1 when available, else the top-weighted resource/quality metric."""
    groups = registry.groups()

    def pick(group: str, preferred: str) -> str:
        members = groups.get(group, ())
        for m in members:
            if m.key == preferred:
                return preferred
        return max(members, key=lambda m: m.weight).key

    return pick("resources", POWER_KEY), pick("quality", F1_KEY)


@dataclass
class ReportBundle:
    """All report artifacts for one rated corpus under one scheme."""

    rated: list[RatedExperiment]
    scheme: RatingScheme
    best: list[dict]
    scatter: dict
    distributions_by_dataset: dict[str, dict[str, int]]
    distributions_by_method: dict[str, dict[str, int]]

    def to_dict(self) -> dict:
        scheme_dict = self.scheme.to_dict()
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "scheme_hash": scheme_hash(scheme_dict),
            "scheme": scheme_dict,
            "experiments": [_rated_dict(r, self.scheme) for r in self.rated],
            "best_per_dataset": self.best,
            "scatter": self.scatter,
            "distributions": {
                "by_dataset": self.distributions_by_dataset,
                "by_method": self.distributions_by_method,
            },
        }


def build_bundle(
    rated: list[RatedExperiment],
    scheme: RatingScheme,
    x_key: str | None = None,
    y_key: str | None = None,
) -> ReportBundle:
    """Assemble the full report bundle from a rated corpus."""
    if x_key is None or y_key is None:
        default_x, default_y = _default_axes(scheme.registry)
        x_key = x_key or default_x
        y_key = y_key or default_y
    return ReportBundle(
        rated=rated,
        scheme=scheme,
        best=best_per_dataset(rated),
        scatter=scatter_series(rated, x_key, y_key, scheme),
        distributions_by_dataset=rating_distributions(rated, "dataset"),
        distributions_by_method=rating_distributions(rated, "method"),
    )


def _fmt(value, sig: int) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, float)):
        return format_significant(float(value), sig)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list[str]]):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def export_report(bundle, format: str = "json", path: str | Path = "report.json") -> list[Path]:
    """Write the bundle deterministically; returns the files written.

    ``json`` writes one canonical file at ``path``; ``csv`` treats ``path``
    as a directory and emits one file per table or series. CSV numbers use
    the label formatting rules: 4 significant digits for measured values, 3
    for index scores.
    """
    data = bundle.to_dict() if isinstance(bundle, ReportBundle) else bundle
    path = Path(path)
    if format == "json":
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(canonical_json_bytes(data))
        return [path]
    if format != "csv":
        raise ValueError(f"unsupported format {format!r} (expected 'json' or 'csv')")

    path.mkdir(parents=True, exist_ok=True)
    written = []
    metric_keys = [m["key"] for m in data["scheme"]["metrics"]]

    exp_header = ["id", "task", "dataset", "method", "environment", "reference", "compound"]
    for key in metric_keys:
        exp_header += [f"{key}_value", f"{key}_index", f"{key}_rating"]
    exp_rows = []
    for entry in data["experiments"]:
        row = [
            entry["id"], entry["task"], entry["dataset"], entry["method"],
            entry["environment"], _fmt(entry["reference"], 0), entry["compound"],
        ]
        for key in metric_keys:
            row += [
                _fmt(entry["values"].get(key), 4),
                _fmt(entry["index_scores"].get(key), 3),
                entry["ratings"].get(key, ""),
            ]
        exp_rows.append(row)
    target = path / "experiments.csv"
    _write_csv(target, exp_header, exp_rows)
    written.append(target)

    best_header = ["dataset", "dataset_size", "method", "experiment", "environment", "compound"]
    for key in metric_keys:
        best_header += [f"{key}_value", f"{key}_index", f"{key}_rating"]
    best_rows = []
    for entry in data["best_per_dataset"]:
        row = [
            entry["dataset"],
            "" if entry["dataset_size"] is None else str(entry["dataset_size"]),
            entry["method"], entry["experiment"], entry["environment"], entry["compound"],
        ]
        for key in metric_keys:
            cell = entry["metrics"].get(key)
            row += (
                [_fmt(cell["value"], 4), _fmt(cell["index"], 3), cell["rating"]]
                if cell
                else ["", "", ""]
            )
        best_rows.append(row)
    target = path / "best_per_dataset.csv"
    _write_csv(target, best_header, best_rows)
    written.append(target)

    scatter = data["scatter"]
    target = path / "scatter.csv"
    _write_csv(
        target,
        ["id", "dataset", "method", "environment", "compound", "reference",
         f"{scatter['x_metric']}_index", f"{scatter['y_metric']}_index",
         f"{scatter['x_metric']}_value", f"{scatter['y_metric']}_value"],
        [
            [p["id"], p["dataset"], p["method"], p["environment"], p["compound"],
             _fmt(p["reference"], 0), _fmt(p["x"], 3), _fmt(p["y"], 3),
             _fmt(p["x_value"], 4), _fmt(p["y_value"], 4)]
            for p in scatter["points"]
        ],
    )
    written.append(target)

    letters = [r.letter for r in Rating]
    for group_by in ("dataset", "method"):
        hists = data["distributions"][f"by_{group_by}"]
        target = path / f"distributions_by_{group_by}.csv"
        _write_csv(
            target,
            [group_by] + letters,
            [[name] + [str(hist[letter]) for letter in letters] for name, hist in hists.items()],
        )
        written.append(target)
    return written


def load_report(path: str | Path) -> dict:
    """Parse a previously exported JSON bundle, preserving key order."""
    return json.loads(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# CLI


def _registry_from_args(args) -> MetricRegistry:
    if getattr(args, "weights", None):
        return load_registry_file(args.weights)
    return default_registry()


def prepare_corpus(paths, registry: MetricRegistry):
    """Load logs and return (records, registry actually needed to rate them)."""
    records = load_corpus(paths, registry)
    if any(EMISSIONS_KEY in r.values for r in records):
        registry = ensure_emissions_metric(registry)
    return records, registry


def build_scheme_from_args(records, registry, args) -> RatingScheme:
    import os

    scheme_path = getattr(args, "scheme", None) or os.environ.get(SCHEME_ENV_VAR)
    config = load_scheme_file(scheme_path) if scheme_path else None

    if config and config.weights:
        registry = override_weights(registry, config.weights)

    bins = DEFAULT_BINS
    if config and config.bins:
        bins = config.bins
    if getattr(args, "bins", None):
        parts = [p for p in args.bins.split(",") if p.strip()]
        bins = validate_boundaries(parts)

    references = dict(config.references) if config and config.references else {}
    reference_arg = getattr(args, "reference", "auto") or "auto"
    auto = True
    if reference_arg != "auto":
        matches = [r for r in records if r.id == reference_arg]
        if not matches:
            raise LookupError(f"unknown experiment '{reference_arg}'")
        references[matches[0].group_key] = reference_arg
    return RatingScheme.build(records, registry, bins, references, auto=auto)


def _rate_pipeline(args):
    registry = _registry_from_args(args)
    records, registry = prepare_corpus(args.logs, registry)
    scheme = build_scheme_from_args(records, registry, args)
    rated = rate_corpus(records, scheme)
    return records, scheme, rated


def _cmd_rate(args) -> int:
    _, scheme, rated = _rate_pipeline(args)
    bundle = build_bundle(rated, scheme)
    if args.out:
        files = export_report(bundle, args.format, Path(args.out))
        for f in files:
            print(f, file=sys.stderr)
    elif args.format == "csv":
        print("error: --format csv requires --out DIRECTORY", file=sys.stderr)
        return 2
    else:
        sys.stdout.write(canonical_json_bytes(bundle.to_dict()).decode("utf-8"))
    return 0


def _cmd_label(args) -> int:
    _, scheme, rated = _rate_pipeline(args)
    out_dir = Path(args.out)
    if args.all:
        manifest = render_label_batch(rated, out_dir, registry=scheme.registry)
        print(f"{len(manifest['files'])} label(s) written to {out_dir}", file=sys.stderr)
        return 0
    matches = [r for r in rated if r.record.id == args.experiment]
    if not matches:
        print(f"error: unknown experiment '{args.experiment}'", file=sys.stderr)
        return 1
    rated_one = matches[0]
    out_dir.mkdir(parents=True, exist_ok=True)
    record = rated_one.record
    name = sanitize_filename(
        f"{record.configuration.dataset}_{record.configuration.method}_{record.environment.id}"
    )
    target = out_dir / f"{name}.svg"
    target.write_bytes(render_label(LabelSpec.for_rated(rated_one, registry=scheme.registry)))
    print(target, file=sys.stderr)
    return 0


def _cmd_measure(args) -> int:
    from .measure import measure_run

    command = list(args.cmd)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        print("error: measure requires a command after --", file=sys.stderr)
        return 2
    doc = measure_run(
        command,
        interval_ms=args.interval_ms,
        experiment_id=args.id,
        task=args.task,
        dataset=args.dataset,
        method=args.method,
        environment_id=args.environment,
    )
    payload = canonical_json_bytes(doc)
    if args.out:
        Path(args.out).write_bytes(payload)
        print(args.out, file=sys.stderr)
    else:
        sys.stdout.write(payload.decode("utf-8"))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    registry = _registry_from_args(args)
    records, registry = prepare_corpus(args.corpus, registry)
    scheme = build_scheme_from_args(records, registry, args)
    app = create_app(records, scheme, static_dir=args.static, cors_origins=args.cors)
    host, _, port = args.addr.rpartition(":")
    if not host:
        host, port = args.addr, "8000"
    uvicorn.run(app, host=host, port=int(port))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effrate",
        description="Rate ML experiment logs against a reference and render reports and energy labels.",
    )
    parser.add_argument("--version", action="version", version=f"effrate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    rate = sub.add_parser("rate", help="rate logs and export a report bundle")
    rate.add_argument("--logs", nargs="+", required=True, help="log files or directories")
    rate.add_argument("--scheme", help=f"scheme JSON file (default: ${SCHEME_ENV_VAR})")
    rate.add_argument("--reference", default="auto", help="'auto' or an experiment id")
    rate.add_argument("--weights", help="registry JSON file with metric definitions")
    rate.add_argument("--bins", help="four comma-separated decreasing boundaries")
    rate.add_argument("--out", help="output file (json) or directory (csv)")
    rate.add_argument("--format", choices=("json", "csv"), default="json")

    label = sub.add_parser("label", help="render energy labels as SVG")
    label.add_argument("--logs", nargs="+", required=True)
    label.add_argument("--scheme")
    label.add_argument("--reference", default="auto")
    label.add_argument("--weights")
    label.add_argument("--bins")
    label.add_argument("--out", required=True, help="output directory")
    which = label.add_mutually_exclusive_group(required=True)
    which.add_argument("--experiment", help="render one experiment by id")
    which.add_argument("--all", action="store_true", help="render every experiment plus a manifest")

    measure = sub.add_parser("measure", help="run a command and log energy/time/memory")
    measure.add_argument("--interval-ms", type=int, default=100)
    measure.add_argument("--out", help="write the log fragment here instead of stdout")
    measure.add_argument("--id", help="experiment id for the emitted log")
    measure.add_argument("--task", default="measure")
    measure.add_argument("--dataset", default="adhoc")
    measure.add_argument("--method")
    measure.add_argument("--environment")
    measure.add_argument("cmd", nargs=argparse.REMAINDER, help="-- command args...")

    serve = sub.add_parser("serve", help="serve the rating API over a corpus")
    serve.add_argument("--addr", default="127.0.0.1:8000")
    serve.add_argument("--corpus", nargs="+", required=True, help="log files or directories")
    serve.add_argument("--scheme")
    serve.add_argument("--reference", default="auto")
    serve.add_argument("--weights")
    serve.add_argument("--bins")
    serve.add_argument("--static", help="directory of built explorer assets to serve at /")
    serve.add_argument(
        "--cors", nargs="+", default=["*"], metavar="ORIGIN", help="allowed CORS origins"
    )
    return parser


_HANDLERS = {
    "rate": _cmd_rate,
    "label": _cmd_label,
    "measure": _cmd_measure,
    "serve": _cmd_serve,
}


def cli(argv=None) -> int:
    """Entry point: 0 on success, 1 on validation errors, 2 on usage errors."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except (ValueError, LookupError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():  # pragma: no cover - thin wrapper
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(cli())


if __name__ == "__main__":  # pragma: no cover
    main()
