"""Read-only HTTP JSON API over a rated corpus, with on-demand re-rating.

The corpus is immutable after startup. POST /api/rate accepts raw weight,
bin, and reference overrides, re-rates the corpus under the merged scheme,
and returns exactly the bytes the CLI would write for the same scheme.
Bundles are cached by scheme hash; labels are rendered on demand under any
previously computed scheme.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .core import RegistryError, UnknownMetricError, override_weights
from .labels import LabelSpec, render_label
from .rating import (
    MissingReferenceError,
    RatedExperiment,
    RatingScheme,
    SchemeError,
    parse_scheme_config,
    rate_corpus,
)
from .report import build_bundle, canonical_json_bytes, scheme_hash


@dataclass
class _CacheEntry:
    scheme: RatingScheme
    rated: list[RatedExperiment]
    bundle_bytes: bytes


def _field_errors(errors) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"errors": [{"field": f, "message": m} for f, m in errors]},
    )


def create_app(records, scheme: RatingScheme, *, static_dir=None, cors_origins=("*",)) -> FastAPI:
    """Build the API app over an immutable corpus and its default scheme."""
    if not records:
        raise ValueError("refusing to start with an empty corpus")
    records = list(records)

    app = FastAPI(title="effrate", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    cache: dict[str, _CacheEntry] = {}
    lock = threading.Lock()

    def compute(new_scheme: RatingScheme) -> _CacheEntry:
        digest = scheme_hash(new_scheme)
        with lock:
            hit = cache.get(digest)
        if hit is not None:
            return hit
        rated = rate_corpus(records, new_scheme)
        bundle = build_bundle(rated, new_scheme)
        entry = _CacheEntry(new_scheme, rated, canonical_json_bytes(bundle.to_dict()))
        with lock:
            cache.setdefault(digest, entry)
        return entry

    default_entry = compute(scheme)
    default_hash = scheme_hash(scheme)

    summaries = [
        {
            "id": r.id,
            "task": r.configuration.task,
            "dataset": r.configuration.dataset,
            "method": r.configuration.method,
            "environment": r.environment.id,
        }
        for r in records
    ]

    @app.get("/api/experiments")
    def experiments():
        return JSONResponse(content=summaries)

    @app.post("/api/rate")
    async def rate(request: Request):
        body = await request.body()
        if body.strip():
            try:
                data = json.loads(body)
            except json.JSONDecodeError as exc:
                return _field_errors([("body", f"not valid JSON: {exc}")])
        else:
            data = {}

        try:
            config = parse_scheme_config(data)
        except SchemeError as exc:
            return _field_errors(exc.errors)

        registry = scheme.registry
        if config.weights:
            try:
                registry = override_weights(registry, config.weights)
            except UnknownMetricError as exc:
                return _field_errors([(f"weights.{exc.args[0]}", "unknown metric")])
            except RegistryError as exc:
                return _field_errors([("weights", str(exc))])

        bins = config.bins if config.bins is not None else scheme.bins
        references = config.references if config.references is not None else dict(scheme.references)
        try:
            merged = RatingScheme.build(records, registry, bins, references, auto=False)
            entry = compute(merged)
        except SchemeError as exc:
            return _field_errors(exc.errors)
        except MissingReferenceError as exc:
            task, dataset, environment = exc.group
            return JSONResponse(
                status_code=422,
                content={
                    "error": "missing_reference",
                    "group": {"task": task, "dataset": dataset, "environment": environment},
                },
            )
        return Response(content=entry.bundle_bytes, media_type="application/json")

    @app.get("/api/label/{experiment_id}")
    def label(experiment_id: str, scheme_hash: str | None = None):
        digest = scheme_hash or default_hash
        with lock:
            entry = cache.get(digest)
        if entry is None:
            return JSONResponse(status_code=404, content={"error": "unknown scheme_hash"})
        for rated in entry.rated:
            if rated.record.id == experiment_id:
                svg = render_label(LabelSpec.for_rated(rated, registry=entry.scheme.registry))
                return Response(content=svg, media_type="image/svg+xml")
        return JSONResponse(status_code=404, content={"error": "unknown experiment"})

    if static_dir:
        static_path = Path(static_dir)
        if static_path.is_dir():
            app.mount("/", StaticFiles(directory=static_path, html=True), name="explorer")

    app.state.default_scheme_hash = default_hash
    app.state.default_entry = default_entry
    return app
