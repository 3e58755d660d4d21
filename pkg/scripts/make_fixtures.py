#!/usr/bin/env python3
"""Generate the deterministic fixture corpus: 10 methods x 10 datasets.

Values are synthetic but plausible: per-method base characteristics scaled
per dataset, with seeded jitter. Methods without class probabilities (svm,
sgd) omit top-5 accuracy and carry the no_probabilities flag. Re-running
this script always reproduces the same files.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "logs"

SEED = 20240807

ENVIRONMENT = {
    "id": "wkst-01",
    "hardware": "x86-64 8-core, 32 GB RAM",
    "software": "python3.10 sklearn1.1",
    "energy_mix": 400.0,
}

# name -> rows
DATASETS = {
    "covertype": 581012,
    "mnist": 70000,
    "connect4": 67557,
    "shuttle": 58000,
    "adult": 48842,
    "electricity": 45312,
    "bank_marketing": 45211,
    "nomao": 34465,
    "letter": 20000,
    "newsgroups": 18846,
}

# method -> (top1 base, flops, params, size multiplier, watts, seconds, hyperparameters)
METHODS = {
    "knn": (0.80, 5.0e9, 1.0e6, 8.0, 34.0, 28.0, {"n_neighbors": 15}),
    "svm": (0.86, 8.0e8, 2.0e5, 8.0, 36.0, 55.0, {"C": 10.0, "kernel": "rbf"}),
    "gnb": (0.64, 1.2e6, 1.5e3, 8.0, 7.5, 0.22, {"var_smoothing": 1e-9}),
    "lr": (0.76, 2.4e7, 5.0e4, 8.0, 10.5, 0.55, {"C": 1.0, "max_iter": 200}),
    "rr": (0.74, 2.2e7, 5.0e4, 8.0, 9.5, 0.45, {"alpha": 1.0}),
    "sgd": (0.73, 2.0e7, 5.0e4, 8.0, 9.0, 0.35, {"loss": "hinge", "alpha": 0.0001}),
    "ab": (0.78, 2.1e8, 1.2e5, 8.0, 17.0, 4.8, {"n_estimators": 100}),
    "rf": (0.84, 6.5e8, 4.5e6, 8.0, 21.0, 7.5, {"n_estimators": 300}),
    "xrf": (0.85, 9.0e8, 7.5e6, 8.0, 24.0, 8.8, {"n_estimators": 300}),
    "mlp": (0.82, 3.2e8, 3.0e5, 8.0, 27.5, 4.2, {"hidden_layer_sizes": [128, 64]}),
}

NO_PROBABILITY_METHODS = {"svm", "sgd"}


def main():
    rng = random.Random(SEED)
    OUT.mkdir(parents=True, exist_ok=True)
    count = 0
    for dataset, size in DATASETS.items():
        difficulty = rng.uniform(0.82, 1.04)
        scale = (size / 50000.0) ** 0.8
        for method, (acc, flops, params, size_mult, watts, seconds, hyper) in METHODS.items():
            top1 = min(0.985, max(0.35, acc * difficulty + rng.gauss(0.0, 0.025)))
            f1 = max(0.30, top1 - rng.uniform(0.005, 0.06))
            power = watts * rng.uniform(0.85, 1.15)
            runtime = seconds * scale * rng.uniform(0.8, 1.25)
            measurements = {
                "top1_accuracy": [{"value": round(top1, 4)}],
                "f1_score": [{"value": round(f1, 4)}],
                "flops": [{"value": round(flops * scale * rng.uniform(0.9, 1.1), 1)}],
                "parameters": [{"value": float(int(params * rng.uniform(0.9, 1.1)))}],
                "model_size_bytes": [
                    {"value": float(int(params * size_mult * rng.uniform(0.95, 1.1)))}
                ],
                "power_draw": [
                    {"value": round(power * rng.uniform(0.93, 0.99), 3), "timestamp": 0.0},
                    {"value": round(power, 3), "timestamp": 0.5},
                    {"value": round(power * rng.uniform(1.01, 1.07), 3), "timestamp": 1.0},
                ],
                "running_time": [
                    {"value": round(runtime * rng.uniform(0.98, 1.0), 4)},
                    {"value": round(runtime * rng.uniform(1.0, 1.02), 4)},
                ],
            }
            flags = []
            if method in NO_PROBABILITY_METHODS:
                flags.append("no_probabilities")
            else:
                top5 = min(0.999, top1 + rng.uniform(0.04, 0.16))
                measurements["top5_accuracy"] = [{"value": round(top5, 4)}]
            # keep registry order in the file for readability
            ordered_keys = [
                "top1_accuracy", "top5_accuracy", "f1_score", "flops",
                "parameters", "model_size_bytes", "power_draw", "running_time",
            ]
            measurements = {k: measurements[k] for k in ordered_keys if k in measurements}

            doc = {
                "schema_version": 1,
                "id": f"{dataset}-{method}",
                "configuration": {
                    "task": "inference",
                    "dataset": dataset,
                    "method": method,
                    "hyperparameters": hyper,
                    "dataset_size": size,
                },
                "environment": ENVIRONMENT,
                "raw_measurements": measurements,
                "flags": flags,
            }
            path = OUT / f"{dataset}_{method}.json"
            path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
            count += 1
    print(f"wrote {count} logs to {OUT}")


if __name__ == "__main__":
    main()
