"""Byte-stable CSV and JSON serialization of results.

Floats are written with ``repr`` (shortest round-trip form) and JSON with
sorted keys, so identical inputs always give identical bytes.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .core import ExperimentConfig
from .sampler import BinnedCounts

COUNTS_FORMAT = "whichway.binned_counts/1"


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return repr(float(value))


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan literals
        return value if math.isfinite(value) else repr(value)
    return value


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def counts_to_csv(counts: BinnedCounts) -> str:
    rows = zip(counts.bin_edges[:-1], counts.bin_edges[1:], counts.n_total, counts.n_V)
    return csv_text(["bin_left", "bin_right", "n_total", "n_V"], rows)


def counts_to_dict(counts: BinnedCounts) -> dict:
    return {
        "format": COUNTS_FORMAT,
        "config": counts.config.to_dict(),
        "model": counts.model,
        "seed": list(counts.seeds) if len(counts.seeds) != 1 else counts.seeds[0],
        "n_photons": counts.n_photons,
        "theta": counts.theta,
        "bin_edges": counts.bin_edges,
        "n_total": counts.n_total,
        "n_V": counts.n_V,
    }


def counts_to_json(counts: BinnedCounts) -> str:
    return dumps(counts_to_dict(counts))


def counts_from_json(text: str) -> BinnedCounts:
    data = json.loads(text)
    if data.get("format") != COUNTS_FORMAT:
        raise ValueError(f"not a {COUNTS_FORMAT} document")
    seed = data["seed"]
    seeds = tuple(seed) if isinstance(seed, list) else (seed,)
    return BinnedCounts(
        np.array(data["bin_edges"], dtype=float),
        np.array(data["n_total"], dtype=np.int64),
        np.array(data["n_V"], dtype=np.int64),
        seeds,
        int(data["n_photons"]),
        ExperimentConfig.from_dict(data["config"]),
        data["model"],
    )


ESTIMATE_COLUMNS = [
    "bin_center", "n_total", "n_V", "eps2_hat", "ci_low", "ci_high", "analytic", "expected", "flag",
]


def estimates_to_csv(estimates) -> str:
    rows = (
        (e.bin_center, e.n_total, e.n_V, e.eps2_hat, e.ci_low, e.ci_high, e.analytic, e.expected, e.flag)
        for e in estimates
    )
    return csv_text(ESTIMATE_COLUMNS, rows)


def profile_to_csv(profile) -> str:
    rows = zip(profile.x, profile.pattern, profile.eps2, profile.p_v, profile.flag)
    return csv_text(["x", "pattern", "eps2", "p_v", "flag"], rows)


def sweep_to_csv(rows) -> str:
    return csv_text(
        ["theta", "bin_center", "eps2_hat", "analytic", "relative_error"],
        ((r.theta, r.bin_center, r.eps2_hat, r.analytic, r.relative_error) for r in rows),
    )
