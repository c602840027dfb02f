"""File outputs: atomic writes, design CSV, replicate CSV, JSON payloads.

Every writer goes through a temp-file-plus-rename so a crashed run never
leaves a half-written file behind. Floats are serialized with repr, the
shortest string that round-trips exactly.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from .model import Design

SCHEMA_VERSION = 1


def format_float(x) -> str:
    return repr(float(x))


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-",
                               suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def jsonable(value):
    """Recursively convert numpy containers and non-finite floats for JSON."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else repr(value).strip("()")
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    return value


def write_json(payload: dict, path) -> None:
    text = json.dumps(jsonable(payload), indent=2) + "\n"
    atomic_write_text(path, text)


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def design_csv_text(design: Design) -> str:
    pts = design.points
    header = ",".join(f"x{j + 1}" for j in range(pts.shape[1]))
    lines = [header]
    for row in pts:
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def write_design_csv(design: Design, path) -> None:
    atomic_write_text(path, design_csv_text(design))


def read_design_points(path) -> np.ndarray:
    """Read the x1..xk design layout back into an (n, k) float array."""
    with open(path, encoding="utf-8") as handle:
        lines = [ln.strip() for ln in handle if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty design file")
    header = lines[0].split(",")
    expected = [f"x{j + 1}" for j in range(len(header))]
    if [h.strip() for h in header] != expected:
        raise ValueError(f"{path}: expected header {','.join(expected)}")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}: ragged row {ln!r}")
        rows.append([float(c) for c in cells])
    if not rows:
        raise ValueError(f"{path}: no design points")
    return np.asarray(rows, dtype=float)


def design_json_payload(design: Design) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "n": design.n,
        "dim": design.dim,
        "strategy": design.strategy,
        "seed": list(design.seed) if design.seed is not None else None,
        "points": design.points.tolist(),
    }


def scale_note(sigma2: float, tau: float, n: int) -> str:
    factor = (sigma2 + tau**2) / n
    return ("losses are relative; multiply by (sigma2 + tau^2) / n = "
            f"{format_float(factor)} for the integrated mean squared error")


def loss_payload(*, nu: float, c: float | None, n: int, seed, strategy: str,
                 variance_term: float, bias_term: float, combined: float,
                 sigma2: float = 1.0, tau: float = 1.0,
                 extras: dict | None = None) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "nu": nu,
        "c": c,
        "n": n,
        "seed": list(seed) if isinstance(seed, tuple) else seed,
        "strategy": strategy,
        "variance_term": variance_term,
        "bias_term": bias_term,
        "combined": combined,
        "sigma2": sigma2,
        "tau": tau,
        "scale_note": scale_note(sigma2, tau, n),
    }
    if extras:
        payload.update(extras)
    return payload


def replicates_csv_text(estimate) -> str:
    lines = ["rep,j_nu,variance_term,gamma"]
    for r in range(estimate.reps):
        lines.append(",".join([
            str(r),
            format_float(estimate.values[r]),
            format_float(estimate.variance_terms[r]),
            format_float(estimate.gamma_terms[r]),
        ]))
    return "\n".join(lines) + "\n"


def write_replicates_csv(estimate, path) -> None:
    atomic_write_text(path, replicates_csv_text(estimate))


def summary_payload(result) -> dict:
    """Flatten an ExperimentResult into the summary JSON layout."""
    config = result.config
    payload = {
        "schema_version": SCHEMA_VERSION,
        "strategy": config.strategy,
        "nu": config.nu,
        "c": result.parts.c,
        "n": config.n,
        "reps": config.reps,
        "seed": config.seed,
        "mode": result.parts.mode,
        "sigma2": config.sigma2,
        "tau": config.tau,
        "scale_note": scale_note(config.sigma2, config.tau, config.n),
        "density_max_loss": {
            "variance_term": result.density_loss.variance_term,
            "bias_term": result.density_loss.bias_term,
            "combined": result.density_loss.combined,
        },
    }
    if config.strategy == "cluster1d":
        payload["degree"] = config.degree
    if config.strategy == "ccdk":
        payload["k"] = config.k
    if result.parts.counts is not None:
        payload["counts"] = result.parts.counts.tolist()
    if result.parts.references:
        payload["references"] = dict(result.parts.references)
    payload["summary"] = result.summary.as_dict()
    return payload
