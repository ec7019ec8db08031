"""Loaders for the experiment output files, failing loudly on schema drift.

The plotting side never recomputes experiment mathematics; it consumes the
sweep CSV (fixed header), the summary JSON ({"sequence": ..., "cells": [...]})
and the dichotomy/concentration report JSONs exactly as the experiment
harness wrote them.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

CSV_HEADER = ("seed,n,m,trial,radius,sigma_np1,error_an,k_used,"
              "ub_main,ub_exp,lb_main,realization_ub_holds,runtime_ms")

SUMMARY_CELL_KEYS = ("n", "mean_radius", "ratio_opt", "ratio_log",
                     "q05", "q95", "tail_ratio")


class SchemaError(ValueError):
    """An input file does not match the experiment output schema."""


def load_sweep_csv(path) -> dict:
    """Columns of a sweep CSV as arrays (numeric ones as float arrays)."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    if lines[0] != CSV_HEADER:
        raise SchemaError(f"{path}: header mismatch\n  got:  {lines[0]}\n"
                          f"  want: {CSV_HEADER}")
    rows = [line.split(",") for line in lines[1:] if line]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    names = CSV_HEADER.split(",")
    if any(len(r) != len(names) for r in rows):
        raise SchemaError(f"{path}: ragged rows")
    cols = {name: [r[i] for r in rows] for i, name in enumerate(names)}
    out = {}
    for name, values in cols.items():
        if name == "realization_ub_holds":
            out[name] = np.array(values)
        else:
            try:
                out[name] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric value in column {name}: {exc}")
    return out


def load_summary_json(path) -> dict:
    path = Path(path)
    doc = json.loads(path.read_text())
    if "sequence" not in doc or "cells" not in doc:
        raise SchemaError(f"{path}: summary JSON needs 'sequence' and 'cells'")
    for cell in doc["cells"]:
        missing = [k for k in SUMMARY_CELL_KEYS if k not in cell]
        if missing:
            raise SchemaError(f"{path}: summary cell missing keys {missing}")
    doc["cells"] = sorted(doc["cells"], key=lambda c: c["n"])
    return doc


def load_dichotomy_json(path) -> dict:
    path = Path(path)
    doc = json.loads(path.read_text())
    if "rows" not in doc or not doc["rows"]:
        raise SchemaError(f"{path}: dichotomy JSON needs a non-empty 'rows' list")
    for row in doc["rows"]:
        if "m" not in row or "frequency" not in row:
            raise SchemaError(f"{path}: dichotomy row needs 'm' and 'frequency'")
    return doc


def load_concentration_json(path) -> list:
    path = Path(path)
    doc = json.loads(path.read_text())
    checks = doc.get("checks")
    if not checks:
        raise SchemaError(f"{path}: concentration JSON needs a non-empty 'checks' list")
    for chk in checks:
        for key in ("name", "empirical_freq", "claimed_bound", "upper_conf_95"):
            if key not in chk:
                raise SchemaError(f"{path}: check missing key {key}")
    return checks


def sigma_values(sequence: dict, m: int) -> np.ndarray:
    """Evaluate the semi-axis sequence spec (the reference curves need it)."""
    family = sequence.get("family")
    scale = sequence.get("scale", 1.0)
    j = np.arange(1, m + 1, dtype=float)
    if family == "polynomial":
        vals = j ** (-sequence["alpha"]) * np.log(j + 1.0) ** (-sequence.get("beta", 0.0))
    elif family == "exponential":
        vals = sequence["a"] ** j
    elif family == "explicit":
        values = sequence["values"]
        if m > len(values):
            vals = np.zeros(m)
            vals[:len(values)] = values
        else:
            vals = np.asarray(values[:m], dtype=float)
    else:
        raise SchemaError(f"unknown sequence family {family!r}")
    return scale * vals


def sigma_np1(sequence: dict, n: int) -> float:
    return float(sigma_values(sequence, n + 1)[n])


def log_fit_constant(values, reference) -> float:
    """Least-squares constant c minimizing ||log(values) - log(c * reference)||."""
    v = np.asarray(values, dtype=float)
    r = np.asarray(reference, dtype=float)
    mask = (v > 0) & (r > 0)
    if not np.any(mask):
        return math.nan
    return float(np.exp(np.mean(np.log(v[mask]) - np.log(r[mask]))))
