"""File schemas: JSON documents and commented CSV tables (see FORMATS.md).

Every file carries the resolved run configuration. JSON files hold it under
``"config"``; CSV files start with ``#``-prefixed lines, the first of which is
``# config: <json>``. Floats are written with ``repr`` so values round-trip
exactly, and nothing time- or host-dependent is written by default.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .model import TermLabel

COEFFICIENTS_FORMAT = "mixlasso.coefficients/1"
OPTIMUM_FORMAT = "mixlasso.optimum/1"
STUDY_FORMAT = "mixlasso.study/1"
LOOCV_FORMAT = "mixlasso.loocv/1"


def clean(obj: Any) -> Any:
    """Convert numpy scalars/arrays to plain JSON types; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, TermLabel):
        return str(obj)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(clean(doc), indent=2, allow_nan=False) + "\n"


def write_json(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else "nan"
    return str(v)


def write_table(path, config: dict, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(clean(config), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    """Return (config, header, rows as strings); comment lines other than the config are skipped."""
    config: dict = {}
    lines = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif not line.startswith("#"):
            lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return config, header, [row for row in reader if row]


def write_study_csv(path, report, config: dict) -> None:
    """Table of selection frequencies: one row per term, one column per method-criterion."""
    combos = report.combos
    freq = {c: report.frequency(c) for c in combos}
    rows = [[str(lab)] + [freq[c][j] for c in combos] for j, lab in enumerate(report.labels)]
    write_table(path, config, ["term"] + combos, rows)


def read_study_csv(path):
    """Inverse of write_study_csv: (config, labels, combos, frequency matrix terms x combos)."""
    config, header, rows = read_table(path)
    labels = [TermLabel.parse(r[0]) for r in rows]
    freq = np.array([[float(v) for v in r[1:]] for r in rows]).reshape(len(rows), len(header) - 1)
    return config, labels, header[1:], freq


def study_document(report, config: dict, metadata: dict, timings: bool = False) -> dict:
    combos = {}
    for c in report.combos:
        masks = report.masks[c]
        counts = report.confusion(c)
        combos[c] = {
            "frequency": dict(zip(map(str, report.labels), report.frequency(c))),
            "confusion": counts.to_dict(),
            "bai": report.bai(c) if masks.shape[0] else None,
            "replications": report.replications[c],
            "masks": ["".join("1" if b else "0" for b in row) for row in masks],
            "failures": [{"replication": r, "error": e} for r, e in report.failures[c]],
        }
    doc = {
        "format": STUDY_FORMAT,
        "metadata": metadata,
        "config": config,
        "terms": [str(lab) for lab in report.labels],
        "truth": ["1" if t else "0" for t in report.truth],
        "results": combos,
    }
    if timings:
        doc["timings_seconds"] = report.timings
    return doc


def write_coefficients_csv(path, config: dict, doc: dict) -> None:
    """Flat companion of coefficients.json: one row per term."""
    terms = doc["terms"]
    keys = [k for k in terms[0] if k != "term"] if terms else []
    write_table(path, config, ["term"] + keys, [[t["term"]] + [_none_to_nan(t[k]) for k in keys] for t in terms])


def _none_to_nan(v):
    return float("nan") if v is None else v


def read_coefficients_csv(path) -> tuple[dict, list[dict]]:
    config, header, rows = read_table(path)
    out = []
    for row in rows:
        rec: dict[str, Any] = {"term": row[0]}
        for k, v in zip(header[1:], row[1:]):
            rec[k] = (v == "1") if k.startswith("selected") else float(v)
        out.append(rec)
    return config, out


def read_loocv_csv(path) -> tuple[dict, dict[str, float]]:
    config, header, rows = read_table(path)
    i, j = header.index("method"), header.index("loo_rmse")
    return config, {r[i]: float(r[j]) for r in rows}
