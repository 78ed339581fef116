"""Model, mixture, dataset and report files.

Reals are written with 17 significant digits, which round-trips every
64-bit float exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .density import JointKernelModel, Mixture
from .errors import UsageError
from .experiments import ExperimentReport
from .regression import Dataset

MODEL_VERSION = 1


class FileFormatError(ValueError):
    """A file could not be parsed. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def fmt(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        raise UsageError(f"cannot serialize non-finite value {v!r}")
    if v == 0 and math.copysign(1.0, v) < 0:
        # "-0" would parse as the JSON integer 0 and drop the sign.
        return "-0.0"
    return format(v, ".17g")


def _json_vector(values) -> str:
    return "[" + ", ".join(fmt(v) for v in np.ravel(values)) + "]"


def _json_matrix(rows, indent: str) -> str:
    inner = (",\n" + indent + "  ").join(_json_vector(r) for r in rows)
    return "[\n" + indent + "  " + inner + "\n" + indent + "]"


def dumps_model(model: JointKernelModel, metadata: dict | None = None) -> str:
    parts = [
        f'  "version": {MODEL_VERSION}',
        f'  "dx": {model.dx}',
        f'  "dy": {model.dy}',
        f'  "weights": {_json_vector(model.weights)}',
    ]
    for name in ("x_centers", "y_centers", "x_bandwidths", "y_bandwidths"):
        parts.append(f'  "{name}": {_json_matrix(getattr(model, name), "  ")}')
    if metadata:
        parts.append('  "metadata": ' + json.dumps(metadata, sort_keys=True))
    return "{\n" + ",\n".join(parts) + "\n}\n"


def _load_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise FileFormatError("top level must be an object")
    return doc


def loads_model_doc(doc: dict) -> tuple[JointKernelModel, dict]:
    try:
        if doc["version"] != MODEL_VERSION:
            raise FileFormatError(f"unsupported model version {doc['version']!r}")
        model = JointKernelModel(
            weights=doc["weights"],
            x_centers=doc["x_centers"],
            y_centers=doc["y_centers"],
            x_bandwidths=doc["x_bandwidths"],
            y_bandwidths=doc["y_bandwidths"],
        )
    except KeyError as exc:
        raise FileFormatError(f"missing field {exc.args[0]!r}") from None
    except (UsageError, TypeError) as exc:
        raise FileFormatError(str(exc)) from None
    if model.dx != doc.get("dx") or model.dy != doc.get("dy"):
        raise FileFormatError("declared dx/dy disagree with the kernel arrays")
    return model, doc.get("metadata") or {}


def write_model(path, model: JointKernelModel, metadata: dict | None = None) -> None:
    Path(path).write_text(dumps_model(model, metadata), encoding="utf-8")


def read_model(path) -> tuple[JointKernelModel, dict]:
    return loads_model_doc(_load_json(path))


def dumps_mixture(mix: Mixture) -> str:
    return (
        "{\n"
        f'  "version": {MODEL_VERSION},\n'
        f'  "dim": {mix.dim},\n'
        f'  "weights": {_json_vector(mix.weights)},\n'
        f'  "centers": {_json_matrix(mix.centers, "  ")},\n'
        f'  "bandwidths": {_json_matrix(mix.bandwidths, "  ")}\n'
        "}\n"
    )


def read_mixture(path) -> Mixture:
    doc = _load_json(path)
    try:
        mix = Mixture(doc["weights"], doc["centers"], doc["bandwidths"])
    except KeyError as exc:
        raise FileFormatError(f"missing field {exc.args[0]!r}") from None
    except (UsageError, TypeError) as exc:
        raise FileFormatError(str(exc)) from None
    if "dim" in doc and doc["dim"] != mix.dim:
        raise FileFormatError("declared dim disagrees with the kernel arrays")
    return mix


def write_mixture(path, mix: Mixture) -> None:
    Path(path).write_text(dumps_mixture(mix), encoding="utf-8")


def dataset_header(dx: int, dy: int) -> list[str]:
    return [f"x{i}" for i in range(1, dx + 1)] + [f"y{i}" for i in range(1, dy + 1)]


def write_dataset(path, data: Dataset) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(dataset_header(data.dx, data.dy))
        for row in data.joined():
            w.writerow([fmt(v) for v in row])


def _parse_header(header: list[str], prefixes: str) -> dict[str, int]:
    counts = {p: 0 for p in prefixes}
    expected = []
    for p in prefixes:
        n = sum(1 for h in header if h.strip().startswith(p))
        counts[p] = n
        expected += [f"{p}{i}" for i in range(1, n + 1)]
    if [h.strip() for h in header] != expected or any(v == 0 for v in counts.values()):
        want = "x1,...,xN,y1,...,yM" if prefixes == "xy" else "x1,...,xN"
        raise FileFormatError(f"header must be {want}, got {','.join(header)}", 1)
    return counts


def _read_table(path, prefixes: str) -> tuple[np.ndarray, dict[str, int]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FileFormatError("empty file", 1) from None
        counts = _parse_header(header, prefixes)
        width = sum(counts.values())
        rows = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != width:
                raise FileFormatError(f"expected {width} fields, got {len(row)}", line)
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise FileFormatError(f"non-numeric field in {row!r}", line) from None
            if not all(math.isfinite(v) for v in vals):
                raise FileFormatError("non-finite value", line)
            rows.append(vals)
    if not rows:
        raise FileFormatError("no data rows", 2)
    return np.array(rows, dtype=float), counts


def read_dataset(path) -> Dataset:
    table, counts = _read_table(path, "xy")
    return Dataset(table[:, : counts["x"]], table[:, counts["x"] :])


def read_queries(path) -> np.ndarray:
    """Query file: CSV with header ``x1,...,x<dx>``."""
    return _read_table(path, "x")[0]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


RECORD_COLUMNS = {
    "sine": ["x", "y_mode", "y_nw", "y_true"],
    "ambiguous": ["x", "y_mode", "y_nw", "branch", "dist_mode", "dist_nw", "dead_mode", "dead_nw"],
}
PLOT_COLUMNS = {
    "sine": ["x", "y_mode", "y_nw", "y_true"],
    "ambiguous": ["x", "y_mode", "y_nw", "branch_a", "branch_b"],
}


def _write_rows(path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r[c]) for c in columns])


def write_report(out_dir, report: ExperimentReport) -> list[Path]:
    """Write ``<kind>_records.csv``, ``<kind>_summary.json`` and ``<kind>_plot.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{report.kind}_{stem}" for stem in ("records.csv", "summary.json", "plot.csv")]
    _write_rows(paths[0], RECORD_COLUMNS[report.kind], report.records)
    doc = {"summary": report.summary, "config": report.config}
    paths[1].write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if report.kind == "ambiguous":
        plot = [dict(r, branch_a=r["branch"], branch_b=-r["branch"]) for r in report.records]
    else:
        plot = report.records
    _write_rows(paths[2], PLOT_COLUMNS[report.kind], plot)
    return paths


def read_report(out_dir, kind: str) -> ExperimentReport:
    """Load a report written by :func:`write_report`."""
    out = Path(out_dir)
    doc = json.loads((out / f"{kind}_summary.json").read_text(encoding="utf-8"))
    records = []
    with open(out / f"{kind}_records.csv", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for k, v in row.items():
                if v == "":
                    rec[k] = None
                elif k.startswith("dead_"):
                    rec[k] = v == "1"
                else:
                    rec[k] = float(v)
            records.append(rec)
    return ExperimentReport(kind, records, doc["summary"], doc["config"])
