"""CSV/JSON writers for feature vectors, manifests and statistical reports."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from os import PathLike
from pathlib import Path

import numpy as np

from .errors import EmptyManifest, IoFailure, MalformedInput
from .stats import CorrelationResult, FactorModel, FeatureMatrix, scree_data, suppress
from .timbre import FEATURE_NAMES, TimbreVector


@dataclass(frozen=True)
class ManifestRow:
    path: Path
    stroke_label: str
    tabla_id: str

    @property
    def row_id(self) -> str:
        return f"{self.tabla_id}:{self.stroke_label}"


def read_manifest(path: str | PathLike) -> list[ManifestRow]:
    """CSV with header ``path,stroke_label,tabla_id``; relative paths resolve against the manifest."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(line for line in fh if line.strip() and not line.startswith("#"))
            missing = {"path", "stroke_label", "tabla_id"} - set(reader.fieldnames or ())
            if reader.fieldnames and missing:
                raise MalformedInput(f"{path}: manifest lacks column(s) {sorted(missing)}")
            raw = list(reader)
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {path}: {exc}") from exc
    if not raw:
        raise EmptyManifest(f"{path} lists no recordings")

    rows, seen = [], set()
    for i, r in enumerate(raw, start=2):
        if not (r.get("path") or "").strip():
            raise MalformedInput(f"{path}: line {i}: empty path")
        p = Path(r["path"].strip())
        if not p.is_absolute():
            p = path.parent / p
        if p in seen:
            raise MalformedInput(f"{path}: line {i}: duplicate path {p}")
        label, tabla = (r.get("stroke_label") or "").strip(), (r.get("tabla_id") or "").strip()
        if not label or not tabla:
            raise MalformedInput(f"{path}: line {i}: empty stroke_label or tabla_id")
        seen.add(p)
        rows.append(ManifestRow(p, label, tabla))
    return rows


def write_manifest(rows, path: str | PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "stroke_label", "tabla_id"])
        for r in rows:
            w.writerow([str(r.path), r.stroke_label, r.tabla_id])


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def feature_json(vec: TimbreVector) -> str:
    return json.dumps(vec.as_dict(), indent=2)


def feature_csv_lines(vectors: list[tuple[str, TimbreVector]], id_header: str = "id") -> list[list[str]]:
    lines = [[id_header, *FEATURE_NAMES]]
    for rid, vec in vectors:
        lines.append([rid, *(_num(v) for v in vec.as_array())])
    return lines


def _write_rows(path: Path, rows, footer: str | None = None) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in rows:
                w.writerow(["" if v is None else v for v in row])
            if footer:
                fh.write(f"# {footer}\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def _square(labels, values, fmt=_num):
    yield ["", *labels]
    for lab, row in zip(labels, values):
        yield [lab, *(fmt(v) for v in row)]


def write_correlation_report(result: CorrelationResult, out_dir: str | PathLike) -> list[Path]:
    """``r.csv``, ``p.csv`` (square matrices) and ``correlation.csv`` (pairs with star flags)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stars = result.stars
    flagged = [[f"{result.r[i, j]:.3f}{stars[i, j]}" for j in range(len(result.labels))]
               for i in range(len(result.labels))]
    pairs = [["var_a", "var_b", "r", "p", "flag", "n"]]
    pairs += [[a, b, repr(r), repr(p), s, result.n] for a, b, r, p, s in result.pairs()]
    footer = "** p < 0.01 (2-tailed); * p < 0.05 (2-tailed)"
    return [
        _write_rows(out / "r.csv", _square(result.labels, result.r)),
        _write_rows(out / "p.csv", _square(result.labels, result.p_values)),
        _write_rows(out / "r_flagged.csv", _square(result.labels, flagged, fmt=str), footer),
        _write_rows(out / "correlation.csv", pairs, footer),
    ]


def write_factor_report(model: FactorModel, out_dir: str | PathLike,
                        suppress_threshold: float = 0.5) -> list[Path]:
    """communalities, variance, component (unrotated), rotated and scree CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = model.n_factors
    comps = [f"component_{j + 1}" for j in range(m)]

    comm = [["variable", "initial", "extraction"]]
    comm += [[v, "1.0", _num(h)] for v, h in zip(model.variables, model.communalities)]

    variance = [list(model.variance.HEADER)]
    variance += [[_num(v) if i else v for i, v in enumerate(row)] for row in model.variance.rows()]

    component = [["variable", *comps]]
    component += [[v, *(_num(x) for x in row)] for v, row in zip(model.variables, model.loadings)]

    paths = [
        _write_rows(out / "communalities.csv", comm, "extraction method: principal component analysis"),
        _write_rows(out / "variance.csv", variance),
        _write_rows(out / "component.csv", component, f"{m} component(s) extracted"),
        _write_rows(out / "scree.csv", [["factor", "eigenvalue"],
                                        *([i, _num(v)] for i, v in scree_data(model.eigenvalues))]),
    ]
    if model.rotated_loadings is not None:
        shown = suppress(model.rotated_loadings, suppress_threshold)
        rotated = [["variable", *comps]]
        rotated += [[v, *(_num(x) for x in row)] for v, row in zip(model.variables, shown)]
        note = (f"rotation: varimax; |loading| < {suppress_threshold:g} suppressed"
                if m > 1 else "only one component extracted; solution not rotated")
        paths.append(_write_rows(out / "rotated.csv", rotated, note))
    return paths


def descriptive_rows(matrix: FeatureMatrix) -> list[list]:
    """Mean and n-1 standard deviation per variable."""
    x = matrix.values
    rows = [["variable", "mean", "std_deviation", "n"]]
    for j, name in enumerate(matrix.col_ids):
        rows.append([name, _num(np.mean(x[:, j])), _num(np.std(x[:, j], ddof=1)), x.shape[0]])
    return rows


def write_descriptives(matrix: FeatureMatrix, out_dir: str | PathLike) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _write_rows(out / "descriptives.csv", descriptive_rows(matrix))
