"""Labelled observation-by-variable matrices and their CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from os import PathLike

import numpy as np

from ..errors import IoFailure, MalformedInput, ZeroVariance


@dataclass(frozen=True)
class FeatureMatrix:
    """``values[i, j]`` is variable ``col_ids[j]`` observed on ``row_ids[i]``."""

    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        rows, cols = tuple(map(str, self.row_ids)), tuple(map(str, self.col_ids))
        if values.ndim != 2 or values.shape != (len(rows), len(cols)):
            raise ValueError(f"values shape {values.shape} does not match {len(rows)}x{len(cols)} labels")
        if values.shape[0] < 3 or values.shape[1] < 2:
            raise ValueError(f"need at least 3 observations and 2 variables, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix contains missing or non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", rows)
        object.__setattr__(self, "col_ids", cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def constant_columns(self) -> list[str]:
        ptp = np.ptp(self.values, axis=0)
        return [c for c, d in zip(self.col_ids, ptp) if d == 0]

    def require_variance(self) -> None:
        bad = self.constant_columns()
        if bad:
            raise ZeroVariance(f"zero-variance column(s): {', '.join(bad)}", column=bad[0])

    def standardized(self) -> np.ndarray:
        """Column z-scores using the n-1 standard deviation."""
        self.require_variance()
        x = self.values
        return (x - x.mean(axis=0)) / x.std(axis=0, ddof=1)

    def transpose(self) -> FeatureMatrix:
        return FeatureMatrix(self.col_ids, self.row_ids, self.values.T)


def read_matrix_csv(path: str | PathLike) -> FeatureMatrix:
    """Header row holds column ids (first cell names the id column); first column holds row ids.

    Lines starting with ``#`` are ignored.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise MalformedInput(f"{path}: no data rows")
    header, body = rows[0], rows[1:]
    width = len(header)
    for lineno, r in enumerate(body, start=2):
        if len(r) != width:
            raise MalformedInput(f"{path}: row {lineno} has {len(r)} fields, header has {width}")
    try:
        values = [[float(v) for v in r[1:]] for r in body]
    except ValueError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    return FeatureMatrix(tuple(r[0] for r in body), tuple(header[1:]), np.array(values))


def write_matrix_csv(matrix: FeatureMatrix, path: str | PathLike, id_header: str = "id") -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([id_header, *matrix.col_ids])
            for rid, row in zip(matrix.row_ids, matrix.values):
                w.writerow([rid, *(repr(float(v)) for v in row)])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
