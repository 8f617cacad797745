"""Pearson correlation matrices with two-tailed significance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import FeatureMatrix
from .special import correlation_p_value

STAR_LEVELS = ((0.01, "**"), (0.05, "*"))


def significance_stars(p: float) -> str:
    """``**`` below 0.01, ``*`` below 0.05, else empty."""
    for level, mark in STAR_LEVELS:
        if p < level:
            return mark
    return ""


@dataclass(frozen=True)
class CorrelationResult:
    labels: tuple[str, ...]
    r: np.ndarray
    p_values: np.ndarray
    n: int

    @property
    def stars(self) -> np.ndarray:
        marks = np.empty(self.r.shape, dtype=object)
        for i in range(self.r.shape[0]):
            for j in range(self.r.shape[1]):
                marks[i, j] = "" if i == j else significance_stars(self.p_values[i, j])
        return marks

    def pairs(self):
        """Yield ``(a, b, r, p, stars)`` for every unordered variable pair."""
        k = len(self.labels)
        for i in range(k):
            for j in range(i + 1, k):
                p = float(self.p_values[i, j])
                yield self.labels[i], self.labels[j], float(self.r[i, j]), p, significance_stars(p)


def correlation_matrix(matrix: FeatureMatrix) -> np.ndarray:
    """Pearson r between columns; the diagonal is exactly 1."""
    matrix.require_variance()
    d = matrix.values - matrix.values.mean(axis=0)
    ss = np.sum(d * d, axis=0)
    r = (d.T @ d) / np.sqrt(np.outer(ss, ss))
    r = np.clip(0.5 * (r + r.T), -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r


def pearson(matrix: FeatureMatrix) -> CorrelationResult:
    """Correlation of every column pair with two-tailed p-values (t test, n-2 df)."""
    r = correlation_matrix(matrix)
    n = matrix.shape[0]
    k = r.shape[0]
    p = np.zeros_like(r)
    for i in range(k):
        for j in range(i + 1, k):
            p[i, j] = p[j, i] = correlation_p_value(r[i, j], n)
    return CorrelationResult(matrix.col_ids, r, p, n)
