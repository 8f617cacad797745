"""Principal component extraction and varimax rotation.

The pipeline mirrors the classic PCA report: eigenvalues of the correlation
matrix, loadings ``eigenvector * sqrt(eigenvalue)``, communalities of the
retained components, then an orthogonal varimax rotation (Kaiser-normalized
by default) and the three-part variance-explained table.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateLoadings, DegenerateRetention
from .correlation import correlation_matrix
from .eigen import jacobi_eigh
from .matrix import FeatureMatrix

DEFAULT_SUPPRESS = 0.5


@dataclass(frozen=True)
class VarianceTable:
    eigenvalues: np.ndarray
    n_variables: int
    extraction: np.ndarray
    rotation: np.ndarray | None = None

    @staticmethod
    def _pct(totals, p):
        pct = 100.0 * np.asarray(totals, dtype=np.float64) / p
        return pct, np.cumsum(pct)

    @property
    def initial_pct(self):
        return self._pct(self.eigenvalues, self.n_variables)

    @property
    def extraction_pct(self):
        return self._pct(self.extraction, self.n_variables)

    @property
    def rotation_pct(self):
        if self.rotation is None:
            return None
        return self._pct(self.rotation, self.n_variables)

    HEADER = ("component",
              "initial_total", "initial_pct_variance", "initial_cumulative_pct",
              "extraction_total", "extraction_pct_variance", "extraction_cumulative_pct",
              "rotation_total", "rotation_pct_variance", "rotation_cumulative_pct")

    def rows(self) -> list[list]:
        """One row per component; extraction/rotation cells are None past the retained count."""
        ipct, icum = self.initial_pct
        epct, ecum = self.extraction_pct
        rot = self.rotation_pct
        out = []
        for i, lam in enumerate(self.eigenvalues):
            row = [i + 1, float(lam), float(ipct[i]), float(icum[i])]
            if i < self.extraction.size:
                row += [float(self.extraction[i]), float(epct[i]), float(ecum[i])]
            else:
                row += [None] * 3
            if rot is not None and i < self.rotation.size:
                row += [float(self.rotation[i]), float(rot[0][i]), float(rot[1][i])]
            else:
                row += [None] * 3
            out.append(row)
        return out


@dataclass(frozen=True)
class FactorModel:
    variables: tuple[str, ...]
    correlation: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    loadings: np.ndarray
    communalities: np.ndarray
    variance: VarianceTable
    rotated_loadings: np.ndarray | None = None
    rotation: np.ndarray | None = field(default=None, repr=False)
    varimax_criteria: tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]


@dataclass(frozen=True)
class VarimaxResult:
    loadings: np.ndarray
    rotation: np.ndarray
    criteria: tuple[float, ...]
    sweeps: int


def pca(matrix: FeatureMatrix) -> FactorModel:
    """All-component PCA of the column correlation matrix (unrotated)."""
    r = correlation_matrix(matrix)
    eigenvalues, vectors = jacobi_eigh(r)
    loadings = vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))
    return FactorModel(
        variables=matrix.col_ids,
        correlation=r,
        eigenvalues=eigenvalues,
        eigenvectors=vectors,
        loadings=loadings,
        communalities=communalities(loadings),
        variance=VarianceTable(eigenvalues, r.shape[0], eigenvalues.copy()),
    )


def retain_factors(eigenvalues, policy="kaiser") -> int:
    """Number of components to keep: ``'kaiser'`` (eigenvalue > 1) or a fixed count."""
    ev = np.asarray(eigenvalues, dtype=np.float64)
    if isinstance(policy, str):
        if policy.lower() not in ("kaiser", "auto"):
            raise ValueError(f"unknown retention policy {policy!r}")
        m = int(np.sum(ev > 1.0))
        if m == 0:
            warnings.warn("no eigenvalue exceeds 1; keeping one factor", DegenerateRetention,
                          stacklevel=2)
            return 1
        return m
    return int(min(max(int(policy), 1), ev.size))


def communalities(loadings) -> np.ndarray:
    x = np.asarray(loadings, dtype=np.float64)
    return np.sum(x * x, axis=1)


def varimax_criterion(loadings) -> float:
    b2 = np.asarray(loadings, dtype=np.float64) ** 2
    p = b2.shape[0]
    return float(np.sum(p * np.sum(b2 * b2, axis=0) - np.sum(b2, axis=0) ** 2) / (p * p))


def _order_and_sign(x: np.ndarray, rotation: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ss = np.sum(x * x, axis=0)
    order = np.argsort(-ss, kind="stable")
    x, rotation = x[:, order].copy(), rotation[:, order].copy()
    for j in range(x.shape[1]):
        if x[np.argmax(np.abs(x[:, j])), j] < 0:
            x[:, j] = -x[:, j]
            rotation[:, j] = -rotation[:, j]
    return x, rotation


def rotate_varimax(loadings, kaiser_normalize: bool = True, tol: float = 1e-8,
                   max_sweeps: int = 100) -> VarimaxResult:
    """Varimax rotation by successive pairwise planar rotations.

    Every column pair is rotated by the angle that maximizes the pair's
    varimax criterion; sweeps stop once a full sweep gains less than ``tol``
    or after ``max_sweeps``. Columns come back ordered by descending sum of
    squared loadings, each signed so its largest-magnitude entry is positive.
    ``criteria`` lists the criterion (on normalized loadings) before the
    first sweep and after each sweep.
    """
    a = np.array(loadings, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] < 2:
        raise ValueError("varimax needs at least two factors")
    p, m = a.shape

    scale = np.ones(p)
    if kaiser_normalize:
        h = np.sqrt(communalities(a))
        zero = h == 0
        if np.any(zero):
            warnings.warn(f"{int(zero.sum())} all-zero loading row(s) skip Kaiser normalization",
                          DegenerateLoadings, stacklevel=2)
        scale = np.where(zero, 1.0, h)
    b = a / scale[:, None]
    rot = np.eye(m)

    criteria = [varimax_criterion(b)]
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        saved_b, saved_rot = b.copy(), rot.copy()
        for j in range(m - 1):
            for k in range(j + 1, m):
                x, y = b[:, j], b[:, k]
                u = x * x - y * y
                v = 2.0 * x * y
                su, sv = u.sum(), v.sum()
                num = 2.0 * (p * np.dot(u, v) - su * sv)
                den = p * (np.dot(u, u) - np.dot(v, v)) - (su * su - sv * sv)
                phi = 0.25 * math.atan2(num, den)
                if phi == 0.0:
                    continue
                c, s = math.cos(phi), math.sin(phi)
                b[:, j], b[:, k] = c * x + s * y, -s * x + c * y
                rj, rk = rot[:, j].copy(), rot[:, k].copy()
                rot[:, j], rot[:, k] = c * rj + s * rk, -s * rj + c * rk
        crit = varimax_criterion(b)
        if crit < criteria[-1]:
            # converged: the sweep only added round-off, keep the better solution
            b, rot = saved_b, saved_rot
            break
        criteria.append(crit)
        if crit - criteria[-2] < tol:
            break

    rotated, rot = _order_and_sign(b * scale[:, None], rot)
    return VarimaxResult(rotated, rot, tuple(criteria), sweeps)


def varimax(loadings, kaiser_normalize: bool = True) -> np.ndarray:
    """Varimax-rotated copy of a ``p x m`` loading matrix (``m >= 2``)."""
    return rotate_varimax(loadings, kaiser_normalize).loadings


def variance_table(eigenvalues, loadings, rotated=None) -> VarianceTable:
    ev = np.asarray(eigenvalues, dtype=np.float64)
    extraction = communalities(np.asarray(loadings).T)
    rotation = None if rotated is None else communalities(np.asarray(rotated).T)
    return VarianceTable(ev, ev.size, extraction, rotation)


def scree_data(eigenvalues) -> list[tuple[int, float]]:
    return [(i + 1, float(v)) for i, v in enumerate(eigenvalues)]


def suppress(loadings, threshold: float = DEFAULT_SUPPRESS) -> np.ndarray:
    """Object array with ``None`` where ``|loading| < threshold``; input untouched."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    x = np.asarray(loadings, dtype=np.float64)
    out = np.empty(x.shape, dtype=object)
    for idx, v in np.ndenumerate(x):
        out[idx] = None if abs(v) < threshold else float(v)
    return out


def transpose_analysis(matrix: FeatureMatrix) -> FeatureMatrix:
    """Swap observations and variables, e.g. to correlate strokes across features."""
    return matrix.transpose()


def factor_analysis(matrix: FeatureMatrix, factors="kaiser", kaiser_normalize: bool = True,
                    rotate: bool = True) -> FactorModel:
    """PCA, factor retention, communalities, varimax and variance table in one go.

    With a single retained factor there is nothing to rotate and the
    rotated loadings equal the unrotated ones.
    """
    full = pca(matrix)
    m = retain_factors(full.eigenvalues, factors)
    loadings = full.loadings[:, :m].copy()
    rotated = rotation = None
    criteria: tuple[float, ...] = ()
    if rotate:
        if m >= 2:
            res = rotate_varimax(loadings, kaiser_normalize)
            rotated, rotation, criteria = res.loadings, res.rotation, res.criteria
        else:
            rotated, rotation = loadings.copy(), np.eye(1)
    return FactorModel(
        variables=full.variables,
        correlation=full.correlation,
        eigenvalues=full.eigenvalues,
        eigenvectors=full.eigenvectors,
        loadings=loadings,
        communalities=communalities(loadings),
        variance=variance_table(full.eigenvalues, loadings, rotated),
        rotated_loadings=rotated,
        rotation=rotation,
        varimax_criteria=criteria,
    )
