from .correlation import CorrelationResult, correlation_matrix, pearson, significance_stars
from .eigen import jacobi_eigh
from .factor import (
    FactorModel,
    VarianceTable,
    VarimaxResult,
    communalities,
    factor_analysis,
    pca,
    retain_factors,
    rotate_varimax,
    scree_data,
    suppress,
    transpose_analysis,
    variance_table,
    varimax,
    varimax_criterion,
)
from .matrix import FeatureMatrix, read_matrix_csv, write_matrix_csv
from .special import betainc, correlation_p_value, t_two_tailed

__all__ = [
    "CorrelationResult", "FactorModel", "FeatureMatrix", "VarianceTable", "VarimaxResult",
    "betainc", "communalities", "correlation_matrix", "correlation_p_value", "factor_analysis",
    "jacobi_eigh", "pca", "pearson", "read_matrix_csv", "retain_factors", "rotate_varimax",
    "scree_data", "significance_stars", "suppress", "t_two_tailed", "transpose_analysis",
    "variance_table", "varimax", "varimax_criterion", "write_matrix_csv",
]
