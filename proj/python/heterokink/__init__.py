"""Heteroclinic antikinks of the stationary CCH and HCCH equations."""

from ._heterokink import (
    ContractViolation,
    DomainError,
    MismatchedFamilies,
    NumericalFailure,
    __version__,
    dimension,
    distance,
    eigenvalues,
    fit_cube_root_A,
    fit_linear_A,
    fit_log_width,
    lambert_w,
    predict,
    rhs,
    scan,
    solve_het,
)

__all__ = [
    "ContractViolation",
    "DomainError",
    "MismatchedFamilies",
    "NumericalFailure",
    "__version__",
    "dimension",
    "distance",
    "eigenvalues",
    "fit_cube_root_A",
    "fit_linear_A",
    "fit_log_width",
    "lambert_w",
    "predict",
    "rhs",
    "scan",
    "solve_het",
]
