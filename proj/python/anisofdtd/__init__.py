"""Anisotropic FDTD solver: averaged and non-averaged constitutive schemes."""

from ._core import (
    FEMTOSECOND,
    CloakKind,
    CloakSpec,
    Component,
    ConfigError,
    Error,
    GuardViolation,
    Grid,
    InvalidInput,
    Materials,
    NonConvergence,
    NumericalError,
    PlaneWave,
    PmlParams,
    Scheme,
    Simulation,
    build_cloak,
    cloak_tensors,
    compute_cfl,
    convergence_order,
    eigenvalues,
    normalize_config,
    parse_quantity,
    relative_error,
    update_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]
