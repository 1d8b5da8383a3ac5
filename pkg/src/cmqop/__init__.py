"""Numerical Q-operator toolkit for the hyperbolic Calogero-Moser system.

Kernel, eigenvalue and joint eigenfunctions of the commuting integral-operator
family, plus desk-scale verification of the identities they satisfy: the
eigenfunction integral equation, kernel identities, discrete Hermiticity and
commutativity, the eigenvalue difference equation and the chamber asymptotics.
"""

from .chamber import (
    ChamberPoint,
    LatticeWeight,
    SpectralParameter,
    chamber_gap,
    elementary_symmetric,
    enumerate_weights,
    generating_E,
    project_cms,
    weyl_vector,
)
from .hyperg import (
    EvalDiagnostics,
    ExtendedEvaluator,
    FreeClosedFormN2,
    HCSeriesTable,
    a1_oracle,
    dominant_asymptotics,
    extended_hypergeom,
    hc_coefficients,
    hc_series_eval,
    l2_residual,
)
from .model import (
    PhysicalParams,
    apply_Hr,
    difference_eq_residual,
    eigenvalue_mu,
    integrand_I,
    kernel_K,
    kernel_identity_residual,
    phi_z,
    potential_u,
    psi_eval,
    qz_kernel,
    truncation_radius,
    weight_W,
)
from .quadrature import (
    ChamberGrid,
    NystromMatrix,
    build_grid,
    commutator_norm,
    integral_equation_residual,
    nystrom_matrix,
)
from .reports import ExperimentConfig, VerificationReport
from .special import (
    GammaProduct,
    cosh_fourier_gamma,
    gamma,
    harish_chandra_c,
    log_gamma,
    sharp_weights,
)

__version__ = "0.1.0"

__all__ = [
    "ChamberGrid",
    "ChamberPoint",
    "EvalDiagnostics",
    "ExperimentConfig",
    "ExtendedEvaluator",
    "FreeClosedFormN2",
    "GammaProduct",
    "HCSeriesTable",
    "LatticeWeight",
    "NystromMatrix",
    "PhysicalParams",
    "SpectralParameter",
    "VerificationReport",
    "a1_oracle",
    "apply_Hr",
    "build_grid",
    "chamber_gap",
    "commutator_norm",
    "cosh_fourier_gamma",
    "difference_eq_residual",
    "dominant_asymptotics",
    "eigenvalue_mu",
    "elementary_symmetric",
    "enumerate_weights",
    "extended_hypergeom",
    "gamma",
    "generating_E",
    "harish_chandra_c",
    "hc_coefficients",
    "hc_series_eval",
    "integral_equation_residual",
    "integrand_I",
    "kernel_K",
    "kernel_identity_residual",
    "l2_residual",
    "log_gamma",
    "nystrom_matrix",
    "phi_z",
    "potential_u",
    "project_cms",
    "psi_eval",
    "qz_kernel",
    "sharp_weights",
    "truncation_radius",
    "weight_W",
    "weyl_vector",
]
