"""Reciprocity-based secret-key capacity under realistic angular spectra.

Spatial correlation between a legitimate receiver and a nearby eavesdropper
(:mod:`skcprop.correlation`), Gaussian key-capacity bounds
(:mod:`skcprop.bounds`), a Monte Carlo multipath oracle
(:mod:`skcprop.montecarlo`) and distance sweeps (:mod:`skcprop.sweep`).
"""

from .bounds import (
    BoundsReport,
    CovarianceSet,
    Scenario,
    bounds_report,
    covariances,
    eve_mi_asymptote,
    lower_bound,
    mi_xy,
    mi_xy_given_z,
    mi_xz,
    mi_yz,
    nz_threshold,
    rho_sq_max,
    tight_capacity,
    upper_bound,
)
from .correlation import (
    Displacement,
    correlation,
    rho_discrete,
    rho_iso2d,
    rho_iso3d,
    rho_quadrature,
)
from .errors import (
    ConfigError,
    DomainError,
    NumericalError,
    QuadratureError,
    SingularSupportError,
)
from .montecarlo import GaussianMIEstimator, McConfig, estimate_mi_gaussian, estimate_rho, validate
from .spectrum import (
    Direction,
    Discrete,
    Isotropic2D,
    Isotropic3D,
    Laplacian,
    PathComponent,
    density,
    laplacian_normalization,
    sample_direction,
)

__version__ = "0.1.0"
