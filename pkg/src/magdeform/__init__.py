"""Magnetic deformations of semiclassical eigenfunctions: numerical experiments.

Modules
-------
numerics
    Grids, wave fields, quadrature rules, the semiclassical DFT and the
    Hermitian eigensolver wrapper.
flatmag
    Constant magnetic potentials on flat space and the Weyl identity for the
    averaged intensity.
oscillator
    The magnetic harmonic oscillator with spectral, Mehler and coherent-state
    routes to the deformed ground state.
zonal
    Zonal harmonics on the sphere and the Bessel surrogate of their
    deformation.
deformlab
    Admissibility, ball averages, band statistics and restriction integrals.
experiments, report, cli
    Config-driven sweeps and CSV/JSON reports.
"""

from .deformlab import (
    AdmissibilityReport,
    AverageProfile,
    BandReport,
    Curve,
    MagneticFamily,
    OperatorSymbol,
    RestrictionReport,
    admissibility_check,
    average_over_ball,
    fubini_check,
    good_set_fraction,
    jacobian_du,
    restriction_integral,
    two_sided_band,
)
from .errors import (
    DegenerateBandError,
    DomainTruncationError,
    InconsistentFamilyError,
    InvalidArgumentError,
    MagDeformError,
    OrderSwapError,
    ResolutionError,
    SingularPhaseError,
)
from .flatmag import (
    averaged_intensity_flat,
    flat_magnetic_propagate,
    gaussian_state,
    motivation_identity_check,
    weyl_quantize_chi,
)
from .numerics import (
    BallQuadrature,
    CircleQuadrature,
    CutoffProfile,
    IntervalQuadrature,
    UniformGrid,
    WaveField,
    dft_forward,
    dft_inverse,
    disk_quadrature,
    gauss_legendre,
    hermitian_eigs,
    trapezoid_rule,
)
from .oscillator import (
    HOConfig,
    averaged_intensity_ho,
    build_ho_operator,
    coherent_oracle,
    conjugated_operator_check,
    deform_ground_state,
    ho_ground_state,
    mehler_propagate,
    propagate_spectral,
    sup_statistics,
)
from .report import ExperimentConfig, ReportRow, load_config, sweep_table
from .zonal import (
    ZonalConfig,
    averaged_intensity_zonal,
    bessel_j0,
    deformed_zonal_surrogate,
    legendre_pn,
    local_sup_bound_check,
    zonal_laplace_integral,
)

__version__ = "0.1.0"
