"""Certified invariant densities of piecewise expanding interval maps.

The pipeline discretizes the transfer operator (mass-norm Ulam cells or
sup-norm hat functions), encloses the stationary vector of the resulting
row-stochastic matrix by simplex contraction, and assembles an explicit
a-posteriori bound on the distance to the true invariant density, from
which a certified Lyapunov-exponent interval follows.
"""

from .intervals import EPS_MACH, PI, Interval, from_fraction, iv
from .maps import (
    Branch,
    Endpoint,
    ExpansionError,
    LYCoefficientsBV,
    LYCoefficientsLip,
    PiecewiseMap,
    distortion_sup,
    eval_on_interval,
    iterate_map,
    ly_coefficients_bv,
    ly_coefficients_lip,
    split_mod_branches,
)
from .ulam import (
    AssemblyConfig,
    TransitionMatrix,
    assemble_row,
    assemble_ulam,
    dump_matrix,
    markovize,
    nnz_bound,
)
from .hatbasis import (
    HatBasis,
    LinfMatrix,
    assemble_linearized,
    op_distance_bound,
    project_hat,
)
from .enclosure import (
    ContractionCertificate,
    EnclosedDensity,
    NotContractingError,
    contraction_sweep,
    float_ledger,
    zero_sum_operator_norm_bound,
)
from .certify import (
    Certificate,
    CertificateReport,
    LyapunovResult,
    attach_lyapunov,
    certify_l1,
    certify_linf,
    lyapunov,
    report,
)
from .cli import MapSpec, RunConfig, parse_map, run

__version__ = "0.1.0"
