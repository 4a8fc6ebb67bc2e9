"""Isometric subspace pairs of L_p for even p, with machine-checkable evidence.

The package builds, for each even p = 2k >= 4, a pair of sequence spaces
inside L_p spanned by sums of symmetric three-valued random variables:
a reference family h_j with fixed masses and a perturbed family f_j
carrying one extra heavy atom of scale j and mass nu_j.  Matching all
even moments up to order p makes the spans isometric; the mass schedule
nu_j ~ j^(2-p) is what the complementation analysis feeds on.

Layout:

* `moments`: exact even moments of sums of independent symmetric
  variables, and the brute-force convolution oracle.
* `momentpoly`: the moment polynomials H_m and F_m^(j) in the masses,
  their gradients and Jacobians, and the Vandermonde determinant check.
* `solver`: the solvable box around a base point, the damped Newton
  solve for the perturbed masses, and certificate construction.
* `p4`: the closed-form two-generator pair at p = 4, matched column
  against the printed closed forms.
* `analysis`: isometry spot checks, span projections with p-norm lower
  bounds, the C_k moment bound, and the weight-series certificates.
* `serialize`: bit-faithful JSON for certificates and reports.
* `cli`: the `lp-isoforge` command.
"""

from .analysis import (
    FiniteSpan,
    IsometryCheckResult,
    ProjectionOperator,
    UncomplementedCertificate,
    VplCheck,
    build_projection,
    c_k_constant,
    isometry_check,
    projection_norm_grid_search,
    projection_norm_lower_bound,
    uncomplemented_certificate,
    vpl_check,
)
from .errors import (
    CapExceededError,
    ContinuationFailureError,
    DegenerateInputError,
    InfeasibleMassError,
    LpIsoforgeError,
    NewtonDivergenceError,
    NoSolutionError,
    SchemaError,
    SingularJacobianError,
)
from .momentpoly import (
    CmAlphaTable,
    MuVector,
    cm_alpha_table,
    eval_F,
    eval_H,
    grad_H,
    jacobian_F,
    vandermonde_check,
)
from .moments import (
    DiscreteDistribution,
    IndependentSumSpec,
    SymmetricAtomVariable,
    abs_moment,
    convolve,
    even_moment_from_tables,
    even_moment_of_sum,
    moment_coefficients,
)
from .numeric import DEFAULT_PRECISION_BITS, MIN_PRECISION_BITS, mpf_to_fraction, to_mpf
from .p4 import P4PairRow, build_p4_row, build_p4_table, match_three_valued, rosenthal_moments
from .serialize import (
    CERT_SCHEMA_ID,
    cert_from_dict,
    cert_to_dict,
    load_certificate,
    save_certificate,
)
from .solver import (
    BallParams,
    CertEntry,
    ConstructionCertificate,
    HValues,
    ball_params,
    closed_form_k2,
    construct_pair,
    default_base_point,
    nu_schedule_value,
    solve_mu,
    target_h,
)

__version__ = "0.1.0"
