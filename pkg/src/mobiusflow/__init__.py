"""Moebius-twisted correlation sums along skew products over the torus.

The package builds rotation angles with prescribed continued-fraction growth,
splits driving functions into coboundary and resonant parts, runs the skew
product on a truncated infinite torus, and measures mu(n)-weighted phase sums
over short segments.  Everything numeric is backed by exact integer snapshots
so certificates are reproducible bit for bit.
"""

from .contfrac import (
    AngleCF,
    AngleDocumentError,
    PrecisionFloorError,
    QuotientsExhausted,
    ResourceBudgetError,
    angle_digest,
    angle_from_json,
    angle_to_json,
    build_exp_alpha,
    build_poly_alpha,
    check_convergent_bounds,
    explicit_angle,
    frac_mod1,
    legendre_locate,
    rational_angle,
    signed_residue,
)
from .experiments import (
    CorrelationRecord,
    correlation_sum,
    irregularity_demo,
    rational_case,
    records_digest,
    records_to_csv,
    sweep,
)
from .flow import (
    ConjugacyPair,
    FlowConfig,
    FrequencyVector,
    TorusPoint,
    birkhoff_avg,
    build_conjugacy,
    check_conjugacy,
    distality_probe,
    metric_d,
    orbit_direct,
    orbit_fast,
    pairing,
    psi_inv,
    psi_map,
    step,
)
from .harmonic import (
    CoboundaryFunction,
    Decay,
    FourierSeries,
    analytic_h_sample,
    check_coeff_bound,
    furstenberg_h,
    smooth_h_sample,
    solve_coboundary,
    split_resonant,
    split_tau,
)
from .moebius import MuTable, sieve_full, sieve_segment, twisted_sum
from .spectrum import (
    check_flat_lower_bound,
    check_resonant_scaling,
    classify,
    classify_tau,
    truncation_indices,
)

__version__ = "0.1.0"

__all__ = [
    "AngleCF",
    "AngleDocumentError",
    "PrecisionFloorError",
    "QuotientsExhausted",
    "ResourceBudgetError",
    "angle_digest",
    "angle_from_json",
    "angle_to_json",
    "build_exp_alpha",
    "build_poly_alpha",
    "check_convergent_bounds",
    "explicit_angle",
    "frac_mod1",
    "legendre_locate",
    "rational_angle",
    "signed_residue",
    "CorrelationRecord",
    "correlation_sum",
    "irregularity_demo",
    "rational_case",
    "records_digest",
    "records_to_csv",
    "sweep",
    "ConjugacyPair",
    "FlowConfig",
    "FrequencyVector",
    "TorusPoint",
    "birkhoff_avg",
    "build_conjugacy",
    "check_conjugacy",
    "distality_probe",
    "metric_d",
    "orbit_direct",
    "orbit_fast",
    "pairing",
    "psi_inv",
    "psi_map",
    "step",
    "CoboundaryFunction",
    "Decay",
    "FourierSeries",
    "analytic_h_sample",
    "check_coeff_bound",
    "furstenberg_h",
    "smooth_h_sample",
    "solve_coboundary",
    "split_resonant",
    "split_tau",
    "MuTable",
    "sieve_full",
    "sieve_segment",
    "twisted_sum",
    "check_flat_lower_bound",
    "check_resonant_scaling",
    "classify",
    "classify_tau",
    "truncation_indices",
    "__version__",
]
