"""Gaussian SU(m+1) polynomial toolkit.

Sampling of the weighted Gaussian coefficient ensemble, stable evaluation
at large degree, Mobius-invariance checks, exact and Jensen-type zero
counting, and hole-probability experiments with an exact lower-bound
certificate.
"""

from .ensemble import (
    GENERATOR_ID,
    MEASUREMENT_OFFSET,
    ComplexPoint,
    EnsembleSpec,
    MultiIndex,
    SUPolynomial,
    binomial,
    degree_table,
    evaluate_normalized,
    evaluate_normalized_many,
    log_abs,
    log_abs_many,
    multi_index_matrix,
    multinomial_log,
    multinomial_log_table,
    read_coefficient_dump,
    sample_alpha_block,
    sample_polynomial,
    sample_trial,
    trial_stream,
    write_coefficient_dump,
)
from .errors import (
    BoundaryAmbiguityError,
    DegeneratePolynomialError,
    ExactZeroError,
    SupolyError,
)
from .holes import (
    DecayFit,
    HoleEstimate,
    OmegaBound,
    deviation_counts,
    deviation_experiment,
    fit_decay_exponent,
    fit_omega_exponent,
    hole_hits,
    hole_indicator_m1,
    hole_probability_mc,
    omega_lower_bound,
    sample_omega_conditioned,
    sanity_check_omega,
)
from .mobius import (
    BasisTransform,
    MobiusParameter,
    build_basis_transform,
    expand_shifted_basis,
    invariant_norm,
    invariant_norm_mc,
    shifted_value_normalized,
    transform_coefficients,
    unitarity_defect,
)
from .zeros import (
    CountingEstimate,
    RootSet,
    SphereAverage,
    counting_exact_m1,
    counting_jensen,
    expected_counting,
    jensen_calibration_constant,
    max_log_on_ball,
    poisson_kernel,
    roots_m1,
    sample_sphere,
    sphere_log_average,
)

__version__ = "0.1.0"

__all__ = [
    "GENERATOR_ID",
    "MEASUREMENT_OFFSET",
    "__version__",
    "BasisTransform",
    "BoundaryAmbiguityError",
    "ComplexPoint",
    "CountingEstimate",
    "DecayFit",
    "DegeneratePolynomialError",
    "EnsembleSpec",
    "ExactZeroError",
    "HoleEstimate",
    "MobiusParameter",
    "MultiIndex",
    "OmegaBound",
    "RootSet",
    "SphereAverage",
    "SUPolynomial",
    "SupolyError",
    "binomial",
    "build_basis_transform",
    "counting_exact_m1",
    "counting_jensen",
    "degree_table",
    "deviation_counts",
    "deviation_experiment",
    "evaluate_normalized",
    "evaluate_normalized_many",
    "expand_shifted_basis",
    "expected_counting",
    "fit_decay_exponent",
    "fit_omega_exponent",
    "hole_hits",
    "hole_indicator_m1",
    "hole_probability_mc",
    "invariant_norm",
    "invariant_norm_mc",
    "jensen_calibration_constant",
    "log_abs",
    "log_abs_many",
    "max_log_on_ball",
    "multi_index_matrix",
    "multinomial_log",
    "multinomial_log_table",
    "omega_lower_bound",
    "poisson_kernel",
    "read_coefficient_dump",
    "roots_m1",
    "sample_alpha_block",
    "sample_omega_conditioned",
    "sample_polynomial",
    "sample_sphere",
    "sample_trial",
    "sanity_check_omega",
    "shifted_value_normalized",
    "sphere_log_average",
    "trial_stream",
    "transform_coefficients",
    "unitarity_defect",
    "write_coefficient_dump",
]
