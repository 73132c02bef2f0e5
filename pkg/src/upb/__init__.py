"""Upper bounds on the diversity of unitary constellations.

Numerically evaluates eigenvalue-density ball volumes on U(n), solves the
packing equality for the critical radius, and turns it into upper bounds on
the diversity sum and product, alongside random-search baselines.
"""

from .bounds import (
    BOUND_IDS,
    BOUND_METRIC,
    AsymptoticBound,
    BoundResult,
    SolveDiagnostics,
    SolverConfig,
    asymptotic_lower_bound,
    b1_of_r,
    b2_of_r,
    b3_of_r,
    bound_b1,
    bound_b2,
    bound_b3,
    crossover_radius,
    euclidean_riemannian_envelope,
    evaluate_bound,
    exact_delta,
    solve_r0,
    solver_key,
)
from .constellation import (
    Constellation,
    DiversitySummary,
    chordal_packing_radius,
    diversity_product,
    diversity_sum,
    diversity_summary,
    load_constellation,
    random_search,
    riemannian_distance,
    save_constellation,
)
from .errors import (
    ConfigError,
    DimensionError,
    NumericalError,
    ParseError,
    RangeError,
    UnsupportedStrategyError,
    UpbError,
    ValidationError,
)
from .matrices import (
    UnitaryMatrix,
    as_complex_matrix,
    determinant,
    frobenius_norm,
    haar_sample,
    stacked_logabsdet,
    unitarity_residual,
    unitary_eigenangles,
)
from .weyl import (
    METRICS,
    IntegrationConfig,
    MassEstimate,
    ball_mass,
    ball_volume_fraction,
    log_total_mass,
    max_radius,
    normalizer_estimate,
    resolve_strategy,
    total_mass,
    weyl_density,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticBound",
    "BOUND_IDS",
    "BOUND_METRIC",
    "BoundResult",
    "ConfigError",
    "Constellation",
    "DimensionError",
    "DiversitySummary",
    "IntegrationConfig",
    "METRICS",
    "MassEstimate",
    "NumericalError",
    "ParseError",
    "RangeError",
    "SolveDiagnostics",
    "SolverConfig",
    "UnitaryMatrix",
    "UnsupportedStrategyError",
    "UpbError",
    "ValidationError",
    "__version__",
    "as_complex_matrix",
    "asymptotic_lower_bound",
    "b1_of_r",
    "b2_of_r",
    "b3_of_r",
    "ball_mass",
    "ball_volume_fraction",
    "bound_b1",
    "bound_b2",
    "bound_b3",
    "chordal_packing_radius",
    "crossover_radius",
    "determinant",
    "diversity_product",
    "diversity_sum",
    "diversity_summary",
    "euclidean_riemannian_envelope",
    "evaluate_bound",
    "exact_delta",
    "frobenius_norm",
    "haar_sample",
    "load_constellation",
    "log_total_mass",
    "max_radius",
    "normalizer_estimate",
    "random_search",
    "resolve_strategy",
    "riemannian_distance",
    "save_constellation",
    "solve_r0",
    "solver_key",
    "stacked_logabsdet",
    "total_mass",
    "unitarity_residual",
    "unitary_eigenangles",
    "weyl_density",
]
