"""Numerical laboratory for u_t = Δu − χ∇·(u∇v) + u(a − bu), v_t = Δv − λv + μu."""

from ._core import (
    ChemolabError,
    ConfigError,
    ContractionFailure,
    Params,
    TheoryConstants,
    apply_semigroup,
    compute_constants,
    convergence_K,
    gaussian_tail,
    local_horizon,
    minimal_ball_radius,
    persistence_L,
    persistence_T,
    picard_solve,
    principal_eigenvalue,
    principal_eigenvalue_fd,
    run_experiment,
    simulate,
    step1_Mtilde,
)

__all__ = [
    "ChemolabError",
    "ConfigError",
    "ContractionFailure",
    "Params",
    "TheoryConstants",
    "apply_semigroup",
    "compute_constants",
    "convergence_K",
    "gaussian_tail",
    "local_horizon",
    "minimal_ball_radius",
    "persistence_L",
    "persistence_T",
    "picard_solve",
    "principal_eigenvalue",
    "principal_eigenvalue_fd",
    "run_experiment",
    "simulate",
    "step1_Mtilde",
]
