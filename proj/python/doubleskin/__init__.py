"""Optimal boundary control with a layer of critically sized Robin particles."""

from ._core import (
    AssemblyError,
    ConfigError,
    DomainError,
    HomogConstants,
    ProblemConfig,
    SolverError,
    constants,
    convergence_study,
    effective_robin,
    energy_eps,
    energy_limit,
    gradient_check,
    parse_config,
    radial_robin_oracle,
    run,
    serialize_config,
    solve_eps,
    solve_limit,
    strange_term_coeff,
)

__all__ = [
    "AssemblyError",
    "ConfigError",
    "DomainError",
    "HomogConstants",
    "ProblemConfig",
    "SolverError",
    "constants",
    "convergence_study",
    "effective_robin",
    "energy_eps",
    "energy_limit",
    "gradient_check",
    "parse_config",
    "radial_robin_oracle",
    "run",
    "serialize_config",
    "solve_eps",
    "solve_limit",
    "strange_term_coeff",
]
