"""Transfer operators, linear response and solenoid lifts for intermittent circle maps."""

from ._core import (
    CircleMap,
    ConfigError,
    ConvergenceError,
    DomainError,
    IntermittentMap,
    acceptance,
    birkhoff,
    correlations,
    fit_decay,
    grid_edges,
    invariant_density,
    kernel_min,
    partition_sequences,
    response,
    run_experiment,
    solenoid_step,
)

__all__ = [
    "CircleMap",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "IntermittentMap",
    "acceptance",
    "birkhoff",
    "correlations",
    "fit_decay",
    "grid_edges",
    "invariant_density",
    "kernel_min",
    "partition_sequences",
    "response",
    "run_experiment",
    "solenoid_step",
]
