"""LOCSME and LOCSME-CG robust adaptive beamformers."""

from ._core import (
    ArrayGeometry,
    BeamformerConfig,
    ConfigError,
    MismatchModel,
    QuorumError,
    Scenario,
    ScenarioError,
    SolveError,
    build_sector_matrix,
    csv,
    estimate_power,
    flop_count,
    monte_carlo,
    mvdr_weights,
    optimal_sinr_db,
    output_sinr_db,
    projector,
    run_trial,
    shrinkage_coefficient,
    steering_vector,
    true_inc_matrix,
)

__all__ = [
    "ArrayGeometry",
    "BeamformerConfig",
    "ConfigError",
    "MismatchModel",
    "QuorumError",
    "Scenario",
    "ScenarioError",
    "SolveError",
    "build_sector_matrix",
    "csv",
    "estimate_power",
    "flop_count",
    "monte_carlo",
    "mvdr_weights",
    "optimal_sinr_db",
    "output_sinr_db",
    "projector",
    "run_trial",
    "shrinkage_coefficient",
    "steering_vector",
    "true_inc_matrix",
]
