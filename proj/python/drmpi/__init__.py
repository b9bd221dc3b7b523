"""Robust and entropy-regularized modified policy iteration on tabular MDPs."""

from ._core import (
    CliffGridSpec,
    DualSolution,
    GarnetSpec,
    MpiConfig,
    Policy,
    RobustConfig,
    RunRecord,
    SoftConfig,
    TabularMdp,
    adversarial_policy,
    exact_policy_value,
    generate_cliff_grid,
    generate_garnet,
    greedy_policy,
    klreg_dual_logsumexp,
    klreg_dual_taylor,
    mdp_from_json,
    mdp_to_json,
    optimal_lambda,
    optimal_value,
    run_dr_mpi,
    run_experiment_json,
    run_soft_dr_mpi,
    soft_optimal_value,
)

__all__ = [
    "CliffGridSpec",
    "DualSolution",
    "GarnetSpec",
    "MpiConfig",
    "Policy",
    "RobustConfig",
    "RunRecord",
    "SoftConfig",
    "TabularMdp",
    "adversarial_policy",
    "exact_policy_value",
    "generate_cliff_grid",
    "generate_garnet",
    "greedy_policy",
    "klreg_dual_logsumexp",
    "klreg_dual_taylor",
    "mdp_from_json",
    "mdp_to_json",
    "optimal_lambda",
    "optimal_value",
    "run_dr_mpi",
    "run_experiment_json",
    "run_soft_dr_mpi",
    "soft_optimal_value",
]

__version__ = "0.1.0"
