"""Fast Lepskij balancing for spectral cut-off regularization in a Gaussian sequence model."""

from .analysis import (balance_cutoff_exact, check_conditions, constants, n_opt_closed, n_opt_empirical,
                       oracle_constant)
from .balancing import (BalancingConfig, SelectionResult, classic_index, fast_index,
                        functional_b, functional_B, solution_path)
from .estimator import (SolutionPath, diff_norm, error_norm, expected_diff_sq,
                        expected_error_sq, reconstruct)
from .harness import ExperimentConfig, run_experiment, run_replication
from .model import ModelParams, draw_problem, draw_split, validate_params
from .noise import NoiseBehavior, rho_deterministic, rho_estimated, rho_stochastic
from .schedule import Grid, cutoff, lookahead, max_level

__all__ = [
    "BalancingConfig", "ExperimentConfig", "Grid", "ModelParams", "NoiseBehavior",
    "SelectionResult", "SolutionPath", "check_conditions", "classic_index", "constants",
    "cutoff", "diff_norm", "draw_problem", "draw_split", "error_norm", "expected_diff_sq",
    "expected_error_sq", "fast_index", "functional_B", "functional_b", "lookahead",
    "balance_cutoff_exact", "max_level", "n_opt_closed", "n_opt_empirical", "oracle_constant", "reconstruct",
    "rho_deterministic", "rho_estimated", "rho_stochastic", "run_experiment",
    "run_replication", "solution_path", "validate_params",
]
