"""Gaussian process regression backed by a simulated variational linear solver."""

from . import backend
from .bench import ExperimentConfig, generate_dataset, mse, snelson
from .circuits import AnsatzSpec, HadamardTestSpec, StatePrep, amplitude_embedding, basis_embedding, build_ansatz, hadamard_test
from .gp import Dataset, Hyperparameters, KernelSpec, PosteriorResult, covariance_matrix, kernel_eval, log_marginal_likelihood, lml_gradient, optimize_hyperparameters, posterior
from .numerics import AdamState, CholeskyFactor, adam_step, cholesky, finite_difference_gradient, log_determinant, quasi_newton_minimize, triangular_solve
from .pauli import DecomposedOperator, PauliString, decompose, pad_system, pauli_to_matrix, reconstruct
from .sim import CircuitOp, Gate, apply_controlled, apply_gate, inner_product, prob_zero, sample_prob_zero, zero_state
from .vqls import VqlsConfig, VqlsProblem, VqlsSolution, direct_cost_oracle, global_cost, local_cost, solve
from .vqls_gp import VqlsGpConfig, VqlsGpReport, invert_covariance, posterior_direct, vqls_gp_regress

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "AnsatzSpec",
    "CholeskyFactor",
    "CircuitOp",
    "Dataset",
    "DecomposedOperator",
    "ExperimentConfig",
    "Gate",
    "HadamardTestSpec",
    "Hyperparameters",
    "KernelSpec",
    "PauliString",
    "PosteriorResult",
    "StatePrep",
    "VqlsConfig",
    "VqlsGpConfig",
    "VqlsGpReport",
    "VqlsProblem",
    "VqlsSolution",
    "adam_step",
    "amplitude_embedding",
    "apply_controlled",
    "apply_gate",
    "backend",
    "basis_embedding",
    "build_ansatz",
    "cholesky",
    "covariance_matrix",
    "decompose",
    "direct_cost_oracle",
    "finite_difference_gradient",
    "generate_dataset",
    "global_cost",
    "hadamard_test",
    "inner_product",
    "invert_covariance",
    "kernel_eval",
    "local_cost",
    "log_determinant",
    "log_marginal_likelihood",
    "lml_gradient",
    "mse",
    "optimize_hyperparameters",
    "pad_system",
    "pauli_to_matrix",
    "posterior",
    "posterior_direct",
    "prob_zero",
    "quasi_newton_minimize",
    "reconstruct",
    "sample_prob_zero",
    "snelson",
    "solve",
    "triangular_solve",
    "vqls_gp_regress",
    "zero_state",
]
