"""Dense real linear algebra and the classical optimizers used everywhere else.

Factorizations are delegated to numpy/scipy LAPACK wrappers; this module owns
the validation, the error mapping, and the optimizer state handling.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (
    DimensionMismatch,
    NonFiniteGradient,
    NonFiniteObjective,
    NotPositiveDefinite,
)

SYMMETRY_RTOL = 1e-12


def _as_square_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular factor of an SPD matrix, K = L L^T."""

    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def cholesky(a, jitter: bool = False) -> CholeskyFactor:
    """Factor a symmetric positive-definite matrix as L L^T.

    Raises NotPositiveDefinite instead of silently regularizing; pass
    ``jitter=True`` to add 1e-10 * trace/N to the diagonal first.
    """
    a = _as_square_matrix(a)
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.T).max() > SYMMETRY_RTOL * scale * 10:
        raise DimensionMismatch("matrix is not symmetric")
    if jitter:
        a = a + (1e-10 * np.trace(a) / a.shape[0]) * np.eye(a.shape[0])
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return CholeskyFactor(lower=lower)


def triangular_solve(factor: CholeskyFactor, rhs, transposed: bool = False) -> np.ndarray:
    """Solve L x = rhs (or L^T x = rhs with ``transposed=True``)."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != factor.dim:
        raise DimensionMismatch(
            f"rhs length {rhs.shape[0]} does not match factor dimension {factor.dim}"
        )
    return scipy.linalg.solve_triangular(factor.lower, rhs, lower=True, trans=1 if transposed else 0)


def spd_solve(factor: CholeskyFactor, rhs) -> np.ndarray:
    """Solve (L L^T) x = rhs by two triangular solves."""
    return triangular_solve(factor, triangular_solve(factor, rhs), transposed=True)


def log_determinant(factor: CholeskyFactor) -> float:
    """log|K| of the factored matrix, computed as 2 * sum(log diag(L))."""
    return 2.0 * float(np.sum(np.log(np.diag(factor.lower))))


@dataclass(frozen=True)
class AdamState:
    """Adam moment estimates; treated as an immutable value."""

    step: int
    first_moment: np.ndarray
    second_moment: np.ndarray
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def initial(cls, dim: int, learning_rate: float = 0.01, beta1: float = 0.9,
                beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            step=0,
            first_moment=np.zeros(dim),
            second_moment=np.zeros(dim),
            learning_rate=learning_rate,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(state: AdamState, params, grad) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; returns the new parameters and state."""
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if grad.shape != params.shape or state.first_moment.shape != params.shape:
        raise DimensionMismatch("parameter, gradient and moment shapes must agree")
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient("gradient contains NaN or infinity")
    t = state.step + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * grad
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * grad**2
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, replace(state, step=t, first_moment=m, second_moment=v)


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    iterations: int
    converged: bool


def quasi_newton_minimize(f, grad_f, x0, tol: float = 1e-9,
                          max_iters: int = 500, bounds=None) -> MinimizeResult:
    """Minimize a smooth function with L-BFGS (memory 10, strong-Wolfe search).

    The result carries a ``converged`` flag: final projected-gradient norm
    below ``tol`` within the iteration budget.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    f0 = float(f(x0))
    g0 = np.asarray(grad_f(x0), dtype=float)
    if not np.isfinite(f0) or not np.all(np.isfinite(g0)):
        raise NonFiniteObjective("objective or gradient non-finite at the initial point")
    res = scipy.optimize.minimize(
        f,
        x0,
        jac=grad_f,
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": max_iters, "gtol": tol, "ftol": 1e-16, "maxcor": 10},
    )
    grad_norm = float(np.max(np.abs(np.asarray(res.jac, dtype=float))))
    if not np.isfinite(res.fun):
        raise NonFiniteObjective("objective diverged to a non-finite value")
    return MinimizeResult(
        x=np.asarray(res.x, dtype=float),
        fun=float(res.fun),
        grad_norm=grad_norm,
        iterations=int(res.nit),
        converged=bool(grad_norm <= tol),
    )


def finite_difference_gradient(f, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient, (f(x+h e_i) - f(x-h e_i)) / (2h)."""
    if h <= 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * h)
    return grad
