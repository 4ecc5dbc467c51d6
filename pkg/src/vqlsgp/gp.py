"""Classical Gaussian process regression with RBF, Matern-5/2 and tapered kernels.

The tapered family multiplies the Matern-5/2 kernel by a compactly supported
Wendland polynomial, which zeroes all covariances beyond the taper range and
keeps the covariance matrix banded on gridded inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, NonFiniteObjective, NotPositiveDefinite
from .numerics import (
    CholeskyFactor,
    cholesky,
    log_determinant,
    quasi_newton_minimize,
    spd_solve,
    triangular_solve,
)

KERNEL_FAMILIES = ("rbf", "matern52", "mt")

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Hyperparameters:
    """Kernel amplitude/length scale plus fixed taper range and noise variance."""

    amplitude: float = 1.0
    length_scale: float = 1.0
    taper_range: float = 0.64
    noise_variance: float = 0.01

    def __post_init__(self):
        if self.amplitude <= 0 or self.length_scale <= 0 or self.taper_range <= 0:
            raise ValueError("amplitude, length scale and taper range must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")


@dataclass(frozen=True)
class KernelSpec:
    family: str
    hyper: Hyperparameters = Hyperparameters()

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")

    def label(self) -> str:
        return {"rbf": "RBF", "matern52": "Matern52", "mt": "MT"}[self.family]


@dataclass(frozen=True)
class Dataset:
    """Training inputs (N, d) or (N,) with matching scalar targets."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.shape[0] != self.y.shape[0]:
            raise DimensionMismatch("inputs and targets must have equal length")

    def __len__(self) -> int:
        return self.x.shape[0]


@dataclass
class PosteriorResult:
    mean: np.ndarray
    covariance: np.ndarray
    lml: float | None = None

    def std(self) -> np.ndarray:
        """Pointwise standard deviation; NaN where the variance is negative."""
        var = np.diag(self.covariance)
        return np.sqrt(np.where(var >= 0, var, np.nan))


def _matern52_parts(h, sigma, ell):
    u = math.sqrt(5.0) * np.asarray(h, dtype=float) / ell
    poly = 1.0 + u + u * u / 3.0
    decay = np.exp(-u)
    return u, poly, decay, sigma * sigma * poly * decay


def _taper(h, theta):
    h = np.asarray(h, dtype=float)
    t = np.maximum(1.0 - h / theta, 0.0)
    # snap float noise at the support boundary to an exact zero so gridded
    # distances that mathematically equal the taper range truncate cleanly
    t = np.where(t < 1e-12, 0.0, t)
    return t**6 * (1.0 + 6.0 * h / theta + 35.0 * h * h / (3.0 * theta * theta))


def kernel_eval(spec: KernelSpec, h):
    """Covariance value(s) at distance h >= 0 (vectorized over h)."""
    hp = spec.hyper
    h = np.asarray(h, dtype=float)
    if spec.family == "rbf":
        value = hp.amplitude**2 * np.exp(-(h * h) / (2.0 * hp.length_scale**2))
    elif spec.family == "matern52":
        value = _matern52_parts(h, hp.amplitude, hp.length_scale)[3]
    else:
        value = _matern52_parts(h, hp.amplitude, hp.length_scale)[3] * _taper(
            h, hp.taper_range
        )
    return value if value.ndim else float(value)


def kernel_partials(spec: KernelSpec, h) -> tuple[np.ndarray, np.ndarray]:
    """(d k / d sigma, d k / d length_scale) at distance h."""
    hp = spec.hyper
    h = np.asarray(h, dtype=float)
    sigma, ell = hp.amplitude, hp.length_scale
    if spec.family == "rbf":
        k = sigma**2 * np.exp(-(h * h) / (2.0 * ell**2))
        return 2.0 * k / sigma, k * h * h / ell**3
    u, poly, decay, k52 = _matern52_parts(h, sigma, ell)
    d_sigma = 2.0 * k52 / sigma
    # d k52 / d ell through u = sqrt(5) h / ell, du/d ell = -u / ell
    d_ell = sigma * sigma * decay * (u * u * (1.0 + u) / 3.0) / ell
    if spec.family == "matern52":
        return d_sigma, d_ell
    t = _taper(h, hp.taper_range)
    return d_sigma * t, d_ell * t


def pairwise_distances(xa, xb) -> np.ndarray:
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    if xa.ndim == 1:
        xa = xa[:, None]
    if xb.ndim == 1:
        xb = xb[:, None]
    if xa.shape[1] != xb.shape[1]:
        raise DimensionMismatch("input dimensions differ")
    diff = xa[:, None, :] - xb[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def covariance_matrix(xa, xb, spec: KernelSpec) -> np.ndarray:
    """Cross-covariance matrix K[i, j] = k(||xa_i - xb_j||)."""
    return np.asarray(kernel_eval(spec, pairwise_distances(xa, xb)))


def noisy_covariance(train: Dataset, spec: KernelSpec) -> np.ndarray:
    k = covariance_matrix(train.x, train.x, spec)
    return k + spec.hyper.noise_variance * np.eye(len(train))


def posterior(train: Dataset, x_test, spec: KernelSpec,
              inverse: np.ndarray | None = None) -> PosteriorResult:
    """Predictive mean and covariance at the test inputs.

    Default path factors the noisy covariance once and solves triangular
    systems; pass ``inverse`` to use a precomputed inverse instead (the
    solver-backed pipeline does this).
    """
    k_hat = noisy_covariance(train, spec)
    k_star = covariance_matrix(train.x, x_test, spec)
    k_ss = covariance_matrix(x_test, x_test, spec)
    if inverse is not None:
        if inverse.shape != k_hat.shape:
            raise DimensionMismatch("provided inverse has the wrong shape")
        alpha = inverse @ train.y
        mean = k_star.T @ alpha
        cov = k_ss - k_star.T @ inverse @ k_star
        return PosteriorResult(mean=mean, covariance=cov, lml=None)
    factor = cholesky(k_hat)
    alpha = spd_solve(factor, train.y)
    mean = k_star.T @ alpha
    v = triangular_solve(factor, k_star)
    cov = k_ss - v.T @ v
    lml = _lml_from_factor(train.y, alpha, factor)
    return PosteriorResult(mean=mean, covariance=cov, lml=lml)


def _lml_from_factor(y, alpha, factor: CholeskyFactor) -> float:
    n = y.shape[0]
    return float(-0.5 * y @ alpha - 0.5 * log_determinant(factor) - 0.5 * n * LOG_2PI)


def log_marginal_likelihood(train: Dataset, spec: KernelSpec) -> float:
    factor = cholesky(noisy_covariance(train, spec))
    alpha = spd_solve(factor, train.y)
    return _lml_from_factor(train.y, alpha, factor)


def lml_gradient(train: Dataset, spec: KernelSpec) -> np.ndarray:
    """Gradient of the log marginal likelihood over (amplitude, length scale)."""
    h = pairwise_distances(train.x, train.x)
    factor = cholesky(noisy_covariance(train, spec))
    alpha = spd_solve(factor, train.y)
    k_inv = spd_solve(factor, np.eye(len(train)))
    d_sigma, d_ell = kernel_partials(spec, h)
    grad = np.empty(2)
    for i, dk in enumerate((d_sigma, d_ell)):
        grad[i] = 0.5 * alpha @ dk @ alpha - 0.5 * np.trace(k_inv @ dk)
    return grad


def optimize_hyperparameters(train: Dataset, spec: KernelSpec, restarts: int = 4,
                             seed: int = 0) -> Hyperparameters:
    """Maximize the LML over (amplitude, length scale) in log space.

    Noise variance and taper range stay fixed at their configured values. The
    search starts from (1, 1) plus ``restarts`` log-uniform draws in
    [0.1, 10]; the draw with the best LML wins.
    """
    rng = np.random.default_rng(seed)
    starts = [np.zeros(2)]
    for _ in range(restarts):
        starts.append(rng.uniform(math.log(0.1), math.log(10.0), 2))

    def negative_lml(log_params):
        trial = _with_params(spec, log_params)
        try:
            return -log_marginal_likelihood(train, trial)
        except NotPositiveDefinite:
            return np.inf

    def negative_lml_grad(log_params):
        trial = _with_params(spec, log_params)
        try:
            grad = lml_gradient(train, trial)
        except NotPositiveDefinite:
            return np.zeros(2)
        # d/d log z = z * d/d z
        return -grad * np.exp(log_params)

    # Wide log-space box: keeps the search effectively unconstrained while
    # stopping runaway drift along likelihood-flat directions (the tapered
    # kernel is insensitive to length scales far beyond the taper range).
    bounds = [(math.log(1e-4), math.log(1e4))] * 2
    best = None
    for start in starts:
        try:
            result = quasi_newton_minimize(negative_lml, negative_lml_grad, start,
                                           tol=1e-7, max_iters=200, bounds=bounds)
        except NonFiniteObjective:
            continue
        if best is None or result.fun < best.fun:
            best = result
    if best is None:
        raise NotPositiveDefinite("no hyperparameter start produced a valid covariance")
    hyper = spec.hyper
    return replace(
        hyper,
        amplitude=float(np.exp(best.x[0])),
        length_scale=float(np.exp(best.x[1])),
    )


def _with_params(spec: KernelSpec, log_params) -> KernelSpec:
    return replace(
        spec,
        hyper=replace(
            spec.hyper,
            amplitude=float(np.exp(log_params[0])),
            length_scale=float(np.exp(log_params[1])),
        ),
    )
