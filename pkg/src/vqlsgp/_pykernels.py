"""Pure-numpy implementations of the hot solver kernels.

Mirrors the compiled extension in `_kernels.pyx`; `backend` picks whichever is
available. All states here are real float64 vectors: the ansatz families use
only RY/CZ/real embeddings, so no imaginary parts ever appear on this path.

Ansatz programs are (n_ops, 3) int arrays of rows
    (OP_RY, qubit, theta_index) | (OP_CZ, qubit_a, qubit_b) | (OP_UY, 0, 0)
where OP_UY applies the precomputed dense embedding matrix.
"""
from __future__ import annotations

import numpy as np

OP_RY = 0
OP_CZ = 1
OP_UY = 2

COMPILED = False

COST_LOCAL = 0
COST_GLOBAL = 1

_HALF_PI = np.pi / 2.0


def ansatz_state(ops: np.ndarray, theta: np.ndarray, uy: np.ndarray | None,
                 n: int) -> np.ndarray:
    """Propagate |0...0> through the encoded ansatz program."""
    v = np.zeros(1 << n)
    v[0] = 1.0
    for code, a, b in ops:
        if code == OP_RY:
            half = 0.5 * theta[b]
            c, s = np.cos(half), np.sin(half)
            v3 = v.reshape(1 << a, 2, -1)
            lo = v3[:, 0, :].copy()
            hi = v3[:, 1, :].copy()
            v3[:, 0, :] = c * lo - s * hi
            v3[:, 1, :] = s * lo + c * hi
        elif code == OP_CZ:
            q0, q1 = (a, b) if a < b else (b, a)
            v5 = v.reshape(1 << q0, 2, 1 << (q1 - q0 - 1), 2, -1)
            v5[:, 1, :, 1, :] *= -1.0
        else:
            v = uy @ v
    return v


def cost_components(ops, theta, uy, q_num, w_num, q_den, n, kind):
    """Numerator and denominator of the configured cost at one angle setting."""
    v = ansatz_state(ops, theta, uy, n)
    den = float(v @ (q_den @ v))
    if kind == COST_LOCAL:
        num = float(v @ (q_num @ v))
    else:
        overlap = float(w_num @ v)
        num = overlap * overlap
    return num, den


def cost_and_grad(ops, theta, uy, q_num, w_num, q_den, n, kind,
                  grad_out: np.ndarray) -> float:
    """Cost plus its full parameter-shift gradient (quotient rule)."""
    theta = np.array(theta, dtype=float)
    num, den = cost_components(ops, theta, uy, q_num, w_num, q_den, n, kind)
    if kind == COST_LOCAL:
        cost = 0.5 - num / (2.0 * n * den)
        scale = 2.0 * n
    else:
        cost = 1.0 - num / den
        scale = 1.0
    den_sq = den * den
    for j in range(theta.shape[0]):
        theta[j] += _HALF_PI
        num_p, den_p = cost_components(ops, theta, uy, q_num, w_num, q_den, n, kind)
        theta[j] -= np.pi
        num_m, den_m = cost_components(ops, theta, uy, q_num, w_num, q_den, n, kind)
        theta[j] += _HALF_PI
        d_num = 0.5 * (num_p - num_m)
        d_den = 0.5 * (den_p - den_m)
        grad_out[j] = -(d_num * den - num * d_den) / (scale * den_sq)
    return cost
