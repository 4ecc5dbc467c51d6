# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: real ansatz propagation and fused cost/gradient.

Interface mirrors `_pykernels`; see that module for the program encoding.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

OP_RY = 0
OP_CZ = 1
OP_UY = 2

COMPILED = True

COST_LOCAL = 0
COST_GLOBAL = 1

cdef double _HALF_PI = 1.5707963267948966
cdef double _PI = 3.141592653589793


cdef void _run_program(const long long[:, ::1] ops, const double[::1] theta,
                       const double[:, ::1] uy, bint has_uy,
                       double* v, double* scratch, int n, int d) noexcept nogil:
    cdef int k, i, j, q, r, c_idx, bit, b0, b1
    cdef long long code, a, b
    cdef double cth, sth, lo, hi, acc
    for i in range(d):
        v[i] = 0.0
    v[0] = 1.0
    for k in range(ops.shape[0]):
        code = ops[k, 0]
        a = ops[k, 1]
        b = ops[k, 2]
        if code == 0:  # RY on qubit a, angle theta[b]
            cth = cos(0.5 * theta[b])
            sth = sin(0.5 * theta[b])
            bit = 1 << (n - 1 - <int>a)
            for i in range(d):
                if i & bit:
                    continue
                j = i | bit
                lo = v[i]
                hi = v[j]
                v[i] = cth * lo - sth * hi
                v[j] = sth * lo + cth * hi
        elif code == 1:  # CZ on qubits a, b
            b0 = 1 << (n - 1 - <int>a)
            b1 = 1 << (n - 1 - <int>b)
            for i in range(d):
                if (i & b0) and (i & b1):
                    v[i] = -v[i]
        else:  # dense embedding matrix
            for r in range(d):
                acc = 0.0
                for c_idx in range(d):
                    acc += uy[r, c_idx] * v[c_idx]
                scratch[r] = acc
            for r in range(d):
                v[r] = scratch[r]


cdef void _components(const long long[:, ::1] ops, const double[::1] theta,
                      const double[:, ::1] uy, bint has_uy,
                      const double[:, ::1] q_num, const double[::1] w_num,
                      const double[:, ::1] q_den, int n, int d, int kind,
                      double* v, double* scratch,
                      double* num_out, double* den_out) noexcept nogil:
    cdef int i, j
    cdef double den = 0.0, num = 0.0, row, row_n, overlap
    _run_program(ops, theta, uy, has_uy, v, scratch, n, d)
    if kind == 0:
        for i in range(d):
            row = 0.0
            row_n = 0.0
            for j in range(d):
                row += q_den[i, j] * v[j]
                row_n += q_num[i, j] * v[j]
            den += v[i] * row
            num += v[i] * row_n
    else:
        overlap = 0.0
        for i in range(d):
            row = 0.0
            for j in range(d):
                row += q_den[i, j] * v[j]
            den += v[i] * row
            overlap += w_num[i] * v[i]
        num = overlap * overlap
    num_out[0] = num
    den_out[0] = den


def ansatz_state(ops, theta, uy, int n):
    """Propagate |0...0> through the encoded ansatz program."""
    cdef int d = 1 << n
    out = np.empty(d, dtype=np.float64)
    scratch = np.empty(d, dtype=np.float64)
    cdef double[::1] out_view = out
    cdef double[::1] scratch_view = scratch
    cdef long long[:, ::1] ops_view = np.ascontiguousarray(ops, dtype=np.int64)
    cdef double[::1] theta_view = np.ascontiguousarray(theta, dtype=np.float64)
    dummy = np.zeros((1, 1), dtype=np.float64)
    cdef bint has_uy = uy is not None
    cdef double[:, ::1] uy_view = np.ascontiguousarray(uy, dtype=np.float64) if has_uy else dummy
    _run_program(ops_view, theta_view, uy_view, has_uy, &out_view[0], &scratch_view[0], n, d)
    return out


def cost_components(ops, theta, uy, q_num, w_num, q_den, int n, int kind):
    """Numerator and denominator of the configured cost at one angle setting."""
    cdef int d = 1 << n
    v = np.empty(d, dtype=np.float64)
    scratch = np.empty(d, dtype=np.float64)
    cdef double[::1] v_view = v
    cdef double[::1] s_view = scratch
    cdef long long[:, ::1] ops_view = np.ascontiguousarray(ops, dtype=np.int64)
    cdef double[::1] theta_view = np.ascontiguousarray(theta, dtype=np.float64)
    dummy = np.zeros((1, 1), dtype=np.float64)
    dummy_w = np.zeros(1, dtype=np.float64)
    cdef bint has_uy = uy is not None
    cdef double[:, ::1] uy_view = np.ascontiguousarray(uy, dtype=np.float64) if has_uy else dummy
    cdef double[:, ::1] qn_view = np.ascontiguousarray(q_num, dtype=np.float64) if q_num is not None else dummy
    cdef double[::1] wn_view = np.ascontiguousarray(w_num, dtype=np.float64) if w_num is not None else dummy_w
    cdef double[:, ::1] qd_view = np.ascontiguousarray(q_den, dtype=np.float64)
    cdef double num, den
    _components(ops_view, theta_view, uy_view, has_uy, qn_view, wn_view, qd_view,
                n, d, kind, &v_view[0], &s_view[0], &num, &den)
    return num, den


def cost_and_grad(ops, theta, uy, q_num, w_num, q_den, int n, int kind,
                  cnp.ndarray[cnp.float64_t, ndim=1] grad_out):
    """Cost plus its full parameter-shift gradient (quotient rule)."""
    cdef int d = 1 << n
    cdef int n_params = theta.shape[0]
    v = np.empty(d, dtype=np.float64)
    scratch = np.empty(d, dtype=np.float64)
    th = np.array(theta, dtype=np.float64)
    cdef double[::1] v_view = v
    cdef double[::1] s_view = scratch
    cdef double[::1] th_view = th
    cdef long long[:, ::1] ops_view = np.ascontiguousarray(ops, dtype=np.int64)
    dummy = np.zeros((1, 1), dtype=np.float64)
    dummy_w = np.zeros(1, dtype=np.float64)
    cdef bint has_uy = uy is not None
    cdef double[:, ::1] uy_view = np.ascontiguousarray(uy, dtype=np.float64) if has_uy else dummy
    cdef double[:, ::1] qn_view = np.ascontiguousarray(q_num, dtype=np.float64) if q_num is not None else dummy
    cdef double[::1] wn_view = np.ascontiguousarray(w_num, dtype=np.float64) if w_num is not None else dummy_w
    cdef double[:, ::1] qd_view = np.ascontiguousarray(q_den, dtype=np.float64)
    cdef double[::1] grad_view = grad_out

    cdef double num, den, num_p, den_p, num_m, den_m, cost, scale, den_sq, d_num, d_den
    cdef int j
    with nogil:
        _components(ops_view, th_view, uy_view, has_uy, qn_view, wn_view, qd_view,
                    n, d, kind, &v_view[0], &s_view[0], &num, &den)
        if kind == 0:
            cost = 0.5 - num / (2.0 * n * den)
            scale = 2.0 * n
        else:
            cost = 1.0 - num / den
            scale = 1.0
        den_sq = den * den
        for j in range(n_params):
            th_view[j] += _HALF_PI
            _components(ops_view, th_view, uy_view, has_uy, qn_view, wn_view, qd_view,
                        n, d, kind, &v_view[0], &s_view[0], &num_p, &den_p)
            th_view[j] -= _PI
            _components(ops_view, th_view, uy_view, has_uy, qn_view, wn_view, qd_view,
                        n, d, kind, &v_view[0], &s_view[0], &num_m, &den_m)
            th_view[j] += _HALF_PI
            d_num = 0.5 * (num_p - num_m)
            d_den = 0.5 * (den_p - den_m)
            grad_view[j] = -(d_num * den - num * d_den) / (scale * den_sq)
    return cost
