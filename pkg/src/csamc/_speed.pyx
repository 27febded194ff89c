# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the csamc._speed_py kernels.

Same signatures and semantics; the recursions run as single fused C passes
instead of one numpy temporary per time step.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, isnan

cnp.import_array()


def asset_sweep(object s0, object log_drift, object diffusion,
                object drop_idx, object drop_amount, object drop_frac):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s0_a = np.ascontiguousarray(s0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mu_a = np.ascontiguousarray(log_drift, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dif_a = np.ascontiguousarray(diffusion, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] idx_a = np.ascontiguousarray(drop_idx, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] amt_a = np.ascontiguousarray(drop_amount, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] frc_a = np.ascontiguousarray(drop_frac, dtype=np.float64)
    cdef Py_ssize_t n = dif_a.shape[0]
    cdef Py_ssize_t steps = dif_a.shape[1]
    cdef Py_ssize_t nj = idx_a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] path = np.empty((n, steps + 1), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] applied = np.empty((n, nj), dtype=np.float64)
    cdef Py_ssize_t i, k, j
    cdef double cur, amt
    for i in range(n):
        cur = s0_a[i]
        path[i, 0] = cur
        j = 0
        for k in range(steps):
            cur = cur * exp(mu_a[k] + dif_a[i, k])
            if j < nj and idx_a[j] == k + 1:
                if isnan(frc_a[j]):
                    amt = amt_a[j]
                else:
                    amt = frc_a[j] * cur
                applied[i, j] = amt
                cur = cur - amt
                j += 1
            path[i, k + 1] = cur
    return path, applied


def futures_account_sweep(object c0, object accrual, object dj, object df):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c0_a = np.ascontiguousarray(c0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] acc_a = np.ascontiguousarray(accrual, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dj_a = np.ascontiguousarray(dj, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] df_a = np.ascontiguousarray(df, dtype=np.float64)
    cdef Py_ssize_t n = df_a.shape[0]
    cdef Py_ssize_t m = df_a.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] values = np.empty((n, m + 1), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] paid = np.empty((n, m), dtype=np.float64)
    cdef Py_ssize_t i, k
    cdef double cur, interest
    for i in range(n):
        cur = c0_a[i]
        values[i, 0] = cur
        for k in range(m):
            interest = cur * acc_a[k]
            paid[i, k] = interest
            cur = cur + interest + dj_a[k] + df_a[i, k]
            values[i, k + 1] = cur
    return values, paid
