"""Pure-numpy implementations of the hot per-step recursions.

These are the reference kernels; ``csamc._speed`` is the compiled Cython
twin with identical signatures and semantics. Backends agree to rounding
(the compiled path uses libm exp, numpy its vectorized exp).
"""

from __future__ import annotations

import numpy as np


def asset_sweep(
    s0: np.ndarray,
    log_drift: np.ndarray,
    diffusion: np.ndarray,
    drop_idx: np.ndarray,
    drop_amount: np.ndarray,
    drop_frac: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Exponential path recursion with cash drops at fixed grid indices.

    path[:, 0] = s0
    path[:, k+1] = path[:, k] * exp(log_drift[k] + diffusion[:, k]) - drop at k+1

    A drop at grid index ``drop_idx[j]`` is ``drop_amount[j]`` when
    ``drop_frac[j]`` is NaN, else ``drop_frac[j]`` times the pre-drop value.
    Returns the path matrix (n, K+1) and the applied drop amounts (n, J).
    """
    s0 = np.ascontiguousarray(s0, dtype=np.float64)
    diffusion = np.ascontiguousarray(diffusion, dtype=np.float64)
    n, steps = diffusion.shape
    growth = np.exp(log_drift[None, :] + diffusion)
    path = np.empty((n, steps + 1), dtype=np.float64)
    path[:, 0] = s0
    nj = len(drop_idx)
    applied = np.empty((n, nj), dtype=np.float64)
    seg_start = 0
    cur = s0
    for j in range(nj + 1):
        seg_end = int(drop_idx[j]) if j < nj else steps + 1
        if seg_end > seg_start + 1:
            block = np.cumprod(growth[:, seg_start : seg_end - 1], axis=1)
            path[:, seg_start + 1 : seg_end] = cur[:, None] * block
            cur = path[:, seg_end - 1]
        if j < nj:
            pre = cur * growth[:, seg_end - 1]
            if np.isnan(drop_frac[j]):
                amt = np.full(n, drop_amount[j])
            else:
                amt = drop_frac[j] * pre
            applied[:, j] = amt
            cur = pre - amt
            path[:, seg_end] = cur
            seg_start = seg_end
    return path, applied


def futures_account_sweep(
    c0: np.ndarray, accrual: np.ndarray, dj: np.ndarray, df: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Margin-account recursion C_i = C_{i-1} * (1 + accrual_i) + dj_i + df_i.

    Returns the account values (n, M+1) and the accrued interest amounts
    C_{i-1} * accrual_i (n, M).
    """
    c0 = np.ascontiguousarray(c0, dtype=np.float64)
    df = np.ascontiguousarray(df, dtype=np.float64)
    accrual = np.ascontiguousarray(accrual, dtype=np.float64)
    dj = np.ascontiguousarray(dj, dtype=np.float64)
    n, m = df.shape
    values = np.empty((n, m + 1), dtype=np.float64)
    paid = np.empty((n, m), dtype=np.float64)
    values[:, 0] = c0
    cur = c0.copy()
    for i in range(m):
        interest = cur * accrual[i]
        paid[:, i] = interest
        cur = cur + interest + dj[i] + df[:, i]
        values[:, i + 1] = cur
    return values, paid
