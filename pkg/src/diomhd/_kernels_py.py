"""Pure-Python/NumPy versions of the compiled kernels in ``_kernels.pyx``."""

import math

import numpy as np


def compensated_dot(weights, values):
    weights = np.asarray(weights, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if weights.shape != values.shape:
        raise ValueError("weights and values differ in length")
    # fsum is exactly rounded, so summation order does not matter here
    return math.fsum((weights * values).tolist())


def compensated_sum(values):
    return math.fsum(np.asarray(values, dtype=np.float64).tolist())


def diophantine_scan(n1, n2, r, K):
    K = int(K)
    half_r = 0.5 * r
    best = -1.0
    best_k = (0, 0)
    k2 = np.arange(-K, K + 1, dtype=np.int64)
    for k1 in range(0, K + 1):
        ksq = k1 * k1 + k2 * k2
        keep = ksq <= K * K
        if k1 == 0:
            keep &= k2 > 0
        if not keep.any():
            continue
        kk = k2[keep]
        vals = np.abs(n1 * k1 + n2 * kk.astype(np.float64)) * np.power(
            ksq[keep].astype(np.float64), half_r
        )
        i = int(np.argmin(vals))  # first occurrence = smallest k2
        if best < 0.0 or vals[i] < best:
            best = float(vals[i])
            best_k = (k1, int(kk[i]))
    return best, best_k[0], best_k[1]
