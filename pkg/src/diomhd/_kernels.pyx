# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: compensated lattice sums and the Diophantine scan.

Compiled without -ffast-math; the compensated sums depend on strict IEEE
evaluation order.
"""

import numpy as np

from libc.math cimport fabs, pow


def compensated_dot(const double[::1] weights, const double[::1] values):
    """Neumaier-compensated sum of ``weights[i] * values[i]`` in array order."""
    cdef Py_ssize_t i, n = weights.shape[0]
    cdef double total = 0.0, comp = 0.0, term, t
    if values.shape[0] != n:
        raise ValueError("weights and values differ in length")
    for i in range(n):
        term = weights[i] * values[i]
        t = total + term
        if fabs(total) >= fabs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
    return total + comp


def compensated_sum(const double[::1] values):
    """Neumaier-compensated sum in array order."""
    cdef Py_ssize_t i, n = values.shape[0]
    cdef double total = 0.0, comp = 0.0, term, t
    for i in range(n):
        term = values[i]
        t = total + term
        if fabs(total) >= fabs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
    return total + comp


def diophantine_scan(double n1, double n2, double r, long K):
    """Minimum of |n.k| |k|^r over the half-disc 0 < |k| <= K.

    Only one of each pair {k, -k} is visited: k1 > 0, or k1 == 0 and k2 > 0.
    Points are visited in lexicographic order and the minimum is replaced
    only on strict decrease, so ties resolve to the lexicographically
    smallest k.

    |k|^r >= max(|k1|, |k2|)^r, so pow is skipped wherever that bound times
    |n.k| already exceeds the current best by more than rounding.
    """
    cdef long k1, k2, ksq, K2 = K * K, j, ak2
    cdef double half_r = 0.5 * r, best = -1.0, val, a
    cdef long best1 = 0, best2 = 0
    cdef double[::1] lower = np.empty(K + 1)
    for j in range(K + 1):
        lower[j] = pow(<double>(j * j), half_r) * (1.0 - 1e-15)
    for k1 in range(0, K + 1):
        for k2 in range(-K, K + 1):
            if k1 == 0 and k2 <= 0:
                continue
            ksq = k1 * k1 + k2 * k2
            if ksq > K2:
                continue
            a = fabs(n1 * k1 + n2 * k2)
            ak2 = k2 if k2 >= 0 else -k2
            if best >= 0.0 and a * lower[k1 if k1 >= ak2 else ak2] > best:
                continue
            val = a * pow(<double>ksq, half_r)
            if best < 0.0 or val < best:
                best = val
                best1 = k1
                best2 = k2
    return best, best1, best2
