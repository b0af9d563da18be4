# cython: language_level=3
"""Compiled batch kernels for triplet-loss training.

Same contract as _pykernels: (mean loss, mean subgradient, positive
distances, negative distances), zero subgradient at the hinge boundary and
for zero-distance terms. Keep the math in both modules in sync.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def _as_matrix(obj):
    arr = np.ascontiguousarray(obj, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("expected a 2-dimensional array")
    return arr


@cython.boundscheck(False)
@cython.wraparound(False)
def diagonal_batch(weights, anchors, positives, negatives, double margin):
    """Forward and backward pass for a diagonal layer (element-wise scale)."""
    w_arr = np.ascontiguousarray(weights, dtype=np.float64)
    a_arr = _as_matrix(anchors)
    p_arr = _as_matrix(positives)
    n_arr = _as_matrix(negatives)
    if a_arr.shape != p_arr.shape or a_arr.shape != n_arr.shape:
        raise ValueError("anchors, positives, negatives must share one (B, D) shape")
    if w_arr.ndim != 1 or w_arr.shape[0] != a_arr.shape[1]:
        raise ValueError("diagonal weights must be a length-D vector")

    cdef double[::1] w = w_arr
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] p = p_arr
    cdef double[:, ::1] n = n_arr
    cdef Py_ssize_t batch = a.shape[0]
    cdef Py_ssize_t dim = a.shape[1]

    d_pos_arr = np.empty(batch, dtype=np.float64)
    d_neg_arr = np.empty(batch, dtype=np.float64)
    grad_arr = np.zeros(dim, dtype=np.float64)
    cdef double[::1] d_pos = d_pos_arr
    cdef double[::1] d_neg = d_neg_arr
    cdef double[::1] grad = grad_arr

    cdef double loss_sum = 0.0
    cdef double sum_p, sum_n, dp, dn, raw, coef_p, coef_n
    cdef Py_ssize_t i, j

    for i in range(batch):
        sum_p = 0.0
        sum_n = 0.0
        for j in range(dim):
            dp = (a[i, j] - p[i, j]) * w[j]
            dn = (a[i, j] - n[i, j]) * w[j]
            sum_p += dp * dp
            sum_n += dn * dn
        d_pos[i] = sqrt(sum_p)
        d_neg[i] = sqrt(sum_n)
        raw = d_pos[i] - d_neg[i] + margin
        if raw > 0.0:
            loss_sum += raw
            coef_p = 1.0 / d_pos[i] if d_pos[i] > 0.0 else 0.0
            coef_n = 1.0 / d_neg[i] if d_neg[i] > 0.0 else 0.0
            for j in range(dim):
                dp = a[i, j] - p[i, j]
                dn = a[i, j] - n[i, j]
                grad[j] += w[j] * (dp * dp * coef_p - dn * dn * coef_n)

    for j in range(dim):
        grad[j] /= batch
    return loss_sum / batch, grad_arr, d_pos_arr, d_neg_arr


@cython.boundscheck(False)
@cython.wraparound(False)
def linear_batch(weights, anchors, positives, negatives, double margin):
    """Forward and backward pass for a full linear layer (D x M matrix)."""
    w_arr = _as_matrix(weights)
    a_arr = _as_matrix(anchors)
    p_arr = _as_matrix(positives)
    n_arr = _as_matrix(negatives)
    if a_arr.shape != p_arr.shape or a_arr.shape != n_arr.shape:
        raise ValueError("anchors, positives, negatives must share one (B, D) shape")
    if w_arr.shape[0] != a_arr.shape[1]:
        raise ValueError("linear weights must be a (D, M) matrix")

    cdef double[:, ::1] w = w_arr
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] p = p_arr
    cdef double[:, ::1] n = n_arr
    cdef Py_ssize_t batch = a.shape[0]
    cdef Py_ssize_t dim = a.shape[1]
    cdef Py_ssize_t emb = w.shape[1]

    d_pos_arr = np.empty(batch, dtype=np.float64)
    d_neg_arr = np.empty(batch, dtype=np.float64)
    grad_arr = np.zeros((dim, emb), dtype=np.float64)
    ep_arr = np.empty(emb, dtype=np.float64)
    en_arr = np.empty(emb, dtype=np.float64)
    cdef double[::1] d_pos = d_pos_arr
    cdef double[::1] d_neg = d_neg_arr
    cdef double[:, ::1] grad = grad_arr
    cdef double[::1] ep = ep_arr
    cdef double[::1] en = en_arr

    cdef double loss_sum = 0.0
    cdef double sum_p, sum_n, raw, coef_p, coef_n, dp, dn
    cdef Py_ssize_t i, j, m

    for i in range(batch):
        for m in range(emb):
            sum_p = 0.0
            sum_n = 0.0
            for j in range(dim):
                sum_p += (a[i, j] - p[i, j]) * w[j, m]
                sum_n += (a[i, j] - n[i, j]) * w[j, m]
            ep[m] = sum_p
            en[m] = sum_n
        sum_p = 0.0
        sum_n = 0.0
        for m in range(emb):
            sum_p += ep[m] * ep[m]
            sum_n += en[m] * en[m]
        d_pos[i] = sqrt(sum_p)
        d_neg[i] = sqrt(sum_n)
        raw = d_pos[i] - d_neg[i] + margin
        if raw > 0.0:
            loss_sum += raw
            coef_p = 1.0 / d_pos[i] if d_pos[i] > 0.0 else 0.0
            coef_n = 1.0 / d_neg[i] if d_neg[i] > 0.0 else 0.0
            for j in range(dim):
                dp = (a[i, j] - p[i, j]) * coef_p
                dn = (a[i, j] - n[i, j]) * coef_n
                for m in range(emb):
                    grad[j, m] += dp * ep[m] - dn * en[m]

    for j in range(dim):
        for m in range(emb):
            grad[j, m] /= batch
    return loss_sum / batch, grad_arr, d_pos_arr, d_neg_arr
