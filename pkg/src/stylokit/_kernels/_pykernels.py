"""NumPy batch kernels for triplet-loss training.

Each kernel returns (mean loss, mean subgradient, positive distances,
negative distances) for a batch of triplets. The subgradient convention:
zero at the hinge boundary (loss exactly 0) and zero for a zero-distance
term, so training never divides by zero.

The compiled twin in _ckernels.pyx must stay in agreement with this module
to within floating-point roundoff.
"""

import numpy as np


def _prep(anchors, positives, negatives):
    a = np.ascontiguousarray(anchors, dtype=np.float64)
    p = np.ascontiguousarray(positives, dtype=np.float64)
    n = np.ascontiguousarray(negatives, dtype=np.float64)
    if a.ndim != 2 or a.shape != p.shape or a.shape != n.shape:
        raise ValueError("anchors, positives, negatives must share one (B, D) shape")
    return a, p, n


def diagonal_batch(weights, anchors, positives, negatives, margin):
    """Forward and backward pass for a diagonal layer (element-wise scale)."""
    w = np.ascontiguousarray(weights, dtype=np.float64)
    a, p, n = _prep(anchors, positives, negatives)
    if w.ndim != 1 or w.size != a.shape[1]:
        raise ValueError("diagonal weights must be a length-D vector")
    dp = a - p
    dn = a - n
    sp = dp * w
    sn = dn * w
    d_pos = np.sqrt(np.sum(sp * sp, axis=1))
    d_neg = np.sqrt(np.sum(sn * sn, axis=1))
    raw = d_pos - d_neg + margin
    losses = np.maximum(raw, 0.0)
    active = raw > 0.0
    coef_p = np.where(active & (d_pos > 0.0), 1.0 / np.where(d_pos > 0.0, d_pos, 1.0), 0.0)
    coef_n = np.where(active & (d_neg > 0.0), 1.0 / np.where(d_neg > 0.0, d_neg, 1.0), 0.0)
    grad = w * ((dp * dp * coef_p[:, None]).sum(axis=0) - (dn * dn * coef_n[:, None]).sum(axis=0))
    grad /= a.shape[0]
    return float(losses.mean()), grad, d_pos, d_neg


def linear_batch(weights, anchors, positives, negatives, margin):
    """Forward and backward pass for a full linear layer (D x M matrix)."""
    w = np.ascontiguousarray(weights, dtype=np.float64)
    a, p, n = _prep(anchors, positives, negatives)
    if w.ndim != 2 or w.shape[0] != a.shape[1]:
        raise ValueError("linear weights must be a (D, M) matrix")
    dp = a - p
    dn = a - n
    ep = dp @ w
    en = dn @ w
    d_pos = np.sqrt(np.sum(ep * ep, axis=1))
    d_neg = np.sqrt(np.sum(en * en, axis=1))
    raw = d_pos - d_neg + margin
    losses = np.maximum(raw, 0.0)
    active = raw > 0.0
    coef_p = np.where(active & (d_pos > 0.0), 1.0 / np.where(d_pos > 0.0, d_pos, 1.0), 0.0)
    coef_n = np.where(active & (d_neg > 0.0), 1.0 / np.where(d_neg > 0.0, d_neg, 1.0), 0.0)
    grad = dp.T @ (ep * coef_p[:, None]) - dn.T @ (en * coef_n[:, None])
    grad /= a.shape[0]
    return float(losses.mean()), grad, d_pos, d_neg
