"""Reference (numpy) implementations of the hot loops.

The compiled module ``_ckernels`` provides the same functions with the same
signatures; :mod:`khmgof.kernels` picks one at import time.
"""
from __future__ import annotations

import numpy as np

__all__ = ["transform_sums", "boxcar_smooth", "path_abs_max", "bridge_ratio_integral"]


def transform_sums(counts, H, G):
    """Unnormalized transform at the distinct order statistics.

    With ``A_k = sum_{j<=k} c_j (1 - H_j.G_j)`` and ``B_k = sum_{j>k} c_j H_j``
    returns ``values_k = A_k - B_k.G_k`` and the left limits
    ``A_{k-1} - B_{k-1}.G_k``.
    """
    counts = np.asarray(counts, dtype=float)
    H = np.asarray(H, dtype=float)
    G = np.asarray(G, dtype=float)
    hg = np.einsum("ij,ij->i", H, G)
    A = np.cumsum(counts * (1.0 - hg))
    cH = counts[:, None] * H
    # suffix sums, strictly above k
    B = np.zeros_like(cH)
    B[:-1] = np.cumsum(cH[::-1], axis=0)[::-1][1:]
    values = A - np.einsum("ij,ij->i", B, G)
    A_prev = np.concatenate([[0.0], A[:-1]])
    B_prev = B + cH
    left = A_prev - np.einsum("ij,ij->i", B_prev, G)
    return values, left


def boxcar_smooth(x_sorted, y_sorted, a):
    """Window means of ``y`` over ``[x_i - a, x_i + a]`` at every ``x_i``.

    ``x_sorted`` must be ascending; both window ends are inclusive.
    """
    x = np.asarray(x_sorted, dtype=float)
    y = np.asarray(y_sorted, dtype=float)
    lo = np.searchsorted(x, x - a, side="left")
    hi = np.searchsorted(x, x + a, side="right")
    csum = np.concatenate([[0.0], np.cumsum(y)])
    return (csum[hi] - csum[lo]) / (hi - lo)


def path_abs_max(values, left_values):
    """``max(|values|, |left_values|)`` over a path."""
    v = np.abs(np.asarray(values, dtype=float))
    lv = np.abs(np.asarray(left_values, dtype=float))
    return float(max(v.max(initial=0.0), lv.max(initial=0.0)))


def bridge_ratio_integral(increments, dt, keeps):
    """Trapezoidal ``int_0^{k dt} u(t)^2 / (1 - t)^2 dt`` for each ``k`` in ``keeps``.

    ``increments`` are the ``N`` steps of a Brownian motion on ``[0, 1]``
    with step ``dt = 1/N``; the bridge is ``u(t) = W(t) - t W(1)``.  ``keeps``
    must be ascending and below ``N``.
    """
    inc = np.asarray(increments, dtype=float)
    keeps = np.asarray(keeps, dtype=np.int64)
    w = np.concatenate([[0.0], np.cumsum(inc)])
    last = int(keeps[-1])
    t = np.arange(last + 1) * dt
    u = w[: last + 1] - t * w[-1]
    f = (u / (1.0 - t)) ** 2
    csum = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]))])
    return dt * csum[keeps]
