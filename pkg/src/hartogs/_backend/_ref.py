"""Numpy reference implementation of the hot-loop kernels."""

from __future__ import annotations

import numpy as np


def monomial_matrix(points: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """M[i, j] = prod_c points[j, c] ** exponents[i, c].

    Exponents are integers and may be negative; points with a zero
    coordinate under a negative exponent produce inf, which callers must
    guard against.
    """
    pts = np.ascontiguousarray(points, dtype=np.complex128)
    exps = np.ascontiguousarray(exponents, dtype=np.int64)
    out = np.ones((exps.shape[0], pts.shape[0]), dtype=np.complex128)
    for c in range(pts.shape[1]):
        col = pts[:, c]
        for i in range(exps.shape[0]):
            e = exps[i, c]
            if e:
                out[i] *= col ** int(e)
    return out


def kernel_cross(x: np.ndarray, y: np.ndarray, ball_sizes: np.ndarray,
                 n_disk: int) -> np.ndarray:
    """Product-domain Bergman kernel K(x_i, y_j) as an (X, Y) matrix."""
    x = np.ascontiguousarray(x, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.complex128)
    out = np.ones((x.shape[0], y.shape[0]), dtype=np.complex128)
    start = 0
    for kj in np.asarray(ball_sizes, dtype=np.int64):
        kj = int(kj)
        inner = x[:, start:start + kj] @ y[:, start:start + kj].conj().T
        out *= (1.0 - inner) ** (-(kj + 1))
        start += kj
    for c in range(start, start + n_disk):
        inner = np.multiply.outer(x[:, c], y[:, c].conj())
        out *= (1.0 - inner) ** (-2)
    return out


def kernel_diag(points: np.ndarray, ball_sizes: np.ndarray,
                n_disk: int) -> np.ndarray:
    """Diagonal K(p_i, p_i) of the product-domain kernel (real, positive)."""
    pts = np.ascontiguousarray(points, dtype=np.complex128)
    out = np.ones(pts.shape[0])
    start = 0
    for kj in np.asarray(ball_sizes, dtype=np.int64):
        kj = int(kj)
        nrm = np.sum(np.abs(pts[:, start:start + kj]) ** 2, axis=1)
        out *= (1.0 - nrm) ** (-(kj + 1))
        start += kj
    for c in range(start, start + n_disk):
        out *= (1.0 - np.abs(pts[:, c]) ** 2) ** (-2)
    return out
