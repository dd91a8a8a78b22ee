# cython: boundscheck=False, wraparound=False, cdivision=True
# Compiled implementation of the hot-loop kernels; must stay in lockstep
# with the numpy reference in _ref.py (see tests/test_backends.py).

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double complex ipow(double complex z, long e) noexcept nogil:
    cdef double complex acc = 1.0
    cdef double complex base = z
    cdef long m = e if e >= 0 else -e
    while m:
        if m & 1:
            acc = acc * base
        base = base * base
        m >>= 1
    if e < 0:
        return 1.0 / acc
    return acc


def monomial_matrix(points, exponents):
    """M[i, j] = prod_c points[j, c] ** exponents[i, c] (integer powers)."""
    cdef cnp.complex128_t[:, ::1] pts = np.ascontiguousarray(points, dtype=np.complex128)
    cdef cnp.int64_t[:, ::1] exps = np.ascontiguousarray(exponents, dtype=np.int64)
    cdef Py_ssize_t n_idx = exps.shape[0]
    cdef Py_ssize_t n_pts = pts.shape[0]
    cdef Py_ssize_t n_dim = pts.shape[1]
    out = np.empty((n_idx, n_pts), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] o = out
    cdef Py_ssize_t i, j, c
    cdef double complex acc
    cdef long e
    with nogil:
        for i in range(n_idx):
            for j in range(n_pts):
                acc = 1.0
                for c in range(n_dim):
                    e = exps[i, c]
                    if e != 0:
                        acc = acc * ipow(pts[j, c], e)
                o[i, j] = acc
    return out


def kernel_cross(x, y, ball_sizes, n_disk):
    """Product-domain Bergman kernel K(x_i, y_j) as an (X, Y) matrix."""
    cdef cnp.complex128_t[:, ::1] xs = np.ascontiguousarray(x, dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] ys = np.ascontiguousarray(y, dtype=np.complex128)
    cdef cnp.int64_t[::1] sizes = np.ascontiguousarray(ball_sizes, dtype=np.int64)
    cdef Py_ssize_t nx = xs.shape[0]
    cdef Py_ssize_t ny = ys.shape[0]
    cdef Py_ssize_t nb = sizes.shape[0]
    cdef Py_ssize_t nd = n_disk
    out = np.empty((nx, ny), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] o = out
    cdef Py_ssize_t i, j, m, c, start
    cdef double complex acc, inner, factor
    cdef long kj
    with nogil:
        for i in range(nx):
            for j in range(ny):
                acc = 1.0
                start = 0
                for m in range(nb):
                    kj = sizes[m]
                    inner = 0.0
                    for c in range(start, start + kj):
                        inner = inner + xs[i, c] * ys[j, c].conjugate()
                    factor = ipow(1.0 - inner, kj + 1)
                    acc = acc / factor
                    start += kj
                for c in range(start, start + nd):
                    inner = 1.0 - xs[i, c] * ys[j, c].conjugate()
                    acc = acc / (inner * inner)
                o[i, j] = acc
    return out


def kernel_diag(points, ball_sizes, n_disk):
    """Diagonal K(p_i, p_i) of the product-domain kernel."""
    cdef cnp.complex128_t[:, ::1] pts = np.ascontiguousarray(points, dtype=np.complex128)
    cdef cnp.int64_t[::1] sizes = np.ascontiguousarray(ball_sizes, dtype=np.int64)
    cdef Py_ssize_t n_pts = pts.shape[0]
    cdef Py_ssize_t nb = sizes.shape[0]
    cdef Py_ssize_t nd = n_disk
    out = np.empty(n_pts, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, m, c, start
    cdef double acc, nrm, re, im
    cdef long kj, e
    with nogil:
        for i in range(n_pts):
            acc = 1.0
            start = 0
            for m in range(nb):
                kj = sizes[m]
                nrm = 0.0
                for c in range(start, start + kj):
                    re = pts[i, c].real
                    im = pts[i, c].imag
                    nrm += re * re + im * im
                nrm = 1.0 - nrm
                for e in range(kj + 1):
                    acc = acc / nrm
                start += kj
            for c in range(start, start + nd):
                re = pts[i, c].real
                im = pts[i, c].imag
                nrm = 1.0 - (re * re + im * im)
                acc = acc / (nrm * nrm)
            o[i] = acc
    return out
