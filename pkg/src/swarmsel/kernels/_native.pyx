# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.

Arithmetic follows the same element-wise order as kernels.fallback, and the
extension is built with -ffp-contract=off, so lpq_responses and knn_sqdist are
bit-identical across backends. pegasos_train differs from the fallback only in
the association of the margin dot product.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def lpq_responses(double[:, ::1] img, double[:, :, ::1] kre, double[:, :, ::1] kim):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t n_freq = kre.shape[0], m = kre.shape[1]
    cdef Py_ssize_t ho = h - m + 1, wo = w - m + 1
    cdef Py_ssize_t r = (m - 1) // 2
    out_arr = np.zeros((ho, wo, 2 * n_freq), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t y, x, dy, dx, f
    cdef double c, d
    cdef double acc[16]
    if n_freq > 8:
        raise ValueError("at most 8 frequencies supported")
    with nogil:
        for y in range(ho):
            for x in range(wo):
                for f in range(2 * n_freq):
                    acc[f] = 0.0
                c = img[y + r, x + r]
                for dy in range(m):
                    for dx in range(m):
                        d = img[y + dy, x + dx] - c
                        for f in range(n_freq):
                            acc[f] = acc[f] + d * kre[f, dy, dx]
                            acc[n_freq + f] = acc[n_freq + f] + d * kim[f, dy, dx]
                for f in range(2 * n_freq):
                    out[y, x, f] = acc[f]
    return out_arr


def knn_sqdist(double[:, ::1] queries, double[:, ::1] train):
    cdef Py_ssize_t nq = queries.shape[0], nt = train.shape[0], d = queries.shape[1]
    out_arr = np.zeros((nq, nt), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, k, j
    cdef double s, dj
    with nogil:
        for i in range(nq):
            for k in range(nt):
                s = 0.0
                for j in range(d):
                    dj = queries[i, j] - train[k, j]
                    s = s + dj * dj
                out[i, k] = s
    return out_arr


def pegasos_train(double[:, ::1] z, double[::1] y, double lam, long long[::1] order):
    cdef Py_ssize_t n = z.shape[0], d = z.shape[1], steps = order.shape[0]
    w_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double eta, yi, dot, decay, coef
    cdef Py_ssize_t step, j, idx
    cdef long long t = 0
    with nogil:
        for step in range(steps):
            idx = <Py_ssize_t> order[step]
            t += 1
            eta = 1.0 / (lam * t)
            yi = y[idx]
            dot = 0.0
            for j in range(d):
                dot = dot + z[idx, j] * w[j]
            decay = 1.0 - eta * lam
            if yi * dot < 1.0:
                coef = eta * yi
                for j in range(d):
                    w[j] = w[j] * decay + coef * z[idx, j]
            else:
                for j in range(d):
                    w[j] = w[j] * decay
    return w_arr
