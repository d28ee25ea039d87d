# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: twisted convolution and batch coherent-state columns."""
import numpy as np
cimport cython
from cython.parallel cimport parallel, prange
from libc.stdlib cimport free, malloc
from libc.math cimport cos, sin, exp
cimport openmp

ctypedef double complex cplx


def twisted_convolution(const cplx[:, ::1] W1, const cplx[:, ::1] W2, double dq, double dp,
                        double hbar, int sign):
    cdef Py_ssize_t Mq = W1.shape[0], Mp = W1.shape[1]
    cdef Py_ssize_t cq = Mq // 2, cp = Mp // 2
    cdef Py_ssize_t i, j, k, l, k0, k1, l0, l1
    cdef cplx acc, row
    cdef cplx *B
    out = np.zeros((Mq, Mp), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    # phase tables: e1[j, k] = exp(i s p_j q_k / hbar), e2[i, l] = exp(-i s q_i p_l / hbar)
    e1_np = np.exp(1j * sign * np.outer((np.arange(Mp) - cp) * dp, (np.arange(Mq) - cq) * dq) / hbar)
    e2_np = np.exp(-1j * sign * np.outer((np.arange(Mq) - cq) * dq, (np.arange(Mp) - cp) * dp) / hbar)
    cdef const cplx[:, ::1] e1 = np.ascontiguousarray(e1_np)
    cdef const cplx[:, ::1] e2 = np.ascontiguousarray(e2_np)
    with nogil, parallel():
        # per-thread row buffer B[k, l] = W2[k, l] e2[i, l]
        B = <cplx *> malloc(Mq * Mp * sizeof(cplx))
        for i in prange(Mq, schedule="static"):
            k0 = max(0, i + cq - Mq + 1)
            k1 = min(Mq, i + cq + 1)
            for k in range(k0, k1):
                for l in range(Mp):
                    B[k * Mp + l] = W2[k, l] * e2[i, l]
            for j in range(Mp):
                l0 = max(0, j + cp - Mp + 1)
                l1 = min(Mp, j + cp + 1)
                acc = 0
                for k in range(k0, k1):
                    row = 0
                    for l in range(l0, l1):
                        row = row + W1[i - k + cq, j - l + cp] * B[k * Mp + l]
                    acc = acc + row * e1[j, k]
                o[i, j] = acc
        free(B)
    return out


def coherent_columns(const double[::1] x, const double[::1] q, const double[::1] p,
                     const cplx[::1] alpha, const double[::1] norm, double hbar):
    cdef Py_ssize_t N = x.shape[0], K = q.shape[0]
    cdef Py_ssize_t i, k
    cdef double d, re, im, mag
    cdef cplx ainv
    out = np.empty((N, K), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    for k in prange(K, nogil=True, schedule="static"):
        ainv = 1.0 / alpha[k]
        for i in range(N):
            d = x[i] - q[k]
            # exponent = -(i/2hbar) d^2 ainv + i p x/hbar - i p q/2hbar
            re = 0.5 * d * d * ainv.imag / hbar
            im = (-0.5 * d * d * ainv.real + p[k] * x[i] - 0.5 * p[k] * q[k]) / hbar
            mag = norm[k] * exp(re)
            o[i, k] = mag * cos(im) + 1j * mag * sin(im)
    return out


def set_num_threads(int n):
    """Cap the OpenMP worker count used by the kernels above."""
    openmp.omp_set_num_threads(n)
