# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for truncated order-3 multivariate Taylor arithmetic.

Mirrors _taylor_py; selected at import time by confflat.jets._backend.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def mul(int order,
        double v1, cnp.ndarray[double, ndim=1] g1,
        cnp.ndarray[double, ndim=2] h1, cnp.ndarray[double, ndim=3] t1,
        double v2, cnp.ndarray[double, ndim=1] g2,
        cnp.ndarray[double, ndim=2] h2, cnp.ndarray[double, ndim=3] t2):
    cdef int n = g1.shape[0] if g1 is not None else 0
    cdef double v = v1 * v2
    cdef int i, j, k
    cdef cnp.ndarray[double, ndim=1] g = None
    cdef cnp.ndarray[double, ndim=2] h = None
    cdef cnp.ndarray[double, ndim=3] t = None
    if order >= 1:
        g = np.empty(n)
        for i in range(n):
            g[i] = g1[i] * v2 + v1 * g2[i]
    if order >= 2:
        h = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                h[i, j] = h1[i, j] * v2 + v1 * h2[i, j] + g1[i] * g2[j] + g2[i] * g1[j]
    if order >= 3:
        t = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    t[i, j, k] = (t1[i, j, k] * v2 + v1 * t2[i, j, k]
                                  + h1[i, j] * g2[k] + h1[i, k] * g2[j] + h1[j, k] * g2[i]
                                  + h2[i, j] * g1[k] + h2[i, k] * g1[j] + h2[j, k] * g1[i])
    return v, g, h, t


def compose(int order,
            double v, cnp.ndarray[double, ndim=1] g,
            cnp.ndarray[double, ndim=2] h, cnp.ndarray[double, ndim=3] t,
            double c0, double c1, double c2, double c3):
    cdef int n = g.shape[0] if g is not None else 0
    cdef int i, j, k
    cdef cnp.ndarray[double, ndim=1] rg = None
    cdef cnp.ndarray[double, ndim=2] rh = None
    cdef cnp.ndarray[double, ndim=3] rt = None
    if order >= 1:
        rg = np.empty(n)
        for i in range(n):
            rg[i] = c1 * g[i]
    if order >= 2:
        rh = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                rh[i, j] = c1 * h[i, j] + c2 * g[i] * g[j]
    if order >= 3:
        rt = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    rt[i, j, k] = (c1 * t[i, j, k]
                                   + c2 * (g[i] * h[j, k] + g[j] * h[i, k] + g[k] * h[i, j])
                                   + c3 * g[i] * g[j] * g[k])
    return c0, rg, rh, rt
