# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the hot path of the lattice recurrence.

Mirrors _kernels_py.py exactly; see that module for the interface contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt, tanh as ctanh

cnp.import_array()

NAME = "cython"


# ---------------------------------------------------------------- forward

def matvec(double[:, ::1] W, double[::1] x):
    cdef Py_ssize_t m = W.shape[0], n = W.shape[1], i, j
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double s
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += W[i, j] * x[j]
        o[i] = s
    return out


def affine1(double[:, ::1] W, double[::1] b, double[::1] x):
    cdef Py_ssize_t m = W.shape[0], n = W.shape[1], i, j
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double s
    for i in range(m):
        s = b[i]
        for j in range(n):
            s += W[i, j] * x[j]
        o[i] = s
    return out


def affine2(double[:, ::1] W, double[::1] b, double[::1] u, double[::1] v):
    cdef Py_ssize_t m = W.shape[0], nu = u.shape[0], nv = v.shape[0], i, j
    cdef cnp.ndarray[double, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double s
    for i in range(m):
        s = b[i]
        for j in range(nu):
            s += W[i, j] * u[j]
        for j in range(nv):
            s += W[i, nu + j] * v[j]
        o[i] = s
    return out


def sigmoid(double[::1] x):
    cdef Py_ssize_t n = x.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = 1.0 / (1.0 + exp(-x[i]))
    return out


def tanh(double[::1] x):
    cdef Py_ssize_t n = x.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = ctanh(x[i])
    return out


def hadamard(double[::1] a, double[::1] b):
    cdef Py_ssize_t n = a.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = a[i] * b[i]
    return out


def add(double[::1] a, double[::1] b):
    cdef Py_ssize_t n = a.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = a[i] + b[i]
    return out


def one_minus(double[::1] x):
    cdef Py_ssize_t n = x.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = 1.0 - x[i]
    return out


def negate(double[::1] x):
    cdef Py_ssize_t n = x.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = -x[i]
    return out


def concat2(double[::1] a, double[::1] b):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out = np.empty(na + nb, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(na):
        o[i] = a[i]
    for i in range(nb):
        o[na + i] = b[i]
    return out


# --------------------------------------------------------------- backward

def matvec_bwd(double[:, ::1] W, double[::1] x, double[::1] g,
               double[:, ::1] gW, double[::1] gx):
    cdef Py_ssize_t m = W.shape[0], n = W.shape[1], i, j
    cdef double gi
    for i in range(m):
        gi = g[i]
        for j in range(n):
            gW[i, j] += gi * x[j]
            gx[j] += W[i, j] * gi
    return None


def affine1_bwd(double[:, ::1] W, double[::1] x, double[::1] g,
                double[:, ::1] gW, double[::1] gb, double[::1] gx):
    cdef Py_ssize_t m = W.shape[0], n = W.shape[1], i, j
    cdef double gi
    for i in range(m):
        gi = g[i]
        gb[i] += gi
        for j in range(n):
            gW[i, j] += gi * x[j]
            gx[j] += W[i, j] * gi
    return None


def affine2_bwd(double[:, ::1] W, double[::1] u, double[::1] v, double[::1] g,
                double[:, ::1] gW, double[::1] gb, double[::1] gu, double[::1] gv):
    cdef Py_ssize_t m = W.shape[0], nu = u.shape[0], nv = v.shape[0], i, j
    cdef double gi
    for i in range(m):
        gi = g[i]
        gb[i] += gi
        for j in range(nu):
            gW[i, j] += gi * u[j]
            gu[j] += W[i, j] * gi
        for j in range(nv):
            gW[i, nu + j] += gi * v[j]
            gv[j] += W[i, nu + j] * gi
    return None


def sigmoid_bwd(double[::1] y, double[::1] g, double[::1] gx):
    cdef Py_ssize_t n = y.shape[0], i
    for i in range(n):
        gx[i] += y[i] * (1.0 - y[i]) * g[i]
    return None


def tanh_bwd(double[::1] y, double[::1] g, double[::1] gx):
    cdef Py_ssize_t n = y.shape[0], i
    for i in range(n):
        gx[i] += (1.0 - y[i] * y[i]) * g[i]
    return None


def hadamard_bwd(double[::1] a, double[::1] b, double[::1] g,
                 double[::1] ga, double[::1] gb):
    cdef Py_ssize_t n = a.shape[0], i
    for i in range(n):
        ga[i] += b[i] * g[i]
        gb[i] += a[i] * g[i]
    return None


def add_bwd(double[::1] g, double[::1] ga, double[::1] gb):
    cdef Py_ssize_t n = g.shape[0], i
    for i in range(n):
        ga[i] += g[i]
        gb[i] += g[i]
    return None


def one_minus_bwd(double[::1] g, double[::1] gx):
    cdef Py_ssize_t n = g.shape[0], i
    for i in range(n):
        gx[i] -= g[i]
    return None


def negate_bwd(double[::1] g, double[::1] gx):
    cdef Py_ssize_t n = g.shape[0], i
    for i in range(n):
        gx[i] -= g[i]
    return None


def concat2_bwd(double[::1] g, double[::1] ga, double[::1] gb):
    cdef Py_ssize_t na = ga.shape[0], nb = gb.shape[0], i
    for i in range(na):
        ga[i] += g[i]
    for i in range(nb):
        gb[i] += g[na + i]
    return None


# ------------------------------------------------------------- optimizer

def adam_update(double[::1] p, double[::1] g, double[::1] m, double[::1] v,
                long t, double lr, double beta1, double beta2, double eps):
    cdef Py_ssize_t n = p.shape[0], i
    cdef double c1 = 1.0 - beta1 ** t
    cdef double c2 = 1.0 - beta2 ** t
    cdef double mhat, vhat
    for i in range(n):
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i]
        mhat = m[i] / c1
        vhat = v[i] / c2
        p[i] -= lr * mhat / (sqrt(vhat) + eps)
    return None


def grad_sqnorm(double[::1] g):
    cdef Py_ssize_t n = g.shape[0], i
    cdef double s = 0.0
    for i in range(n):
        s += g[i] * g[i]
    return s


def scale_(double[::1] g, double s):
    cdef Py_ssize_t n = g.shape[0], i
    for i in range(n):
        g[i] *= s
    return None
