# cython: language_level=3
"""Compiled dipole kernels: potential gradient, right-hand side, DOP853 step."""

import numpy as np
from libc.math cimport exp, sqrt, fabs, M_PI

from ._tableau import A as _A, B as _B, E3 as _E3, E5 as _E5, N_STAGES as _NS


cdef enum:
    NS = 12

cdef double TA[NS][NS]
cdef double TB[NS]
cdef double TE3[NS + 1]
cdef double TE5[NS + 1]

cdef int _i, _j
for _i in range(NS):
    TB[_i] = _B[_i]
    for _j in range(NS):
        TA[_i][_j] = _A[_i][_j] if _j < _i else 0.0
for _i in range(NS + 1):
    TE3[_i] = _E3[_i]
    TE5[_i] = _E5[_i]


cdef inline double ipow(double x, long n) nogil:
    cdef double r = 1.0
    while n > 0:
        r *= x
        n -= 1
    return r


cdef struct Pack:
    double *poly
    Py_ssize_t npoly
    double *gauss
    Py_ssize_t ngauss


cdef inline void cgrad(double x, double y, Pack *p, double *gx, double *gy) nogil:
    cdef Py_ssize_t i
    cdef double u, v, c, iw2, e
    cdef long j, k
    gx[0] = 0.0
    gy[0] = 0.0
    for i in range(p.npoly):
        u = x - p.poly[5 * i]
        v = y - p.poly[5 * i + 1]
        j = <long> p.poly[5 * i + 2]
        k = <long> p.poly[5 * i + 3]
        c = p.poly[5 * i + 4]
        if j > 0:
            gx[0] += c * j * ipow(u, j - 1) * ipow(v, k)
        if k > 0:
            gy[0] += c * k * ipow(u, j) * ipow(v, k - 1)
    for i in range(p.ngauss):
        u = x - p.gauss[4 * i]
        v = y - p.gauss[4 * i + 1]
        iw2 = 1.0 / (p.gauss[4 * i + 3] * p.gauss[4 * i + 3])
        e = p.gauss[4 * i + 2] * exp(-0.5 * (u * u + v * v) * iw2)
        gx[0] -= e * u * iw2
        gy[0] -= e * v * iw2


cdef inline void crhs(const double *y, Pack *pp, Pack *pm, double *out) nogil:
    cdef double d1 = y[0] - y[2]
    cdef double d2 = y[1] - y[3]
    cdef double s = 1.0 / (M_PI * (d1 * d1 + d2 * d2))
    cdef double gx, gy, hx, hy
    cgrad(y[0], y[1], pp, &gx, &gy)
    cgrad(y[2], y[3], pm, &hx, &hy)
    out[0] = d2 * s + gy
    out[1] = -d1 * s - gx
    out[2] = d2 * s - hy
    out[3] = -d1 * s + hx


cdef class _Packed:
    cdef public object poly_arr
    cdef public object gauss_arr
    cdef Pack pack

    def __cinit__(self, poly, gauss):
        cdef double[:, ::1] pv
        cdef double[:, ::1] gv
        self.poly_arr = np.ascontiguousarray(np.asarray(poly, dtype=np.float64).reshape(-1, 5))
        self.gauss_arr = np.ascontiguousarray(np.asarray(gauss, dtype=np.float64).reshape(-1, 4))
        self.pack.npoly = self.poly_arr.shape[0]
        self.pack.ngauss = self.gauss_arr.shape[0]
        self.pack.poly = NULL
        self.pack.gauss = NULL
        if self.pack.npoly:
            pv = self.poly_arr
            self.pack.poly = &pv[0, 0]
        if self.pack.ngauss:
            gv = self.gauss_arr
            self.pack.gauss = &gv[0, 0]


def make_pack(poly, gauss):
    return _Packed(poly, gauss)


def grad(double x, double y, _Packed pack):
    cdef double gx, gy
    cgrad(x, y, &pack.pack, &gx, &gy)
    return gx, gy


def rhs(y, _Packed pplus, _Packed pminus):
    cdef double yy[4]
    cdef double out[4]
    cdef int n
    for n in range(4):
        yy[n] = y[n]
    crhs(yy, &pplus.pack, &pminus.pack, out)
    return (out[0], out[1], out[2], out[3])


cdef double cstep(const double *y, const double *f0, double h, double atol, double rtol,
                  Pack *pp, Pack *pm, double *y1, double *f1) nogil:
    cdef double K[NS + 1][4]
    cdef double yi[4]
    cdef int i, j, n
    cdef double acc, sc, e5, e3, e5sq = 0.0, e3sq = 0.0, m
    for n in range(4):
        K[0][n] = f0[n]
    for i in range(1, NS):
        for n in range(4):
            acc = 0.0
            for j in range(i):
                acc += TA[i][j] * K[j][n]
            yi[n] = y[n] + h * acc
        crhs(yi, pp, pm, K[i])
    for n in range(4):
        acc = 0.0
        for j in range(NS):
            acc += TB[j] * K[j][n]
        y1[n] = y[n] + h * acc
    crhs(y1, pp, pm, f1)
    for n in range(4):
        K[NS][n] = f1[n]
    for n in range(4):
        m = fabs(y[n])
        if fabs(y1[n]) > m:
            m = fabs(y1[n])
        sc = atol + rtol * m
        e5 = 0.0
        e3 = 0.0
        for j in range(NS + 1):
            e5 += TE5[j] * K[j][n]
            e3 += TE3[j] * K[j][n]
        e5 /= sc
        e3 /= sc
        e5sq += e5 * e5
        e3sq += e3 * e3
    if e5sq == 0.0 and e3sq == 0.0:
        return 0.0
    return fabs(h) * e5sq / sqrt((e5sq + 0.01 * e3sq) * 4.0)


def step(y, f0, double h, double atol, double rtol, _Packed pplus, _Packed pminus):
    """One DOP853 step; returns ``(y_new, f_new, error_norm)``."""
    cdef double yy[4]
    cdef double ff[4]
    cdef double y1[4]
    cdef double f1[4]
    cdef double err
    cdef int n
    for n in range(4):
        yy[n] = y[n]
        ff[n] = f0[n]
    err = cstep(yy, ff, h, atol, rtol, &pplus.pack, &pminus.pack, y1, f1)
    return (y1[0], y1[1], y1[2], y1[3]), (f1[0], f1[1], f1[2], f1[3]), err


def advance(y, double h, _Packed pplus, _Packed pminus):
    """Single high-order step of size ``h`` without error control."""
    cdef double yy[4]
    cdef double ff[4]
    cdef double y1[4]
    cdef double f1[4]
    cdef int n
    for n in range(4):
        yy[n] = y[n]
    crhs(yy, &pplus.pack, &pminus.pack, ff)
    cstep(yy, ff, h, 1.0, 1.0, &pplus.pack, &pminus.pack, y1, f1)
    return (y1[0], y1[1], y1[2], y1[3])
