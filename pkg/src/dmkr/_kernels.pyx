# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the classical map: trajectory iteration, Lyapunov
accumulation and bifurcation recording.  Mirrors _kernels_py.py exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, floor, isfinite, log, sin, sqrt

cnp.import_array()

cdef double TWO_PI = 6.283185307179586476925286766559

BACKEND = "compiled"


cdef inline double _wrap(double q) nogil:
    return q - TWO_PI * floor(q / TWO_PI)


def iterate_batch(q_in, p_in, double K, double gamma, double a2, double phi,
                  int steps, noise=None):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q = np.array(q_in, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.array(p_in, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xi
    cdef Py_ssize_t n = q.shape[0], i
    cdef int t
    cdef double qq, pp
    if noise is None:
        with nogil:
            for i in range(n):
                qq = q[i]
                pp = p[i]
                for t in range(steps):
                    pp = gamma * pp + K * (sin(qq) + a2 * sin(2.0 * qq + phi))
                    qq = _wrap(qq + pp)
                q[i] = qq
                p[i] = pp
    else:
        xi = np.ascontiguousarray(noise, dtype=np.float64)
        with nogil:
            for i in range(n):
                qq = q[i]
                pp = p[i]
                for t in range(steps):
                    pp = gamma * pp + K * (sin(qq) + a2 * sin(2.0 * qq + phi)) + xi[t, i]
                    qq = _wrap(qq + pp)
                q[i] = qq
                p[i] = pp
    return q, p


def trajectory_record(double q0, double p0, double K, double gamma, double a2,
                      double phi, int steps, noise=None):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q_out = np.empty(steps, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p_out = np.empty(steps, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xi
    cdef double q = q0, p = p0
    cdef int t
    if noise is None:
        with nogil:
            for t in range(steps):
                p = gamma * p + K * (sin(q) + a2 * sin(2.0 * q + phi))
                q = _wrap(q + p)
                q_out[t] = q
                p_out[t] = p
    else:
        xi = np.ascontiguousarray(noise, dtype=np.float64)
        with nogil:
            for t in range(steps):
                p = gamma * p + K * (sin(q) + a2 * sin(2.0 * q + phi)) + xi[t]
                q = _wrap(q + p)
                q_out[t] = q
                p_out[t] = p
    return q_out, p_out


def lyapunov_max_batch(q0_in, p0_in, double K, double gamma, double a2,
                       double phi, int t_transient, int t_total):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q0 = np.ascontiguousarray(q0_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p0 = np.ascontiguousarray(p0_in, dtype=np.float64)
    cdef Py_ssize_t n = q0.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lam = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] ok = np.empty(n, dtype=np.uint8)
    cdef int t
    cdef double q, p, v0, v1, w0, w1, fp, norm, acc
    with nogil:
        for i in range(n):
            q = q0[i]
            p = p0[i]
            v0 = 1.0
            v1 = 0.0
            acc = 0.0
            for t in range(t_total):
                fp = K * (cos(q) + 2.0 * a2 * cos(2.0 * q + phi))
                p = gamma * p + K * (sin(q) + a2 * sin(2.0 * q + phi))
                q = _wrap(q + p)
                w0 = (1.0 + fp) * v0 + gamma * v1
                w1 = fp * v0 + gamma * v1
                norm = sqrt(w0 * w0 + w1 * w1)
                v0 = w0 / norm
                v1 = w1 / norm
                if t >= t_transient:
                    acc += log(norm)
            lam[i] = acc / <double>(t_total - t_transient)
            ok[i] = 1 if (isfinite(p) and isfinite(acc)) else 0
    return lam, ok.astype(bool)


def lyapunov_spectrum_batch(q0_in, p0_in, double K, double gamma, double a2,
                            double phi, int t_transient, int t_total):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q0 = np.ascontiguousarray(q0_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p0 = np.ascontiguousarray(p0_in, dtype=np.float64)
    cdef Py_ssize_t n = q0.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] l1 = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] l2 = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] ok = np.empty(n, dtype=np.uint8)
    cdef int t
    cdef double q, p, fp, a00, a10, a01, a11, b00, b10, b01, b11
    cdef double r11, r12, r22, c01, c11, acc1, acc2, span
    span = <double>(t_total - t_transient)
    with nogil:
        for i in range(n):
            q = q0[i]
            p = p0[i]
            a00 = 1.0
            a10 = 0.0
            a01 = 0.0
            a11 = 1.0
            acc1 = 0.0
            acc2 = 0.0
            for t in range(t_total):
                fp = K * (cos(q) + 2.0 * a2 * cos(2.0 * q + phi))
                p = gamma * p + K * (sin(q) + a2 * sin(2.0 * q + phi))
                q = _wrap(q + p)
                b00 = (1.0 + fp) * a00 + gamma * a10
                b10 = fp * a00 + gamma * a10
                b01 = (1.0 + fp) * a01 + gamma * a11
                b11 = fp * a01 + gamma * a11
                r11 = sqrt(b00 * b00 + b10 * b10)
                a00 = b00 / r11
                a10 = b10 / r11
                r12 = a00 * b01 + a10 * b11
                c01 = b01 - r12 * a00
                c11 = b11 - r12 * a10
                r22 = sqrt(c01 * c01 + c11 * c11)
                a01 = c01 / r22
                a11 = c11 / r22
                if t >= t_transient:
                    acc1 += log(r11)
                    acc2 += log(r22)
            l1[i] = acc1 / span
            l2[i] = acc2 / span
            ok[i] = 1 if (isfinite(p) and isfinite(acc1) and isfinite(acc2)) else 0
    return l1, l2, ok.astype(bool)


def bifurcation_record_batch(q0_in, p0_in, double K, double gamma, double a2,
                             double phi, int t_transient, int t_record):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q0 = np.ascontiguousarray(q0_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p0 = np.ascontiguousarray(p0_in, dtype=np.float64)
    cdef Py_ssize_t n = q0.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, t_record), dtype=np.float64)
    cdef int t
    cdef double q, p
    with nogil:
        for i in range(n):
            q = q0[i]
            p = p0[i]
            for t in range(t_transient + t_record):
                p = gamma * p + K * (sin(q) + a2 * sin(2.0 * q + phi))
                q = _wrap(q + p)
                if t >= t_transient:
                    out[i, t - t_transient] = p
    return out
