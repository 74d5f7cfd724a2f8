# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics mirror ``melshift._fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

cdef enum:
    MODE_NEAREST = 0
    MODE_LINEAR = 1

NEAREST = MODE_NEAREST
LINEAR = MODE_LINEAR


def shift_frames(cep, weights, int mode=MODE_NEAREST):
    cdef const double[:, :] c = np.ascontiguousarray(cep, dtype=np.float64)
    cdef Py_ssize_t n_frames = c.shape[0]
    cdef Py_ssize_t n = c.shape[1]
    w_arr = np.broadcast_to(np.asarray(weights, dtype=np.float64), (n_frames, n))
    cdef const double[:, :] w = w_arr
    out_arr = np.empty((n_frames, n), dtype=np.float64)
    cdef double[:, :] out = out_arr
    cdef Py_ssize_t i, k, i0, i1
    cdef double wk, pos, base, frac, a, b, value
    if mode != MODE_NEAREST and mode != MODE_LINEAR:
        raise ValueError(f"unknown interpolation mode {mode}")
    with nogil:
        for i in range(n_frames):
            for k in range(n):
                wk = w[i, k]
                if wk == 1.0:
                    out[i, k] = c[i, k]
                    continue
                pos = wk * <double>k
                if mode == MODE_NEAREST:
                    i0 = <Py_ssize_t>floor(pos + 0.5)
                    value = c[i, i0] if i0 < n else 0.0
                else:
                    base = floor(pos)
                    frac = pos - base
                    i0 = <Py_ssize_t>base
                    i1 = i0 + 1
                    a = c[i, i0] if i0 < n else 0.0
                    b = c[i, i1] if i1 < n else 0.0
                    value = (1.0 - frac) * a + frac * b
                out[i, k] = wk * value
    return out_arr


def yin_difference(frames, Py_ssize_t width, Py_ssize_t tau_max):
    cdef const double[:, :] x = np.ascontiguousarray(frames, dtype=np.float64)
    cdef Py_ssize_t n_frames = x.shape[0]
    if width + tau_max > x.shape[1]:
        raise ValueError("frames too short for width + tau_max")
    out_arr = np.zeros((n_frames, tau_max + 1), dtype=np.float64)
    cdef double[:, :] out = out_arr
    cdef Py_ssize_t i, tau, j
    cdef double acc, delta
    with nogil:
        for i in range(n_frames):
            for tau in range(1, tau_max + 1):
                acc = 0.0
                for j in range(width):
                    delta = x[i, j] - x[i, j + tau]
                    acc = acc + delta * delta
                out[i, tau] = acc
    return out_arr


def cmnd(diff):
    cdef const double[:, :] d = np.ascontiguousarray(diff, dtype=np.float64)
    cdef Py_ssize_t n_frames = d.shape[0]
    cdef Py_ssize_t n_lags = d.shape[1]
    out_arr = np.ones((n_frames, n_lags), dtype=np.float64)
    cdef double[:, :] out = out_arr
    cdef Py_ssize_t i, t
    cdef double running
    with nogil:
        for i in range(n_frames):
            running = 0.0
            for t in range(1, n_lags):
                running = running + d[i, t]
                if running > 0.0:
                    out[i, t] = (d[i, t] * <double>t) / running
    return out_arr


def pick_lags(norm_diff, Py_ssize_t tau_min, Py_ssize_t tau_max, double threshold):
    cdef const double[:, :] r = np.ascontiguousarray(norm_diff, dtype=np.float64)
    cdef Py_ssize_t n_frames = r.shape[0]
    cdef Py_ssize_t n_lags = r.shape[1]
    lags_arr = np.zeros(n_frames, dtype=np.float64)
    aper_arr = np.ones(n_frames, dtype=np.float64)
    cdef double[:] lags = lags_arr
    cdef double[:] aper = aper_arr
    cdef Py_ssize_t i, t, best
    cdef double a, b, c, den, offset, lag
    with nogil:
        for i in range(n_frames):
            t = -1
            for best in range(tau_min, tau_max + 1):
                if r[i, best] < threshold:
                    t = best
                    break
            if t >= 0:
                while t + 1 <= tau_max and r[i, t + 1] < r[i, t]:
                    t = t + 1
            else:
                t = tau_min
                for best in range(tau_min + 1, tau_max + 1):
                    if r[i, best] < r[i, t]:
                        t = best
            lag = <double>t
            if 0 < t < n_lags - 1:
                a = r[i, t - 1]
                b = r[i, t]
                c = r[i, t + 1]
                den = a - 2.0 * b + c
                if den > 0.0:
                    offset = 0.5 * (a - c) / den
                    if offset > 1.0:
                        offset = 1.0
                    elif offset < -1.0:
                        offset = -1.0
                    lag = <double>t + offset
            lags[i] = lag
            aper[i] = r[i, t]
    return lags_arr, aper_arr
