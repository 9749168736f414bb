# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled MLP kernels: per-realization forward and input-VJP loops in C.

See ``_mlp_np.py`` for the shared semantics; the two backends must agree to
floating-point roundoff (accumulation order may differ in the last ulps).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport tanh

cnp.import_array()

ACT_RELU = 0
ACT_TANH = 1


def mlp_forward(const long long[::1] sizes, int act_id,
                const double[:, ::1] params, const double[:, ::1] xs):
    cdef Py_ssize_t n_layers = sizes.shape[0] - 1
    cdef Py_ssize_t n_samples = params.shape[0]
    cdef Py_ssize_t k = sizes[n_layers]
    cdef Py_ssize_t max_w = 0
    cdef Py_ssize_t l, s, i, j, n_in, n_out, off, wof, bof
    cdef double acc

    for l in range(n_layers + 1):
        if sizes[l] > max_w:
            max_w = sizes[l]

    out_arr = np.empty((n_samples, k), dtype=np.float64)
    buf_a = np.empty(max_w, dtype=np.float64)
    buf_z = np.empty(max_w, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] a = buf_a
    cdef double[::1] z = buf_z
    cdef const double[::1] prow
    cdef const double[::1] xrow
    cdef bint shared_x = xs.shape[0] == 1

    for s in range(n_samples):
        prow = params[s]
        xrow = xs[0] if shared_x else xs[s]
        n_in = sizes[0]
        for i in range(n_in):
            a[i] = xrow[i]
        off = 0
        for l in range(n_layers):
            n_in = sizes[l]
            n_out = sizes[l + 1]
            wof = off
            bof = off + n_out * n_in
            for j in range(n_out):
                acc = prow[bof + j]
                for i in range(n_in):
                    acc += prow[wof + j * n_in + i] * a[i]
                z[j] = acc
            off = bof + n_out
            if l == n_layers - 1:
                for j in range(n_out):
                    out[s, j] = z[j]
            elif act_id == ACT_RELU:
                for j in range(n_out):
                    a[j] = z[j] if z[j] > 0.0 else 0.0
            else:
                for j in range(n_out):
                    a[j] = tanh(z[j])
    return out_arr


def mlp_vjp_input(const long long[::1] sizes, int act_id,
                  const double[:, ::1] params, const double[:, ::1] xs,
                  const double[:, ::1] gout):
    cdef Py_ssize_t n_layers = sizes.shape[0] - 1
    cdef Py_ssize_t n_samples = params.shape[0]
    cdef Py_ssize_t d = sizes[0]
    cdef Py_ssize_t max_w = 0
    cdef Py_ssize_t total_units = 0
    cdef Py_ssize_t l, s, i, j, n_in, n_out, off, wof, bof, aof
    cdef double acc, av
    cdef const double* wrow
    cdef double* hptr

    for l in range(n_layers + 1):
        if sizes[l] > max_w:
            max_w = sizes[l]
    for l in range(1, n_layers):
        total_units += sizes[l]

    grad_arr = np.empty((n_samples, d), dtype=np.float64)
    # activations of every hidden layer for one sample, packed back to back
    buf_acts = np.empty(total_units if total_units > 0 else 1, dtype=np.float64)
    buf_a = np.empty(max_w, dtype=np.float64)
    buf_g = np.empty(max_w, dtype=np.float64)
    buf_h = np.empty(max_w, dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    cdef double[::1] acts = buf_acts
    cdef double[::1] a = buf_a
    cdef double[::1] g = buf_g
    cdef double[::1] h = buf_h
    cdef const double[::1] prow
    cdef const double[::1] xrow
    cdef bint shared_x = xs.shape[0] == 1
    # parameter offset of each layer
    offs_arr = np.zeros(n_layers, dtype=np.int64)
    aoffs_arr = np.zeros(n_layers + 1, dtype=np.int64)
    cdef long long[::1] offs = offs_arr
    cdef long long[::1] aoffs = aoffs_arr
    off = 0
    for l in range(n_layers):
        offs[l] = off
        off += sizes[l + 1] * sizes[l] + sizes[l + 1]
    aof = 0
    for l in range(1, n_layers):
        aoffs[l] = aof
        aof += sizes[l]

    for s in range(n_samples):
        prow = params[s]
        xrow = xs[0] if shared_x else xs[s]
        n_in = sizes[0]
        for i in range(n_in):
            a[i] = xrow[i]
        # forward, caching hidden activations
        for l in range(n_layers - 1):
            n_in = sizes[l]
            n_out = sizes[l + 1]
            wof = offs[l]
            bof = wof + n_out * n_in
            for j in range(n_out):
                acc = prow[bof + j]
                for i in range(n_in):
                    acc += prow[wof + j * n_in + i] * a[i]
                if act_id == ACT_RELU:
                    h[j] = acc if acc > 0.0 else 0.0
                else:
                    h[j] = tanh(acc)
            for j in range(n_out):
                a[j] = h[j]
                acts[aoffs[l + 1] + j] = h[j]
        # backward; accumulate row-sequentially for cache-friendly access
        n_out = sizes[n_layers]
        for j in range(n_out):
            g[j] = gout[s, j]
        for l in range(n_layers - 1, -1, -1):
            n_in = sizes[l]
            n_out = sizes[l + 1]
            wof = offs[l]
            for i in range(n_in):
                h[i] = 0.0
            for j in range(n_out):
                acc = g[j]
                wrow = &prow[wof + j * n_in]
                hptr = &h[0]
                for i in range(n_in):
                    hptr[i] += wrow[i] * acc
            if l == 0:
                for i in range(d):
                    grad[s, i] = h[i]
            elif act_id == ACT_RELU:
                for i in range(n_in):
                    av = acts[aoffs[l] + i]
                    g[i] = h[i] if av > 0.0 else 0.0
            else:
                for i in range(n_in):
                    av = acts[aoffs[l] + i]
                    g[i] = h[i] * (1.0 - av * av)
    return grad_arr
