# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the multi-transmitter capacity iteration.

Same contract and numerics as the numpy fallback (``gba_py.gba_run``):
flat C loops over the channel matrix with mixed-radix decoding of the
per-transmitter symbols, no temporary allocations inside the cycle.
"""

import numpy as np

from libc.math cimport exp, fabs, log

cdef double LN2 = 0.6931471805599453
cdef double TINY = 1e-300


def gba_run(channel, input_sizes, q_init, double tol=1e-9, int max_iter=20000):
    """Cyclic ascent over per-transmitter input distributions.

    See ``gba_py.gba_run`` for the full contract; the two implementations
    agree to floating-point roundoff.
    """
    cdef const double[:, ::1] W = np.ascontiguousarray(channel, dtype=np.float64)
    cdef Py_ssize_t Nx = W.shape[0]
    cdef Py_ssize_t Ny = W.shape[1]
    sizes_arr = np.ascontiguousarray(input_sizes, dtype=np.intp)
    cdef Py_ssize_t[::1] sizes = sizes_arr
    cdef Py_ssize_t K = sizes.shape[0]

    offsets_arr = np.zeros(K + 1, dtype=np.intp)
    strides_arr = np.ones(K, dtype=np.intp)
    cdef Py_ssize_t[::1] offsets = offsets_arr
    cdef Py_ssize_t[::1] strides = strides_arr
    cdef Py_ssize_t k
    for k in range(K):
        offsets[k + 1] = offsets[k] + sizes[k]
    for k in range(K - 2, -1, -1):
        strides[k] = strides[k + 1] * sizes[k + 1]

    q_arr = np.array(q_init, dtype=np.float64)
    cdef double[::1] q = q_arr
    if q.shape[0] != offsets[K]:
        raise ValueError("q_init length does not match input sizes")

    wlogw_arr = np.empty(Nx, dtype=np.float64)
    px_arr = np.empty(Nx, dtype=np.float64)
    score_arr = np.empty(Nx, dtype=np.float64)
    py_arr = np.empty(Ny, dtype=np.float64)
    lpy_arr = np.empty(Ny, dtype=np.float64)
    dmax = 0
    for k in range(K):
        if sizes[k] > dmax:
            dmax = sizes[k]
    d_arr = np.empty(dmax, dtype=np.float64)
    hist_arr = np.empty(max_iter + 1, dtype=np.float64)
    cdef double[::1] wlogw = wlogw_arr
    cdef double[::1] px = px_arr
    cdef double[::1] score = score_arr
    cdef double[::1] py = py_arr
    cdef double[::1] lpy = lpy_arr
    cdef double[::1] d = d_arr
    cdef double[::1] hist = hist_arr

    cdef Py_ssize_t x, y, i, it, di, n_hist
    cdef double acc, w, p, obj, shift, total
    cdef bint converged = False

    for x in range(Nx):
        acc = 0.0
        for y in range(Ny):
            w = W[x, y]
            if w > 0.0:
                acc += w * log(w)
        wlogw[x] = acc

    # px and the row scores against the current output marginal
    _refresh(W, q, offsets, strides, sizes, wlogw, px, py, lpy, score)
    obj = 0.0
    for x in range(Nx):
        obj += px[x] * score[x]
    hist[0] = obj / LN2
    n_hist = 1

    for it in range(max_iter):
        for i in range(K):
            _refresh(W, q, offsets, strides, sizes, wlogw, px, py, lpy, score)
            for di in range(sizes[i]):
                d[di] = 0.0
            for x in range(Nx):
                p = 1.0
                for k in range(K):
                    if k != i:
                        p *= q[offsets[k] + (x // strides[k]) % sizes[k]]
                di = (x // strides[i]) % sizes[i]
                d[di] += p * score[x]
            shift = 0.0
            w = 0.0  # tracks whether a supported symbol was seen
            for di in range(sizes[i]):
                if q[offsets[i] + di] > 0.0 and (w == 0.0 or d[di] > shift):
                    shift = d[di]
                    w = 1.0
            total = 0.0
            for di in range(sizes[i]):
                if q[offsets[i] + di] > 0.0:
                    q[offsets[i] + di] = q[offsets[i] + di] * exp(d[di] - shift)
                    total += q[offsets[i] + di]
            if total <= 0.0:
                raise FloatingPointError("transmitter distribution collapsed")
            for di in range(sizes[i]):
                q[offsets[i] + di] /= total
        _refresh(W, q, offsets, strides, sizes, wlogw, px, py, lpy, score)
        obj = 0.0
        for x in range(Nx):
            obj += px[x] * score[x]
        hist[n_hist] = obj / LN2
        n_hist += 1
        if fabs(hist[n_hist - 1] - hist[n_hist - 2]) < tol:
            converged = True
            break

    return q_arr, hist_arr[:n_hist].copy(), bool(converged)


cdef void _refresh(
    const double[:, ::1] W,
    double[::1] q,
    Py_ssize_t[::1] offsets,
    Py_ssize_t[::1] strides,
    Py_ssize_t[::1] sizes,
    double[::1] wlogw,
    double[::1] px,
    double[::1] py,
    double[::1] lpy,
    double[::1] score,
) noexcept:
    cdef Py_ssize_t Nx = W.shape[0]
    cdef Py_ssize_t Ny = W.shape[1]
    cdef Py_ssize_t K = sizes.shape[0]
    cdef Py_ssize_t x, y, k
    cdef double p, acc
    for y in range(Ny):
        py[y] = 0.0
    for x in range(Nx):
        p = 1.0
        for k in range(K):
            p *= q[offsets[k] + (x // strides[k]) % sizes[k]]
        px[x] = p
        if p > 0.0:
            for y in range(Ny):
                py[y] += p * W[x, y]
    for y in range(Ny):
        lpy[y] = log(py[y] if py[y] > TINY else TINY)
    for x in range(Nx):
        acc = 0.0
        for y in range(Ny):
            acc += W[x, y] * lpy[y]
        score[x] = wlogw[x] - acc
