# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Signatures and arithmetic order mirror ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def sosfilt_rows(sos, x):
    cdef double[:, ::1] s = np.ascontiguousarray(sos, dtype=np.float64)
    cdef double[:, ::1] y = np.array(x, dtype=np.float64, copy=True, order="C")
    cdef Py_ssize_t rows = y.shape[0], steps = y.shape[1], nsec = s.shape[0]
    cdef Py_ssize_t r, t, k
    cdef double b0, b1, b2, a1, a2, z1, z2, xt, yt
    with nogil:
        for k in range(nsec):
            b0 = s[k, 0]; b1 = s[k, 1]; b2 = s[k, 2]; a1 = s[k, 3]; a2 = s[k, 4]
            for r in range(rows):
                z1 = 0.0
                z2 = 0.0
                for t in range(steps):
                    xt = y[r, t]
                    yt = b0 * xt + z1
                    z1 = b1 * xt - a1 * yt + z2
                    z2 = b2 * xt - a2 * yt
                    y[r, t] = yt
    return np.asarray(y)


cdef enum:
    BLOCK = 16


cdef void _lif_block(const double[:, ::1] xv, Py_ssize_t r0, Py_ssize_t nb,
                     double dt, double tau, double c, double gain, double v_thr,
                     double v_reset, double v_rest, unsigned char[:, ::1] o,
                     cnp.int64_t[::1] cnt, bint raster) noexcept nogil:
    # Rows of a block advance together so their division chains overlap.
    cdef double v[BLOCK]
    cdef cnp.int64_t n[BLOCK]
    cdef Py_ssize_t steps = xv.shape[1], t, k
    cdef double drive
    for k in range(nb):
        v[k] = v_rest
        n[k] = 0
    for t in range(steps):
        for k in range(nb):
            drive = (gain * xv[r0 + k, t]) / c
            v[k] = v[k] + dt * (drive - (v[k] - v_rest) / tau)
            if v[k] >= v_thr:
                v[k] = v_reset
                n[k] += 1
                if raster:
                    o[r0 + k, t] = 1
    if not raster:
        for k in range(nb):
            cnt[r0 + k] = n[k]


def lif_encode_rows(x, double dt, double tau, double c, double gain,
                    double v_thr, double v_reset, double v_rest):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t rows = xv.shape[0], steps = xv.shape[1], r0
    out = np.zeros((rows, steps), dtype=np.uint8)
    cdef unsigned char[:, ::1] o = out
    cdef cnp.int64_t[::1] dummy = np.zeros(1, dtype=np.int64)
    r0 = 0
    with nogil:
        while r0 < rows:
            _lif_block(xv, r0, min(<Py_ssize_t>BLOCK, rows - r0), dt, tau, c, gain,
                       v_thr, v_reset, v_rest, o, dummy, True)
            r0 += BLOCK
    return out


def lif_count_rows(x, double dt, double tau, double c, double gain,
                   double v_thr, double v_reset, double v_rest):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t rows = xv.shape[0], r0
    counts = np.zeros(rows, dtype=np.int64)
    cdef cnp.int64_t[::1] cnt = counts
    cdef unsigned char[:, ::1] dummy = np.zeros((1, 1), dtype=np.uint8)
    r0 = 0
    with nogil:
        while r0 < rows:
            _lif_block(xv, r0, min(<Py_ssize_t>BLOCK, rows - r0), dt, tau, c, gain,
                       v_thr, v_reset, v_rest, dummy, cnt, False)
            r0 += BLOCK
    return counts


def rotating_reservoir(spikes, masks, double dt, double tau, double c,
                       double gain, double spike_current, double v_thr,
                       double v_reset, double v_rest):
    cdef const unsigned char[:, ::1] sp = np.ascontiguousarray(spikes, dtype=np.uint8)
    cdef const unsigned char[:, ::1] mk = np.ascontiguousarray(masks, dtype=np.uint8)
    cdef Py_ssize_t rows = sp.shape[0], steps = sp.shape[1], n = mk.shape[1]
    out = np.zeros((rows, n, steps), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] o = out
    cdef double[::1] v = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t r, t, i, j, j0
    # w * s * spike_current is either spike_current or a signed zero.
    cdef double drive_on = (gain * (1.0 * 1.0 * spike_current)) / c
    cdef double drive_off = (gain * (0.0 * 1.0 * spike_current)) / c
    cdef double drive
    with nogil:
        for r in range(rows):
            for i in range(n):
                v[i] = v_rest
            j0 = 0
            for t in range(steps):
                # mask index for neuron i is (i - t) mod n; j0 tracks (-t) mod n
                j = j0
                if sp[r, t]:
                    for i in range(n):
                        drive = drive_on if mk[r, j] else drive_off
                        v[i] = v[i] + dt * (drive - (v[i] - v_rest) / tau)
                        if v[i] >= v_thr:
                            o[r, i, t] = 1
                            v[i] = v_reset
                        j += 1
                        if j == n:
                            j = 0
                else:
                    for i in range(n):
                        v[i] = v[i] + dt * (drive_off - (v[i] - v_rest) / tau)
                        if v[i] >= v_thr:
                            o[r, i, t] = 1
                            v[i] = v_reset
                j0 = j0 - 1 if j0 > 0 else n - 1
    return out


def delta_epoch(weights, bias, x, y, order, double alpha):
    cdef double[:, ::1] W = weights
    cdef double[::1] b = bias
    cdef double[:, ::1] X = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.int64_t[::1] Y = np.ascontiguousarray(y, dtype=np.int64)
    cdef cnp.int64_t[::1] O = np.ascontiguousarray(order, dtype=np.int64)
    cdef Py_ssize_t k = W.shape[0], d = W.shape[1], m = O.shape[0]
    cdef double[::1] z = np.empty(k, dtype=np.float64)
    cdef Py_ssize_t q, s, i, j
    cdef double zmax, tot, err, acc
    with nogil:
        for q in range(m):
            s = O[q]
            zmax = -1e308
            for i in range(k):
                acc = b[i]
                for j in range(d):
                    acc = acc + W[i, j] * X[s, j]
                z[i] = acc
                if acc > zmax:
                    zmax = acc
            tot = 0.0
            for i in range(k):
                z[i] = exp(z[i] - zmax)
                tot = tot + z[i]
            for i in range(k):
                err = -z[i] / tot
                if i == Y[s]:
                    err = err + 1.0
                err = err * alpha
                if err != 0.0:
                    for j in range(d):
                        W[i, j] = W[i, j] + err * X[s, j]
                b[i] = b[i] + err
