"""Pure numpy implementations of the hot loops.

Every routine vectorises across rows and steps through time in Python.
Arithmetic is written in exactly the same order as ``_core.pyx`` so the
two backends agree bit-for-bit on the spiking kernels.
"""
import numpy as np


def sosfilt_rows(sos, x):
    """Filter every row of ``x`` through a biquad cascade (transposed DF-II).

    ``sos`` has one row ``(b0, b1, b2, a1, a2)`` per section; state starts at zero.
    """
    sos = np.ascontiguousarray(sos, dtype=np.float64)
    y = np.array(x, dtype=np.float64, copy=True, order="C")
    rows, steps = y.shape
    for b0, b1, b2, a1, a2 in sos:
        z1 = np.zeros(rows)
        z2 = np.zeros(rows)
        for t in range(steps):
            xt = y[:, t].copy()
            yt = b0 * xt + z1
            z1 = b1 * xt - a1 * yt + z2
            z2 = b2 * xt - a2 * yt
            y[:, t] = yt
    return y


def lif_encode_rows(x, dt, tau, c, gain, v_thr, v_reset, v_rest):
    """Run one LIF neuron per row; return the uint8 spike raster."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    rows, steps = x.shape
    out = np.zeros((rows, steps), dtype=np.uint8)
    v = np.full(rows, v_rest, dtype=np.float64)
    for t in range(steps):
        drive = (gain * x[:, t]) / c
        v = v + dt * (drive - (v - v_rest) / tau)
        fired = v >= v_thr
        v[fired] = v_reset
        out[:, t] = fired
    return out


def lif_count_rows(x, dt, tau, c, gain, v_thr, v_reset, v_rest):
    """Spike count per row; same dynamics as :func:`lif_encode_rows`."""
    return lif_encode_rows(x, dt, tau, c, gain, v_thr, v_reset, v_rest).sum(
        axis=1, dtype=np.int64
    )


def rotating_reservoir(spikes, masks, dt, tau, c, gain, spike_current,
                       v_thr, v_reset, v_rest):
    """Simulate one rotating ring bank per input row.

    ``spikes`` is (R, L) uint8 and ``masks`` is (R, N) uint8. Neuron ``i`` at
    step ``t`` is driven through mask entry ``(i - t) mod N``. Returns an
    (R, N, L) uint8 raster.
    """
    spikes = np.ascontiguousarray(spikes, dtype=np.uint8)
    masks = np.ascontiguousarray(masks, dtype=np.uint8)
    rows, steps = spikes.shape
    n = masks.shape[1]
    out = np.zeros((rows, n, steps), dtype=np.uint8)
    v = np.full((rows, n), v_rest, dtype=np.float64)
    idx = np.arange(n)
    maskf = masks.astype(np.float64)
    for t in range(steps):
        w = maskf[:, (idx - t) % n]
        i_in = w * spikes[:, t : t + 1] * spike_current
        drive = (gain * i_in) / c
        v = v + dt * (drive - (v - v_rest) / tau)
        fired = v >= v_thr
        v[fired] = v_reset
        out[:, :, t] = fired
    return out


def delta_epoch(weights, bias, x, y, order, alpha):
    """One online pass of the softmax delta rule, updating in place."""
    for s in order:
        xs = x[s]
        z = weights @ xs + bias
        z = z - z.max()
        p = np.exp(z)
        p /= p.sum()
        err = -p
        err[y[s]] += 1.0
        err *= alpha
        weights += np.outer(err, xs)
        bias += err
