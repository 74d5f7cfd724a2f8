"""Pure numpy implementations of the hot kernels.

These define the reference semantics; ``_kernels.pyx`` must agree with them
bit-for-bit for the cepstral shift, CMND and lag picking, and to rounding
error for the YIN difference function (whose summation order differs).
"""
import numpy as np

NEAREST = 0
LINEAR = 1


def shift_frames(cep, weights, mode=NEAREST):
    """Resample every row of ``cep`` at ``weights * k`` and scale by ``weights``.

    ``weights`` is ``(n_frames, K)`` or a single ``(K,)`` row shared by all
    frames. Reads past the last coefficient return zero. Where the weight is
    exactly 1 the input coefficient is copied unchanged.
    """
    cep = np.asarray(cep, dtype=np.float64)
    n_frames, n = cep.shape
    weights = np.broadcast_to(np.asarray(weights, dtype=np.float64), cep.shape)
    pos = weights * np.arange(n, dtype=np.float64)
    if mode == NEAREST:
        idx = np.floor(pos + 0.5).astype(np.intp)
        picked = np.take_along_axis(cep, np.minimum(idx, n - 1), axis=1)
        value = np.where(idx < n, picked, 0.0)
    elif mode == LINEAR:
        base = np.floor(pos)
        frac = pos - base
        i0 = base.astype(np.intp)
        i1 = i0 + 1
        a = np.where(i0 < n, np.take_along_axis(cep, np.minimum(i0, n - 1), axis=1), 0.0)
        b = np.where(i1 < n, np.take_along_axis(cep, np.minimum(i1, n - 1), axis=1), 0.0)
        value = (1.0 - frac) * a + frac * b
    else:
        raise ValueError(f"unknown interpolation mode {mode}")
    out = weights * value
    return np.where(weights == 1.0, cep, out)


def yin_difference(frames, width, tau_max):
    """``d[i, tau] = sum_{j < width} (x[i, j] - x[i, j + tau])**2`` for tau <= tau_max.

    Summed directly. The FFT shortcut ``e_head + e_lag - 2 r`` cancels
    catastrophically when one half of a frame is near-silent, which turns
    onset frames into spurious voiced detections.
    """
    frames = np.asarray(frames, dtype=np.float64)
    n_frames, length = frames.shape
    if width + tau_max > length:
        raise ValueError("frames too short for width + tau_max")
    head = frames[:, :width]
    out = np.zeros((n_frames, tau_max + 1))
    for tau in range(1, tau_max + 1):
        delta = head - frames[:, tau:tau + width]
        out[:, tau] = np.einsum("ij,ij->i", delta, delta)
    return out


def cmnd(diff):
    """Cumulative mean normalised difference; column 0 is defined as 1."""
    diff = np.asarray(diff, dtype=np.float64)
    out = np.ones_like(diff)
    running = np.cumsum(diff[:, 1:], axis=1)
    lags = np.arange(1, diff.shape[1], dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = diff[:, 1:] * lags / running
    out[:, 1:] = np.where(running > 0, ratio, 1.0)
    return out


def pick_lags(norm_diff, tau_min, tau_max, threshold):
    """Absolute-threshold lag search with parabolic refinement.

    Returns ``(lag, aperiodicity)`` per frame. The chosen lag is the local
    minimum following the first sub-threshold value in ``[tau_min, tau_max]``;
    without one, the global minimum of that range. ``aperiodicity`` is the
    normalised difference at the integer lag.
    """
    norm_diff = np.asarray(norm_diff, dtype=np.float64)
    n_frames, n_lags = norm_diff.shape
    lags = np.zeros(n_frames)
    aper = np.ones(n_frames)
    for i in range(n_frames):
        row = norm_diff[i]
        window = row[tau_min:tau_max + 1]
        below = np.flatnonzero(window < threshold)
        if below.size:
            t = tau_min + int(below[0])
            while t + 1 <= tau_max and row[t + 1] < row[t]:
                t += 1
        else:
            t = tau_min + int(np.argmin(window))
        lag = float(t)
        if 0 < t < n_lags - 1:
            a, b, c = row[t - 1], row[t], row[t + 1]
            den = a - 2.0 * b + c
            if den > 0.0:
                offset = 0.5 * (a - c) / den
                lag = t + min(1.0, max(-1.0, offset))
        lags[i] = lag
        aper[i] = row[t]
    return lags, aper
