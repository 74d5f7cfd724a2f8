"""Linear operators of the pipeline.

Everything that maps between the mel, linear-frequency and pseudo-cepstral
domains is a fixed matrix determined by a :class:`MelConfig`:

* ``mel_matrix``      M, ``n_mels x K`` triangular filterbank
* ``mel_pinv``        M+, its Moore-Penrose pseudo-inverse (``K x n_mels``)
* ``dct``             D, orthonormal DCT-II over the K one-sided bins
* ``idct``            D^T (orthonormality makes the inverse the transpose)
* ``fused_forward``   D @ M+, log-mel frame -> pseudo-cepstrum in one product
* ``fused_backward``  M @ D^T, pseudo-cepstrum -> log-mel frame

All operators are float64 and read-only once built.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from melshift.config import MelConfig
from melshift.errors import ConfigError, RankDeficientError

PINV_RCOND = 1e-12

# slaney: linear below 1 kHz, logarithmic above
_F_SP = 200.0 / 3
_MIN_LOG_HZ = 1000.0
_MIN_LOG_MEL = _MIN_LOG_HZ / _F_SP
_LOGSTEP = np.log(6.4) / 27.0


def hz_to_mel(freqs, scale: str = "slaney"):
    freqs = np.asarray(freqs, dtype=np.float64)
    if scale == "htk":
        return 2595.0 * np.log10(1.0 + freqs / 700.0)
    mels = freqs / _F_SP
    log_region = freqs >= _MIN_LOG_HZ
    safe = np.where(log_region, freqs, _MIN_LOG_HZ)
    return np.where(log_region, _MIN_LOG_MEL + np.log(safe / _MIN_LOG_HZ) / _LOGSTEP, mels)


def mel_to_hz(mels, scale: str = "slaney"):
    mels = np.asarray(mels, dtype=np.float64)
    if scale == "htk":
        return 700.0 * (10.0 ** (mels / 2595.0) - 1.0)
    freqs = _F_SP * mels
    log_region = mels >= _MIN_LOG_MEL
    return np.where(log_region, _MIN_LOG_HZ * np.exp(_LOGSTEP * (mels - _MIN_LOG_MEL)), freqs)


def build_mel_filterbank(config: MelConfig) -> np.ndarray:
    """Triangular mel filterbank of shape ``(n_mels, n_fft // 2 + 1)``.

    Filter ``i`` rises linearly from mel point ``i`` to a peak of 1 at point
    ``i + 1`` and falls back to zero at point ``i + 2``; the ``n_mels + 2``
    points are uniformly spaced on the configured mel scale between ``f_min``
    and ``f_max``. With ``config.mel_norm`` each row is scaled by
    ``2 / (f_{i+2} - f_i)`` so that every filter has unit area in Hz.

    Raises:
        ConfigError: if some filter covers no FFT bin, i.e. adjacent mel
            points are closer than the bin spacing.
    """
    n_bins = config.n_bins
    fft_freqs = np.arange(n_bins, dtype=np.float64) * config.sample_rate / config.n_fft
    mel_edges = np.linspace(
        hz_to_mel(config.f_min, config.mel_scale),
        hz_to_mel(config.f_max, config.mel_scale),
        config.n_mels + 2,
    )
    hz_edges = mel_to_hz(mel_edges, config.mel_scale)

    widths = np.diff(hz_edges)
    ramps = hz_edges[:, None] - fft_freqs[None, :]
    lower = -ramps[:-2] / widths[:-1, None]
    upper = ramps[2:] / widths[1:, None]
    weights = np.maximum(0.0, np.minimum(lower, upper))

    if config.mel_norm:
        weights *= (2.0 / (hz_edges[2:] - hz_edges[:-2]))[:, None]

    empty = np.flatnonzero(~(weights > 0).any(axis=1))
    if empty.size:
        raise ConfigError(
            f"mel filters {empty.tolist()} cover no FFT bin; "
            "reduce n_mels or increase n_fft"
        )
    return weights


def build_pseudo_inverse(matrix: np.ndarray, rcond: float = PINV_RCOND) -> np.ndarray:
    """Moore-Penrose pseudo-inverse through the SVD.

    Singular values below ``rcond * max_singular_value`` count as zero. The
    filterbank is expected to have full row rank, so any such value is an
    error rather than something to silently truncate.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    full_rank = min(matrix.shape)
    s_max = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > rcond * s_max)) if s_max > 0 else 0
    if rank < full_rank:
        raise RankDeficientError(rank, full_rank)
    return (vt.T / s) @ u.T


def build_dct(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix: ``D[k, m] = s(k) cos(pi k (2m + 1) / 2n)``."""
    if n < 2:
        raise ValueError("DCT size must be at least 2")
    k = np.arange(n, dtype=np.float64)[:, None]
    m = np.arange(n, dtype=np.float64)[None, :]
    basis = np.cos(np.pi * k * (2.0 * m + 1.0) / (2.0 * n))
    scale = np.full((n, 1), np.sqrt(2.0 / n))
    scale[0, 0] = np.sqrt(1.0 / n)
    return scale * basis


@dataclass(frozen=True, eq=False)
class TransformSet:
    config: MelConfig
    mel_matrix: np.ndarray
    mel_pinv: np.ndarray
    dct: np.ndarray
    idct: np.ndarray
    fused_forward: np.ndarray
    fused_backward: np.ndarray

    @property
    def n_bins(self) -> int:
        return self.mel_matrix.shape[1]

    @property
    def n_mels(self) -> int:
        return self.mel_matrix.shape[0]


def fuse(transforms: TransformSet) -> tuple[np.ndarray, np.ndarray]:
    """Collapse pseudo-inverse + DCT and IDCT + filterbank into single matrices."""
    forward = transforms.dct @ transforms.mel_pinv
    backward = transforms.mel_matrix @ transforms.idct
    return forward, backward


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@functools.lru_cache(maxsize=16)
def build_transforms(config: MelConfig) -> TransformSet:
    """Build (and memoise per config) the full operator set."""
    mel = build_mel_filterbank(config)
    pinv = build_pseudo_inverse(mel)
    dct = build_dct(config.n_bins)
    partial = TransformSet(config, mel, pinv, dct, dct.T, np.empty(0), np.empty(0))
    forward, backward = fuse(partial)
    return TransformSet(
        config=config,
        mel_matrix=_frozen(mel),
        mel_pinv=_frozen(pinv),
        dct=_frozen(dct),
        idct=_frozen(dct.T),
        fused_forward=_frozen(forward),
        fused_backward=_frozen(backward),
    )


def _inf_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def invariant_residuals(transforms: TransformSet) -> dict[str, float]:
    """Numerical residuals of the operator identities, as max-abs deviations."""
    m, p, d = transforms.mel_matrix, transforms.mel_pinv, transforms.dct
    proj = m @ p
    return {
        "dct_orthonormality": _inf_norm(d @ d.T - np.eye(d.shape[0])),
        "dct_idct_identity": _inf_norm(d @ transforms.idct - np.eye(d.shape[0])),
        "penrose_m_pinv_m": _inf_norm(m @ p @ m - m),
        "penrose_pinv_m_pinv": _inf_norm(p @ m @ p - p),
        "penrose_symmetric_mp": _inf_norm(proj - proj.T),
        "penrose_symmetric_pm": _inf_norm(p @ m - (p @ m).T),
        "projector_idempotence": _inf_norm(proj @ proj - proj),
        "fused_forward": _inf_norm(transforms.fused_forward - d @ p),
        "fused_backward": _inf_norm(transforms.fused_backward - m @ transforms.idct),
    }


INVARIANT_TOLERANCES = {
    "dct_orthonormality": 1e-12,
    "dct_idct_identity": 1e-10,
    "penrose_m_pinv_m": 1e-8,
    "penrose_pinv_m_pinv": 1e-8,
    "penrose_symmetric_mp": 1e-8,
    "penrose_symmetric_pm": 1e-8,
    "projector_idempotence": 1e-8,
    "fused_forward": 1e-12,
    "fused_backward": 1e-12,
}
