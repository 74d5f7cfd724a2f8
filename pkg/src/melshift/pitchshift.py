"""Pitch modification in the mel pseudo-cepstrum domain.

A log-mel frame ``s`` is lifted to the linear-frequency log spectrum with the
filterbank pseudo-inverse and taken to the pseudo-cepstrum with an orthonormal
DCT. Coefficients at quefrencies above ``1 / f0_max`` hold the source
(harmonic) structure; resampling them at ``w * k`` and scaling by ``w`` with
``w = 2 ** (semitones / 12)`` moves the cepstral peak from ``k0`` to ``k0 / w``,
i.e. multiplies F0 by ``w``, while the envelope below the cutoff is untouched.
The result is mapped back with the IDCT and the filterbank.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from melshift import kernels
from melshift.errors import ConfigError, ConfigMismatchError
from melshift.features import MelSpectrogram
from melshift.transforms import TransformSet

MAX_SEMITONES = 48.0


@dataclass(frozen=True)
class ShiftSpec:
    semitones: float = 0.0
    f0_max: float = 500.0
    smoothing_quefrency_bins: int = 0
    interpolation: str = "nearest"

    def __post_init__(self):
        if not math.isfinite(self.semitones) or abs(self.semitones) > MAX_SEMITONES:
            raise ConfigError(f"semitones must be finite with |x| <= {MAX_SEMITONES:g}")
        if not self.f0_max > 0:
            raise ConfigError("invalid f0max: must be positive")
        if self.smoothing_quefrency_bins < 0:
            raise ConfigError("smoothing_quefrency_bins must be >= 0")
        if self.interpolation not in kernels.INTERPOLATION_MODES:
            raise ConfigError(
                f"interpolation must be one of {sorted(kernels.INTERPOLATION_MODES)}"
            )

    @property
    def factor(self) -> float:
        return 2.0 ** (self.semitones / 12.0)

    def check_sample_rate(self, sample_rate: int) -> None:
        if not self.f0_max < sample_rate / 2:
            raise ConfigError(
                f"invalid f0max: {self.f0_max:g} Hz must be below sample_rate/2 = {sample_rate / 2:g} Hz"
            )


@dataclass(frozen=True, eq=False)
class ModificationVector:
    w: np.ndarray
    k_min: int


@dataclass(frozen=True, eq=False)
class PseudoCepstrum:
    """``n_frames x K`` pseudo-cepstral coefficients; ``q[k] = k / sample_rate``."""

    data: np.ndarray
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    def quefrencies(self) -> np.ndarray:
        return np.arange(self.data.shape[1]) / self.sample_rate


def cutoff_index(f0_max: float, sample_rate: int) -> int:
    """Smallest k whose quefrency ``k / fs`` reaches ``1 / f0_max``."""
    return int(math.ceil(sample_rate / f0_max))


def build_modification_vector(spec: ShiftSpec, n_bins: int, sample_rate: int) -> ModificationVector:
    """Liftering-style weights: 1 below the cutoff, ``2**(x/12)`` above.

    With ``smoothing_quefrency_bins = B > 0`` the first B weights at and above
    the cutoff follow a raised-cosine ramp from 1 towards the target factor.
    """
    spec.check_sample_rate(sample_rate)
    k_min = cutoff_index(spec.f0_max, sample_rate)
    if k_min >= n_bins:
        raise ConfigError(
            f"f0_max too low for this spectral resolution: cutoff index {k_min} >= {n_bins}"
        )
    factor = spec.factor
    w = np.ones(n_bins)
    w[k_min:] = factor
    ramp_len = min(spec.smoothing_quefrency_bins, n_bins - k_min)
    if ramp_len and factor != 1.0:
        t = np.arange(1, ramp_len + 1) / (ramp_len + 1)
        w[k_min:k_min + ramp_len] = 1.0 + (factor - 1.0) * 0.5 * (1.0 - np.cos(np.pi * t))
    w.setflags(write=False)
    return ModificationVector(w, k_min)


def shift_frame(c: np.ndarray, w: ModificationVector | np.ndarray, interpolation: str = "nearest") -> np.ndarray:
    """Move the source part of one pseudo-cepstrum frame.

    ``c'[k] = w[k] * c[round(w[k] * k)]`` in nearest mode (halves round up;
    reads at or beyond ``K`` are zero). Linear mode interpolates between the
    two neighbours of ``w[k] * k`` instead.
    """
    weights = w.w if isinstance(w, ModificationVector) else np.asarray(w, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if c.shape != weights.shape:
        raise ValueError(f"frame length {c.shape} does not match weights {weights.shape}")
    mode = kernels.INTERPOLATION_MODES[interpolation]
    return kernels.shift_frames(c[None, :], weights, mode)[0]


def _check_config(mel: MelSpectrogram, transforms: TransformSet) -> None:
    if mel.config != transforms.config:
        raise ConfigMismatchError("mel-spectrogram config does not match the transform set")


def log_mel_to_cepstrum(frames: np.ndarray, transforms: TransformSet) -> np.ndarray:
    """Array form: ``(n_frames, n_mels)`` -> ``(n_frames, K)`` via ``D M+``."""
    return np.asarray(frames, dtype=np.float64) @ transforms.fused_forward.T


def cepstrum_to_log_mel(cep: np.ndarray, transforms: TransformSet, floor: bool = True) -> np.ndarray:
    """Array form of the backward map ``M D^T``, optionally floored at log(log_floor)."""
    out = np.asarray(cep, dtype=np.float64) @ transforms.fused_backward.T
    if floor:
        out = np.maximum(out, math.log(transforms.config.log_floor))
    return out


def mel_to_pseudo_cepstrum(mel: MelSpectrogram, transforms: TransformSet) -> PseudoCepstrum:
    """``C = D M+ S`` frame by frame, without undoing the log compression."""
    _check_config(mel, transforms)
    return PseudoCepstrum(log_mel_to_cepstrum(mel.data, transforms), transforms.config.sample_rate)


def pseudo_cepstrum_to_mel(cep: PseudoCepstrum, transforms: TransformSet, floor: bool = True) -> MelSpectrogram:
    if cep.data.ndim != 2 or cep.data.shape[1] != transforms.n_bins:
        raise ValueError(
            f"pseudo-cepstrum must have {transforms.n_bins} coefficients per frame, got {cep.data.shape}"
        )
    return MelSpectrogram(cepstrum_to_log_mel(cep.data, transforms, floor), transforms.config)


def _weights_for(spec: ShiftSpec | Sequence[ShiftSpec], n_frames: int, transforms: TransformSet):
    n_bins, rate = transforms.n_bins, transforms.config.sample_rate
    if isinstance(spec, ShiftSpec):
        return build_modification_vector(spec, n_bins, rate).w, spec.interpolation
    specs = list(spec)
    if len(specs) != n_frames:
        raise ValueError(f"got {len(specs)} shift specs for {n_frames} frames")
    modes = {s.interpolation for s in specs}
    if len(modes) != 1:
        raise ValueError("per-frame specs must share one interpolation mode")
    weights = np.stack([build_modification_vector(s, n_bins, rate).w for s in specs])
    return weights, modes.pop()


def shift_cepstrum(cep: np.ndarray, spec: ShiftSpec | Sequence[ShiftSpec], transforms: TransformSet) -> np.ndarray:
    weights, interpolation = _weights_for(spec, cep.shape[0], transforms)
    return kernels.shift_frames(cep, weights, kernels.INTERPOLATION_MODES[interpolation])


def shift_log_mel(frames: np.ndarray, spec: ShiftSpec | Sequence[ShiftSpec], transforms: TransformSet, floor: bool = True) -> np.ndarray:
    """Array-level pipeline: log-mel frames in, shifted log-mel frames out (float64)."""
    cep = log_mel_to_cepstrum(frames, transforms)
    return cepstrum_to_log_mel(shift_cepstrum(cep, spec, transforms), transforms, floor)


def pitch_shift_mel(mel: MelSpectrogram, spec: ShiftSpec | Sequence[ShiftSpec], transforms: TransformSet, floor: bool = True) -> MelSpectrogram:
    """Shift the pitch of a log-mel spectrogram.

    ``spec`` may be a single :class:`ShiftSpec` applied to every frame or one
    spec per frame. Unvoiced frames go through the same path. The output keeps
    the input's dtype and config.
    """
    _check_config(mel, transforms)
    out = shift_log_mel(mel.data, spec, transforms, floor)
    return MelSpectrogram(out.astype(mel.data.dtype, copy=False), mel.config)
