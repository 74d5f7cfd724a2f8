"""Griffin-Lim inversion of log-mel spectrograms."""
from __future__ import annotations

import numpy as np

from melshift.features import AudioBuffer, MelSpectrogram, istft, stft
from melshift.transforms import TransformSet, build_transforms

PEAK_LIMIT = 0.95


def mel_to_magnitude(mel: MelSpectrogram, transforms: TransformSet | None = None) -> np.ndarray:
    """Linear STFT magnitude estimate ``max(M+ exp(S), 0)``, ``n_frames x K``."""
    transforms = transforms or build_transforms(mel.config)
    mag = np.exp(np.asarray(mel.data, dtype=np.float64)) @ transforms.mel_pinv.T
    return np.maximum(mag, 0.0)


def griffin_lim(magnitude: np.ndarray, config, iterations: int = 32, momentum: float = 0.99,
                length: int | None = None) -> np.ndarray:
    """Fast Griffin-Lim (momentum-accelerated) from a zero initial phase."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not 0.0 <= momentum < 1.0:
        raise ValueError("momentum must be in [0, 1)")
    magnitude = np.asarray(magnitude, dtype=np.float64)
    if length is None:
        length = (magnitude.shape[0] - 1) * config.hop_length
    angles = np.ones(magnitude.shape, dtype=np.complex128)
    rebuilt = np.zeros_like(angles)
    alpha = momentum / (1.0 + momentum)
    eps = np.finfo(np.float64).tiny
    for _ in range(iterations):
        previous = rebuilt
        rebuilt = stft(istft(magnitude * angles, config, length), config)
        angles = rebuilt - alpha * previous
        angles /= np.abs(angles) + eps
    return istft(magnitude * angles, config, length)


def spectral_convergence(samples: np.ndarray, magnitude: np.ndarray, config) -> float:
    """``||abs(STFT(y)) - target||_F / ||target||_F``."""
    est = np.abs(stft(samples, config))
    n = min(est.shape[0], magnitude.shape[0])
    target = magnitude[:n]
    denom = np.linalg.norm(target)
    return float(np.linalg.norm(est[:n] - target) / denom) if denom > 0 else 0.0


def mel_to_audio(mel: MelSpectrogram, iterations: int = 32, momentum: float = 0.99,
                 transforms: TransformSet | None = None) -> AudioBuffer:
    """Invert a log-mel spectrogram to a waveform of ``(n_frames - 1) * hop`` samples.

    The output is scaled to a peak of 0.95 only if it would otherwise exceed it.
    """
    config = mel.config
    magnitude = mel_to_magnitude(mel, transforms)
    samples = griffin_lim(magnitude, config, iterations, momentum)
    peak = float(np.max(np.abs(samples))) if samples.size else 0.0
    if peak > PEAK_LIMIT:
        samples = samples * (PEAK_LIMIT / peak)
    if samples.size == 0:
        samples = np.zeros(1)
    return AudioBuffer(samples, config.sample_rate)
