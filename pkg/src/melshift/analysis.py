"""F0 estimation and classical cepstral analysis."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, sosfiltfilt

from melshift import kernels
from melshift.features import AudioBuffer


@dataclass(frozen=True)
class F0Params:
    """Settings of the difference-function (YIN-style) tracker.

    The frame grid is ``i * hop_length`` with frames centred on it, the same
    grid the mel features use, so contours line up with mel frames.
    ``threshold`` selects the first dip of the normalised difference function;
    ``voicing_threshold`` bounds the aperiodicity of voiced frames.
    ``lowpass_hz`` applies a zero-phase 4th-order Butterworth low-pass before
    analysis (``None`` disables it).
    """

    hop_length: int = 256
    frame_length: int = 2048
    f0_min: float = 40.0
    f0_max: float = 1000.0
    threshold: float = 0.15
    voicing_threshold: float = 0.3
    silence_db: float = -60.0
    lowpass_hz: float | None = 1000.0


@dataclass(frozen=True, eq=False)
class F0Contour:
    f0_hz: np.ndarray
    voiced: np.ndarray
    hop_length: int
    sample_rate: int

    def __post_init__(self):
        f0 = np.asarray(self.f0_hz, dtype=np.float64)
        voiced = np.asarray(self.voiced, dtype=bool)
        if f0.shape != voiced.shape or f0.ndim != 1:
            raise ValueError("f0_hz and voiced must be 1-D sequences of equal length")
        if np.any((f0 > 0) != voiced):
            raise ValueError("f0_hz must be positive exactly on voiced frames")
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "voiced", voiced)

    def __len__(self) -> int:
        return self.f0_hz.size

    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.hop_length / self.sample_rate

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["frame_index", "time_sec", "f0_hz", "voiced"])
        for i, (t, f, v) in enumerate(zip(self.times(), self.f0_hz, self.voiced)):
            writer.writerow([i, f"{t:.6f}", f"{f:.4f}", int(v)])
        return buf.getvalue()


def _analysis_frames(samples: np.ndarray, frame_length: int, hop: int) -> np.ndarray:
    half = frame_length // 2
    mode = "reflect" if samples.size > half else "constant"
    padded = np.pad(samples, half, mode=mode)
    n_frames = samples.size // hop + 1
    view = np.lib.stride_tricks.sliding_window_view(padded, frame_length)
    return view[::hop][:n_frames]


def estimate_f0(audio: AudioBuffer, params: F0Params = F0Params()) -> F0Contour:
    """Frame-wise F0 with voicing decisions.

    Each frame's cumulative-mean-normalised difference function is searched
    for the first dip below ``threshold`` in the lag range of
    ``[f0_min, f0_max]`` (the global minimum if there is none), refined by
    parabolic interpolation. A frame is voiced when the aperiodicity at that
    lag is below ``voicing_threshold`` and its RMS is above ``silence_db`` dBFS.
    """
    fs = audio.sample_rate
    samples = audio.samples
    width = params.frame_length // 2
    tau_min = max(2, int(np.floor(fs / params.f0_max)))
    tau_max = int(np.ceil(fs / params.f0_min))
    if tau_max + 1 + width > params.frame_length:
        raise ValueError("frame_length too short for f0_min")

    filtered = samples
    if params.lowpass_hz is not None and params.lowpass_hz < fs / 2 and samples.size > 27:
        sos = butter(4, params.lowpass_hz, fs=fs, output="sos")
        filtered = sosfiltfilt(sos, samples)

    raw = _analysis_frames(samples, params.frame_length, params.hop_length)
    frames = _analysis_frames(filtered, params.frame_length, params.hop_length)

    diff = kernels.yin_difference(frames, width, tau_max + 1)
    norm = kernels.cmnd(diff)
    lags, aperiodicity = kernels.pick_lags(norm, tau_min, tau_max, params.threshold)

    rms = np.sqrt(np.mean(raw * raw, axis=1))
    loud = rms > 10.0 ** (params.silence_db / 20.0)
    with np.errstate(divide="ignore"):
        f0 = np.where(lags > 0, fs / lags, 0.0)
    voiced = loud & (aperiodicity < params.voicing_threshold) & (f0 >= params.f0_min) & (f0 <= params.f0_max)
    return F0Contour(np.where(voiced, f0, 0.0), voiced, params.hop_length, fs)


def discrete_cepstrum(frame, log_floor: float = 1e-5) -> np.ndarray:
    """Real cepstrum: inverse DFT of ``log(max(|DFT(frame)|, log_floor))``."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1 or frame.size < 2:
        raise ValueError("frame must be 1-D with at least 2 samples")
    spectrum = np.log(np.maximum(np.abs(np.fft.fft(frame)), log_floor))
    return np.fft.ifft(spectrum).real


def source_region_argmax(c, k_min: int) -> tuple[int, float]:
    """Index and value of the maximum over ``k >= k_min`` (first index wins ties)."""
    c = np.asarray(c)
    if not 0 <= k_min < c.shape[-1]:
        raise ValueError("k_min must lie inside the sequence")
    idx = k_min + int(np.argmax(c[k_min:]))
    return idx, float(c[idx])
