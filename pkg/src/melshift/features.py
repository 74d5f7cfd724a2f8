"""Log-mel feature extraction, STFT helpers, WAV and MELF file I/O."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from melshift.config import MEL_SCALES, MelConfig
from melshift.errors import (
    AudioError,
    BadMagicError,
    ConfigError,
    ConfigMismatchError,
    MelfError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from melshift.transforms import build_transforms


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise AudioError("audio must be a non-empty mono signal")
        if not np.all(np.isfinite(samples)):
            raise AudioError("audio contains non-finite samples")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True, eq=False)
class MelSpectrogram:
    """Natural-log mel magnitudes, ``n_frames x n_mels``, frame-major."""

    data: np.ndarray
    config: MelConfig

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype not in (np.float32, np.float64):
            data = data.astype(np.float64)
        if data.ndim != 2 or data.shape[1] != self.config.n_mels:
            raise ValueError(
                f"mel data must have shape (n_frames, {self.config.n_mels}), got {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("mel data contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_mels(self) -> int:
        return self.data.shape[1]


# --- STFT -------------------------------------------------------------------

def analysis_window(config: MelConfig) -> np.ndarray:
    """Periodic Hann window of ``win_length``, zero-padded and centred in ``n_fft``."""
    n = np.arange(config.win_length)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / config.win_length)
    left = (config.n_fft - config.win_length) // 2
    out = np.zeros(config.n_fft)
    out[left:left + config.win_length] = window
    return out


def n_frames_for(n_samples: int, hop_length: int) -> int:
    return n_samples // hop_length + 1


def _frames(samples: np.ndarray, config: MelConfig) -> np.ndarray:
    half = config.n_fft // 2
    padded = np.pad(samples, half, mode="reflect")
    view = np.lib.stride_tricks.sliding_window_view(padded, config.n_fft)
    return view[::config.hop_length]


def _check_audio(audio: AudioBuffer, config: MelConfig) -> None:
    if audio.sample_rate != config.sample_rate:
        raise ConfigMismatchError(
            f"audio sample rate {audio.sample_rate} Hz does not match config "
            f"sample rate {config.sample_rate} Hz"
        )
    if len(audio) < config.win_length or len(audio) <= config.n_fft // 2:
        raise AudioError(
            f"audio has {len(audio)} samples, shorter than one analysis window"
        )


def stft(samples: np.ndarray, config: MelConfig) -> np.ndarray:
    """Complex STFT, ``n_frames x K``, with centred reflect padding."""
    frames = _frames(np.asarray(samples, dtype=np.float64), config)
    return np.fft.rfft(frames * analysis_window(config), n=config.n_fft, axis=1)


def istft(spectrum: np.ndarray, config: MelConfig, length: int) -> np.ndarray:
    """Weighted overlap-add inverse of :func:`stft`, trimmed to ``length`` samples."""
    window = analysis_window(config)
    frames = np.fft.irfft(spectrum, n=config.n_fft, axis=1) * window
    n_frames = frames.shape[0]
    hop = config.hop_length
    total = config.n_fft + hop * (n_frames - 1)
    out = np.zeros(total)
    norm = np.zeros(total)
    win_sq = window * window
    for i in range(n_frames):
        out[i * hop:i * hop + config.n_fft] += frames[i]
        norm[i * hop:i * hop + config.n_fft] += win_sq
    out /= np.where(norm > 1e-10, norm, 1.0)
    start = config.n_fft // 2
    out = out[start:start + length]
    if out.size < length:
        out = np.pad(out, (0, length - out.size))
    return out


def stft_magnitude(audio: AudioBuffer, config: MelConfig) -> np.ndarray:
    """|X[k]| per frame, shape ``(len // hop + 1, n_fft // 2 + 1)``."""
    _check_audio(audio, config)
    return np.abs(stft(audio.samples, config))


def log_mel_from_magnitude(magnitude: np.ndarray, config: MelConfig) -> np.ndarray:
    mel = build_transforms(config).mel_matrix
    return np.log(np.maximum(magnitude @ mel.T, config.log_floor))


def mel_spectrogram(audio: AudioBuffer, config: MelConfig) -> MelSpectrogram:
    """``S = log(max(M |X|, log_floor))`` per frame (natural log)."""
    return MelSpectrogram(log_mel_from_magnitude(stft_magnitude(audio, config), config), config)


# --- WAV --------------------------------------------------------------------

def read_wav(path: str | Path) -> AudioBuffer:
    """Read PCM16 or float32 WAV; multichannel files yield their first channel."""
    try:
        rate, data = wavfile.read(str(path))
    except ValueError as exc:
        raise AudioError(f"{path}: unreadable WAV ({exc})") from exc
    if data.ndim > 1:
        data = data[:, 0]
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise AudioError(f"{path}: unsupported sample format {data.dtype}; use PCM16 or float32")
    return AudioBuffer(samples, rate)


def write_wav(path: str | Path, audio: AudioBuffer, sample_format: str = "pcm16") -> None:
    samples = np.clip(audio.samples, -1.0, 1.0)
    if sample_format == "pcm16":
        data = np.round(samples * 32767.0).astype(np.int16)
    elif sample_format == "float32":
        data = samples.astype(np.float32)
    else:
        raise ValueError(f"unknown sample format {sample_format!r}")
    wavfile.write(str(path), audio.sample_rate, data)


# --- MELF container ---------------------------------------------------------
# little-endian: magic, u32 version, u32 n_mels, n_frames, sample_rate, n_fft,
# hop_length, win_length, f32 f_min, f_max, u8 mel_scale, u8 flags, u8 x2
# reserved, f32 log_floor, then f32 frames. flags bit 0 = mel_norm.

MELF_MAGIC = b"MELF"
MELF_VERSION = 1
_HEADER = struct.Struct("<4s7I2f4Bf")
HEADER_SIZE = _HEADER.size
_FLAG_MEL_NORM = 0x01


def encode_melf(mel: MelSpectrogram) -> bytes:
    c = mel.config
    header = _HEADER.pack(
        MELF_MAGIC, MELF_VERSION, c.n_mels, mel.n_frames, c.sample_rate, c.n_fft,
        c.hop_length, c.win_length, c.f_min, c.f_max, MEL_SCALES.index(c.mel_scale),
        _FLAG_MEL_NORM if c.mel_norm else 0, 0, 0, c.log_floor,
    )
    payload = np.ascontiguousarray(mel.data, dtype="<f4").tobytes()
    return header + payload


def decode_melf(blob: bytes) -> MelSpectrogram:
    if len(blob) < 4 or blob[:4] != MELF_MAGIC:
        raise BadMagicError("bad magic: not a MELF file")
    if len(blob) < HEADER_SIZE:
        raise TruncatedPayloadError("truncated payload: incomplete header")
    (_, version, n_mels, n_frames, rate, n_fft, hop, win, f_min, f_max,
     scale, flags, _r1, _r2, log_floor) = _HEADER.unpack_from(blob)
    if version != MELF_VERSION:
        raise VersionMismatchError(f"version mismatch: file is v{version}, reader is v{MELF_VERSION}")
    if scale >= len(MEL_SCALES):
        raise MelfError(f"invalid mel_scale code {scale}")
    try:
        config = MelConfig(
            sample_rate=rate, n_fft=n_fft, hop_length=hop, win_length=win, n_mels=n_mels,
            f_min=f_min, f_max=f_max, mel_scale=MEL_SCALES[scale], log_floor=log_floor,
            mel_norm=bool(flags & _FLAG_MEL_NORM),
        )
    except ConfigError as exc:
        raise ConfigError(f"MELF header violates config invariants: {exc}") from exc
    expected = n_frames * n_mels * 4
    payload = blob[HEADER_SIZE:]
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"truncated payload: expected {expected} bytes of frame data, found {len(payload)}"
        )
    if len(payload) > expected:
        raise MelfError(f"trailing data: {len(payload) - expected} bytes after payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(n_frames, n_mels).astype(np.float32)
    return MelSpectrogram(data, config)


def write_melf(mel: MelSpectrogram, path: str | Path) -> None:
    Path(path).write_bytes(encode_melf(mel))


def read_melf(path: str | Path) -> MelSpectrogram:
    return decode_melf(Path(path).read_bytes())
