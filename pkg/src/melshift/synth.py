"""Deterministic test signals: pulse trains, tones and speech-like utterances."""
from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from melshift.features import AudioBuffer

# (F1, F2, F3) in Hz for a handful of vowels
VOWEL_FORMANTS = {
    "a": (730.0, 1090.0, 2440.0),
    "e": (530.0, 1840.0, 2480.0),
    "i": (270.0, 2290.0, 3010.0),
    "o": (570.0, 840.0, 2410.0),
    "u": (300.0, 870.0, 2240.0),
}


def pulse_train(f0: float, duration: float = 1.0, sample_rate: int = 24000,
                amplitude: float = 0.5) -> AudioBuffer:
    """Unit impulses (scaled by ``amplitude``) at the zero crossings of an F0 phase ramp."""
    n = int(round(duration * sample_rate))
    phase = np.arange(n) * (f0 / sample_rate)
    cycles = np.floor(phase)
    x = np.zeros(n)
    x[0] = amplitude
    x[1:][np.diff(cycles) > 0] = amplitude
    return AudioBuffer(x, sample_rate)


def sawtooth(f0: float, duration: float = 1.0, sample_rate: int = 24000,
             amplitude: float = 0.5) -> AudioBuffer:
    n = int(round(duration * sample_rate))
    phase = np.mod(np.arange(n) * (f0 / sample_rate), 1.0)
    return AudioBuffer(amplitude * (2.0 * phase - 1.0), sample_rate)


def sine(freq: float, duration: float = 1.0, sample_rate: int = 24000,
         amplitude: float = 0.5) -> AudioBuffer:
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    return AudioBuffer(amplitude * np.sin(2.0 * np.pi * freq * t), sample_rate)


def _resonator(freq: float, bandwidth: float, fs: int):
    r = np.exp(-np.pi * bandwidth / fs)
    theta = 2.0 * np.pi * freq / fs
    a = [1.0, -2.0 * r * np.cos(theta), r * r]
    return [sum(a)], a


def _glottal_source(f0: np.ndarray, fs: int, rng: np.random.Generator) -> np.ndarray:
    phase = np.cumsum(f0 / fs)
    pulses = np.zeros(f0.size)
    pulses[1:][np.diff(np.floor(phase)) > 0] = 1.0
    pulses[0] = 1.0
    # two leaky integrators give the -12 dB/octave glottal tilt
    source = lfilter([1.0], [1.0, -0.96], pulses)
    source = lfilter([1.0, -1.0], [1.0, -0.9], source)
    return source + 0.002 * rng.standard_normal(f0.size)


def _envelope(n: int, fs: int, ramp: float = 0.02) -> np.ndarray:
    m = min(int(ramp * fs), n // 2)
    env = np.ones(n)
    if m:
        r = 0.5 - 0.5 * np.cos(np.pi * np.arange(m) / m)
        env[:m] = r
        env[-m:] = r[::-1]
    return env


def speech_like(seed: int, base_f0: float | None = None, duration: float = 2.0,
                sample_rate: int = 24000) -> AudioBuffer:
    """Source-filter utterance with intonation, vowels, fricatives and pauses.

    Voiced syllables are a glottal pulse train with a wandering, declining F0
    contour passed through three formant resonators; they alternate with
    short noise bursts and gaps, so the result contains voiced, unvoiced and
    silent frames.
    """
    rng = np.random.default_rng(seed)
    fs = sample_rate
    if base_f0 is None:
        base_f0 = float(rng.uniform(100.0, 220.0))
    total = int(duration * fs)
    out = np.zeros(total)
    pos = int(0.1 * fs)
    vowels = list(VOWEL_FORMANTS)
    while pos < total - int(0.15 * fs):
        # optional fricative onset
        if rng.random() < 0.5:
            n = min(int(rng.uniform(0.05, 0.1) * fs), total - pos)
            noise = lfilter([1.0, -0.95], [1.0], rng.standard_normal(n))
            out[pos:pos + n] += 0.03 * noise * _envelope(n, fs)
            pos += n
        n = min(int(rng.uniform(0.18, 0.32) * fs), total - pos)
        if n <= 0:
            break
        t = np.arange(n) / fs
        progress = (pos + t * fs) / total
        contour = base_f0 * (1.1 - 0.2 * progress) * (
            1.0 + 0.06 * np.sin(2 * np.pi * rng.uniform(1.5, 3.0) * t + rng.uniform(0, 2 * np.pi))
        )
        source = _glottal_source(contour, fs, rng)
        formants = VOWEL_FORMANTS[vowels[rng.integers(len(vowels))]]
        voiced = source
        for freq, bw in zip(formants, (80.0, 100.0, 150.0)):
            b, a = _resonator(freq, bw, fs)
            voiced = lfilter(b, a, voiced)
        out[pos:pos + n] += voiced * _envelope(n, fs)
        pos += n + int(rng.uniform(0.03, 0.12) * fs)
    peak = np.max(np.abs(out))
    if peak > 0:
        out *= 0.5 / peak
    return AudioBuffer(out, fs)


def speech_corpus(count: int = 5, duration: float = 2.0, sample_rate: int = 24000) -> list[tuple[str, AudioBuffer]]:
    """``count`` speech-like utterances spanning low to high speaking pitch."""
    base = np.linspace(105.0, 225.0, count) if count > 1 else np.array([150.0])
    return [
        (f"utt{i:02d}", speech_like(seed=1000 + i, base_f0=float(base[i]), duration=duration, sample_rate=sample_rate))
        for i in range(count)
    ]
