import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.signal import argrelmax

from melshift.config import MelConfig
from melshift.errors import (
    AudioError, BadMagicError, ConfigError, ConfigMismatchError, MelfError,
    TruncatedPayloadError, VersionMismatchError,
)
from melshift.features import (
    HEADER_SIZE, AudioBuffer, MelSpectrogram, decode_melf, encode_melf, mel_spectrogram,
    n_frames_for, read_melf, read_wav, stft_magnitude, write_melf, write_wav,
)
from melshift.synth import pulse_train, sine


def test_one_second_frame_count(config):
    mag = stft_magnitude(AudioBuffer(np.zeros(24000), 24000), config)
    assert mag.shape == (24000 // 256 + 1, 513) == (94, 513)


@given(st.integers(1024, 30000), st.sampled_from([64, 128, 256, 300]))
def test_frame_count_formula(n, hop):
    cfg = MelConfig(hop_length=hop)
    audio = AudioBuffer(np.zeros(n), 24000)
    assert stft_magnitude(audio, cfg).shape[0] == n // hop + 1 == n_frames_for(n, hop)


def test_bin_centred_sine_peak(config):
    k0 = 40
    audio = sine(k0 * config.sample_rate / config.n_fft, 1.0, amplitude=1.0)
    mag = stft_magnitude(audio, config)[10:-10]
    assert np.all(np.argmax(mag, axis=1) == k0)
    # the Hann main lobe spans k0 +/- 1; everything outside it is >= 20 dB down
    outside = np.delete(mag, [k0 - 1, k0, k0 + 1], axis=1).max(axis=1)
    assert np.all(20 * np.log10(mag[:, k0] / outside) >= 20.0)


def test_silence(config):
    audio = AudioBuffer(np.zeros(24000), 24000)
    assert not np.any(stft_magnitude(audio, config))
    mel = mel_spectrogram(audio, config)
    assert np.all(mel.data == np.log(config.log_floor))


@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 10.0))
def test_noise_features_finite_and_floored(seed, scale):
    cfg = MelConfig()
    x = np.random.default_rng(seed).standard_normal(4096) * scale
    mel = mel_spectrogram(AudioBuffer(x, 24000), cfg)
    assert np.all(np.isfinite(mel.data))
    assert np.all(mel.data >= np.log(cfg.log_floor))


def test_pulse_train_harmonic_ripple(config, transforms, pulse_mels):
    # linear-bin log spectrum reconstructed through the pseudo-inverse
    lin = pulse_mels[200].data[40].astype(np.float64) @ transforms.mel_pinv.T
    peaks = argrelmax(lin)[0]
    bin_hz = config.sample_rate / config.n_fft
    for h in range(1, 7):
        assert np.min(np.abs(peaks - h * 200 / bin_hz)) <= 1.0, h


def test_rate_mismatch(config):
    with pytest.raises(ConfigMismatchError):
        stft_magnitude(AudioBuffer(np.zeros(16000), 16000), config)


def test_too_short(config):
    with pytest.raises(AudioError):
        stft_magnitude(AudioBuffer(np.zeros(1000), 24000), config)


def test_audio_buffer_validation():
    with pytest.raises(AudioError):
        AudioBuffer(np.array([]), 24000)
    with pytest.raises(AudioError):
        AudioBuffer(np.array([0.0, np.nan]), 24000)


# --- MELF ---

mel_configs = st.builds(
    MelConfig,
    n_mels=st.sampled_from([40, 64, 80]),
    hop_length=st.sampled_from([128, 256]),
    mel_scale=st.sampled_from(["slaney", "htk"]),
    f_min=st.sampled_from([0.0, 30.0, 55.5]),
    log_floor=st.sampled_from([1e-5, 1e-7, 3.3e-4]),
    mel_norm=st.booleans(),
)


@given(mel_configs, st.integers(1, 20), st.data())
def test_melf_roundtrip_bit_exact(cfg, n_frames, data):
    values = data.draw(arrays(np.float32, (n_frames, cfg.n_mels),
                              elements=st.floats(-20, 5, width=32)))
    mel = MelSpectrogram(values, cfg)
    back = decode_melf(encode_melf(mel))
    assert back.config == cfg
    assert back.data.dtype == np.float32
    assert back.data.tobytes() == values.tobytes()


def test_melf_file_roundtrip(tmp_path, pulse_mels):
    mel = pulse_mels[200]
    path = tmp_path / "a.melf"
    write_melf(mel, path)
    assert path.stat().st_size == HEADER_SIZE + 4 * 94 * 80
    back = read_melf(path)
    assert np.array_equal(back.data, mel.data.astype(np.float32))
    assert back.config == mel.config


def test_melf_header_layout(pulse_mels):
    blob = encode_melf(pulse_mels[200])
    magic, version, n_mels, n_frames, rate = struct.unpack_from("<4s4I", blob)
    assert (magic, version, n_mels, n_frames, rate) == (b"MELF", 1, 80, 94, 24000)
    assert HEADER_SIZE == 48


def _blob():
    return bytearray(encode_melf(MelSpectrogram(np.zeros((4, 80), np.float32), MelConfig())))


def test_melf_bad_magic():
    blob = _blob()
    blob[:4] = b"RIFF"
    with pytest.raises(BadMagicError, match="bad magic"):
        decode_melf(bytes(blob))


def test_melf_version_mismatch():
    blob = _blob()
    struct.pack_into("<I", blob, 4, 2)
    with pytest.raises(VersionMismatchError):
        decode_melf(bytes(blob))


def test_melf_truncated():
    blob = bytes(_blob())
    half = HEADER_SIZE + 2 * 80 * 4
    with pytest.raises(TruncatedPayloadError, match="truncated payload"):
        decode_melf(blob[:half])
    with pytest.raises(TruncatedPayloadError):
        decode_melf(blob[:20])


def test_melf_config_violation():
    blob = _blob()
    struct.pack_into("<2f", blob, 32, 9000.0, 100.0)  # f_min > f_max
    with pytest.raises(ConfigError):
        decode_melf(bytes(blob))


def test_melf_trailing_bytes():
    with pytest.raises(MelfError):
        decode_melf(bytes(_blob()) + b"\0\0\0\0")


def test_melf_errors_are_distinct():
    kinds = {BadMagicError.kind, VersionMismatchError.kind, TruncatedPayloadError.kind, ConfigError.kind}
    assert len(kinds) == 4


# --- WAV ---

@pytest.mark.parametrize("fmt,tol", [("pcm16", 1.0 / 16000), ("float32", 1e-7)])
def test_wav_roundtrip(tmp_path, fmt, tol):
    audio = pulse_train(150, 0.2)
    write_wav(tmp_path / "x.wav", audio, fmt)
    back = read_wav(tmp_path / "x.wav")
    assert back.sample_rate == 24000
    assert np.max(np.abs(back.samples - audio.samples)) <= tol


def test_wav_first_channel(tmp_path):
    from scipy.io import wavfile
    stereo = np.stack([np.full(100, 0.25), np.full(100, -0.5)], axis=1).astype(np.float32)
    wavfile.write(tmp_path / "s.wav", 24000, stereo)
    assert np.all(read_wav(tmp_path / "s.wav").samples == 0.25)


def test_wav_unsupported_format(tmp_path):
    from scipy.io import wavfile
    wavfile.write(tmp_path / "i32.wav", 24000, np.zeros(100, np.int32))
    with pytest.raises(AudioError):
        read_wav(tmp_path / "i32.wav")
    (tmp_path / "junk.wav").write_bytes(b"junk")
    with pytest.raises(AudioError):
        read_wav(tmp_path / "junk.wav")
