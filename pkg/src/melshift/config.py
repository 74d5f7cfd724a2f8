"""Analysis parameters shared by every stage of the pipeline."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from melshift.errors import ConfigError

MEL_SCALES = ("slaney", "htk")
WINDOWS = ("hann",)


def _f32(value: float) -> float:
    # Float fields are stored as f32 in MELF headers; canonicalising here keeps
    # a config equal to itself after a file round trip.
    return float(np.float32(value))


@dataclass(frozen=True)
class MelConfig:
    """STFT and mel-filterbank parameters.

    The defaults describe a 24 kHz, 80-band setup with 1024-point frames and
    a 256-sample hop, the layout used by common 24 kHz neural vocoders.
    ``mel_norm`` turns on slaney-style area normalisation of the filters.
    """

    sample_rate: int = 24000
    n_fft: int = 1024
    hop_length: int = 256
    win_length: int = 1024
    n_mels: int = 80
    f_min: float = 0.0
    f_max: float = 12000.0
    mel_scale: str = "slaney"
    log_floor: float = 1e-5
    window: str = "hann"
    mel_norm: bool = False

    def __post_init__(self):
        for name in ("sample_rate", "n_fft", "hop_length", "win_length", "n_mels"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("f_min", "f_max", "log_floor"):
            object.__setattr__(self, name, _f32(getattr(self, name)))
        object.__setattr__(self, "mel_norm", bool(self.mel_norm))
        self.validate()

    @property
    def n_bins(self) -> int:
        """Number of one-sided spectral bins, ``n_fft // 2 + 1``."""
        return self.n_fft // 2 + 1

    def validate(self) -> None:
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        if self.n_fft < 4 or self.n_fft & (self.n_fft - 1):
            raise ConfigError(f"n_fft must be a power of two >= 4, got {self.n_fft}")
        if not 0 < self.win_length <= self.n_fft:
            raise ConfigError("win_length must satisfy 0 < win_length <= n_fft")
        if not 0 < self.hop_length <= self.win_length:
            raise ConfigError("hop_length must satisfy 0 < hop_length <= win_length")
        if not 0 < self.n_mels < self.n_bins:
            raise ConfigError(
                f"n_mels must satisfy 0 < n_mels < n_fft/2+1 = {self.n_bins}, got {self.n_mels}"
            )
        if not 0.0 <= self.f_min < self.f_max <= self.sample_rate / 2:
            raise ConfigError("frequency range must satisfy 0 <= f_min < f_max <= sample_rate/2")
        if self.mel_scale not in MEL_SCALES:
            raise ConfigError(f"mel_scale must be one of {MEL_SCALES}, got {self.mel_scale!r}")
        if self.window not in WINDOWS:
            raise ConfigError(f"window must be one of {WINDOWS}, got {self.window!r}")
        if not self.log_floor > 0:
            raise ConfigError("log_floor must be positive")

    def replace(self, **changes) -> MelConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> MelConfig:
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.strip().replace("-", "_")
            if name not in fields:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[name] = _coerce(name, fields[name].type, raw)
        return cls(**kwargs)


def _coerce(name: str, type_name: Any, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if type_name in ("int", int):
            return int(text)
        if type_name in ("float", float):
            return float(text)
        if type_name in ("bool", bool):
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
    except ValueError:
        raise ConfigError(f"invalid value for {name}: {raw!r}") from None
    return text


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> MelConfig:
    """Build a config from an optional key-value file plus overrides (which win)."""
    values: dict[str, Any] = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return MelConfig.from_mapping(values)


def dump_config_text(config: MelConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config.to_dict().items())
