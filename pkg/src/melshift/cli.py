"""Command-line interface.

Exit codes: 0 success, 2 I/O error, 3 invalid configuration or flags,
4 empty input set. Diagnostics go to stderr as one JSON object per line.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from melshift import __version__
from melshift.analysis import F0Params, estimate_f0
from melshift.config import MelConfig, load_config
from melshift.errors import AudioError, ConfigError, MelfError, MelshiftError, RankDeficientError
from melshift.features import mel_spectrogram, read_melf, read_wav, write_melf, write_wav
from melshift.metrics import PipelineConfig, eval_curve
from melshift.pitchshift import ShiftSpec, pitch_shift_mel
from melshift.transforms import INVARIANT_TOLERANCES, build_transforms, invariant_residuals
from melshift.vocoder import mel_to_audio

EXIT_OK = 0
EXIT_IO = 2
EXIT_CONFIG = 3
EXIT_EMPTY = 4


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


def _diag(level: str, kind: str, message: str, **extra) -> None:
    record = {"level": level, "kind": kind, "message": message, **extra}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _diag("error", "usage", message)
        sys.exit(EXIT_CONFIG)


# --- shared option groups ---------------------------------------------------

_CONFIG_FLAGS = [
    ("--sample-rate", "sample_rate", int),
    ("--n-fft", "n_fft", int),
    ("--hop-length", "hop_length", int),
    ("--win-length", "win_length", int),
    ("--n-mels", "n_mels", int),
    ("--f-min", "f_min", float),
    ("--f-max", "f_max", float),
    ("--log-floor", "log_floor", float),
]


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("mel configuration (flags override --config)")
    group.add_argument("--config", type=Path, help="key = value file of MelConfig fields")
    for flag, dest, typ in _CONFIG_FLAGS:
        group.add_argument(flag, dest=dest, type=typ)
    group.add_argument("--mel-scale", dest="mel_scale", choices=["slaney", "htk"])
    group.add_argument("--mel-norm", dest="mel_norm", action=argparse.BooleanOptionalAction, default=None)


def _add_shift_options(parser: argparse.ArgumentParser, semitones_required: bool = True) -> None:
    parser.add_argument("--semitones", type=float, required=semitones_required, default=0.0)
    parser.add_argument("--f0max", type=float, default=500.0, help="maximum F0 in Hz (default 500)")
    parser.add_argument("--smoothing", type=int, default=0, help="raised-cosine ramp length in bins")
    parser.add_argument("--interpolation", choices=["nearest", "linear"], default="nearest")


def _add_gl_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--iterations", type=int, default=32)
    parser.add_argument("--momentum", type=float, default=0.99)


def _config_from_args(args) -> MelConfig:
    overrides = {dest: getattr(args, dest) for _, dest, _ in _CONFIG_FLAGS}
    overrides["mel_scale"] = args.mel_scale
    overrides["mel_norm"] = args.mel_norm
    if args.config is not None and not args.config.is_file():
        raise CliError("io", f"config file not found: {args.config}", EXIT_IO)
    return load_config(args.config, overrides)


def _shift_spec(args, sample_rate: int) -> ShiftSpec:
    spec = ShiftSpec(args.semitones, args.f0max, args.smoothing, args.interpolation)
    spec.check_sample_rate(sample_rate)
    return spec


def _read_wav_checked(path: Path, config: MelConfig):
    audio = read_wav(path)
    if audio.sample_rate != config.sample_rate:
        raise CliError(
            "config-mismatch",
            f"{path}: sample rate {audio.sample_rate} Hz does not match config {config.sample_rate} Hz",
            EXIT_CONFIG,
        )
    return audio


def _check_gl(args) -> None:
    if args.iterations < 1:
        raise ConfigError("iterations must be >= 1")
    if not 0.0 <= args.momentum < 1.0:
        raise ConfigError("momentum must be in [0, 1)")


# --- commands ---------------------------------------------------------------

def cmd_extract(args) -> int:
    config = _config_from_args(args)
    audio = _read_wav_checked(args.wav_in, config)
    mel = mel_spectrogram(audio, config)
    write_melf(mel, args.melf_out)
    _emit({"n_frames": mel.n_frames, "n_mels": mel.n_mels, "output": str(args.melf_out)})
    return EXIT_OK


def cmd_shift_mel(args) -> int:
    mel = read_melf(args.melf_in)
    spec = _shift_spec(args, mel.config.sample_rate)
    shifted = pitch_shift_mel(mel, spec, build_transforms(mel.config))
    write_melf(shifted, args.melf_out)
    _emit({"n_frames": shifted.n_frames, "n_mels": shifted.n_mels, "semitones": spec.semitones,
           "output": str(args.melf_out)})
    return EXIT_OK


def cmd_shift_audio(args) -> int:
    config = _config_from_args(args)
    spec = _shift_spec(args, config.sample_rate)
    _check_gl(args)
    audio = _read_wav_checked(args.wav_in, config)
    transforms = build_transforms(config)
    shifted = pitch_shift_mel(mel_spectrogram(audio, config), spec, transforms)
    out = mel_to_audio(shifted, args.iterations, args.momentum, transforms)
    write_wav(args.wav_out, out, args.format)
    _emit({"n_samples": len(out), "sample_rate": out.sample_rate, "semitones": spec.semitones,
           "output": str(args.wav_out)})
    return EXIT_OK


def cmd_analyze(args) -> int:
    config = _config_from_args(args)
    audio = _read_wav_checked(args.wav_in, config)
    contour = estimate_f0(audio, F0Params(hop_length=config.hop_length))
    text = contour.to_csv()
    if args.output is None:
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
        _emit({"n_frames": len(contour), "n_voiced": int(contour.voiced.sum()), "output": str(args.output)})
    return EXIT_OK


def parse_grid(text: str) -> list[float]:
    """``"-12:12:1"`` (inclusive range) or ``"-6,0,6"``."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1.0)
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 10) for i in range(count)]
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"invalid semitone grid {text!r}") from None
    if not values:
        raise ConfigError("empty semitone grid")
    return values


def cmd_eval_curve(args) -> int:
    config = _config_from_args(args)
    grid = parse_grid(args.grid)
    ShiftSpec(0.0, args.f0max, args.smoothing, args.interpolation).check_sample_rate(config.sample_rate)
    for value in grid:
        ShiftSpec(value, args.f0max)
    _check_gl(args)
    if not args.wav_dir.is_dir():
        raise CliError("io", f"not a directory: {args.wav_dir}", EXIT_IO)
    paths = sorted(p for p in args.wav_dir.iterdir() if p.suffix.lower() == ".wav")
    if not paths:
        raise CliError("empty-input", f"no .wav files in {args.wav_dir}", EXIT_EMPTY)

    audio_set = []
    for path in paths:
        try:
            audio_set.append((path.name, _read_wav_checked(path, config)))
        except (OSError, AudioError, CliError) as exc:
            _diag("warning", "skipped-file", str(exc), file=path.name)
    if not audio_set:
        raise CliError("empty-input", "no readable .wav files", EXIT_EMPTY)

    pipeline = PipelineConfig(
        mel=config, f0_max=args.f0max, smoothing_quefrency_bins=args.smoothing,
        interpolation=args.interpolation, gl_iterations=args.iterations, gl_momentum=args.momentum,
        f0=F0Params(hop_length=config.hop_length),
    )
    try:
        result = eval_curve(audio_set, grid, pipeline, jobs=args.jobs)
    except ValueError as exc:
        raise CliError("empty-input", str(exc), EXIT_EMPTY) from None
    for name, error in result.failures.items():
        _diag("warning", "utterance-failed", error, file=name)
    csv_path = Path(args.csv_out)
    json_path = Path(args.json_out) if args.json_out else csv_path.with_suffix(".json")
    csv_path.write_text(result.to_csv())
    json_path.write_text(result.to_json())
    _emit({
        "files_found": len(paths),
        "processed": len(result.utterances),
        "rows": len(result.rows),
        "csv": str(csv_path),
        "json": str(json_path),
    })
    return EXIT_OK


def cmd_transforms(args) -> int:
    config = _config_from_args(args)
    transforms = build_transforms(config)
    residuals = invariant_residuals(transforms)
    ok = all(residuals[k] < INVARIANT_TOLERANCES[k] for k in residuals)
    if args.check:
        _emit({"config": config.to_dict(), "residuals": residuals,
               "tolerances": INVARIANT_TOLERANCES, "ok": ok})
    else:
        _emit({"mel_matrix": list(transforms.mel_matrix.shape), "mel_pinv": list(transforms.mel_pinv.shape),
               "dct": list(transforms.dct.shape)})
    return EXIT_OK if ok else 1


def cmd_synth_corpus(args) -> int:
    from melshift.synth import speech_corpus

    args.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, audio in speech_corpus(args.count, args.duration):
        path = args.out_dir / f"{name}.wav"
        write_wav(path, audio, "float32")
        written.append(path.name)
    _emit({"written": written})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="melshift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"melshift {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="WAV -> MELF log-mel features")
    p.add_argument("wav_in", type=Path)
    p.add_argument("melf_out", type=Path)
    _add_config_options(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("shift-mel", help="pitch-shift a MELF file")
    p.add_argument("melf_in", type=Path)
    p.add_argument("melf_out", type=Path)
    _add_shift_options(p)
    p.set_defaults(func=cmd_shift_mel)

    p = sub.add_parser("shift-audio", help="WAV -> mel -> shift -> Griffin-Lim -> WAV")
    p.add_argument("wav_in", type=Path)
    p.add_argument("wav_out", type=Path)
    _add_shift_options(p)
    _add_gl_options(p)
    p.add_argument("--format", choices=["pcm16", "float32"], default="pcm16")
    _add_config_options(p)
    p.set_defaults(func=cmd_shift_audio)

    p = sub.add_parser("analyze", help="F0 contour as CSV")
    p.add_argument("wav_in", type=Path)
    p.add_argument("-o", "--output", type=Path)
    _add_config_options(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("eval-curve", help="GPE/VDE/FFE over a semitone grid")
    p.add_argument("wav_dir", type=Path)
    p.add_argument("csv_out", type=Path)
    p.add_argument("--grid", default="-12:12:1", help="'start:stop:step' or comma list")
    p.add_argument("--json", dest="json_out", type=Path)
    p.add_argument("--jobs", type=int, default=1)
    _add_shift_options(p, semitones_required=False)
    _add_gl_options(p)
    _add_config_options(p)
    p.set_defaults(func=cmd_eval_curve)

    p = sub.add_parser("transforms", help="inspect the linear operators")
    p.add_argument("--check", action="store_true", help="print invariant residuals as JSON")
    _add_config_options(p)
    p.set_defaults(func=cmd_transforms)

    p = sub.add_parser("synth-corpus", help="write synthetic speech-like WAVs")
    p.add_argument("out_dir", type=Path)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--duration", type=float, default=2.0)
    p.set_defaults(func=cmd_synth_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        _diag("error", exc.kind, str(exc))
        return exc.code
    except FileNotFoundError as exc:
        _diag("error", "io", f"file not found: {exc.filename or exc}")
        return EXIT_IO
    except (MelfError, AudioError) as exc:
        _diag("error", exc.kind, str(exc))
        return EXIT_IO
    except OSError as exc:
        _diag("error", "io", str(exc))
        return EXIT_IO
    except (ConfigError, RankDeficientError) as exc:
        _diag("error", exc.kind, str(exc))
        return EXIT_CONFIG
    except MelshiftError as exc:
        _diag("error", exc.kind, str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
