"""GPE / VDE / FFE and the semitone evaluation curve."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from melshift.analysis import F0Contour, F0Params, estimate_f0
from melshift.config import MelConfig
from melshift.features import AudioBuffer, mel_spectrogram
from melshift.pitchshift import ShiftSpec, pitch_shift_mel
from melshift.transforms import build_transforms
from melshift.vocoder import mel_to_audio

log = logging.getLogger(__name__)

GROSS_ERROR_RATIO = 0.2
CURVE_COLUMNS = ("semitones", "gpe_mean", "gpe_ci", "vde_mean", "vde_ci", "ffe_mean", "ffe_ci")


@dataclass(frozen=True)
class MetricsReport:
    gpe: float
    vde: float
    ffe: float
    n_frames: int
    n_both_voiced: int
    n_gross_errors: int
    n_voicing_errors: int
    gpe_degenerate: bool = False


def scale_reference(ref: F0Contour, semitones: float) -> F0Contour:
    """Multiply voiced F0 values by ``2 ** (semitones / 12)``."""
    factor = 2.0 ** (semitones / 12.0)
    f0 = np.where(ref.voiced, ref.f0_hz * factor, 0.0)
    return F0Contour(f0, ref.voiced.copy(), ref.hop_length, ref.sample_rate)


def compute_metrics(estimate: F0Contour, reference: F0Contour) -> MetricsReport:
    """Frame-aligned GPE, VDE and FFE of ``estimate`` against ``reference``.

    A gross error is a both-voiced frame whose relative error exceeds 20%
    (exactly 20% is not an error). With no both-voiced frames GPE is 0 and
    ``gpe_degenerate`` is set.
    """
    if len(estimate) != len(reference):
        raise ValueError(f"contour lengths differ: {len(estimate)} vs {len(reference)}")
    n = len(reference)
    if n == 0:
        raise ValueError("contours are empty")
    both = estimate.voiced & reference.voiced
    n_both = int(np.count_nonzero(both))
    rel = np.zeros(n)
    rel[both] = np.abs(estimate.f0_hz[both] - reference.f0_hz[both]) / reference.f0_hz[both]
    n_gross = int(np.count_nonzero(both & (rel > GROSS_ERROR_RATIO)))
    n_voicing = int(np.count_nonzero(estimate.voiced != reference.voiced))
    return MetricsReport(
        gpe=n_gross / n_both if n_both else 0.0,
        vde=n_voicing / n,
        ffe=(n_voicing + n_gross) / n,
        n_frames=n,
        n_both_voiced=n_both,
        n_gross_errors=n_gross,
        n_voicing_errors=n_voicing,
        gpe_degenerate=n_both == 0,
    )


@dataclass(frozen=True)
class PipelineConfig:
    """Everything the mel -> shift -> Griffin-Lim -> F0 loop needs."""

    mel: MelConfig = field(default_factory=MelConfig)
    f0_max: float = 500.0
    smoothing_quefrency_bins: int = 0
    interpolation: str = "nearest"
    gl_iterations: int = 32
    gl_momentum: float = 0.99
    f0: F0Params | None = None

    def f0_params(self) -> F0Params:
        return self.f0 or F0Params(hop_length=self.mel.hop_length)

    def shift_spec(self, semitones: float) -> ShiftSpec:
        return ShiftSpec(semitones, self.f0_max, self.smoothing_quefrency_bins, self.interpolation)


def shift_audio(audio: AudioBuffer, semitones: float, pipeline: PipelineConfig) -> AudioBuffer:
    """Extract mel, shift it, and resynthesise with Griffin-Lim."""
    transforms = build_transforms(pipeline.mel)
    mel = mel_spectrogram(audio, pipeline.mel)
    shifted = pitch_shift_mel(mel, pipeline.shift_spec(semitones), transforms)
    return mel_to_audio(shifted, pipeline.gl_iterations, pipeline.gl_momentum, transforms)


def evaluate_utterance(audio: AudioBuffer, grid: Sequence[float], pipeline: PipelineConfig) -> list[MetricsReport]:
    """Metrics for each grid value against the scaled estimate on the original audio."""
    params = pipeline.f0_params()
    reference = estimate_f0(audio, params)
    transforms = build_transforms(pipeline.mel)
    mel = mel_spectrogram(audio, pipeline.mel)
    reports = []
    for semitones in grid:
        shifted = pitch_shift_mel(mel, pipeline.shift_spec(semitones), transforms)
        audio_out = mel_to_audio(shifted, pipeline.gl_iterations, pipeline.gl_momentum, transforms)
        estimate = estimate_f0(audio_out, params)
        target = scale_reference(reference, semitones)
        n = min(len(estimate), len(target))
        reports.append(compute_metrics(_head(estimate, n), _head(target, n)))
    return reports


def _head(contour: F0Contour, n: int) -> F0Contour:
    return F0Contour(contour.f0_hz[:n], contour.voiced[:n], contour.hop_length, contour.sample_rate)


@dataclass(frozen=True)
class CurveRow:
    semitones: float
    gpe_mean: float
    gpe_ci: float
    vde_mean: float
    vde_ci: float
    ffe_mean: float
    ffe_ci: float


@dataclass
class CurveResult:
    rows: list[CurveRow]
    utterances: list[str]
    failures: dict[str, str]
    per_utterance: dict[str, list[MetricsReport]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(getattr(row, c)) for c in CURVE_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "rows": [asdict(r) for r in self.rows],
            "utterances": self.utterances,
            "failures": self.failures,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(value: float) -> str:
    return f"{value:g}" if float(value).is_integer() else f"{value:.6f}"


def mean_ci95(values: Iterable[float]) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width (0 for a single value)."""
    values = np.asarray(list(values), dtype=np.float64)
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(1.959963984540054 * values.std(ddof=1) / math.sqrt(values.size))


def _evaluate_job(job):
    name, audio, grid, pipeline = job
    try:
        return name, evaluate_utterance(audio, grid, pipeline), None
    except Exception as exc:  # reported per utterance, never fatal to the curve
        return name, None, f"{type(exc).__name__}: {exc}"


def eval_curve(audio_set: Sequence[tuple[str, AudioBuffer]], grid: Sequence[float],
               pipeline: PipelineConfig = PipelineConfig(), jobs: int = 1) -> CurveResult:
    """Mean GPE/VDE/FFE with 95% CIs across utterances for every grid value.

    Utterances are processed in name order; the result does not depend on
    ``jobs``. Utterances that fail are excluded and listed in ``failures``.
    """
    if not audio_set:
        raise ValueError("audio set is empty")
    grid = list(grid)
    if not grid:
        raise ValueError("semitone grid is empty")
    ordered = sorted(audio_set, key=lambda item: item[0])
    work = [(name, audio, grid, pipeline) for name, audio in ordered]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_evaluate_job, work))
    else:
        outcomes = [_evaluate_job(job) for job in work]

    per_utt: dict[str, list[MetricsReport]] = {}
    failures: dict[str, str] = {}
    for name, reports, error in outcomes:
        if error is not None:
            log.warning("utterance %s failed: %s", name, error)
            failures[name] = error
        else:
            per_utt[name] = reports
    if not per_utt:
        raise ValueError("every utterance failed")

    rows = []
    for j, semitones in enumerate(grid):
        stats = {}
        for metric in ("gpe", "vde", "ffe"):
            stats[metric] = mean_ci95(getattr(r[j], metric) for r in per_utt.values())
        rows.append(CurveRow(
            float(semitones),
            *stats["gpe"], *stats["vde"], *stats["ffe"],
        ))
    return CurveResult(rows, sorted(per_utt), failures, per_utt)
