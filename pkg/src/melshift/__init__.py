"""Pitch shifting of speech in the mel-spectrogram domain via the pseudo-cepstrum."""
from melshift.analysis import F0Contour, F0Params, discrete_cepstrum, estimate_f0, source_region_argmax
from melshift.config import MelConfig, load_config
from melshift.errors import MelshiftError
from melshift.features import (
    AudioBuffer,
    MelSpectrogram,
    mel_spectrogram,
    read_melf,
    read_wav,
    stft_magnitude,
    write_melf,
    write_wav,
)
from melshift.kernels import BACKEND
from melshift.metrics import MetricsReport, PipelineConfig, compute_metrics, eval_curve, scale_reference
from melshift.pitchshift import (
    ModificationVector,
    PseudoCepstrum,
    ShiftSpec,
    build_modification_vector,
    mel_to_pseudo_cepstrum,
    pitch_shift_mel,
    pseudo_cepstrum_to_mel,
    shift_frame,
)
from melshift.transforms import TransformSet, build_transforms
from melshift.vocoder import mel_to_audio

__version__ = "0.1.0"
