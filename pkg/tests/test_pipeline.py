"""End-to-end regression guard for pitches the 80-band mel resolves in every shift."""
import numpy as np
import pytest

from melshift.analysis import estimate_f0
from melshift.metrics import PipelineConfig, shift_audio
from melshift.synth import pulse_train

pytestmark = pytest.mark.slow

PIPELINE = PipelineConfig(f0_max=800.0)


@pytest.mark.parametrize("f0", [200.0, 300.0])
def test_pulse_train_round_trip_all_shifts(f0):
    audio = pulse_train(f0)
    for x in range(-12, 13):
        contour = estimate_f0(shift_audio(audio, float(x), PIPELINE), PIPELINE.f0_params())
        est = np.median(contour.f0_hz[contour.voiced])
        tol = 0.05 if abs(x) <= 6 else 0.20
        assert abs(est / (f0 * 2 ** (x / 12)) - 1) <= tol, x


@pytest.mark.parametrize("x", [-2, -1, 1, 2, 4, 6, 9, 12])
def test_low_pitch_small_and_upward_shifts(x):
    contour = estimate_f0(shift_audio(pulse_train(120.0), float(x), PIPELINE), PIPELINE.f0_params())
    est = np.median(contour.f0_hz[contour.voiced])
    assert abs(est / (120.0 * 2 ** (x / 12)) - 1) <= (0.05 if abs(x) <= 6 else 0.20)
