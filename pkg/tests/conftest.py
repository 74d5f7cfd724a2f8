import numpy as np
import pytest
from hypothesis import settings

from melshift.config import MelConfig
from melshift.features import mel_spectrogram
from melshift.synth import pulse_train
from melshift.transforms import build_transforms

settings.register_profile("melshift", deadline=None, derandomize=True, max_examples=100)
settings.load_profile("melshift")


@pytest.fixture(scope="session")
def config():
    return MelConfig()


@pytest.fixture(scope="session")
def transforms(config):
    return build_transforms(config)


@pytest.fixture(scope="session")
def pulse_mels(config):
    return {f0: mel_spectrogram(pulse_train(f0), config) for f0 in (120, 200, 300)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
