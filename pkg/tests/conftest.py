import sys

import numpy as np
import pytest

from wavepitch.dsp import SampleBuffer
from wavepitch.features import AnalysisConfig
from wavepitch.synth import VowelSpec, synth_vowel

FS = 20000.0


@pytest.fixture(scope="session")
def cfg():
    return AnalysisConfig()


@pytest.fixture(scope="session")
def vowel_130():
    return synth_vowel(VowelSpec(130.0, duration_s=0.5), FS)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def sine(freq, n, fs=FS, phase=0.0, amp=1.0):
    t = np.arange(n) / fs
    return SampleBuffer(amp * np.sin(2 * np.pi * freq * t + phase), fs)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.report_line(n))
