"""Wavelet filter-bank pitch and formant extraction for speech.

The public surface re-exported here covers the common entry points; the
submodules hold the rest.
"""
from .dsp import (
    CepstrumSeries,
    Frame,
    SampleBuffer,
    Spectrum,
    apply_window,
    frame_signal,
    hamming_window,
    magnitude_spectrum,
    real_cepstrum,
    smooth_spectrum,
)
from .errors import (
    ChannelSelectionError,
    ConfigurationError,
    InvalidArgumentError,
    MalformedWavError,
    UnsupportedEncodingError,
    WavError,
)
from .features import (
    AnalysisConfig,
    AnalysisResult,
    FormantEstimate,
    PitchEstimate,
    analyze,
    extract_formants,
    extract_pitch,
    pick_peaks,
)
from .cepstrum import cepstral_formants, cepstral_pitch
from .synth import VowelSpec, add_noise, impulse_train, resonator, synth_vowel
from .wavelet import (
    DwtDecomposition,
    ScaleBand,
    WaveletFilter,
    daubechies_filter,
    dwt,
    idwt,
    mask_scales,
    scale_band,
)
from .wavio import read_wav, write_wav

__version__ = "0.1.0"
