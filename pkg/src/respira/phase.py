"""Slow-time phase extraction from IF frames.

Pipeline: per-chirp range FFT -> target-bin selection -> principal-value
phase -> first-difference unwrapping -> spectral band-pass -> padded-DFT
breath counting. The filtered series is what the classifier consumes.
"""

from dataclasses import dataclass

import numpy as np

from .dataset import ABNORMAL, NORMAL
from .validation import check_non_negative

WRAPPED = "wrapped"
UNWRAPPED = "unwrapped"
FILTERED = "filtered"
_STAGES = (WRAPPED, UNWRAPPED, FILTERED)

# Respiration pass band in Hz: 0.1-0.8 Hz covers 2.56 to 20.5 breath cycles
# per 25.6 s window, comfortably enclosing both classes.
DEFAULT_BAND = (0.1, 0.8)


@dataclass(frozen=True)
class RangeProfiles:
    """Per-chirp fast-time spectra: one row per chirp, one column per bin."""

    spectra: np.ndarray
    bin_width_hz: float
    slow_rate_hz: float

    def __post_init__(self):
        if self.spectra.ndim != 2:
            raise ValueError("spectra must be a 2-D matrix")
        if self.bin_width_hz <= 0 or self.slow_rate_hz <= 0:
            raise ValueError("bin_width_hz and slow_rate_hz must be positive")


@dataclass(frozen=True)
class PhaseSeries:
    """A slow-time phase signal at a given processing stage."""

    values: np.ndarray
    slow_rate_hz: float
    stage: str

    def __post_init__(self):
        if self.stage not in _STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a non-empty 1-D array")
        if not np.all(np.isfinite(values)):
            raise ValueError("values contain non-finite entries")
        if self.slow_rate_hz <= 0:
            raise ValueError("slow_rate_hz must be positive")
        if self.stage == WRAPPED and (
            np.any(values <= -np.pi) or np.any(values > np.pi)
        ):
            raise ValueError("wrapped phase must lie in (-pi, pi]")
        object.__setattr__(self, "values", values)

    @property
    def window_duration(self):
        return self.values.size / self.slow_rate_hz


def range_profiles(frame):
    """Fast-time DFT of every chirp (numpy forward convention, no window,
    no normalization). Row m is the range spectrum of chirp m."""
    spectra = np.fft.fft(frame.samples, axis=1)
    params = frame.params
    return RangeProfiles(
        spectra=spectra,
        bin_width_hz=params.adc_rate / params.adc_samples,
        slow_rate_hz=params.slow_rate,
    )


def select_bin(profiles):
    """Index of the strongest non-DC range bin (mean magnitude over chirps).

    Ties break toward the lower index; an all-zero non-DC spectrum raises.
    """
    mags = np.abs(profiles.spectra).mean(axis=0)
    mags[0] = -1.0  # exclude DC
    peak = int(np.argmax(mags))
    if mags[peak] == 0.0:
        raise ValueError("no non-DC energy")
    return peak


def extract_phase(profiles, bin_index):
    """Principal-value phase of one range bin across chirps, in (-pi, pi]."""
    n_bins = profiles.spectra.shape[1]
    if not (0 <= bin_index < n_bins):
        raise ValueError(f"bin {bin_index} out of range [0, {n_bins})")
    column = profiles.spectra[:, bin_index]
    zero = np.nonzero(np.abs(column) == 0.0)[0]
    if zero.size:
        raise ValueError(f"phase undefined at chirp {int(zero[0])}")
    values = np.angle(column)
    values[values == -np.pi] = np.pi
    return PhaseSeries(values=values, slow_rate_hz=profiles.slow_rate_hz, stage=WRAPPED)


def wrap_phase(values):
    """Map phases to their principal values in (-pi, pi]."""
    wrapped = np.angle(np.exp(1j * np.asarray(values, dtype=np.float64)))
    wrapped[wrapped == -np.pi] = np.pi
    return wrapped


def unwrap(series):
    """First-difference unwrapping of a wrapped series.

    Wherever a consecutive difference exceeds +pi, 2*pi is subtracted from
    all later samples; below -pi, 2*pi is added. The first sample is kept.
    """
    if series.stage != WRAPPED:
        raise ValueError(f"unwrap expects a wrapped series, got {series.stage!r}")
    x = series.values
    d = np.diff(x)
    jumps = np.where(d > np.pi, -2.0 * np.pi, 0.0) + np.where(d < -np.pi, 2.0 * np.pi, 0.0)
    offsets = np.concatenate(([0.0], np.cumsum(jumps)))
    return PhaseSeries(values=x + offsets, slow_rate_hz=series.slow_rate_hz, stage=UNWRAPPED)


def bandpass(series, low_hz=DEFAULT_BAND[0], high_hz=DEFAULT_BAND[1]):
    """Zero-phase spectral-mask band-pass over slow time.

    DFT the series, zero every bin whose |frequency| falls outside
    [low_hz, high_hz], inverse-DFT and keep the real part. DC is always
    outside the default band, so constant offsets are removed.
    """
    if series.stage != UNWRAPPED:
        raise ValueError(f"bandpass expects an unwrapped series, got {series.stage!r}")
    nyquist = series.slow_rate_hz / 2.0
    if not (0.0 <= low_hz < high_hz <= nyquist):
        raise ValueError(
            f"invalid band [{low_hz}, {high_hz}]: need 0 <= low < high <= {nyquist}"
        )
    n = series.values.size
    spectrum = np.fft.fft(series.values)
    freqs = np.abs(np.fft.fftfreq(n, d=1.0 / series.slow_rate_hz))
    spectrum[(freqs < low_hz) | (freqs > high_hz)] = 0.0
    filtered = np.fft.ifft(spectrum).real
    return PhaseSeries(values=filtered, slow_rate_hz=series.slow_rate_hz, stage=FILTERED)


def estimate_breaths(series, low_hz=DEFAULT_BAND[0], high_hz=DEFAULT_BAND[1]):
    """Breathing cycles per window from the padded-DFT spectral peak.

    The series is zero-padded to 16x its length, the magnitude peak inside
    the pass band located, and the peak frequency converted to breaths per
    window. Frequency resolution after padding is slow_rate / (16 * n),
    i.e. 0.0625 breaths per window at the default configuration.
    """
    if series.stage != FILTERED:
        raise ValueError(f"estimate_breaths expects a filtered series, got {series.stage!r}")
    x = series.values
    if np.all(x == 0.0):
        raise ValueError("no respiratory energy")
    n_pad = 16 * x.size
    magnitude = np.abs(np.fft.fft(x, n=n_pad))
    freqs = np.fft.fftfreq(n_pad, d=1.0 / series.slow_rate_hz)
    in_band = (freqs >= low_hz) & (freqs <= high_hz)
    if not np.any(in_band) or magnitude[in_band].max() == 0.0:
        raise ValueError("no respiratory energy")
    band_idx = np.nonzero(in_band)[0]
    peak = band_idx[np.argmax(magnitude[band_idx])]
    return float(freqs[peak] * series.window_duration)


def classify_by_threshold(breaths):
    """Label a breath count: normal iff 5 <= breaths <= 8 per window,
    boundaries included; anything outside is abnormal."""
    check_non_negative(breaths, "breaths")
    return NORMAL if 5.0 <= breaths <= 8.0 else ABNORMAL


def process_frame(frame, low_hz=DEFAULT_BAND[0], high_hz=DEFAULT_BAND[1]):
    """Full chain from IF frame to the filtered slow-time phase series."""
    profiles = range_profiles(frame)
    bin_index = select_bin(profiles)
    wrapped = extract_phase(profiles, bin_index)
    return bandpass(unwrap(wrapped), low_hz=low_hz, high_hz=high_hz)
