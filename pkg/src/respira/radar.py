"""Chirp-sequence FMCW radar simulator for a breathing point target.

A subject sits about 1 m from a 77 GHz radar whose chest wall moves
sinusoidally with respiration. Each transmitted chirp, after mixing with
its echo, yields one row of complex-baseband IF samples: the fast-time
tone frequency encodes target range (the beat frequency, 2*K*R/c) and
the slow-time phase across chirps encodes sub-wavelength displacement
through the two-way carrier term 4*pi*R/lambda.
"""

import math
from dataclasses import dataclass

import numpy as np

from .validation import check_non_negative, check_positive, check_seed

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class ChirpParams:
    """Waveform and frame timing of a chirp-sequence FMCW radar.

    Parameters
    ----------
    f0 : float
        Sweep start frequency in Hz.
    slope_k : float
        Chirp rate in Hz/s.
    chirp_duration : float
        Fast-time sweep length in seconds.
    chirp_period : float
        Slow-time repetition interval in seconds (>= chirp_duration).
    num_chirps : int
        Chirps per frame.
    adc_samples : int
        Fast-time samples per chirp.
    """

    f0: float
    slope_k: float
    chirp_duration: float
    chirp_period: float
    num_chirps: int
    adc_samples: int

    def __post_init__(self):
        check_positive(self.f0, "f0")
        check_positive(self.slope_k, "slope_k")
        check_positive(self.chirp_duration, "chirp_duration")
        check_positive(self.chirp_period, "chirp_period")
        if self.chirp_period < self.chirp_duration:
            raise ValueError("chirp_period must be >= chirp_duration")
        if not (isinstance(self.num_chirps, int) and self.num_chirps >= 2):
            raise ValueError("num_chirps must be an integer >= 2")
        if not (isinstance(self.adc_samples, int) and self.adc_samples >= 2):
            raise ValueError("adc_samples must be an integer >= 2")
        if self.bandwidth >= self.f0:
            raise ValueError("swept bandwidth must stay below the start frequency")

    @property
    def adc_rate(self):
        """Fast-time sampling rate in Hz (adc_samples / chirp_duration)."""
        return self.adc_samples / self.chirp_duration

    @property
    def bandwidth(self):
        """Swept RF bandwidth in Hz (slope_k * chirp_duration)."""
        return self.slope_k * self.chirp_duration

    @property
    def window_duration(self):
        """Total observation time of one frame in seconds."""
        return self.num_chirps * self.chirp_period

    @property
    def slow_rate(self):
        """Chirp (slow-time) repetition rate in Hz."""
        return 1.0 / self.chirp_period


@dataclass(frozen=True)
class BreathingScenario:
    """Parametric chest-wall motion observed by the radar.

    The chest sits at ``base_range`` and oscillates with peak displacement
    ``breath_amplitude`` at ``breath_freq`` Hz. ``snr_db`` sets the complex
    noise level of the IF samples; ``math.inf`` disables noise entirely.
    """

    base_range: float
    breath_amplitude: float
    breath_freq: float
    motion_phase: float = 0.0
    snr_db: float = math.inf
    seed: int = 0

    def __post_init__(self):
        check_positive(self.base_range, "base_range")
        check_non_negative(self.breath_amplitude, "breath_amplitude")
        check_non_negative(self.breath_freq, "breath_freq")
        if not math.isfinite(self.motion_phase):
            raise ValueError("motion_phase must be finite")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError("snr_db must be finite or +inf (noise disabled)")
        if self.breath_amplitude >= self.base_range:
            raise ValueError("breath_amplitude must be smaller than base_range")
        check_seed(self.seed)


@dataclass(frozen=True)
class IFFrame:
    """One frame of complex-baseband IF samples, num_chirps x adc_samples."""

    samples: np.ndarray
    params: ChirpParams

    def __post_init__(self):
        expected = (self.params.num_chirps, self.params.adc_samples)
        if self.samples.shape != expected:
            raise ValueError(f"samples shape {self.samples.shape} != {expected}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain non-finite values")


def default_radar_params():
    """Radar configuration used throughout: 77 GHz start, 29.982 MHz/us slope,
    100 us chirps repeated every 50 ms, 512 chirps x 512 ADC samples.

    This gives 2.9982 GHz swept bandwidth, a 25.6 s observation window and a
    20 Hz slow-time rate.
    """
    return ChirpParams(
        f0=77e9,
        slope_k=29.982e12,
        chirp_duration=100e-6,
        chirp_period=50e-3,
        num_chirps=512,
        adc_samples=512,
    )


def wavelength(params):
    """Carrier wavelength c / f0 in meters."""
    return SPEED_OF_LIGHT / params.f0


def beat_frequency(params, target_range):
    """Beat (IF) frequency 2 * slope_k * R / c for a target at range R."""
    check_non_negative(target_range, "target_range")
    return 2.0 * params.slope_k * target_range / SPEED_OF_LIGHT


def range_resolution(params):
    """Range extent of one FFT bin, c / (2 * bandwidth)."""
    return SPEED_OF_LIGHT / (2.0 * params.bandwidth)


def chest_displacement(scenario, t):
    """Chest range at time(s) t:  base + A * sin(2*pi*f*t + phase)."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    return scenario.base_range + scenario.breath_amplitude * np.sin(
        2.0 * np.pi * scenario.breath_freq * t + scenario.motion_phase
    )


def simulate_frame(params, scenario):
    """Synthesize the IF frame a radar would observe for one scenario.

    Chirp m (slow time t_m = m * chirp_period) sees the chest at
    R_m = chest_displacement(t_m) and contributes the row

        s[m, n] = exp(j * 2*pi * (f_beat * t_n + 2 * R_m / lambda)) + noise

    with fast time t_n = n / adc_rate. The beat tone is pinned to the rest
    range: respiration shifts it by well under 0.02 bin, and letting it move
    would leak a range-dependent FFT phase into the slow-time signal, breaking
    the exact 4*pi*R_m/lambda law the carrier term carries. Noise is i.i.d.
    circular complex Gaussian with power 10**(-snr_db/10) relative to the
    unit-power signal, drawn deterministically from scenario.seed.
    """
    slow_t = np.arange(params.num_chirps) * params.chirp_period
    ranges = chest_displacement(scenario, slow_t)
    fast_t = np.arange(params.adc_samples) / params.adc_rate

    f_beat = beat_frequency(params, scenario.base_range)
    carrier_cycles = 2.0 * ranges / wavelength(params)
    phase = 2.0 * np.pi * (f_beat * fast_t[None, :] + carrier_cycles[:, None])
    samples = np.exp(1j * phase)

    if math.isfinite(scenario.snr_db):
        rng = np.random.default_rng(scenario.seed)
        noise_power = 10.0 ** (-scenario.snr_db / 10.0)
        sigma = math.sqrt(noise_power / 2.0)
        shape = samples.shape
        samples = samples + sigma * (
            rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        )

    return IFFrame(samples=samples, params=params)


def cohort_scenarios(count, breath_range, amplitude_range, snr_db, seed,
                     base_range=1.0):
    """Draw per-subject breathing scenarios, one independent seed each.

    Subject i uses seed ``seed + i`` and draws, in order, breath frequency
    (Hz), displacement amplitude (m) and motion phase uniformly from their
    ranges. Identical arguments always reproduce the same cohort.
    """
    if not (isinstance(count, int) and count >= 1):
        raise ValueError("count must be an integer >= 1")
    check_seed(seed)
    f_lo, f_hi = breath_range
    a_lo, a_hi = amplitude_range
    if not (0 <= f_lo <= f_hi) or not math.isfinite(f_hi):
        raise ValueError(f"invalid breath_range {breath_range!r}")
    if not (0 <= a_lo <= a_hi) or not math.isfinite(a_hi):
        raise ValueError(f"invalid amplitude_range {amplitude_range!r}")

    scenarios = []
    for i in range(count):
        subject_seed = seed + i
        rng = np.random.default_rng(subject_seed)
        scenarios.append(
            BreathingScenario(
                base_range=base_range,
                breath_freq=rng.uniform(f_lo, f_hi),
                breath_amplitude=rng.uniform(a_lo, a_hi),
                motion_phase=rng.uniform(0.0, 2.0 * np.pi),
                snr_db=snr_db,
                seed=subject_seed,
            )
        )
    return scenarios


def simulate_cohort(params, count, breath_range, amplitude_range, snr_db, seed,
                    base_range=1.0):
    """Simulate a cohort of subjects; returns (frame, scenario) pairs.

    The scenario carries the ground truth (true breath frequency and thus the
    true breaths per window) for every simulated frame. Prefer iterating
    ``cohort_scenarios`` + ``simulate_frame`` when frames can be processed one
    at a time; a full cohort of 512 x 512 frames is large.
    """
    scenarios = cohort_scenarios(count, breath_range, amplitude_range, snr_db,
                                 seed, base_range=base_range)
    return [(simulate_frame(params, sc), sc) for sc in scenarios]


def dump_frame_csv(frame, path):
    """Debug dump of a frame: one row per chirp, samples as real,imag pairs.

    Not a stability contract; intended for eyeballing simulator output.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in frame.samples:
            cells = []
            for z in row:
                cells.append(f"{z.real:.17g}")
                cells.append(f"{z.imag:.17g}")
            fh.write(",".join(cells) + "\n")
