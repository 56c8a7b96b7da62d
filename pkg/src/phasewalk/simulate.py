"""Physical model of the two-laser beat-note source and its balanced detector.

The optical phase difference between two free-running lasers performs a
random walk (Wiener process).  A balanced receiver measures the beat in
two quadratures; each sample is shot-noise limited and digitized by a
symmetric mid-rise ADC.  Everything downstream (see `pipeline`) works on
the quantized I/Q codes produced here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PLANCK_CONSTANT",
    "LaserPair",
    "PhaseSeries",
    "DetectorConfig",
    "IQTrace",
    "effective_coherence_time",
    "photon_flux",
    "simulate_phase_walk",
    "simulate_iq_trace",
    "quantize_midrise",
]

PLANCK_CONSTANT = 6.62607015e-34  # J s, exact by SI definition


def effective_coherence_time(tau_c1: float, tau_c2: float) -> float:
    """Effective coherence time of the beat between two lasers.

    The phase difference accumulates variance from both lasers, so the
    pair decoheres faster than either laser alone:

        tau_bar = 1 / (2 * (1/tau_c1 + 1/tau_c2))

    and var(xi(t)) = t / tau_bar.

    Parameters
    ----------
    tau_c1, tau_c2 : float
        Single-laser coherence times in seconds.  ``math.inf`` is allowed
        and models a perfectly coherent laser.

    Returns
    -------
    float
        Effective coherence time in seconds.  Equal coherence times give
        tau_c / 4; one infinite laser gives tau_c / 2 of the other.
    """
    for name, tau in (("tau_c1", tau_c1), ("tau_c2", tau_c2)):
        if not tau > 0 or math.isnan(tau):
            raise ValueError(f"{name} must be positive, got {tau!r}")
    if math.isinf(tau_c1) and math.isinf(tau_c2):
        return math.inf
    return 1.0 / (2.0 * (1.0 / tau_c1 + 1.0 / tau_c2))


def photon_flux(power_watts: float, frequency_hz: float) -> float:
    """Photon rate of an optical beam: power / (h * frequency).

    Parameters
    ----------
    power_watts : float
        Optical power in W, >= 0.
    frequency_hz : float
        Optical frequency in Hz, > 0.

    Returns
    -------
    float
        Photons per second.  0.1 mW at 193.4 THz is about 7.8e14 1/s.
    """
    if power_watts < 0:
        raise ValueError(f"power must be >= 0, got {power_watts!r}")
    if not frequency_hz > 0:
        raise ValueError(f"frequency must be positive, got {frequency_hz!r}")
    return power_watts / (PLANCK_CONSTANT * frequency_hz)


@dataclass(frozen=True)
class LaserPair:
    """Source model: two independent lasers interfering on a detector.

    Intensities are expressed as mean photon numbers per detector
    response time, which makes the shot-noise variance of the balanced
    output simply 2 * (intensity1 + intensity2) in the same units.
    """

    tau_c1: float
    tau_c2: float
    intensity1: float
    intensity2: float
    delta_omega: float = 0.0  # beat detuning, rad/s

    def __post_init__(self) -> None:
        effective_coherence_time(self.tau_c1, self.tau_c2)  # validates
        if not self.intensity1 > 0 or not self.intensity2 > 0:
            raise ValueError("intensities must be positive")

    @property
    def tau_bar(self) -> float:
        return effective_coherence_time(self.tau_c1, self.tau_c2)

    @property
    def amplitude(self) -> float:
        """Beat amplitude sqrt(I1 * I2) in photons per response time."""
        return math.sqrt(self.intensity1 * self.intensity2)


@dataclass(eq=False)
class PhaseSeries:
    """Uniformly sampled phase record in radians."""

    values: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")

    def __len__(self) -> int:
        return self.values.shape[-1]

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.shape[-1])


@dataclass(frozen=True)
class DetectorConfig:
    """Balanced receiver and ADC settings.

    full_scale is the clip point of the symmetric quantizer in detector
    units; None picks 1.2 * sqrt(I1*I2) at simulation time so the beat
    fits with 20% headroom.  noise_variance None means shot-noise limited,
    2 * (I1 + I2); an explicit 0 disables noise.
    """

    adc_bits: int = 8
    full_scale: float | None = None
    response_time: float = 625e-12
    noise_variance: float | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.adc_bits <= 16:
            raise ValueError(f"adc_bits must be in [1, 16], got {self.adc_bits}")
        if self.full_scale is not None and not self.full_scale > 0:
            raise ValueError("full_scale must be positive")
        if not self.response_time > 0:
            raise ValueError("response_time must be positive")
        if self.noise_variance is not None and self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")


@dataclass(eq=False)
class IQTrace:
    """Quantized two-quadrature record.

    i_codes/q_codes hold signed mid-rise quantizer codes m in
    [-2**(adc_bits-1), 2**(adc_bits-1) - 1]; the detector-unit value of a
    code is (m + 0.5) * step with step = 2 * full_scale / 2**adc_bits.
    Only codes, dt and adc_bits are persisted by the trace file format;
    full_scale is simulation-side metadata (angles are scale invariant).
    """

    i_codes: np.ndarray
    q_codes: np.ndarray
    dt: float
    adc_bits: int
    full_scale: float
    t0: float = 0.0
    saturated: bool = False
    clipped: int = 0

    def __post_init__(self) -> None:
        self.i_codes = np.asarray(self.i_codes, dtype=np.int16)
        self.q_codes = np.asarray(self.q_codes, dtype=np.int16)
        if self.i_codes.shape != self.q_codes.shape or self.i_codes.ndim != 1:
            raise ValueError("i_codes and q_codes must be 1-D with equal length")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not 1 <= self.adc_bits <= 16:
            raise ValueError(f"adc_bits must be in [1, 16], got {self.adc_bits}")
        if not self.full_scale > 0:
            raise ValueError("full_scale must be positive")
        half = 1 << (self.adc_bits - 1)
        for name, codes in (("i_codes", self.i_codes), ("q_codes", self.q_codes)):
            if codes.size and (codes.min() < -half or codes.max() > half - 1):
                raise ValueError(f"{name} outside the {self.adc_bits}-bit codebook")

    def __len__(self) -> int:
        return self.i_codes.size

    @property
    def step(self) -> float:
        """Quantizer step in detector units."""
        return 2.0 * self.full_scale / (1 << self.adc_bits)

    def i_units(self) -> np.ndarray:
        return (self.i_codes + 0.5) * self.step

    def q_units(self) -> np.ndarray:
        return (self.q_codes + 0.5) * self.step


def quantize_midrise(x: np.ndarray, full_scale: float, adc_bits: int) -> np.ndarray:
    """Quantize to signed mid-rise codes with clipping.

    Codes m = floor(x / step) clipped to [-2**(b-1), 2**(b-1) - 1];
    reconstruction levels sit at (m + 0.5) * step, so zero is a code
    boundary and never an output level.
    """
    if not full_scale > 0:
        raise ValueError("full_scale must be positive")
    if not 1 <= adc_bits <= 16:
        raise ValueError(f"adc_bits must be in [1, 16], got {adc_bits}")
    half = 1 << (adc_bits - 1)
    step = 2.0 * full_scale / (1 << adc_bits)
    codes = np.floor(np.asarray(x, dtype=np.float64) / step)
    return np.clip(codes, -half, half - 1).astype(np.int16)


def simulate_phase_walk(
    source: LaserPair | float,
    duration: float,
    dt: float,
    seed: int | np.random.Generator | None = 0,
    t0: float = 0.0,
) -> PhaseSeries:
    """Simulate the beat phase random walk xi(t).

    Increments over dt are independent N(0, dt / tau_bar), so
    var(xi(t0 + t) - xi(t0)) = t / tau_bar.  The walk starts at
    xi(t0) = 0.

    Parameters
    ----------
    source : LaserPair or float
        Laser pair, or the effective coherence time tau_bar directly.
    duration : float
        Walk length in seconds, >= dt.
    dt : float
        Sample interval in seconds, > 0.
    seed : int, Generator, or None
        Reproducibility control; identical seeds give identical walks.

    Returns
    -------
    PhaseSeries
        floor(duration / dt) + 1 samples starting with 0.0.
    """
    tau_bar = source.tau_bar if isinstance(source, LaserPair) else float(source)
    if not tau_bar > 0:
        raise ValueError(f"tau_bar must be positive, got {tau_bar!r}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if duration < dt:
        raise ValueError("duration must be at least one sample interval")
    # tolerate duration/dt sitting a few ulp under an integer
    n_steps = int(math.floor(duration / dt * (1.0 + 1e-12)))
    rng = np.random.default_rng(seed)
    sigma = 0.0 if math.isinf(tau_bar) else math.sqrt(dt / tau_bar)
    values = np.empty(n_steps + 1)
    values[0] = 0.0
    np.cumsum(rng.normal(0.0, sigma, size=n_steps), out=values[1:])
    return PhaseSeries(values, dt=dt, t0=t0)


def simulate_iq_trace(
    xi: PhaseSeries,
    pair: LaserPair,
    detector: DetectorConfig = DetectorConfig(),
    seed: int | np.random.Generator | None = 0,
) -> IQTrace:
    """Detect a phase walk in both quadratures and digitize.

    Sample n measures, before quantization,

        I_n = sqrt(I1 I2) cos(delta_omega * t_n + xi_n)            + g_n
        Q_n = sqrt(I1 I2) cos(delta_omega * t_n + xi_n - pi/2)     + h_n

    with g, h independent Gaussians of variance 2 * (I1 + I2) unless
    overridden.  The quadrature arm delays the reference by pi/2, so
    Q = sqrt(I1 I2) sin(.) and arg(I + iQ) advances with the carrier.
    In the noiseless unquantized limit I^2 + Q^2 = I1*I2 exactly.

    Parameters
    ----------
    xi : PhaseSeries
        Phase walk to detect; its dt and t0 define the sampling grid.
    pair : LaserPair
        Source intensities, detuning, coherence times.
    detector : DetectorConfig
        ADC depth, full scale, noise override.
    seed : int, Generator, or None
        Noise reproducibility; independent of the walk's seed.

    Returns
    -------
    IQTrace
        One pair of quantizer codes per phase sample.  The saturated
        flag is set when full_scale < sqrt(I1*I2), i.e. the beat itself
        cannot fit the ADC range (clipping is physical, not an error).
    """
    amplitude = pair.amplitude
    full_scale = detector.full_scale
    if full_scale is None:
        full_scale = 1.2 * amplitude
    noise_var = detector.noise_variance
    if noise_var is None:
        noise_var = 2.0 * (pair.intensity1 + pair.intensity2)

    saturated = full_scale < amplitude
    if saturated:
        warnings.warn(
            f"full_scale {full_scale:g} below beat amplitude {amplitude:g}; "
            "trace will clip",
            stacklevel=2,
        )

    rng = np.random.default_rng(seed)
    phase = pair.delta_omega * xi.times() + xi.values
    noise_sd = math.sqrt(noise_var)
    n = len(phase)
    i_raw = amplitude * np.cos(phase)
    # the pi/2 arm delays the reference, so Q is the imaginary part:
    # cos(phase - pi/2) = sin(phase), and arg(I + iQ) tracks +phase
    q_raw = amplitude * np.sin(phase)
    if noise_sd > 0:
        i_raw += rng.normal(0.0, noise_sd, size=n)
        q_raw += rng.normal(0.0, noise_sd, size=n)

    half = 1 << (detector.adc_bits - 1)
    step = 2.0 * full_scale / (1 << detector.adc_bits)
    i_unclipped = np.floor(i_raw / step)
    q_unclipped = np.floor(q_raw / step)
    clipped = int(
        np.count_nonzero((i_unclipped < -half) | (i_unclipped > half - 1))
        + np.count_nonzero((q_unclipped < -half) | (q_unclipped > half - 1))
    )
    i_codes = np.clip(i_unclipped, -half, half - 1).astype(np.int16)
    q_codes = np.clip(q_unclipped, -half, half - 1).astype(np.int16)
    return IQTrace(
        i_codes=i_codes,
        q_codes=q_codes,
        dt=xi.dt,
        adc_bits=detector.adc_bits,
        full_scale=full_scale,
        t0=xi.t0,
        saturated=saturated,
        clipped=clipped,
    )
