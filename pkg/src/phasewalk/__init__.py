"""Random numbers from the phase walk between two free-running lasers.

The package simulates the beat of two lasers on a balanced I/Q
receiver, extracts wrapped phase increments from the digitized
quadratures, models their distribution, and tests the resulting bits.

Layout: `simulate` generates walks and traces; `pipeline` turns traces
into symbols; `vonmises` is the increment distribution model;  `stats`
holds the test battery; `traceio` the file formats; `regime` the
sampling sanity checks; `cli` the command line; `acceptance` the
release checks.
"""

from .pipeline import (
    BitStream,
    DegenerateSampleError,
    ExtractionConfig,
    detrend,
    discretize,
    extract_bits,
    instantaneous_phase,
    phase_increments,
    unwrap_phase,
    wrap_phase,
    wrapped_angle,
)
from .regime import RegimeCheck, check_regime
from .simulate import (
    DetectorConfig,
    IQTrace,
    LaserPair,
    PhaseSeries,
    effective_coherence_time,
    photon_flux,
    quantize_midrise,
    simulate_iq_trace,
    simulate_phase_walk,
)
from .stats import (
    StatReport,
    Thresholds,
    autocorrelation,
    chi_square_symbols,
    ks_uniform_test,
    monobit_test,
    runs_test,
    symbols_to_bits,
)
from .traceio import (
    TimebaseError,
    TraceFormatError,
    read_bitstream,
    read_trace,
    read_trace_csv,
    write_bitstream,
    write_trace,
)
from .vonmises import (
    FitResult,
    InsufficientDataError,
    UnboundedKappaError,
    VonMisesModel,
    bessel_i0,
    discretized_probs,
    fit_vonmises,
    max_uniform_deviation,
    pdf,
    sample,
)

__version__ = "0.1.0"

__all__ = [
    "BitStream",
    "DegenerateSampleError",
    "DetectorConfig",
    "ExtractionConfig",
    "FitResult",
    "IQTrace",
    "InsufficientDataError",
    "LaserPair",
    "PhaseSeries",
    "RegimeCheck",
    "StatReport",
    "Thresholds",
    "TimebaseError",
    "TraceFormatError",
    "UnboundedKappaError",
    "VonMisesModel",
    "autocorrelation",
    "bessel_i0",
    "check_regime",
    "chi_square_symbols",
    "detrend",
    "discretize",
    "discretized_probs",
    "effective_coherence_time",
    "extract_bits",
    "fit_vonmises",
    "instantaneous_phase",
    "ks_uniform_test",
    "max_uniform_deviation",
    "monobit_test",
    "pdf",
    "phase_increments",
    "photon_flux",
    "quantize_midrise",
    "read_bitstream",
    "read_trace",
    "read_trace_csv",
    "runs_test",
    "sample",
    "simulate_iq_trace",
    "simulate_phase_walk",
    "symbols_to_bits",
    "unwrap_phase",
    "wrap_phase",
    "wrapped_angle",
    "write_bitstream",
    "write_trace",
    "__version__",
]
