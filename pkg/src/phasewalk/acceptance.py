"""Release acceptance checks.

Ten numbered checks exercise simulation, model, extraction, statistics
and file formats end to end, each with an explicit tolerance and (where
it matters) a runtime budget. `phasewalk selftest` wraps `run_all`;
the test suite asserts every check individually.

Check 02 is a known divergence: the discretized von Mises deviation
from uniform at variance ratio 2 with 8-bit symbols is 2.1e-3, not
below the 1e-5 target this check states (that level is only reached
near variance ratio 391; 2.1e-3 / 256 is 8.4e-6, so the target looks
like a per-level reading of the same quantity). The check keeps the
stated bound and is expected to fail; everything else must pass.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats as scipy_stats

from .pipeline import (
    ExtractionConfig,
    detrend,
    extract_bits,
    instantaneous_phase,
    phase_increments,
    unwrap_phase,
    wrap_phase,
)
from .simulate import (
    DetectorConfig,
    LaserPair,
    PhaseSeries,
    photon_flux,
    simulate_iq_trace,
    simulate_phase_walk,
)
from .stats import (
    autocorrelation,
    chi_square_symbols,
    monobit_test,
    runs_test,
    symbols_to_bits,
)
from .traceio import read_bitstream, read_trace, sidecar_path, write_bitstream, write_trace
from .vonmises import (
    VonMisesModel,
    discretized_probs,
    fit_vonmises,
    max_uniform_deviation,
    pdf,
    sample,
)

__all__ = ["CriterionResult", "CHECKS", "run_all", "run_check"]

_AMPLITUDE_INTENSITY = 4.9e5  # photons per sample, headline operating point


@dataclass
class CriterionResult:
    ident: str
    title: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    expected_to_pass: bool = True
    data: dict = field(default_factory=dict)

    @property
    def surprising(self) -> bool:
        return self.passed != self.expected_to_pass

    def line(self) -> str:
        if self.passed:
            status = "pass"
        elif not self.expected_to_pass:
            status = "FAIL (known divergence)"
        else:
            status = "FAIL"
        return (
            f"check {self.ident} {self.title:<26} {status:<22} "
            f"[{self.elapsed:6.1f} s] {self.detail}"
        )


def _pair_for_ratio(ratio: float, dt: float, delta_omega: float = 0.0) -> LaserPair:
    """Two equal lasers whose pooled coherence time is dt / ratio."""
    tau_bar = dt / ratio
    return LaserPair(
        tau_c1=4.0 * tau_bar,
        tau_c2=4.0 * tau_bar,
        intensity1=_AMPLITUDE_INTENSITY,
        intensity2=_AMPLITUDE_INTENSITY,
        delta_omega=delta_omega,
    )


def check_01_variance_growth() -> CriterionResult:
    """Ensemble variance of the walk reaches t / tau_bar, within 5%."""
    t0 = time.perf_counter()
    tau_bar = 5e-6
    n_walks = 10_000
    finals = np.empty(n_walks)
    for s in range(n_walks):
        finals[s] = simulate_phase_walk(tau_bar, 10e-6, 0.1e-6, seed=s).values[-1]
    var = float(np.var(finals))
    elapsed = time.perf_counter() - t0
    ok = 1.9 <= var <= 2.1 and elapsed < 10.0
    return CriterionResult(
        ident="01",
        title="variance growth",
        passed=ok,
        detail=f"var(xi) over {n_walks} walks at t/tau_bar=2: {var:.4f} (want 2.0 +- 0.1)",
        elapsed=elapsed,
        data={"variance": var},
    )


def check_02_uniform_deviation() -> CriterionResult:
    """Deviation-from-uniform bound at variance ratio 2 (known divergence)."""
    t0 = time.perf_counter()
    dev2 = max_uniform_deviation(0.5, 8)  # variance ratio 2 -> kappa 0.5
    dev0 = max_uniform_deviation(0.0, 8)
    grid = np.geomspace(0.1, 10.0, 10)
    devs = [max_uniform_deviation(float(k), 8) for k in grid]
    monotone = all(a < b for a, b in zip(devs, devs[1:]))
    elapsed = time.perf_counter() - t0
    bound_ok = dev2 < 1e-5
    ok = bound_ok and dev0 == 0.0 and monotone and elapsed < 1.0
    return CriterionResult(
        ident="02",
        title="uniform deviation bound",
        passed=ok,
        detail=(
            f"max|p_i - 1/256| at ratio 2: {dev2:.4e} (target < 1e-5; "
            f"target/2**8 reading: {dev2 / 256:.2e}); at kappa 0: {dev0:.1e}; "
            f"monotone on 10-point grid: {monotone}"
        ),
        elapsed=elapsed,
        expected_to_pass=False,
        data={
            "deviation_at_ratio_2": dev2,
            "deviation_at_kappa_0": dev0,
            "monotone": monotone,
            "scaled_reading": dev2 / 256,
        },
    )


def check_03_normalization() -> CriterionResult:
    """pdf integrates to 1 within 1e-10 across five decades of kappa."""
    t0 = time.perf_counter()
    worst = 0.0
    for kappa in (0.0, 0.1, 1.0, 10.0, 100.0):
        model = VonMisesModel(kappa)
        total, _ = integrate.quad(
            lambda th: pdf(th, model), -math.pi, math.pi, epsabs=1e-13, limit=200
        )
        worst = max(worst, abs(total - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10
    return CriterionResult(
        ident="03",
        title="model normalization",
        passed=ok,
        detail=f"max |integral(pdf) - 1| over kappa in {{0,0.1,1,10,100}}: {worst:.2e}",
        elapsed=elapsed,
        data={"worst": worst},
    )


def check_04_fit_recovery() -> CriterionResult:
    """ML fit on 5e6 model draws recovers the variance ratio within 5%."""
    t0 = time.perf_counter()
    details = []
    ok = True
    data = {}
    for ratio, seed in ((1.78, 11), (0.172, 12)):
        draws = sample(VonMisesModel(kappa=1.0 / ratio), 5_000_000, seed=seed)
        fitted = fit_vonmises(draws).variance_ratio
        rel = abs(fitted - ratio) / ratio
        ok = ok and rel < 0.05
        details.append(f"{ratio} -> {fitted:.4f} ({100 * rel:.2f}%)")
        data[f"ratio_{ratio}"] = fitted
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 60.0  # budget: 30 s per ratio
    return CriterionResult(
        ident="04",
        title="fit recovery",
        passed=ok,
        detail="variance ratio " + "; ".join(details),
        elapsed=elapsed,
        data=data,
    )


def check_05_photon_arithmetic() -> CriterionResult:
    """0.1 mW at 193.4 THz: 7.8e14 photons/s and 4.9e5 per 625 ps sample."""
    t0 = time.perf_counter()
    flux = photon_flux(0.1e-3, 193.4e12)
    per_sample = flux * 625e-12
    rel_flux = abs(flux / 7.8e14 - 1.0)
    rel_sample = abs(per_sample / 4.9e5 - 1.0)
    elapsed = time.perf_counter() - t0
    ok = rel_flux < 0.01 and rel_sample < 0.02
    return CriterionResult(
        ident="05",
        title="photon arithmetic",
        passed=ok,
        detail=(
            f"flux {flux:.4e}/s ({100 * rel_flux:.2f}% from 7.8e14), "
            f"{per_sample:.4e} per sample ({100 * rel_sample:.2f}% from 4.9e5)"
        ),
        elapsed=elapsed,
        data={"flux": flux, "per_sample": per_sample},
    )


def check_06_autocorrelation() -> CriterionResult:
    """5e6 end-to-end increments: |K(1..100)| < 1e-2, std(K) near 1/sqrt(N)."""
    t0 = time.perf_counter()
    n_increments = 5_000_000
    dt = 6.4e-6
    pair = _pair_for_ratio(4.0, dt, delta_omega=0.8 / dt)
    walk = simulate_phase_walk(pair, n_increments * dt, dt, seed=2024)
    trace = simulate_iq_trace(walk, pair, DetectorConfig(adc_bits=12), seed=2025)
    xi, _ = detrend(unwrap_phase(instantaneous_phase(trace)))
    increments = phase_increments(xi)
    coeffs = autocorrelation(increments.values, 1000)
    max_abs_100 = float(np.abs(coeffs[1:101]).max())
    spread = float(np.std(coeffs[1:]))
    target = 1.0 / math.sqrt(n_increments)
    elapsed = time.perf_counter() - t0
    ok = (
        max_abs_100 < 1e-2
        and 0.67 * target <= spread <= 1.5 * target
        and elapsed < 60.0
    )
    return CriterionResult(
        ident="06",
        title="increment autocorrelation",
        passed=ok,
        detail=(
            f"max|K(1..100)| = {max_abs_100:.2e} (< 1e-2); std over 1000 lags "
            f"{spread:.2e} vs 1/sqrt(N) = {target:.2e}"
        ),
        elapsed=elapsed,
        data={"max_abs_100": max_abs_100, "spread": spread},
    )


def check_07_end_to_end_randomness() -> CriterionResult:
    """100 runs x 1e7 bytes: monobit/runs/chi-square pass rates and calibration."""
    t0 = time.perf_counter()
    n_symbols = 10_000_000
    n_runs = 100
    dt = 6.4e-6
    pair = _pair_for_ratio(50.0, dt, delta_omega=0.8 / dt)
    detector = DetectorConfig(adc_bits=12)
    p_values: dict[str, list[float]] = {"monobit": [], "runs": [], "chi_square": []}
    for run in range(n_runs):
        walk = simulate_phase_walk(pair, (n_symbols + 1) * dt, dt, seed=1000 + run)
        trace = simulate_iq_trace(walk, pair, detector, seed=900_000 + run)
        del walk
        stream = extract_bits(trace)
        del trace
        bits = symbols_to_bits(stream.symbols, stream.bits_per_sample)
        for report in (
            monobit_test(bits),
            runs_test(bits),
            chi_square_symbols(stream),
        ):
            p_values[report.test_name].append(report.p_value)
        del bits, stream
    counts = {name: sum(p >= 0.01 for p in ps) for name, ps in p_values.items()}
    ks_ps = {
        name: float(scipy_stats.kstest(ps, "uniform").pvalue)
        for name, ps in p_values.items()
    }
    elapsed = time.perf_counter() - t0
    ok = all(c >= 95 for c in counts.values()) and all(p > 1e-3 for p in ks_ps.values())
    return CriterionResult(
        ident="07",
        title="end-to-end randomness",
        passed=ok,
        detail=(
            "pass counts "
            + ", ".join(f"{k}={v}/100" for k, v in counts.items())
            + " (need >= 95); calibration KS p "
            + ", ".join(f"{k}={v:.3f}" for k, v in ks_ps.items())
            + " (need > 0.001)"
        ),
        elapsed=elapsed,
        data={"counts": counts, "ks_ps": ks_ps},
    )


def check_08_pipeline_fidelity() -> CriterionResult:
    """Noiseless 8-bit trace: recovered walk within 2x the quantization bound."""
    t0 = time.perf_counter()
    dt = 6.4e-6
    n = 100_000
    pair = _pair_for_ratio(0.01, dt, delta_omega=0.8 / dt)
    walk = simulate_phase_walk(pair, (n - 1) * dt, dt, seed=404)
    detector = DetectorConfig(adc_bits=8, noise_variance=0.0)
    trace = simulate_iq_trace(walk, pair, detector, seed=405)
    recovered, _ = detrend(unwrap_phase(instantaneous_phase(trace)))
    truth = PhaseSeries(
        pair.delta_omega * walk.times() + walk.values, dt=dt, t0=walk.t0
    )
    truth_detrended, _ = detrend(truth)
    rms = float(np.sqrt(np.mean((recovered.values - truth_detrended.values) ** 2)))
    # worst-case angle error of a mid-rise quantizer with 20% headroom:
    # sqrt(2) * (step/2) / amplitude = sqrt(2) * 1.2 / 2**bits
    bound = math.sqrt(2.0) * 1.2 / 2**8
    elapsed = time.perf_counter() - t0
    ok = rms < 2.0 * bound
    return CriterionResult(
        ident="08",
        title="pipeline fidelity",
        passed=ok,
        detail=f"RMS phase error {rms:.4e} rad vs bound 2 x {bound:.4e}",
        elapsed=elapsed,
        data={"rms": rms, "bound": bound},
    )


def check_09_round_trips() -> CriterionResult:
    """wrap(unwrap(x)) identity on 1e6 angles; files round-trip bit-exactly."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    angles = rng.uniform(-math.pi, math.pi, 1_000_000)
    series = PhaseSeries(angles, dt=1e-6)
    round_trip = wrap_phase(unwrap_phase(series).values)
    # distance on the circle; a plain difference would flag +-pi flips
    circ_err = float(np.abs(wrap_phase(round_trip - angles)).max())

    pair = LaserPair(20e-6, 20e-6, _AMPLITUDE_INTENSITY, _AMPLITUDE_INTENSITY)
    walk = simulate_phase_walk(pair, 4095e-6, 1e-6, seed=99)
    trace = simulate_iq_trace(walk, pair, DetectorConfig(adc_bits=12), seed=100)
    stream = extract_bits(trace)
    with tempfile.TemporaryDirectory() as tmp:
        trace_path = os.path.join(tmp, "t.pwiq")
        bits_path = os.path.join(tmp, "t.bin")
        write_trace(trace_path, trace)
        back = read_trace(trace_path)
        trace_ok = (
            np.array_equal(back.i_codes, trace.i_codes)
            and np.array_equal(back.q_codes, trace.q_codes)
            and back.adc_bits == trace.adc_bits
            and back.dt == trace.dt
        )
        write_bitstream(bits_path, stream, source=trace_path)
        stream_back = read_bitstream(bits_path)
        stream_ok = (
            np.array_equal(stream_back.symbols, stream.symbols)
            and stream_back.bits_per_sample == stream.bits_per_sample
            and stream_back.source_dt == stream.source_dt
        )
    elapsed = time.perf_counter() - t0
    ok = circ_err < 1e-9 and trace_ok and stream_ok
    return CriterionResult(
        ident="09",
        title="round trips",
        passed=ok,
        detail=(
            f"wrap/unwrap circular error {circ_err:.2e} (< 1e-9); trace file "
            f"{'exact' if trace_ok else 'MISMATCH'}; bitstream file "
            f"{'exact' if stream_ok else 'MISMATCH'}"
        ),
        elapsed=elapsed,
        data={"circ_err": circ_err, "trace_ok": trace_ok, "stream_ok": stream_ok},
    )


def check_10_rate_bookkeeping() -> CriterionResult:
    """156.25 kS/s at 8 bits per symbol reports exactly 1.25 Mbit/s."""
    t0 = time.perf_counter()
    dt = 6.4e-6  # 156.25 kS/s
    pair = LaserPair(0.5e-6, 0.5e-6, _AMPLITUDE_INTENSITY, _AMPLITUDE_INTENSITY)
    walk = simulate_phase_walk(pair, 2000 * dt, dt, seed=1)
    trace = simulate_iq_trace(walk, pair, DetectorConfig(adc_bits=12), seed=2)
    stream = extract_bits(trace, ExtractionConfig(bits_per_sample=8))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "rate.bin")
        write_bitstream(path, stream)
        meta_rate = read_bitstream(path).bit_rate
        sidecar_rate = json.loads(sidecar_path(path).read_text())["bit_rate"]
    elapsed = time.perf_counter() - t0
    ok = stream.bit_rate == 1.25e6 and meta_rate == 1.25e6 and sidecar_rate == 1.25e6
    return CriterionResult(
        ident="10",
        title="rate bookkeeping",
        passed=ok,
        detail=(
            f"bit rate {stream.bit_rate!r} (library), {sidecar_rate!r} (sidecar); "
            "both must equal 1250000.0 exactly"
        ),
        elapsed=elapsed,
        data={"library": stream.bit_rate, "sidecar": sidecar_rate},
    )


CHECKS = [
    check_01_variance_growth,
    check_02_uniform_deviation,
    check_03_normalization,
    check_04_fit_recovery,
    check_05_photon_arithmetic,
    check_06_autocorrelation,
    check_07_end_to_end_randomness,
    check_08_pipeline_fidelity,
    check_09_round_trips,
    check_10_rate_bookkeeping,
]


def run_check(ident: str) -> CriterionResult:
    for fn in CHECKS:
        if fn.__name__.split("_")[1] == ident:
            return fn()
    raise ValueError(f"no check {ident!r}")


def run_all(echo=print) -> list[CriterionResult]:
    """Run every check in order, printing one line each via echo."""
    results = []
    for fn in CHECKS:
        result = fn()
        results.append(result)
        if echo is not None:
            echo(result.line())
    return results
