"""Statistical test battery: known verdicts, frozen statistics, calibration."""

import json
import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from phasewalk.pipeline import BitStream
from phasewalk.stats import (
    VERDICT_FAIL,
    VERDICT_PASS,
    VERDICT_PREREQ,
    VERDICT_WEAK,
    DegenerateVarianceError,
    StatReport,
    Thresholds,
    autocorrelation,
    chi_square_symbols,
    format_report_lines,
    ks_uniform_test,
    monobit_test,
    reports_to_json,
    runs_test,
    symbols_to_bits,
)


class TestSymbolsToBits:
    def test_eight_bit(self):
        out = symbols_to_bits(np.array([0b10110001]), 8)
        assert out.tolist() == [1, 0, 1, 1, 0, 0, 0, 1]

    def test_four_bit_msb_first(self):
        out = symbols_to_bits(np.array([0xA, 0xB]), 4)
        assert out.tolist() == [1, 0, 1, 0, 1, 0, 1, 1]

    def test_twelve_bit(self):
        out = symbols_to_bits(np.array([0x0F3]), 12)
        assert out.tolist() == [0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1]

    def test_rejects_symbol_too_wide(self):
        with pytest.raises(ValueError):
            symbols_to_bits(np.array([16]), 4)

    def test_rejects_bad_width(self):
        with pytest.raises(ValueError):
            symbols_to_bits(np.array([0]), 0)


class TestMonobit:
    def test_balanced_sequence_passes(self):
        bits = np.tile([0, 1], 500)
        report = monobit_test(bits)
        assert report.statistic == 0.0
        assert report.p_value == 1.0
        assert report.verdict == VERDICT_PASS

    def test_constant_sequence_fails(self):
        report = monobit_test(np.zeros(1000, dtype=np.uint8))
        assert report.p_value < 1e-100
        assert report.verdict == VERDICT_FAIL

    def test_accepts_bitstream(self):
        stream = BitStream(np.full(100, 0x55), bits_per_sample=8, source_dt=1e-6)
        report = monobit_test(stream)
        assert report.n_samples == 800
        assert report.p_value == 1.0

    def test_needs_100_bits(self):
        with pytest.raises(ValueError):
            monobit_test(np.tile([0, 1], 49))


class TestRuns:
    def test_alternating_fails(self):
        # perfectly balanced, so the prerequisite holds, but twice the
        # expected run count
        report = runs_test(np.tile([0, 1], 5000))
        assert report.statistic == 10000.0
        assert report.verdict == VERDICT_FAIL

    def test_prerequisite_gate(self):
        report = runs_test(np.zeros(1000, dtype=np.uint8))
        assert report.verdict == VERDICT_PREREQ
        assert report.p_value == 0.0
        assert not report.passed

    def test_random_bits_pass(self):
        rng = np.random.default_rng(5)
        report = runs_test(rng.integers(0, 2, 100_000))
        assert report.verdict == VERDICT_PASS

    def test_needs_100_bits(self):
        with pytest.raises(ValueError):
            runs_test(np.tile([0, 1], 49))


class TestChiSquare:
    def test_perfectly_flat_counts(self):
        symbols = np.tile(np.arange(256), 10)
        report = chi_square_symbols(symbols, bits_per_sample=8)
        assert report.statistic == 0.0
        assert report.p_value == 1.0
        assert report.verdict == VERDICT_PASS

    def test_single_bin_fails(self):
        report = chi_square_symbols(np.zeros(2560, dtype=np.uint8), bits_per_sample=8)
        assert report.verdict == VERDICT_FAIL

    def test_accepts_bitstream(self):
        stream = BitStream(
            np.tile(np.arange(16), 10), bits_per_sample=4, source_dt=1e-6
        )
        report = chi_square_symbols(stream)
        assert report.statistic == 0.0

    def test_bare_array_requires_width(self):
        with pytest.raises(ValueError, match="bits_per_sample"):
            chi_square_symbols(np.zeros(2560, dtype=np.uint8))

    def test_minimum_sample_count(self):
        with pytest.raises(ValueError, match="2560"):
            chi_square_symbols(np.zeros(2559, dtype=np.uint8), bits_per_sample=8)

    def test_rejects_out_of_range_symbol(self):
        symbols = np.tile(np.arange(16), 10).astype(np.int64)
        symbols[0] = 16
        with pytest.raises(ValueError):
            chi_square_symbols(symbols, bits_per_sample=4)


class TestKsUniform:
    def test_evenly_spread_phases(self):
        n = 1000
        theta = -math.pi + (np.arange(n) + 0.5) * 2.0 * math.pi / n
        report = ks_uniform_test(theta)
        assert report.statistic == pytest.approx(1.0 / (2 * n), rel=1e-9)
        assert report.verdict == VERDICT_PASS

    def test_clustered_phases_fail(self):
        report = ks_uniform_test(np.full(1000, 0.25))
        assert report.verdict == VERDICT_FAIL

    def test_rejects_out_of_domain(self):
        with pytest.raises(ValueError, match="pi"):
            ks_uniform_test(np.full(1000, -math.pi))
        with pytest.raises(ValueError, match="pi"):
            ks_uniform_test(np.full(1000, math.pi + 1e-9))

    def test_needs_100_samples(self):
        with pytest.raises(ValueError):
            ks_uniform_test(np.zeros(99))


class TestAutocorrelation:
    def test_lag_zero_is_one(self):
        rng = np.random.default_rng(0)
        out = autocorrelation(rng.normal(size=500), 10)
        assert out[0] == 1.0
        assert out.shape == (11,)

    def test_alternating_series(self):
        n = 10_000
        x = np.tile([1.0, -1.0], n // 2)
        out = autocorrelation(x, 2)
        assert out[1] == pytest.approx(-(n - 1) / n, rel=1e-12)
        assert out[2] == pytest.approx((n - 2) / n, rel=1e-12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=2000)
        assert autocorrelation(2.0 * x + 5.0, 20) == pytest.approx(
            autocorrelation(x, 20), abs=1e-12
        )

    def test_independent_samples_decorrelate(self):
        rng = np.random.default_rng(99)
        out = autocorrelation(rng.normal(size=100_000), 50)
        assert np.abs(out[1:]).max() < 5.0 / math.sqrt(100_000)

    def test_constant_series_rejected(self):
        with pytest.raises(DegenerateVarianceError):
            autocorrelation(np.full(100, 3.3), 5)

    def test_validates_arguments(self):
        with pytest.raises(ValueError, match="max_lag"):
            autocorrelation(np.arange(100.0), 0)
        with pytest.raises(ValueError, match="samples"):
            autocorrelation(np.arange(10.0), 20)


class TestCalibration:
    def test_p_values_are_uniform_for_ideal_input(self):
        # on ideal uniform symbols every test's p-value must itself be
        # uniform; 1000 independent stretches, KS on each p sample
        n_seeds = 1000
        n_symbols = 16_384
        collected = {"monobit": [], "runs": [], "chi_square": [], "ks_uniform": []}
        for s in range(n_seeds):
            rng = np.random.default_rng(s)
            symbols = rng.integers(0, 256, n_symbols)
            bits = symbols_to_bits(symbols, 8)
            collected["monobit"].append(monobit_test(bits).p_value)
            collected["runs"].append(runs_test(bits).p_value)
            collected["chi_square"].append(
                chi_square_symbols(symbols, bits_per_sample=8).p_value
            )
            theta = rng.uniform(-math.pi, math.pi, 4096)
            collected["ks_uniform"].append(ks_uniform_test(theta).p_value)
        for name, p_values in collected.items():
            result = scipy_stats.kstest(p_values, "uniform")
            assert result.pvalue > 1e-3, f"{name} p-values not uniform"


class TestThresholds:
    def test_verdict_boundaries(self):
        t = Thresholds(pass_p=1e-2, fail_p=1e-4)
        assert t.verdict(0.5) == VERDICT_PASS
        assert t.verdict(1e-2) == VERDICT_PASS
        assert t.verdict(9.99e-3) == VERDICT_WEAK
        assert t.verdict(1e-4) == VERDICT_WEAK
        assert t.verdict(9.9e-5) == VERDICT_FAIL

    def test_rejects_bad_ordering(self):
        with pytest.raises(ValueError):
            Thresholds(pass_p=1e-4, fail_p=1e-2)
        with pytest.raises(ValueError):
            Thresholds(pass_p=1.0, fail_p=0.5)
        with pytest.raises(ValueError):
            Thresholds(pass_p=0.5, fail_p=0.0)


class TestReporting:
    def test_p_value_validated(self):
        with pytest.raises(ValueError):
            StatReport("x", 0.0, 1.5, 100, VERDICT_PASS)
        with pytest.raises(ValueError):
            StatReport("x", 0.0, -0.1, 100, VERDICT_PASS)

    def test_json_round_trip(self):
        report = monobit_test(np.tile([0, 1], 500))
        doc = json.loads(reports_to_json([report], source="unit"))
        assert doc["source"] == "unit"
        assert doc["reports"][0]["test_name"] == "monobit"
        assert doc["reports"][0]["verdict"] == VERDICT_PASS
        assert doc["reports"][0]["thresholds"] == {"pass_p": 1e-2, "fail_p": 1e-4}

    def test_format_lines(self):
        report = monobit_test(np.tile([0, 1], 500))
        lines = format_report_lines([report])
        assert len(lines) == 1
        assert "monobit" in lines[0]
        assert "[pass]" in lines[0]
