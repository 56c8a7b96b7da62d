"""Command line behavior: exit codes, file outputs, config echo."""

import json

import numpy as np
import pytest

from phasewalk.cli import main
from phasewalk.traceio import sidecar_path


def first_config_line(capsys):
    out = capsys.readouterr().out
    for line in out.splitlines():
        if line.startswith("config: "):
            return json.loads(line[len("config: "):])
    raise AssertionError("no config line printed")


class TestUsageErrors:
    def test_no_arguments(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 1

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_nonpositive_duration(self, tmp_path):
        code = main(["simulate", "--duration", "0", "--out", str(tmp_path / "t")])
        assert code == 1

    def test_duration_below_sample_interval(self, tmp_path):
        code = main(["simulate", "--duration", "1e-9", "--out", str(tmp_path / "t")])
        assert code == 1

    def test_unknown_test_name(self, tmp_path):
        target = tmp_path / "x.bin"
        target.write_bytes(bytes(range(256)) * 20)
        code = main(["analyze", "--in", str(target), "--tests", "bogus"])
        assert code == 1

    def test_raw_input_requires_eight_bits(self, tmp_path):
        target = tmp_path / "x.bin"
        target.write_bytes(bytes(range(256)))
        code = main(["analyze", "--in", str(target), "--bits", "4"])
        assert code == 1

    def test_extract_chunk_too_small(self, tmp_path):
        code = main(["extract", "--in", str(tmp_path / "t.pwiq"),
                     "--out", str(tmp_path / "b"), "--chunk", "2"])
        assert code == 1


class TestIoErrors:
    def test_extract_missing_input(self, tmp_path):
        code = main(["extract", "--in", str(tmp_path / "absent.pwiq"),
                     "--out", str(tmp_path / "b.bits")])
        assert code == 2

    def test_analyze_garbage_trace(self, tmp_path):
        target = tmp_path / "t.csv"
        target.write_text("t,i,q\n0,0,0\n1e-6,zzz,0\n")
        code = main(["analyze", "--in", str(target)])
        assert code == 2

    def test_analyze_empty_raw(self, tmp_path):
        target = tmp_path / "empty.bin"
        target.write_bytes(b"")
        code = main(["analyze", "--in", str(target)])
        assert code == 2


class TestPipeline:
    def simulate(self, tmp_path, capsys, **overrides):
        trace_path = tmp_path / "trace.pwiq"
        args = {
            "--tau-c1": "1e-6",
            "--tau-c2": "1e-6",
            "--duration": "0.0192",
            "--adc-bits": "12",
            "--seed": "3",
            "--out": str(trace_path),
        }
        args.update(overrides)
        argv = ["simulate"]
        for key, value in args.items():
            argv += [key, value]
        assert main(argv) == 0
        return trace_path

    def test_simulate_echoes_config_and_regime(self, tmp_path, capsys):
        self.simulate(tmp_path, capsys)
        out = capsys.readouterr().out
        config = None
        for line in out.splitlines():
            if line.startswith("config: "):
                config = json.loads(line[len("config: "):])
        assert config is not None
        assert config["command"] == "simulate"
        assert config["seed"] == 3
        assert "regime: pooled coherence time" in out
        assert "wrote" in out

    def test_full_chain(self, tmp_path, capsys):
        trace_path = self.simulate(tmp_path, capsys)
        bits_path = tmp_path / "trace.bits"
        assert main(["extract", "--in", str(trace_path),
                     "--out", str(bits_path)]) == 0

        meta = json.loads(sidecar_path(bits_path).read_text())
        assert meta["symbol_count"] == 2999  # 3001 samples, minus two
        assert meta["bit_rate"] == 1_250_000.0

        out_dir = tmp_path / "report"
        report_path = tmp_path / "custom.report.json"
        code = main(["analyze", "--in", str(trace_path),
                     "--out-dir", str(out_dir), "--report", str(report_path)])
        assert code == 0

        for name in ("trace.histogram.csv", "trace.histogram.png",
                     "trace.autocorrelation.csv", "trace.autocorrelation.png",
                     "trace.iq.png", "trace.walk.png"):
            assert (out_dir / name).exists(), name

        doc = json.loads(report_path.read_text())
        assert doc["kind"] == "trace"
        assert doc["n_symbols"] == 2999
        assert {r["test_name"] for r in doc["reports"]} == {
            "monobit", "runs", "chi_square", "ks_uniform"
        }
        assert all(r["verdict"] == "pass" for r in doc["reports"])
        assert doc["fit"]["kappa"] < 0.3

        histogram = (out_dir / "trace.histogram.csv").read_text().splitlines()
        assert histogram[0] == "symbol,count,expected"
        assert len(histogram) == 1 + 256

    def test_analyze_bitstream_skips_ks(self, tmp_path, capsys):
        trace_path = self.simulate(tmp_path, capsys)
        bits_path = tmp_path / "trace.bits"
        assert main(["extract", "--in", str(trace_path),
                     "--out", str(bits_path)]) == 0
        assert main(["analyze", "--in", str(bits_path),
                     "--out-dir", str(tmp_path / "out")]) == 0
        doc = json.loads((tmp_path / "out" / "trace.report.json").read_text())
        assert doc["kind"] == "bitstream"
        assert any(n.startswith("ks: skipped") for n in doc["notes"])
        assert {r["test_name"] for r in doc["reports"]} == {
            "monobit", "runs", "chi_square"
        }

    def test_analyze_csv_input(self, tmp_path, capsys):
        rows = ["t,i,q"]
        rng = np.random.default_rng(0)
        theta = rng.uniform(-np.pi, np.pi, 400)
        for j in range(400):
            rows.append(f"{j * 1e-6},{np.cos(theta[j])},{np.sin(theta[j])}")
        target = tmp_path / "scope.csv"
        target.write_text("\n".join(rows) + "\n")
        code = main(["analyze", "--in", str(target), "--tests", "monobit,ks",
                     "--out-dir", str(tmp_path / "out")])
        assert code == 0
        doc = json.loads((tmp_path / "out" / "scope.report.json").read_text())
        assert doc["kind"] == "csv"
        assert {r["test_name"] for r in doc["reports"]} == {"monobit", "ks_uniform"}

    def test_analyze_rejects_bad_random_data(self, tmp_path, capsys):
        target = tmp_path / "zeros.bin"
        target.write_bytes(b"\x00" * 3000)
        code = main(["analyze", "--in", str(target),
                     "--out-dir", str(tmp_path / "out")])
        assert code == 3
        err = capsys.readouterr().err
        assert "failed" in err

    def test_extract_too_short_trace(self, tmp_path, capsys):
        trace_path = self.simulate(tmp_path, capsys,
                                   **{"--duration": "6.4e-6"})
        code = main(["extract", "--in", str(trace_path),
                     "--out", str(tmp_path / "b.bits")])
        assert code == 2


class TestSelftest:
    def test_single_check_passes(self):
        assert main(["selftest", "--only", "05"]) == 0

    def test_known_divergence_is_not_a_surprise(self):
        assert main(["selftest", "--only", "02"]) == 0

    def test_strict_mode_fails_on_known_divergence(self):
        assert main(["selftest", "--strict", "--only", "02"]) == 3

    def test_unknown_check_number(self):
        assert main(["selftest", "--only", "99"]) == 1
