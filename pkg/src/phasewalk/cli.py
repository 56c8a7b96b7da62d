"""Command line front end: simulate | extract | analyze | selftest.

Every run prints its complete effective configuration (seed included)
as one JSON line, so any output can be regenerated from the console
log alone.  Exit codes: 0 pass, 1 usage, 2 I/O or malformed input,
3 analysis failure (a fail or prerequisite-failed verdict, or a failed
selftest).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .pipeline import BitStream, ExtractionConfig, extract_bits, detrend, instantaneous_phase, phase_increments, unwrap_phase
from .regime import check_regime
from .simulate import DetectorConfig, IQTrace, LaserPair, photon_flux, simulate_iq_trace, simulate_phase_walk
from .stats import (
    DegenerateVarianceError,
    StatReport,
    Thresholds,
    VERDICT_FAIL,
    VERDICT_PREREQ,
    autocorrelation,
    chi_square_symbols,
    ks_uniform_test,
    monobit_test,
    reports_to_json,
    runs_test,
    format_report_lines,
    symbols_to_bits,
)
from .traceio import (
    TRACE_MAGIC,
    TimebaseError,
    TraceFormatError,
    read_bitstream,
    read_trace,
    read_trace_csv,
    sidecar_path,
    write_bitstream,
    write_trace,
)
from .vonmises import InsufficientDataError, UnboundedKappaError, fit_vonmises

__all__ = ["main", "build_parser"]

_TEST_NAMES = ("monobit", "runs", "chisq", "ks", "autocorr")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the documented contract is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _echo_config(command: str, **fields) -> None:
    print("config: " + json.dumps({"command": command, **fields}, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="phasewalk",
        description="Two-laser phase-walk random number toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="simulate a walk and write an I/Q trace")
    sim.add_argument("--tau-c1", type=float, default=20e-6, help="coherence time, laser 1 (s)")
    sim.add_argument("--tau-c2", type=float, default=20e-6, help="coherence time, laser 2 (s)")
    sim.add_argument("--delta-f", type=float, default=0.0, help="beat detuning (Hz)")
    sim.add_argument("--intensity1", type=float, default=4.9e5,
                     help="laser 1 intensity (photons per response time)")
    sim.add_argument("--intensity2", type=float, default=4.9e5,
                     help="laser 2 intensity (photons per response time)")
    sim.add_argument("--power-dbm", type=float, default=None,
                     help="set both intensities from optical power (dBm) instead")
    sim.add_argument("--center-frequency", type=float, default=193.4e12,
                     help="optical frequency for --power-dbm conversion (Hz)")
    sim.add_argument("--duration", type=float, required=True, help="trace length (s)")
    sim.add_argument("--sample-rate", type=float, default=156.25e3, help="samples per second")
    sim.add_argument("--adc-bits", type=int, default=8, help="quantizer depth")
    sim.add_argument("--full-scale", type=float, default=None,
                     help="quantizer clip point (detector units; default 1.2x amplitude)")
    sim.add_argument("--response-time", type=float, default=625e-12,
                     help="detector response time (s)")
    sim.add_argument("--noise-variance", type=float, default=None,
                     help="override detector noise variance (0 disables noise)")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="output trace file")
    sim.set_defaults(handler=_cmd_simulate)

    ext = sub.add_parser("extract", help="turn a trace into a bitstream file")
    ext.add_argument("--in", dest="infile", required=True, help="trace file (binary or CSV)")
    ext.add_argument("--out", required=True, help="output bitstream file")
    ext.add_argument("--bits", type=int, default=8, help="bits per symbol k")
    ext.add_argument("--chunk", type=int, default=None,
                     help="detrend in blocks of this many samples (default: whole trace)")
    ext.add_argument("--delta-f", type=float, default=None,
                     help="known detuning (Hz); default: estimate from the data")
    ext.add_argument("--adc-bits", type=int, default=8, help="quantizer depth for CSV import")
    ext.set_defaults(handler=_cmd_extract)

    ana = sub.add_parser("analyze", help="run statistical tests and render reports")
    ana.add_argument("--in", dest="infile", required=True,
                     help="trace file, CSV, bitstream (with sidecar), or raw bytes")
    ana.add_argument("--tests", default="all",
                     help="comma list of %s, or 'all'" % ",".join(_TEST_NAMES))
    ana.add_argument("--max-lag", type=int, default=100, help="autocorrelation depth")
    ana.add_argument("--bits", type=int, default=8,
                     help="bits per symbol for trace extraction and raw input")
    ana.add_argument("--adc-bits", type=int, default=8, help="quantizer depth for CSV import")
    ana.add_argument("--out-dir", default=None,
                     help="where CSVs and figures go (default: next to the input)")
    ana.add_argument("--report", default=None,
                     help="report JSON path (default: <input>.report.json in --out-dir)")
    ana.add_argument("--pass-p", type=float, default=1e-2, help="pass threshold on p")
    ana.add_argument("--fail-p", type=float, default=1e-4, help="fail threshold on p")
    ana.set_defaults(handler=_cmd_analyze)

    selftest = sub.add_parser("selftest", help="run the acceptance checks")
    selftest.add_argument("--strict", action="store_true",
                          help="nonzero exit on any failing check, known divergences included")
    selftest.add_argument("--only", default=None,
                          help="comma list of check numbers, e.g. 01,09")
    selftest.set_defaults(handler=_cmd_selftest)
    return parser


def _cmd_simulate(args) -> int:
    if not args.duration > 0:
        raise _Usage("duration must be positive")
    if not args.sample_rate > 0:
        raise _Usage("sample rate must be positive")
    dt = 1.0 / args.sample_rate
    if args.duration < dt:
        raise _Usage("duration shorter than one sample interval")
    intensity1, intensity2 = args.intensity1, args.intensity2
    if args.power_dbm is not None:
        watts = 1e-3 * 10.0 ** (args.power_dbm / 10.0)
        flux = photon_flux(watts, args.center_frequency)
        intensity1 = intensity2 = flux * args.response_time
    pair = LaserPair(
        tau_c1=args.tau_c1,
        tau_c2=args.tau_c2,
        intensity1=intensity1,
        intensity2=intensity2,
        delta_omega=2.0 * math.pi * args.delta_f,
    )
    detector = DetectorConfig(
        adc_bits=args.adc_bits,
        full_scale=args.full_scale,
        response_time=args.response_time,
        noise_variance=args.noise_variance,
    )
    _echo_config(
        "simulate",
        tau_c1=args.tau_c1,
        tau_c2=args.tau_c2,
        delta_f=args.delta_f,
        intensity1=intensity1,
        intensity2=intensity2,
        duration=args.duration,
        sample_rate=args.sample_rate,
        adc_bits=args.adc_bits,
        full_scale=args.full_scale,
        response_time=args.response_time,
        noise_variance=args.noise_variance,
        seed=args.seed,
        out=str(args.out),
    )
    for line in check_regime(dt, args.response_time, args.tau_c1, args.tau_c2).lines():
        print("regime: " + line)
    rng = np.random.default_rng(args.seed)
    walk = simulate_phase_walk(pair, args.duration, dt, seed=rng)
    trace = simulate_iq_trace(walk, pair, detector, seed=rng)
    write_trace(args.out, trace)
    if trace.saturated:
        print("warning: amplitude exceeds the quantizer full scale; trace clips",
              file=sys.stderr)
    print(f"wrote {args.out}: {len(trace)} samples at {args.adc_bits} bits, "
          f"{trace.clipped} clipped")
    return 0


def _load_trace(path: Path, adc_bits: int) -> IQTrace:
    if path.suffix.lower() == ".csv":
        return read_trace_csv(path, adc_bits=adc_bits)
    return read_trace(path)


def _cmd_extract(args) -> int:
    if args.chunk is not None and args.chunk < 3:
        raise _Usage("chunk must be at least 3 samples")
    if not 1 <= args.bits <= 16:
        raise _Usage("bits must be in [1, 16]")
    trace = _load_trace(Path(args.infile), args.adc_bits)
    config = ExtractionConfig(
        bits_per_sample=args.bits,
        delta_omega=None if args.delta_f is None else 2.0 * math.pi * args.delta_f,
        chunk_len=args.chunk,
    )
    _echo_config(
        "extract",
        infile=str(args.infile),
        out=str(args.out),
        bits=args.bits,
        chunk=args.chunk,
        delta_f=args.delta_f,
        n_samples=len(trace),
    )
    stream = extract_bits(trace, config)
    if len(stream) == 0:
        print("error: extraction produced no symbols (trace shorter than 3 samples)",
              file=sys.stderr)
        return 2
    write_bitstream(args.out, stream, source=str(args.infile))
    print(f"wrote {args.out} (+ sidecar {sidecar_path(args.out).name}): "
          f"{len(stream)} symbols, {stream.bits_per_sample} bits each, "
          f"{stream.bit_rate:g} bit/s")
    return 0


def _sniff_kind(path: Path) -> str:
    if sidecar_path(path).exists():
        return "bitstream"
    if path.suffix.lower() == ".csv":
        return "csv"
    with open(path, "rb") as fh:
        if fh.read(4) == TRACE_MAGIC:
            return "trace"
    return "raw"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_analyze(args) -> int:
    from . import plots  # matplotlib import is slow; keep it off other paths

    wanted = _TEST_NAMES if args.tests == "all" else tuple(args.tests.split(","))
    unknown = set(wanted) - set(_TEST_NAMES)
    if unknown:
        raise _Usage(f"unknown tests: {', '.join(sorted(unknown))}")
    if args.max_lag < 1:
        raise _Usage("max-lag must be >= 1")
    thresholds = Thresholds(pass_p=args.pass_p, fail_p=args.fail_p)

    infile = Path(args.infile)
    kind = _sniff_kind(infile)
    out_dir = Path(args.out_dir) if args.out_dir else infile.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = out_dir / infile.stem

    trace = None
    detrended = None
    phases = None  # continuous wrapped increments, trace inputs only
    if kind in ("trace", "csv"):
        trace = _load_trace(infile, args.adc_bits)
        if len(trace) < 3:
            print("error: trace too short to extract from", file=sys.stderr)
            return 2
        stream = extract_bits(trace, ExtractionConfig(bits_per_sample=args.bits))
        detrended, _ = detrend(unwrap_phase(instantaneous_phase(trace)))
        phases = phase_increments(detrended).values[1:]  # same drop as extract_bits
    elif kind == "bitstream":
        stream = read_bitstream(infile)
    else:
        if args.bits != 8:
            raise _Usage("raw byte input supports only --bits 8")
        payload = np.frombuffer(infile.read_bytes(), dtype=np.uint8)
        if payload.size == 0:
            print("error: empty input", file=sys.stderr)
            return 2
        # sample interval unknown for raw bytes; rate fields are not meaningful
        stream = BitStream(symbols=payload.copy(), bits_per_sample=8, source_dt=1.0)

    _echo_config(
        "analyze",
        infile=str(infile),
        kind=kind,
        tests=",".join(wanted),
        max_lag=args.max_lag,
        bits=stream.bits_per_sample,
        out_dir=str(out_dir),
        pass_p=args.pass_p,
        fail_p=args.fail_p,
        n_symbols=len(stream),
    )

    n_bins = 1 << stream.bits_per_sample
    delta = 2.0 * math.pi / n_bins
    centers = -math.pi + (np.arange(n_bins) + 0.5) * delta
    # for symbol-only inputs, bin centers stand in for the phases
    analysis_values = phases if phases is not None else centers[stream.symbols]

    reports: list[StatReport] = []
    notes: list[str] = []

    def attempt(name: str, fn, *fn_args, **fn_kwargs) -> None:
        # too-short or degenerate input is a per-test note, not a crash
        try:
            reports.append(fn(*fn_args, **fn_kwargs))
        except ValueError as exc:
            notes.append(f"{name}: skipped ({exc})")

    if "monobit" in wanted or "runs" in wanted:
        bits = symbols_to_bits(stream.symbols, stream.bits_per_sample)
        if "monobit" in wanted:
            attempt("monobit", monobit_test, bits, thresholds)
        if "runs" in wanted:
            attempt("runs", runs_test, bits, thresholds)
    if "chisq" in wanted:
        attempt("chisq", chi_square_symbols, stream, thresholds=thresholds)
    if "ks" in wanted:
        if phases is None:
            notes.append("ks: skipped (needs a trace input with continuous phases)")
        else:
            attempt("ks", ks_uniform_test, phases, thresholds)

    coeffs = None
    if "autocorr" in wanted:
        max_lag = min(args.max_lag, analysis_values.size - 2)
        if max_lag < 1:
            notes.append("autocorr: skipped (series too short)")
        else:
            if max_lag < args.max_lag:
                notes.append(f"autocorr: max lag reduced to {max_lag}")
            try:
                coeffs = autocorrelation(analysis_values, max_lag)
            except DegenerateVarianceError as exc:
                notes.append(f"autocorr: skipped ({exc})")

    fit = None
    try:
        fit = fit_vonmises(analysis_values)
    except (InsufficientDataError, UnboundedKappaError) as exc:
        notes.append(f"fit: skipped ({exc})")

    counts = np.bincount(stream.symbols, minlength=n_bins)
    _write_csv(
        Path(f"{stem}.histogram.csv"),
        ["symbol", "count", "expected"],
        ((int(i), int(c), len(stream) / n_bins) for i, c in enumerate(counts)),
    )
    outputs = {"histogram_csv": f"{stem}.histogram.csv"}
    outputs["histogram_png"] = str(plots.save_histogram_figure(
        f"{stem}.histogram.png", stream, fit.model if fit else None))
    if coeffs is not None:
        _write_csv(
            Path(f"{stem}.autocorrelation.csv"),
            ["lag", "coefficient"],
            ((int(d), float(k)) for d, k in enumerate(coeffs)),
        )
        outputs["autocorrelation_csv"] = f"{stem}.autocorrelation.csv"
        outputs["autocorrelation_png"] = str(plots.save_autocorrelation_figure(
            f"{stem}.autocorrelation.png",
            np.arange(1, coeffs.size),
            coeffs[1:],
            analysis_values.size,
        ))
    if trace is not None:
        outputs["iq_png"] = str(plots.save_iq_figure(f"{stem}.iq.png", trace))
        outputs["walk_png"] = str(plots.save_walk_figure(f"{stem}.walk.png", detrended))

    report_path = Path(args.report) if args.report else Path(f"{stem}.report.json")
    doc = reports_to_json(
        reports,
        input=str(infile),
        kind=kind,
        n_symbols=len(stream),
        bits_per_sample=stream.bits_per_sample,
        fit=None if fit is None else {
            "kappa": fit.model.kappa,
            "variance_ratio": fit.variance_ratio,
            "mean_resultant_length": fit.mean_resultant_length,
            "mean_direction": fit.mean_direction,
        },
        notes=notes,
        outputs=outputs,
    )
    report_path.write_text(doc + "\n", encoding="utf-8")
    outputs["report"] = str(report_path)

    for line in format_report_lines(reports):
        print(line)
    for note in notes:
        print(note)
    if fit is not None:
        print(f"fit: kappa={fit.model.kappa:.6g} "
              f"variance_ratio={fit.variance_ratio:.6g}")
    for name, target in sorted(outputs.items()):
        print(f"wrote {name}: {target}")

    bad = [r for r in reports if r.verdict in (VERDICT_FAIL, VERDICT_PREREQ)]
    if bad:
        print(f"{len(bad)} test(s) failed", file=sys.stderr)
        return 3
    return 0


def _cmd_selftest(args) -> int:
    if args.only:
        idents = [s.strip() for s in args.only.split(",")]
        try:
            results = [acceptance.run_check(ident) for ident in idents]
        except ValueError as exc:
            raise _Usage(str(exc)) from None
        for r in results:
            print(r.line())
    else:
        results = acceptance.run_all(echo=print)
    failures = [r for r in results if not r.passed]
    surprises = [r for r in results if r.surprising]
    if args.strict:
        return 3 if failures else 0
    for r in surprises:
        word = "passed" if r.passed else "failed"
        print(f"check {r.ident} unexpectedly {word}", file=sys.stderr)
    return 3 if surprises else 0


class _Usage(Exception):
    """Raised by handlers for post-parse usage errors (exit code 1)."""


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _Usage as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except (TraceFormatError, TimebaseError, OSError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
