"""Trace and bitstream file formats.

Binary trace layout (little endian):

    offset  size  field
    0       4     magic "PWIQ"
    4       1     format version (1)
    5       1     adc_bits (1..16)
    6       8     sample interval, integer femtoseconds
    14      8     sample count N
    22      -     N interleaved code pairs I0, Q0, I1, Q1, ...
                  signed, ceil(adc_bits / 8) bytes per code

Only codes, dt and adc_bits survive a round trip; full_scale and other
detector settings are scale factors the phase extraction never needs.
Bitstreams are raw packed bits (MSB first, k = 8 means one symbol per
byte) with a JSON sidecar at <path>.meta.json carrying the bookkeeping.
All writers go through a temp file and os.replace, so readers never see
a partial file.
"""

from __future__ import annotations

import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pipeline import BitStream
from .simulate import IQTrace, quantize_midrise
from .stats import symbols_to_bits

__all__ = [
    "TRACE_MAGIC",
    "TRACE_VERSION",
    "TraceFormatError",
    "TimebaseError",
    "TraceFileHeader",
    "write_trace",
    "read_trace",
    "read_trace_csv",
    "write_bitstream",
    "read_bitstream",
    "sidecar_path",
]

TRACE_MAGIC = b"PWIQ"
TRACE_VERSION = 1
_HEADER = struct.Struct("<4sBBQQ")  # magic, version, adc_bits, dt_fs, count
HEADER_SIZE = _HEADER.size  # 22

_FS_PER_SECOND = 1e15


class TraceFormatError(ValueError):
    """Malformed trace file."""


class TimebaseError(ValueError):
    """CSV timebase missing, non-positive, or jittering beyond 1 ppm."""


@dataclass(frozen=True)
class TraceFileHeader:
    version: int
    adc_bits: int
    dt_femtoseconds: int
    sample_count: int

    def pack(self) -> bytes:
        return _HEADER.pack(
            TRACE_MAGIC,
            self.version,
            self.adc_bits,
            self.dt_femtoseconds,
            self.sample_count,
        )

    @classmethod
    def unpack(cls, raw: bytes) -> "TraceFileHeader":
        if len(raw) < HEADER_SIZE:
            raise TraceFormatError(
                f"file too short for a header: {len(raw)} bytes, need {HEADER_SIZE}"
            )
        magic, version, adc_bits, dt_fs, count = _HEADER.unpack(raw[:HEADER_SIZE])
        if magic != TRACE_MAGIC:
            raise TraceFormatError(f"bad magic {magic!r}, expected {TRACE_MAGIC!r}")
        if version != TRACE_VERSION:
            raise TraceFormatError(f"unsupported format version {version}")
        if not 1 <= adc_bits <= 16:
            raise TraceFormatError(f"adc_bits {adc_bits} outside [1, 16]")
        if dt_fs == 0:
            raise TraceFormatError("zero sample interval")
        return cls(version, adc_bits, dt_fs, count)

    @property
    def bytes_per_code(self) -> int:
        return (self.adc_bits + 7) // 8

    @property
    def dt_seconds(self) -> float:
        return self.dt_femtoseconds / _FS_PER_SECOND


def _atomic_write(path: str | Path, payload: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dt_to_femtoseconds(dt: float) -> int:
    fs = round(dt * _FS_PER_SECOND)
    if fs < 1:
        raise ValueError(f"dt {dt!r} is below the 1 fs format resolution")
    return int(fs)


def write_trace(path: str | Path, trace: IQTrace) -> None:
    """Serialize a trace; codes, dt and adc_bits are preserved exactly."""
    header = TraceFileHeader(
        version=TRACE_VERSION,
        adc_bits=trace.adc_bits,
        dt_femtoseconds=_dt_to_femtoseconds(trace.dt),
        sample_count=len(trace),
    )
    width = header.bytes_per_code
    dtype = np.dtype("<i1") if width == 1 else np.dtype("<i2")
    interleaved = np.empty(2 * len(trace), dtype=dtype)
    interleaved[0::2] = trace.i_codes.astype(dtype)
    interleaved[1::2] = trace.q_codes.astype(dtype)
    _atomic_write(path, header.pack() + interleaved.tobytes())


def read_trace(path: str | Path) -> IQTrace:
    """Read a binary trace.

    The returned trace carries code-unit scaling (full_scale set to
    2**(adc_bits - 1), one unit per quantizer step); the on-disk format
    does not store detector units and the extraction does not need them.
    """
    raw = Path(path).read_bytes()
    header = TraceFileHeader.unpack(raw)
    width = header.bytes_per_code
    expected = HEADER_SIZE + header.sample_count * 2 * width
    if len(raw) < expected:
        raise TraceFormatError(
            f"trace truncated at byte {len(raw)}: header declares "
            f"{header.sample_count} sample pairs ({expected} bytes)"
        )
    dtype = np.dtype("<i1") if width == 1 else np.dtype("<i2")
    body = np.frombuffer(raw, dtype=dtype, count=2 * header.sample_count, offset=HEADER_SIZE)
    half = 1 << (header.adc_bits - 1)
    codes_i = body[0::2]
    codes_q = body[1::2]
    if codes_i.size and (
        max(codes_i.max(), codes_q.max()) > half - 1
        or min(codes_i.min(), codes_q.min()) < -half
    ):
        raise TraceFormatError(f"code outside the {header.adc_bits}-bit range")
    return IQTrace(
        i_codes=codes_i.astype(np.int16),
        q_codes=codes_q.astype(np.int16),
        dt=header.dt_seconds,
        adc_bits=header.adc_bits,
        full_scale=float(half),
    )


def read_trace_csv(
    path: str | Path,
    adc_bits: int = 8,
    full_scale: float | None = None,
) -> IQTrace:
    """Import a "t,i,q" CSV (header line required, seconds and volts).

    The timebase must be uniform within 1 ppm; the first offending line
    is named otherwise.  Values are quantized to adc_bits with the given
    full scale (default: just wide enough that nothing clips).
    """
    t: list[float] = []
    i: list[float] = []
    q: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise TraceFormatError("empty CSV")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise TraceFormatError(f"line {lineno}: expected 3 columns, got {len(parts)}")
            try:
                t.append(float(parts[0]))
                i.append(float(parts[1]))
                q.append(float(parts[2]))
            except ValueError as exc:
                raise TraceFormatError(f"line {lineno}: {exc}") from None
    if len(t) < 2:
        raise TraceFormatError("CSV needs at least 2 samples to define a timebase")
    t_arr = np.asarray(t)
    dt = float(t_arr[1] - t_arr[0])
    if not dt > 0:
        raise TimebaseError("non-increasing timebase between lines 2 and 3")
    steps = np.diff(t_arr)
    off = np.flatnonzero(np.abs(steps - dt) > 1e-6 * dt)
    if off.size:
        # steps[j] spans data rows j+1 -> j+2, i.e. file lines j+2 -> j+3
        raise TimebaseError(
            f"timebase jitter beyond 1 ppm at line {int(off[0]) + 3}"
        )
    i_arr = np.asarray(i)
    q_arr = np.asarray(q)
    if full_scale is None:
        peak = float(max(np.max(np.abs(i_arr)), np.max(np.abs(q_arr))))
        levels = 1 << adc_bits
        full_scale = peak * levels / (levels - 1) if peak > 0 else 1.0
    return IQTrace(
        i_codes=quantize_midrise(i_arr, full_scale, adc_bits),
        q_codes=quantize_midrise(q_arr, full_scale, adc_bits),
        dt=dt,
        adc_bits=adc_bits,
        full_scale=full_scale,
        t0=float(t_arr[0]),
    )


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")


def write_bitstream(path: str | Path, stream: BitStream, source: str = "") -> None:
    """Write packed bits plus the JSON sidecar.

    Symbols are packed MSB first; for k = 8 the payload is exactly one
    byte per symbol.  A trailing partial byte is zero padded (the sidecar
    symbol_count says how many symbols are real).
    """
    if len(stream) == 0:
        raise ValueError("refusing to write an empty bitstream")
    bits = symbols_to_bits(stream.symbols, stream.bits_per_sample)
    payload = np.packbits(bits).tobytes()
    dt_fs = _dt_to_femtoseconds(stream.source_dt)
    # integer-femtosecond arithmetic keeps round rates exact
    meta = {
        "format": "phasewalk-bitstream",
        "version": 1,
        "bits_per_sample": stream.bits_per_sample,
        "dt_femtoseconds": dt_fs,
        "sample_interval_seconds": dt_fs / _FS_PER_SECOND,
        "bit_rate": stream.bits_per_sample * (_FS_PER_SECOND / dt_fs),
        "symbol_count": int(len(stream)),
        "chunk_len": stream.chunk_len,
        "source": source,
    }
    _atomic_write(path, payload)
    _atomic_write(sidecar_path(path), (json.dumps(meta, indent=2) + "\n").encode())


def read_bitstream(path: str | Path) -> BitStream:
    """Read packed bits using the sidecar written next to them."""
    meta_file = sidecar_path(path)
    if not meta_file.exists():
        raise TraceFormatError(f"missing sidecar {meta_file}")
    meta = json.loads(meta_file.read_text())
    if meta.get("format") != "phasewalk-bitstream":
        raise TraceFormatError(f"{meta_file} is not a bitstream sidecar")
    k = int(meta["bits_per_sample"])
    count = int(meta["symbol_count"])
    payload = Path(path).read_bytes()
    need = (count * k + 7) // 8
    if len(payload) < need:
        raise TraceFormatError(
            f"bitstream truncated at byte {len(payload)}: sidecar declares "
            f"{count} symbols ({need} bytes)"
        )
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8, count=need))
    bits = bits[: count * k].reshape(count, k)
    weights = (1 << np.arange(k - 1, -1, -1)).astype(np.uint32)
    symbols = bits.astype(np.uint32) @ weights
    return BitStream(
        symbols=symbols,
        bits_per_sample=k,
        source_dt=int(meta["dt_femtoseconds"]) / _FS_PER_SECOND,
        chunk_len=meta.get("chunk_len"),
    )
