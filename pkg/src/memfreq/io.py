"""Trace CSV, report JSON and gnuplot-style TSV files.

Trace files look like::

    #model=relax
    #spec.kind=staircase
    t,v,i,step,sub
    2.0000000000000000e-02,1.0000000000000001e-01,1.9395769230769231e-07,0,1

Floats are written with 17 significant digits so every value survives a
round trip bit for bit. All quantities are SI (seconds, volts, amperes).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from .analysis import (DCFeatures, FrequencySlice, HysteresisReport, SliceHysteresis,
                       SweepPoint, SweepReport)
from .simulate import Trace
from .waveform import spec_from_meta

FORMAT_VERSION = "1"
HEADER_FULL = ["t", "v", "i", "step", "sub"]
HEADER_SHORT = ["t", "v", "i"]


class TraceFormatError(ValueError):
    """Malformed trace file; ``line`` is the 1-based offending line (0 if none)."""

    def __init__(self, message: str, line: int = 0, source: str = ""):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if source else f"line {line}: "
        super().__init__(where + message)


class ReportFormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def format_trace(trace: Trace) -> str:
    meta = {}
    if trace.spec is not None:
        meta.update(trace.spec.to_meta())
    meta.update({k: v for k, v in trace.meta.items() if not k.startswith("spec.")})
    lines = []
    for key, value in meta.items():
        if "\n" in key or "\n" in str(value) or "=" in key:
            raise ValueError(f"metadata entry {key!r} cannot be serialised")
        lines.append(f"#{key}={value}")
    if trace.indexed:
        lines.append(",".join(HEADER_FULL))
        for row in zip(trace.t, trace.v, trace.i, trace.step, trace.sub):
            lines.append(f"{_fmt(row[0])},{_fmt(row[1])},{_fmt(row[2])},{row[3]},{row[4]}")
    else:
        lines.append(",".join(HEADER_SHORT))
        for row in zip(trace.t, trace.v, trace.i):
            lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def write_trace(trace: Trace, destination) -> None:
    text = format_trace(trace)
    with open(destination, "w", newline="\n") as fh:
        fh.write(text)


def infer_indices(v: np.ndarray):
    """Level and dwell indices from runs of equal voltage, if all runs share a length."""
    if len(v) == 0:
        return None, None
    edges = np.flatnonzero(np.diff(v) != 0) + 1
    bounds = np.concatenate(([0], edges, [len(v)]))
    runs = np.diff(bounds)
    if not np.all(runs == runs[0]):
        return None, None
    x = int(runs[0])
    n = len(v)
    return np.arange(n) // x, np.arange(n) % x + 1


def parse_trace(text: str, source: str = "") -> Trace:
    meta: dict[str, str] = {}
    spec_line = 0
    header = None
    rows = []
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("#"):
            if header is not None:
                raise TraceFormatError("metadata line after the header", lineno, source)
            key, sep, value = raw[1:].rstrip("\r").partition("=")
            if not sep or not key.strip():
                raise TraceFormatError("metadata must be '#key=value'", lineno, source)
            meta[key] = value
            if key == "spec.kind":
                spec_line = lineno
            continue
        line = raw.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            if cells not in (HEADER_FULL, HEADER_SHORT):
                raise TraceFormatError(
                    f"expected header 't,v,i,step,sub' or 't,v,i', got {line!r}", lineno, source)
            header = cells
            continue
        if len(cells) != len(header):
            raise TraceFormatError(
                f"expected {len(header)} columns, got {len(cells)}", lineno, source)
        try:
            t, v, i = (float(c) for c in cells[:3])
        except ValueError:
            raise TraceFormatError(f"non-numeric value in {line!r}", lineno, source) from None
        if not all(math.isfinite(x) for x in (t, v, i)):
            raise TraceFormatError("non-finite value", lineno, source)
        if rows and t <= rows[-1][0][0]:
            raise TraceFormatError(
                f"time {t!r} does not increase (previous {rows[-1][0][0]!r})", lineno, source)
        idx = None
        if len(header) == 5:
            try:
                idx = (int(cells[3]), int(cells[4]))
            except ValueError:
                raise TraceFormatError("step/sub must be integers", lineno, source) from None
            if idx[0] < 0 or idx[1] < 1:
                raise TraceFormatError("step must be >= 0 and sub >= 1", lineno, source)
        rows.append(((t, v, i), idx))
    if header is None:
        raise TraceFormatError("missing header line", lineno, source)
    t = np.array([r[0][0] for r in rows], dtype=np.float64)
    v = np.array([r[0][1] for r in rows], dtype=np.float64)
    i = np.array([r[0][2] for r in rows], dtype=np.float64)
    if len(header) == 5:
        step = np.array([r[1][0] for r in rows], dtype=np.int64)
        sub = np.array([r[1][1] for r in rows], dtype=np.int64)
    else:
        step, sub = infer_indices(v)
    try:
        spec = spec_from_meta(meta)
    except (KeyError, ValueError) as exc:
        raise TraceFormatError(f"bad protocol metadata: {exc}", spec_line, source) from None
    user_meta = {k: val for k, val in meta.items() if not k.startswith("spec.")}
    return Trace(t, v, i, step, sub, spec=spec, meta=user_meta)


def read_trace(source) -> Trace:
    """Load and validate a trace file.

    Raises
    ------
    TraceFormatError
        With the offending line number for any malformed content.
    """
    with open(source, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[:exc.start].count(b"\n") + 1
        raise TraceFormatError(f"not UTF-8 text ({exc.reason})", line, str(source)) from None
    return parse_trace(text, str(source))


# reports

def _clean(obj):
    if is_dataclass(obj):
        return {k: _clean(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


_KINDS = {HysteresisReport: "hysteresis", SweepReport: "sweep", DCFeatures: "dc"}


def report_to_dict(report) -> dict:
    kind = _KINDS.get(type(report))
    if kind is None:
        raise TypeError(f"cannot serialise {type(report).__name__}")
    return {"format_version": FORMAT_VERSION, "kind": kind, "report": _clean(report)}


def format_report(report) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report, destination) -> None:
    with open(destination, "w", newline="\n") as fh:
        fh.write(format_report(report))


def report_from_dict(data: dict):
    if not isinstance(data, dict):
        raise ReportFormatError("report must be a JSON object")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ReportFormatError(f"unsupported report format_version {version!r}")
    body = data.get("report")
    try:
        kind = data["kind"]
        if kind == "hysteresis":
            body = dict(body)
            body["slices"] = [SliceHysteresis(**s) for s in body["slices"]]
            return HysteresisReport(**body)
        if kind == "sweep":
            body = dict(body)
            body["points"] = [SweepPoint(**p) for p in body["points"]]
            return SweepReport(**body)
        if kind == "dc":
            return DCFeatures(**body)
    except (KeyError, TypeError) as exc:
        raise ReportFormatError(f"malformed report body: {exc}") from None
    raise ReportFormatError(f"unknown report kind {kind!r}")


def read_report(source):
    with open(source) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ReportFormatError(f"{source}: {exc}") from None
    return report_from_dict(data)


# plot data

def format_plot_data(data) -> str:
    """TSV for gnuplot: slices become index blocks separated by two blank lines."""
    if isinstance(data, SweepReport):
        lines = ["# omega_hz\tH"]
        for p in sorted(data.points, key=lambda p: p.omega):
            lines.append(f"{_fmt(p.omega)}\t{_fmt(p.H)}")
        return "\n".join(lines) + "\n"
    blocks = []
    for s in data:
        if isinstance(s, FrequencySlice):
            head = [f"# x={s.substep_index} omega_hz={_fmt(s.omega)}", "# v\ti"]
            rows = [f"{_fmt(a)}\t{_fmt(b)}" for a, b in s.points]
        else:
            # (t, i) visit from analysis.it_slice
            head = ["# t\ti"]
            rows = [f"{_fmt(a)}\t{_fmt(b)}" for a, b in np.asarray(s)]
        blocks.append("\n".join(head + rows))
    return "\n\n\n".join(blocks) + "\n"


def write_plot_data(data, destination) -> None:
    with open(destination, "w", newline="\n") as fh:
        fh.write(format_plot_data(data))


def count_blocks(text: str) -> int:
    return len([b for b in text.split("\n\n\n") if b.strip()])


def default_sibling(path, suffix: str) -> Path:
    return Path(path).with_suffix(suffix)

