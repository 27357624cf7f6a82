"""Throughput traces: parsing, synthesis, band classification and replay.

A trace is a piecewise-constant (zero-order hold) bandwidth signal.  Sample
``i`` holds its bandwidth over ``[times[i], times[i+1])``; the final sample
marks the end of the trace, so ``duration == times[-1]`` always holds.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_positive, frozen

CSV_HEADER = "time_s,bandwidth_mbps"


class TraceError(ValueError):
    """Base class for malformed or unusable traces."""


class EmptyTraceError(TraceError):
    pass


class MalformedRowError(TraceError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NegativeBandwidthError(MalformedRowError):
    pass


class NonMonotoneTimeError(MalformedRowError):
    pass


class TraceExhaustedError(TraceError):
    """Raised when a transfer does not finish before the trace ends."""

    def __init__(self, bits_remaining, end_time):
        super().__init__(
            f"trace exhausted at t={end_time:g} s with {bits_remaining:.6g} Mbit "
            "still to deliver"
        )
        self.bits_remaining = bits_remaining
        self.end_time = end_time


class BandwidthBand(enum.Enum):
    """Bandwidth bands used for the network-condition experiments (Mbps)."""

    Low = (0.5, 1.5)
    Medium = (1.5, 3.0)
    High = (3.0, 5.0)

    @property
    def min_mbps(self):
        return self.value[0]

    @property
    def max_mbps(self):
        return self.value[1]

    def contains(self, mbps):
        # half-open, so a mean of exactly 1.5 lands in Medium
        return self.min_mbps <= mbps < self.max_mbps

    @classmethod
    def from_name(cls, name):
        for band in cls:
            if band.name.lower() == str(name).lower():
                return band
        raise ValueError(
            f"unknown band {name!r}; expected one of {[b.name for b in cls]}"
        )


UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True, eq=False)
class ThroughputTrace:
    """Timestamped bandwidth samples (seconds, Mbps), immutable.

    If ``duration`` exceeds the last sample time, a terminal sample repeating
    the last bandwidth is appended at ``duration``.
    """

    times: np.ndarray
    bandwidths: np.ndarray

    def __init__(self, times, bandwidths, duration=None):
        t = np.asarray(times, dtype=np.float64).ravel()
        bw = np.asarray(bandwidths, dtype=np.float64).ravel()
        if t.size == 0:
            raise EmptyTraceError("trace has no samples")
        if t.shape != bw.shape:
            raise TraceError(
                f"times and bandwidths differ in length ({t.size} vs {bw.size})"
            )
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(bw))):
            raise TraceError("trace contains non-finite values")
        if t[0] != 0.0:
            raise TraceError(f"trace must start at t=0, starts at {t[0]}")
        if np.any(np.diff(t) <= 0):
            raise TraceError("sample times must be strictly increasing")
        if np.any(bw < 0):
            raise TraceError("bandwidth must be non-negative")
        if duration is not None:
            duration = float(duration)
            if duration < t[-1]:
                raise TraceError(
                    f"duration {duration} is shorter than the last sample time {t[-1]}"
                )
            if duration > t[-1]:
                t = np.append(t, duration)
                bw = np.append(bw, bw[-1])
        object.__setattr__(self, "times", frozen(t))
        object.__setattr__(self, "bandwidths", frozen(bw))
        # cumulative Mbit delivered at each sample time
        cum = np.concatenate([[0.0], np.cumsum(np.diff(t) * bw[:-1])])
        object.__setattr__(self, "_cumulative", frozen(cum))

    @property
    def duration(self):
        return float(self.times[-1])

    def __len__(self):
        return int(self.times.size)

    def __eq__(self, other):
        if not isinstance(other, ThroughputTrace):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.bandwidths, other.bandwidths
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"ThroughputTrace(n_samples={len(self)}, duration={self.duration:g}s, "
            f"mean={mean_bandwidth(self):.3f}Mbps)"
        )

    def bandwidth_at(self, t):
        """Bandwidth in effect at time ``t`` under zero-order hold."""
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.bandwidths[max(idx, 0)])

    def delivered(self, t0, t1):
        """Mbit delivered over ``[t0, t1]`` (clipped to the trace span)."""
        return self._integral_to(t1) - self._integral_to(t0)

    def _integral_to(self, t):
        t = min(max(float(t), 0.0), self.duration)
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        idx = min(idx, len(self) - 1)
        return float(self._cumulative[idx] + (t - self.times[idx]) * self.bandwidths[idx])

    def scaled(self, factor):
        return ThroughputTrace(self.times, self.bandwidths * float(factor))

    def to_dict(self):
        return {
            "duration": self.duration,
            "samples": [[float(t), float(b)] for t, b in zip(self.times, self.bandwidths)],
        }

    @classmethod
    def from_dict(cls, data):
        samples = data["samples"]
        return cls(
            [s[0] for s in samples],
            [s[1] for s in samples],
            duration=data.get("duration"),
        )


def parse_trace(text):
    """Parse a ``time_s,bandwidth_mbps`` CSV document into a trace."""
    if isinstance(text, io.IOBase):
        text = text.read()
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise EmptyTraceError("empty trace file")
    if lines[0].strip().lstrip("﻿") != CSV_HEADER:
        raise MalformedRowError(1, f"expected header {CSV_HEADER!r}, got {lines[0]!r}")
    times, bws = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise MalformedRowError(lineno, "blank line inside trace")
        fields = line.split(",")
        if len(fields) != 2:
            raise MalformedRowError(lineno, f"expected 2 fields, got {len(fields)}")
        try:
            t, bw = float(fields[0]), float(fields[1])
        except ValueError:
            raise MalformedRowError(lineno, f"non-numeric value in {line!r}") from None
        if not (math.isfinite(t) and math.isfinite(bw)):
            raise MalformedRowError(lineno, "non-finite value")
        if bw < 0:
            raise NegativeBandwidthError(lineno, f"negative bandwidth {bw}")
        if not times and t != 0.0:
            raise MalformedRowError(lineno, f"first sample must be at t=0, got {t}")
        if times and t <= times[-1]:
            raise NonMonotoneTimeError(
                lineno, f"time {t} does not increase (previous {times[-1]})"
            )
        times.append(t)
        bws.append(bw)
    if not times:
        raise EmptyTraceError("trace file has a header but no samples")
    return ThroughputTrace(times, bws)


def serialize_trace(trace):
    """Inverse of :func:`parse_trace` (``repr`` floats, so the round trip is exact)."""
    rows = [CSV_HEADER]
    rows.extend(f"{float(t)!r},{float(b)!r}" for t, b in zip(trace.times, trace.bandwidths))
    return "\n".join(rows) + "\n"


def load_trace(path):
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())


def synth_trace(band, duration=300.0, seed=0, step=1.0):
    """Piecewise-constant trace with levels drawn uniformly from ``band``.

    Deterministic for a given ``(band, duration, seed, step)``.
    """
    if isinstance(band, str):
        band = BandwidthBand.from_name(band)
    duration = check_positive(duration, "duration")
    step = check_positive(step, "step")
    seed = check_int(seed, "seed")
    n = max(1, math.ceil(duration / step - 1e-12))
    rng = np.random.default_rng(seed)
    levels = rng.uniform(band.min_mbps, band.max_mbps, size=n)
    times = np.arange(n) * step
    return ThroughputTrace(times, levels, duration=duration)


def mean_bandwidth(trace):
    """Time-weighted mean bandwidth in Mbps."""
    if trace.duration == 0:
        return float(trace.bandwidths[0])
    return float(trace._cumulative[-1] / trace.duration)


def classify_band(trace):
    """Band containing the time-weighted mean, or ``"Unclassified"``."""
    if trace is None or len(trace) == 0:
        raise EmptyTraceError("cannot classify an empty trace")
    mean = mean_bandwidth(trace)
    for band in BandwidthBand:
        if band.contains(mean):
            return band
    return UNCLASSIFIED


def transmission_time(trace, start, bits):
    """Seconds needed to deliver ``bits`` Mbit starting at ``start``.

    Solved exactly on the piecewise-linear cumulative-delivery curve.
    Raises :class:`TraceExhaustedError` if the trace ends first.
    """
    bits = float(bits)
    start = float(start)
    if not math.isfinite(bits) or bits < 0:
        raise ValueError(f"bits must be finite and >= 0, got {bits}")
    if not (0.0 <= start <= trace.duration):
        raise ValueError(f"start {start} outside trace span [0, {trace.duration}]")
    if bits == 0.0:
        return 0.0
    target = trace._integral_to(start) + bits
    cum = trace._cumulative
    if target > cum[-1]:
        raise TraceExhaustedError(target - cum[-1], trace.duration)
    # first sample time at which cumulative delivery reaches the target
    j = int(np.searchsorted(cum, target, side="left"))
    i = j - 1
    # segment i carries the crossing; its rate is positive since cum rises there
    t_end = trace.times[i] + (target - cum[i]) / trace.bandwidths[i]
    t_end = min(t_end, trace.times[j])
    return max(float(t_end) - start, 0.0)
