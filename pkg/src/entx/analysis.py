"""Five-metric randomness battery over byte streams.

The metrics and their conventions follow the classic ``ent`` program
(John Walker's randomness tester), at byte granularity only:

* Shannon entropy in bits per byte over the 256-value histogram.
* Chi-square statistic against a flat histogram (expected count n/256
  in each of the 256 bins). The deviation accounting below measures
  distance from 256, the battery's conventional ideal for this column.
* Arithmetic mean of the byte values (ideal 127.5).
* Monte Carlo estimate of pi: successive non-overlapping 6-byte groups
  form an (x, y) point from two 24-bit big-endian coordinates scaled
  to [0, 1]; a point counts as inside when x^2 + y^2 <= 1 (boundary
  included); the estimate is 4 * inside / points. A trailing partial
  group is discarded.
* Serial correlation coefficient of consecutive byte values, circular
  (the last byte pairs with the first). Undefined for constant input,
  reported as None.

Sums feeding the mean and the serial correlation are carried in exact
integer arithmetic before the final division.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

IDEAL_ENTROPY = 8.0
IDEAL_CHI_SQUARE = 256.0
IDEAL_MEAN = 127.5
IDEAL_PI = math.pi
IDEAL_SERIAL = 0.0

_SCALE_24BIT = float((1 << 24) - 1)


def _as_bytes_array(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        arr = np.ascontiguousarray(data, dtype=np.uint8).reshape(-1)
    else:
        arr = np.frombuffer(bytes(data), dtype=np.uint8)
    return arr


def _histogram(arr: np.ndarray) -> np.ndarray:
    return np.bincount(arr, minlength=256)


def shannon_entropy(data) -> float:
    """Entropy of the byte histogram, in bits per byte (0 to 8)."""
    arr = _as_bytes_array(data)
    if arr.size == 0:
        raise ValueError("cannot analyze empty input")
    p = _histogram(arr) / arr.size
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def chi_square(data) -> float:
    """Chi-square of the byte histogram against the flat distribution."""
    arr = _as_bytes_array(data)
    if arr.size == 0:
        raise ValueError("cannot analyze empty input")
    expected = arr.size / 256.0
    counts = _histogram(arr)
    return float(((counts - expected) ** 2 / expected).sum())


def arithmetic_mean(data) -> float:
    arr = _as_bytes_array(data)
    if arr.size == 0:
        raise ValueError("cannot analyze empty input")
    return int(arr.astype(np.int64).sum()) / arr.size


def monte_carlo_pi(data) -> float:
    """Estimate pi from non-overlapping 6-byte (x, y) points."""
    arr = _as_bytes_array(data)
    points = arr.size // 6
    if points == 0:
        raise ValueError("need at least 6 bytes for a Monte Carlo point")
    g = arr[: points * 6].reshape(points, 6).astype(np.float64)
    x = (g[:, 0] * 65536.0 + g[:, 1] * 256.0 + g[:, 2]) / _SCALE_24BIT
    y = (g[:, 3] * 65536.0 + g[:, 4] * 256.0 + g[:, 5]) / _SCALE_24BIT
    inside = int((x * x + y * y <= 1.0).sum())
    return 4.0 * inside / points


def serial_correlation(data):
    """Circular lag-1 correlation of byte values; None when undefined."""
    arr = _as_bytes_array(data)
    if arr.size < 2:
        raise ValueError("serial correlation needs at least 2 bytes")
    v = arr.astype(np.int64)
    n = v.size
    total = int(v.sum())
    squares = int(np.dot(v, v))
    cross = int(np.dot(v[:-1], v[1:])) + int(v[-1]) * int(v[0])
    denominator = n * squares - total * total
    if denominator == 0:
        return None
    return (n * cross - total * total) / denominator


@dataclass
class RandomnessReport:
    """The battery's five statistics for one byte stream."""

    entropy: float
    chi_square: float
    mean: float
    monte_carlo_pi: float | None
    serial_correlation: float | None
    byte_count: int

    def to_dict(self) -> dict:
        return {
            "entropy": self.entropy,
            "chi_square": self.chi_square,
            "arithmetic_mean": self.mean,
            "monte_carlo_pi": self.monte_carlo_pi,
            "serial_correlation": self.serial_correlation,
            "byte_count": self.byte_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def analyze(data) -> RandomnessReport:
    """Compute all five metrics for one byte stream.

    Metrics whose minimum length is not met (Monte Carlo pi under 6
    bytes, serial correlation under 2) come back as None instead of
    raising; empty input is an error.
    """
    arr = _as_bytes_array(data)
    if arr.size == 0:
        raise ValueError("cannot analyze empty input")
    return RandomnessReport(
        entropy=shannon_entropy(arr),
        chi_square=chi_square(arr),
        mean=arithmetic_mean(arr),
        monte_carlo_pi=monte_carlo_pi(arr) if arr.size >= 6 else None,
        serial_correlation=serial_correlation(arr) if arr.size >= 2 else None,
        byte_count=arr.size,
    )


@dataclass
class MetricDelta:
    """Before/after movement of one metric relative to its ideal.

    ``percent`` is the relative increase of the value itself for
    entropy, and the relative decrease of |value - ideal| for every
    other metric; None when undefined (missing metric or zero base).
    """

    metric: str
    before: float | None
    after: float | None
    ideal: float
    deviation_before: float | None
    deviation_after: float | None
    percent: float | None

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "before": self.before,
            "after": self.after,
            "ideal": self.ideal,
            "deviation_before": self.deviation_before,
            "deviation_after": self.deviation_after,
            "percent_change": self.percent,
        }


_METRICS = (
    ("entropy", IDEAL_ENTROPY),
    ("chi_square", IDEAL_CHI_SQUARE),
    ("mean", IDEAL_MEAN),
    ("monte_carlo_pi", IDEAL_PI),
    ("serial_correlation", IDEAL_SERIAL),
)


def compare(before: RandomnessReport, after: RandomnessReport) -> list[MetricDelta]:
    """Per-metric improvement summary between two reports."""
    deltas = []
    for name, ideal in _METRICS:
        b = getattr(before, name)
        a = getattr(after, name)
        dev_b = abs(b - ideal) if b is not None else None
        dev_a = abs(a - ideal) if a is not None else None
        percent = None
        if b is not None and a is not None:
            if name == "entropy":
                if b != 0:
                    percent = (a - b) / b * 100.0
            elif dev_b:
                percent = (dev_b - dev_a) / dev_b * 100.0
        deltas.append(MetricDelta(name, b, a, ideal, dev_b, dev_a, percent))
    return deltas


_LABELS = {
    "entropy": "entropy (bits/byte)",
    "chi_square": "chi-square (256 bins)",
    "mean": "arithmetic mean",
    "monte_carlo_pi": "monte carlo pi",
    "serial_correlation": "serial correlation",
}


def _fmt(value) -> str:
    return "undefined" if value is None else f"{value:.6f}"


def format_report(report: RandomnessReport) -> str:
    """Human-readable table, six decimal places per value."""
    lines = [f"{'metric':<24}{'value':>14}{'ideal':>14}"]
    for name, ideal in _METRICS:
        lines.append(
            f"{_LABELS[name]:<24}{_fmt(getattr(report, name)):>14}{ideal:>14.6f}"
        )
    lines.append(f"{'bytes analyzed':<24}{report.byte_count:>14}")
    return "\n".join(lines)


def format_comparison(deltas: list[MetricDelta]) -> str:
    lines = [
        f"{'metric':<24}{'before':>14}{'after':>14}{'|dev| change':>14}"
    ]
    for d in deltas:
        change = "n/a" if d.percent is None else f"{d.percent:+.2f}%"
        if d.metric == "entropy" and d.percent is not None:
            change = f"{d.percent:+.2f}%*"
        lines.append(
            f"{_LABELS[d.metric]:<24}{_fmt(d.before):>14}{_fmt(d.after):>14}{change:>14}"
        )
    lines.append("* entropy change is relative to the input value, not the ideal")
    return "\n".join(lines)
