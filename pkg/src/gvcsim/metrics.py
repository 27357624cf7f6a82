"""Session QoE metrics and predictor error metrics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ._validation import check_finite_scalar
from .controller import BUFFER_FLOOR

SUMMARY_FIELDS = ["controller", "band", "avq", "rr_percent", "objective"]


class EmptyLogError(ValueError):
    pass


def _require_records(log):
    if not log.records:
        raise EmptyLogError("session log has no chunk records")
    return log.records


def avq(log):
    """Average selected quality level over the session."""
    records = _require_records(log)
    return float(np.mean([r.level for r in records]))


def rebuffer_ratio(log):
    """Stall time as a percentage of session wall-clock time."""
    records = _require_records(log)
    stall = sum(r.rebuffer for r in records)
    wall = len(records) * log.chunk_duration + stall
    return 100.0 * stall / wall


def objective_value(log, lam, gamma):
    """Cumulative utility ``sum_k q_k - lam * d_k / max(B_k, floor)**gamma``.

    Uses each record's generation delay and decision-time buffer with a fixed
    ``lam``, so it is a diagnostic rather than the controller's running value.
    """
    records = _require_records(log)
    lam = check_finite_scalar(lam, "lambda")
    gamma = check_finite_scalar(gamma, "gamma")
    quality = {lv.index: lv.quality for lv in log.levels}
    total = 0.0
    for r in records:
        total += quality[r.level] - lam * r.gen_delay / max(r.b_after, BUFFER_FLOOR) ** gamma
    return total


@dataclass(frozen=True)
class SessionMetrics:
    avq: float
    rr_percent: float
    objective: float
    band: str | None = None

    def row(self, controller):
        return {
            "controller": controller,
            "band": self.band or "",
            "avq": self.avq,
            "rr_percent": self.rr_percent,
            "objective": self.objective,
        }


def session_metrics(log, lam=1.0, gamma=1.0, band=None):
    band_name = getattr(band, "name", band)
    return SessionMetrics(
        avq=avq(log),
        rr_percent=rebuffer_ratio(log),
        objective=objective_value(log, lam, gamma),
        band=band_name,
    )


def summary_csv(rows):
    """Render summary rows (dicts keyed by :data:`SUMMARY_FIELDS`) as CSV text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row[k]) for k in SUMMARY_FIELDS})
    return buf.getvalue()


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.6f}"
    return value


def _paired(pred, truth):
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("empty input")
    return pred, truth


def mae(pred, truth):
    pred, truth = _paired(pred, truth)
    return float(np.mean(np.abs(pred - truth)))


def rmse(pred, truth):
    pred, truth = _paired(pred, truth)
    return float(np.sqrt(np.mean((pred - truth) ** 2)))
