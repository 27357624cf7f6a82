"""Discrete-event simulation of one generated-video session.

Per chunk ``k`` (decisions every ``chunk_duration`` seconds of playback):

1. the buffer gains one chunk of playback and pays the previous chunk's total
   delay (generation + transmission); any deficit is stall time that pushes
   the wall clock forward;
2. the controller picks a level from the buffer at the decision time;
3. the chunk is generated (optionally with predictive pre-generation hiding
   part of the delay) and then transmitted over the trace.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._validation import check_int, check_positive
from .controller import BaseController, QualityLevel, check_levels, update_buffer
from .traces import ThroughputTrace, TraceExhaustedError, transmission_time

STATUS_COMPLETE = "complete"
STATUS_EXHAUSTED = "trace_exhausted"


@dataclass(frozen=True)
class PredictiveConfig:
    """Synthetic pre-generation model: with probability ``hit_prob`` the chunk
    was generated ``horizon`` seconds ahead of its decision."""

    horizon: float = 0.0
    hit_prob: float = 0.0

    def __post_init__(self):
        check_positive(self.horizon, "predictive.horizon", strict=False)
        p = check_positive(self.hit_prob, "predictive.hit_prob", strict=False)
        if p > 1:
            raise ValueError(f"predictive.hit_prob must be in [0, 1], got {p}")


@dataclass
class SessionConfig:
    levels: list
    controller: BaseController
    trace: ThroughputTrace
    num_chunks: int
    seed: int = 0
    chunk_duration: float = 1.0
    b_max: float = 4.0
    predictive: PredictiveConfig | None = None

    def validate(self):
        self.levels = check_levels(self.levels)
        check_int(self.num_chunks, "num_chunks", minimum=1)
        check_int(self.seed, "seed")
        check_positive(self.chunk_duration, "chunk_duration")
        check_positive(self.b_max, "b_max")
        if self.num_chunks * self.chunk_duration > self.trace.duration:
            raise ValueError(
                f"num_chunks * chunk_duration = {self.num_chunks * self.chunk_duration:g} s "
                f"exceeds the trace duration {self.trace.duration:g} s"
            )
        return self

    def describe(self):
        """JSON-ready description; everything that affects the result."""
        return {
            "levels": [asdict(lv) for lv in self.levels],
            "controller": {"type": self.controller.name, "params": self.controller.get_params()},
            "num_chunks": self.num_chunks,
            "seed": self.seed,
            "chunk_duration": self.chunk_duration,
            "b_max": self.b_max,
            "predictive": None if self.predictive is None else asdict(self.predictive),
            "trace": self.trace.to_dict(),
        }

    def digest(self):
        blob = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class ChunkRecord:
    k: int
    t_k: float
    dt: float
    level: int
    gen_delay: float
    effective_gen_delay: float
    tx_delay: float
    total_delay: float
    b_after: float
    lambda_after: float | None
    rebuffer: float
    prediction_hit: bool | None = None


CHUNK_FIELDS = [f.name for f in fields(ChunkRecord)]


@dataclass
class SessionLog:
    digest: str
    controller: str
    levels: list
    chunk_duration: float
    b_max: float
    records: list = field(default_factory=list)
    status: str = STATUS_COMPLETE
    message: str = ""
    synthetic_predictive: bool = False

    @property
    def total_rebuffer(self):
        return float(sum(r.rebuffer for r in self.records))

    @property
    def wall_clock(self):
        return len(self.records) * self.chunk_duration + self.total_rebuffer

    @property
    def levels_chosen(self):
        return [r.level for r in self.records]

    def to_dict(self):
        return {
            "digest": self.digest,
            "controller": self.controller,
            "status": self.status,
            "message": self.message,
            "synthetic_predictive": self.synthetic_predictive,
            "chunk_duration": self.chunk_duration,
            "b_max": self.b_max,
            "levels": [asdict(lv) for lv in self.levels],
            "totals": {
                "num_chunks": len(self.records),
                "wall_clock": self.wall_clock,
                "total_rebuffer": self.total_rebuffer,
            },
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self, **extra):
        payload = self.to_dict()
        payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data):
        return cls(
            digest=data["digest"],
            controller=data["controller"],
            levels=[QualityLevel(**lv) for lv in data["levels"]],
            chunk_duration=data["chunk_duration"],
            b_max=data["b_max"],
            records=[ChunkRecord(**r) for r in data["records"]],
            status=data.get("status", STATUS_COMPLETE),
            message=data.get("message", ""),
            synthetic_predictive=data.get("synthetic_predictive", False),
        )

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CHUNK_FIELDS)
        for rec in self.records:
            writer.writerow(["" if v is None else v for v in (getattr(rec, f) for f in CHUNK_FIELDS)])
        return buf.getvalue()


def effective_generation_delay(level, predictive, draw):
    """Generation delay seen by the viewer, and whether the pre-generation hit.

    ``draw`` is a uniform [0, 1) variate; a hit is ``draw < hit_prob``.
    """
    if predictive is None:
        return level.gen_delay, None
    hit = bool(draw < predictive.hit_prob)
    if hit:
        return max(0.0, level.gen_delay - predictive.horizon), True
    return level.gen_delay, False


def run_session(cfg):
    """Simulate ``cfg.num_chunks`` chunks and return the :class:`SessionLog`.

    If the trace runs out mid-session the log is truncated and its status set
    to ``"trace_exhausted"``.
    """
    cfg.validate()
    levels = cfg.levels
    by_index = {lv.index: lv for lv in levels}
    controller = cfg.controller
    controller.start(levels, cfg.b_max)
    # one draw per chunk regardless of mode, so every controller sees the same stream
    draws = np.random.default_rng(cfg.seed).random(cfg.num_chunks)

    log = SessionLog(
        digest=cfg.digest(),
        controller=controller.name,
        levels=levels,
        chunk_duration=cfg.chunk_duration,
        b_max=cfg.b_max,
        synthetic_predictive=cfg.predictive is not None,
    )
    buffer = 0.0
    prev_delay = 0.0
    t = 0.0
    for k in range(1, cfg.num_chunks + 1):
        dt = cfg.chunk_duration
        buffer, rebuffer = update_buffer(buffer, dt, prev_delay, cfg.b_max)
        if k > 1:
            t += dt + rebuffer
        index = controller.decide(buffer, t)
        level = by_index[index]
        gen, hit = effective_generation_delay(level, cfg.predictive, draws[k - 1])
        tx_start = t + gen
        try:
            if tx_start > cfg.trace.duration:
                raise TraceExhaustedError(level.bitrate * cfg.chunk_duration, cfg.trace.duration)
            tx = transmission_time(cfg.trace, tx_start, level.bitrate * cfg.chunk_duration)
        except TraceExhaustedError as exc:
            log.status = STATUS_EXHAUSTED
            log.message = f"chunk {k}: {exc}"
            break
        total = gen + tx
        log.records.append(
            ChunkRecord(
                k=k,
                t_k=t,
                dt=dt,
                level=index,
                gen_delay=level.gen_delay,
                effective_gen_delay=gen,
                tx_delay=tx,
                total_delay=total,
                b_after=buffer,
                lambda_after=controller.lambda_,
                rebuffer=rebuffer,
                prediction_hit=hit,
            )
        )
        prev_delay = total
    return log
