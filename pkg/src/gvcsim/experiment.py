"""Multi-session experiments: single runs, controller comparisons, band sweeps.

Repetition ``r`` uses seed ``seed_base + r`` for both the synthetic trace and
the predictive-mode draws, so every controller in a comparison sees identical
inputs.  Sessions are independent and may run in worker processes; results
are collected in task order, so output never depends on scheduling.
"""

from __future__ import annotations

import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .controller import ProposedController
from .metrics import session_metrics, summary_csv
from .simulator import STATUS_COMPLETE, SessionConfig, run_session
from .traces import UNCLASSIFIED, classify_band, load_trace, synth_trace


@dataclass(frozen=True)
class SessionResult:
    label: str
    rep: int
    seed: int
    band: str
    avq: float
    rr_percent: float
    objective: float
    status: str
    message: str
    log: object = None


def repetition_seed(seed_base, rep):
    return seed_base + rep


def build_trace(cfg, band, seed):
    if cfg.trace["source"] == "file":
        return load_trace(cfg.trace_path())
    return synth_trace(band, cfg.trace["duration"], seed=seed, step=cfg.trace["step"])


def band_label(cfg, trace, band):
    if cfg.trace["source"] == "synth":
        return band.name
    found = classify_band(trace)
    return found if found == UNCLASSIFIED else found.name


def _objective_params(controller):
    if isinstance(controller, ProposedController):
        return float(controller.lambda_init), float(controller.gamma)
    # baselines carry no multiplier; score them with the default controller's constants
    default = ProposedController()
    return default.lambda_init, default.gamma


def run_one(cfg, spec, band, rep, keep_log=False):
    seed = repetition_seed(cfg.seed, rep)
    trace = build_trace(cfg, band, seed)
    controller = spec.build()
    session = SessionConfig(
        levels=cfg.levels,
        controller=controller,
        trace=trace,
        num_chunks=cfg.num_chunks,
        seed=seed,
        chunk_duration=cfg.chunk_duration,
        b_max=cfg.b_max,
        predictive=cfg.predictive,
    )
    log = run_session(session)
    label = band_label(cfg, trace, band)
    if log.records:
        lam, gamma = _objective_params(controller)
        m = session_metrics(log, lam, gamma, band=label)
        avq, rr, obj = m.avq, m.rr_percent, m.objective
    else:
        avq = rr = obj = float("nan")
    return SessionResult(
        spec.label, rep, seed, label, avq, rr, obj, log.status, log.message, log if keep_log else None
    )


def _run_task(args):
    return run_one(*args)


def run_many(tasks, jobs=1):
    """Run ``(cfg, spec, band, rep[, keep_log])`` tasks, preserving order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [run_one(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks))


def aggregate(results, key):
    """Mean metrics per group; groups keep first-seen order."""
    groups = {}
    for r in results:
        groups.setdefault(key(r), []).append(r)
    rows = []
    for (label, band), rs in groups.items():
        rows.append(
            {
                "controller": label,
                "band": band,
                "avq": float(np.mean([r.avq for r in rs])),
                "rr_percent": float(np.mean([r.rr_percent for r in rs])),
                "objective": float(np.mean([r.objective for r in rs])),
            }
        )
    return rows


def compare(cfg, jobs=None):
    """Every configured controller on the same ``repetitions`` traces."""
    if len(cfg.controllers) < 2:
        raise ValueError("compare needs at least two controllers")
    band = cfg.band
    tasks = [(cfg, spec, band, rep) for spec in cfg.controllers for rep in range(cfg.repetitions)]
    results = run_many(tasks, jobs or cfg.jobs)
    return aggregate(results, key=lambda r: (r.label, r.band)), results


def sweep(cfg, jobs=None):
    """The (first configured) Proposed controller across each band."""
    if cfg.trace["source"] != "synth":
        raise ValueError("sweep needs trace.source = synth")
    spec = next((s for s in cfg.controllers if s.type.lower() == "proposed"), None)
    if spec is None:
        raise ValueError("sweep needs a Proposed controller in 'controllers'")
    tasks = [(cfg, spec, band, rep) for band in cfg.bands for rep in range(cfg.repetitions)]
    results = run_many(tasks, jobs or cfg.jobs)
    return aggregate(results, key=lambda r: (r.label, r.band)), results


def repetitions_csv(results):
    lines = ["controller,band,rep,seed,status,avq,rr_percent,objective"]
    for r in results:
        lines.append(
            f"{r.label},{r.band},{r.rep},{r.seed},{r.status},{r.avq:.6f},{r.rr_percent:.6f},{r.objective:.6f}"
        )
    return "\n".join(lines) + "\n"


def band_plot_csv(rows, bands):
    mids = {b.name: (b.min_mbps + b.max_mbps) / 2 for b in bands}
    lines = ["band,band_mid_mbps,avq,rr_percent"]
    for row in rows:
        lines.append(f"{row['band']},{mids[row['band']]:.3f},{row['avq']:.6f},{row['rr_percent']:.6f}")
    return "\n".join(lines) + "\n"


def incomplete(results):
    return [r for r in results if r.status != STATUS_COMPLETE]


def write_atomic(path, text):
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


__all__ = [
    "SessionResult",
    "aggregate",
    "band_plot_csv",
    "compare",
    "repetition_seed",
    "repetitions_csv",
    "run_many",
    "run_one",
    "summary_csv",
    "sweep",
    "write_atomic",
]
