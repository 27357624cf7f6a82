"""Trace-driven simulation of adaptive quality control for generated video.

Submodules: :mod:`~gvcsim.traces` (bandwidth traces), :mod:`~gvcsim.controller`
(quality selection), :mod:`~gvcsim.simulator` (session loop),
:mod:`~gvcsim.metrics` (QoE and error metrics), :mod:`~gvcsim.predictor`
(multimodal attention forward pass) and :mod:`~gvcsim.cli`.
"""

from .controller import (
    BBController,
    FBRController,
    ProposedController,
    QualityLevel,
    bb_select,
    fbr_select,
    make_levels,
    select_quality,
    update_buffer,
    update_lambda,
)
from .metrics import avq, mae, objective_value, rebuffer_ratio, rmse
from .simulator import PredictiveConfig, SessionConfig, SessionLog, run_session
from .traces import BandwidthBand, ThroughputTrace, classify_band, parse_trace, synth_trace, transmission_time

__version__ = "0.1.0"

__all__ = [
    "BBController",
    "BandwidthBand",
    "FBRController",
    "PredictiveConfig",
    "ProposedController",
    "QualityLevel",
    "SessionConfig",
    "SessionLog",
    "ThroughputTrace",
    "avq",
    "bb_select",
    "classify_band",
    "fbr_select",
    "mae",
    "make_levels",
    "objective_value",
    "parse_trace",
    "rebuffer_ratio",
    "rmse",
    "run_session",
    "select_quality",
    "synth_trace",
    "transmission_time",
    "update_buffer",
    "update_lambda",
]
