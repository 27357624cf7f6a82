"""Quality-level selection: the Lagrangian controller and two baselines.

The pure helpers (:func:`select_quality`, :func:`update_buffer`,
:func:`update_lambda`, :func:`fbr_select`, :func:`bb_select`) carry the
arithmetic.  The controller classes wrap them as small per-session state
machines with a scikit-learn style parameter interface, so they can be cloned
and reconfigured via ``get_params``/``set_params``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_finite_scalar, check_int, check_positive

# floor on the buffer level inside the utility; the delay penalty divides by B**gamma
BUFFER_FLOOR = 0.05


@dataclass(frozen=True)
class QualityLevel:
    """One generator tier: 1-based index, quality score, generation delay (s), bitrate (Mbps)."""

    index: int
    quality: float
    gen_delay: float
    bitrate: float

    def __post_init__(self):
        check_int(self.index, "index", minimum=1)
        check_finite_scalar(self.quality, "quality")
        check_positive(self.gen_delay, "gen_delay")
        check_positive(self.bitrate, "bitrate")


def make_levels(quality, gen_delay, bitrate):
    """Build and validate a level set from parallel sequences."""
    if not (len(quality) == len(gen_delay) == len(bitrate)):
        raise ValueError(
            "quality, gen_delay and bitrate must have the same length "
            f"({len(quality)}, {len(gen_delay)}, {len(bitrate)})"
        )
    levels = [
        QualityLevel(i + 1, float(q), float(d), float(b))
        for i, (q, d, b) in enumerate(zip(quality, gen_delay, bitrate))
    ]
    return check_levels(levels)


def check_levels(levels):
    levels = list(levels)
    if not levels:
        raise ValueError("level set is empty")
    for pos, level in enumerate(levels, start=1):
        if level.index != pos:
            raise ValueError(f"levels must be indexed 1..N in order; position {pos} has index {level.index}")
    qs = [lv.quality for lv in levels]
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise ValueError(f"quality scores must be strictly increasing, got {qs}")
    return levels


def utilities(levels, buffer, lam, gamma):
    """Per-level utility ``q_i - lam * d_i / max(B, floor)**gamma``."""
    b_eff = max(float(buffer), BUFFER_FLOOR)
    q = np.array([lv.quality for lv in levels])
    d = np.array([lv.gen_delay for lv in levels])
    return q - lam * d / b_eff**gamma


def select_quality(levels, buffer, lam, gamma):
    """Index (1-based) of the level with the largest utility.

    Exact ties go to the lowest index, i.e. the cheaper model.
    """
    if not levels:
        raise ValueError("level set is empty")
    lam = check_finite_scalar(lam, "lambda")
    gamma = check_finite_scalar(gamma, "gamma")
    buffer = check_finite_scalar(buffer, "buffer")
    if buffer < 0:
        raise ValueError(f"buffer must be >= 0, got {buffer}")
    u = utilities(levels, buffer, lam, gamma)
    # np.argmax returns the first maximum
    return levels[int(np.argmax(u))].index


def update_buffer(b_prev, dt, d_prev, b_max):
    """Advance the buffer by ``dt`` of playback credit minus the previous chunk's delay.

    Returns ``(b_new, rebuffer)``; any deficit below zero is booked as stall time.
    """
    b_prev = check_finite_scalar(b_prev, "b_prev")
    dt = check_finite_scalar(dt, "dt")
    d_prev = check_finite_scalar(d_prev, "d_prev")
    b_max = check_positive(b_max, "b_max")
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if d_prev < 0:
        raise ValueError(f"d_prev must be >= 0, got {d_prev}")
    raw = b_prev + dt - d_prev
    rebuffer = max(0.0, -raw)
    return min(b_max, max(0.0, raw)), rebuffer


def update_lambda(lam, buffer, b_max, beta):
    """Multiplier step ``lam - beta * (B - B_max)``, clamped at zero."""
    lam = check_finite_scalar(lam, "lambda")
    buffer = check_finite_scalar(buffer, "buffer")
    b_max = check_finite_scalar(b_max, "b_max")
    beta = check_positive(beta, "beta")
    return max(0.0, lam - beta * (buffer - b_max))


def fbr_select(fixed_index, n_levels):
    fixed_index = check_int(fixed_index, "level")
    if not 1 <= fixed_index <= n_levels:
        raise ValueError(f"level {fixed_index} outside 1..{n_levels}")
    return fixed_index


@dataclass(frozen=True)
class BBConfig:
    reservoir: float
    cushion: float
    b_max: float

    def __post_init__(self):
        check_positive(self.reservoir, "reservoir", strict=False)
        check_positive(self.cushion, "cushion")
        check_positive(self.b_max, "b_max")
        if self.reservoir + self.cushion > self.b_max:
            raise ValueError(
                f"reservoir + cushion ({self.reservoir} + {self.cushion}) exceeds "
                f"b_max ({self.b_max})"
            )


def bb_select(buffer, cfg, levels):
    """Reservoir/cushion map: lowest level below the reservoir, highest above it
    plus the cushion, linear in between."""
    n = len(levels)
    if n == 0:
        raise ValueError("level set is empty")
    buffer = check_finite_scalar(buffer, "buffer")
    if buffer <= cfg.reservoir:
        return levels[0].index
    if buffer >= cfg.reservoir + cfg.cushion:
        return levels[-1].index
    pos = 1 + math.floor((buffer - cfg.reservoir) / cfg.cushion * (n - 1))
    return levels[min(pos, n) - 1].index


@dataclass
class ControllerState:
    lambda_: float
    buffer: float
    t_last: float


class BaseController(BaseEstimator):
    """Per-session quality selector.

    Call :meth:`start` once per session, then :meth:`decide` once per chunk
    with the buffer level at the decision time.
    """

    name = "base"

    def start(self, levels, b_max):
        self.levels_ = check_levels(levels)
        self.b_max_ = check_positive(b_max, "b_max")
        self.state_ = ControllerState(lambda_=self._initial_lambda(), buffer=0.0, t_last=0.0)
        return self

    def _initial_lambda(self):
        return None

    def decide(self, buffer, t):
        index = self._select(buffer)
        self.state_.buffer = buffer
        self.state_.t_last = t
        return index

    def _select(self, buffer):
        raise NotImplementedError

    @property
    def lambda_(self):
        return self.state_.lambda_


class ProposedController(BaseController):
    """Lagrangian quality/delay controller.

    Each decision picks ``argmax_i q_i - lambda * d_i / B**gamma`` and then
    moves ``lambda`` by ``beta * (B_max - B)``.
    """

    name = "Proposed"

    def __init__(self, gamma=1.0, beta=0.05, lambda_init=1.0):
        self.gamma = gamma
        self.beta = beta
        self.lambda_init = lambda_init

    def start(self, levels, b_max):
        check_positive(self.gamma, "gamma")
        check_positive(self.beta, "beta")
        check_positive(self.lambda_init, "lambda_init", strict=False)
        return super().start(levels, b_max)

    def _initial_lambda(self):
        return float(self.lambda_init)

    def _select(self, buffer):
        index = select_quality(self.levels_, buffer, self.state_.lambda_, self.gamma)
        self.state_.lambda_ = update_lambda(self.state_.lambda_, buffer, self.b_max_, self.beta)
        return index


class FBRController(BaseController):
    """Fixed level for the whole session."""

    name = "FBR"

    def __init__(self, level=1):
        self.level = level

    def start(self, levels, b_max):
        super().start(levels, b_max)
        fbr_select(self.level, len(self.levels_))
        return self

    def _select(self, buffer):
        return fbr_select(self.level, len(self.levels_))


class BBController(BaseController):
    """Buffer-based baseline with a reservoir/cushion rate map."""

    name = "BB"

    def __init__(self, reservoir=1.0, cushion=2.0):
        self.reservoir = reservoir
        self.cushion = cushion

    def start(self, levels, b_max):
        super().start(levels, b_max)
        self.config_ = BBConfig(float(self.reservoir), float(self.cushion), self.b_max_)
        return self

    def _select(self, buffer):
        return bb_select(buffer, self.config_, self.levels_)


CONTROLLERS = {cls.name.lower(): cls for cls in (ProposedController, FBRController, BBController)}


def make_controller(kind, **params):
    try:
        cls = CONTROLLERS[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown controller {kind!r}; expected one of {sorted(CONTROLLERS)}") from None
    return cls(**params)
