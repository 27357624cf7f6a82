"""Forward pass of the multimodal attention predictor.

Pipeline: per-modality 1-D convolution to a shared width, positional and
timestamp encodings added on top, then one fusion core per host modality
(three crossmodal attention blocks plus one self-attention block, projected
by a concatenation matrix), and finally a fully connected layer over the four
fused sequences.

Only inference lives here.  Weights are either supplied by the caller or drawn
from a seeded uniform(-0.1, 0.1) in :meth:`MultimodalPredictor.fit`.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int, check_matrix, check_positive, check_vector, frozen
from .metrics import mae, rmse  # noqa: F401  re-exported for predictor evaluation


class Modality(str, enum.Enum):
    HM = "HM"  # head motion
    EB = "EB"  # eye blink
    VO = "VO"  # voice
    GD = "GD"  # gaze direction


MODALITIES = tuple(Modality)
# GD is an input only
TARGET_MODALITIES = (Modality.HM, Modality.EB, Modality.VO)


def _modality(value):
    try:
        return Modality(value.value if isinstance(value, Modality) else str(value).upper())
    except ValueError:
        raise ValueError(f"unknown modality {value!r}; expected one of HM, EB, VO, GD") from None


@dataclass(frozen=True)
class ModalSequence:
    """A ``T x d_m`` feature matrix for one modality with wall-clock timestamps."""

    modality: Modality
    data: np.ndarray
    timestamps: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "modality", _modality(self.modality))
        data = frozen(check_matrix(self.data, f"{self.modality.value}.data"))
        ts = frozen(check_vector(self.timestamps, f"{self.modality.value}.timestamps"))
        if ts.size != data.shape[0]:
            raise ValueError(
                f"{self.modality.value}: {ts.size} timestamps for {data.shape[0]} rows"
            )
        if np.any(np.diff(ts) <= 0):
            raise ValueError(f"{self.modality.value}: timestamps must be strictly increasing")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "timestamps", ts)

    @property
    def n_steps(self):
        return self.data.shape[0]

    @property
    def n_features(self):
        return self.data.shape[1]

    def to_dict(self):
        return {
            "modality": self.modality.value,
            "data": self.data.tolist(),
            "timestamps": self.timestamps.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["modality"], d["data"], d["timestamps"])


@dataclass(frozen=True)
class EncodedSequence:
    modality: Modality
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "modality", _modality(self.modality))
        object.__setattr__(self, "data", frozen(check_matrix(self.data, "encoded data")))


@dataclass(frozen=True)
class AttentionParams:
    """Query/key/value projections for attention from ``source`` onto ``target``."""

    source: Modality
    target: Modality
    W_Q: np.ndarray
    W_K: np.ndarray
    W_V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source", _modality(self.source))
        object.__setattr__(self, "target", _modality(self.target))
        for name in ("W_Q", "W_K", "W_V"):
            object.__setattr__(self, name, frozen(check_matrix(getattr(self, name), name)))
        if self.W_Q.shape != self.W_K.shape:
            raise ValueError(f"W_Q {self.W_Q.shape} and W_K {self.W_K.shape} must match")
        if self.W_V.shape[0] != self.W_Q.shape[0]:
            raise ValueError("W_V must take the same input width as W_Q")

    @property
    def d_model(self):
        return self.W_Q.shape[0]

    @property
    def d_k(self):
        return self.W_Q.shape[1]

    @property
    def d_v(self):
        return self.W_V.shape[1]

    def to_dict(self):
        return {
            "source": self.source.value,
            "target": self.target.value,
            "d_k": self.d_k,
            "W_Q": self.W_Q.tolist(),
            "W_K": self.W_K.tolist(),
            "W_V": self.W_V.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        params = cls(d["source"], d["target"], d["W_Q"], d["W_K"], d["W_V"])
        if "d_k" in d and int(d["d_k"]) != params.d_k:
            raise ValueError(f"d_k={d['d_k']} disagrees with W_Q width {params.d_k}")
        return params


@dataclass(frozen=True)
class LayerNormParams:
    scale: np.ndarray
    shift: np.ndarray
    eps: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "scale", frozen(check_vector(self.scale, "scale")))
        object.__setattr__(self, "shift", frozen(check_vector(self.shift, "shift")))
        if self.scale.shape != self.shift.shape:
            raise ValueError("layer norm scale and shift differ in length")

    def to_dict(self):
        return {"scale": self.scale.tolist(), "shift": self.shift.tolist(), "eps": self.eps}

    @classmethod
    def from_dict(cls, d):
        return cls(d["scale"], d["shift"], d.get("eps", 1e-5))


@dataclass(frozen=True)
class FeedForwardParams:
    """Two-layer position-wise network ``relu(x W1 + b1) W2 + b2``."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("W1", "W2"):
            object.__setattr__(self, name, frozen(check_matrix(getattr(self, name), name)))
        for name in ("b1", "b2"):
            object.__setattr__(self, name, frozen(check_vector(getattr(self, name), name)))
        if not (self.W1.shape[1] == self.b1.size == self.W2.shape[0] and self.W2.shape[1] == self.b2.size):
            raise ValueError("feed-forward weight shapes are inconsistent")

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("W1", "b1", "W2", "b2")}

    @classmethod
    def from_dict(cls, d):
        return cls(d["W1"], d["b1"], d["W2"], d["b2"])


@dataclass(frozen=True)
class FusionCoreParams:
    """Weights for one host modality's fusion core.

    ``layer_norm`` and ``feed_forward`` are optional; leaving them out gives
    the bare attention-plus-projection kernel.
    """

    host: Modality
    cross_params: dict
    self_params: AttentionParams
    W_concatenate: np.ndarray
    num_heads: int = 1
    layer_norm: LayerNormParams | None = None
    feed_forward: dict | None = field(default=None)

    def __post_init__(self):
        host = _modality(self.host)
        object.__setattr__(self, "host", host)
        cross = {_modality(k): v for k, v in dict(self.cross_params).items()}
        expected = {m for m in MODALITIES if m is not host}
        if set(cross) != expected:
            raise ValueError(
                f"{host.value} core needs crossmodal params from {sorted(m.value for m in expected)}, "
                f"got {sorted(m.value for m in cross)}"
            )
        for src, p in cross.items():
            if p.source is not src or p.target is not host:
                raise ValueError(f"crossmodal params keyed {src.value} describe {p.source.value}->{p.target.value}")
        if self.self_params.source is not host or self.self_params.target is not host:
            raise ValueError("self-attention params must map the host onto itself")
        object.__setattr__(self, "cross_params", cross)
        check_int(self.num_heads, "num_heads", minimum=1)
        blocks = [cross[m] for m in _other_modalities(host)] + [self.self_params]
        d_v = {p.d_v for p in blocks}
        if len(d_v) != 1:
            raise ValueError(f"all attention blocks in a core must share d_v, got {sorted(d_v)}")
        for p in blocks:
            if p.d_k % self.num_heads or p.d_v % self.num_heads:
                raise ValueError(
                    f"d_k={p.d_k} and d_v={p.d_v} must be divisible by num_heads={self.num_heads}"
                )
        W = frozen(check_matrix(self.W_concatenate, "W_concatenate"))
        if W.shape[0] != 4 * blocks[0].d_v:
            raise ValueError(f"W_concatenate needs {4 * blocks[0].d_v} rows, got {W.shape[0]}")
        object.__setattr__(self, "W_concatenate", W)
        if self.feed_forward is not None:
            ff = {_modality(k): v for k, v in dict(self.feed_forward).items()}
            if set(ff) != set(MODALITIES):
                raise ValueError("feed_forward needs one block per modality (three sources plus the host)")
            object.__setattr__(self, "feed_forward", ff)

    @property
    def d_fused(self):
        return self.W_concatenate.shape[1]

    def to_dict(self):
        return {
            "host": self.host.value,
            "num_heads": self.num_heads,
            "cross_params": {m.value: p.to_dict() for m, p in self.cross_params.items()},
            "self_params": self.self_params.to_dict(),
            "W_concatenate": self.W_concatenate.tolist(),
            "layer_norm": None if self.layer_norm is None else self.layer_norm.to_dict(),
            "feed_forward": None
            if self.feed_forward is None
            else {m.value: f.to_dict() for m, f in self.feed_forward.items()},
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            host=d["host"],
            cross_params={k: AttentionParams.from_dict(v) for k, v in d["cross_params"].items()},
            self_params=AttentionParams.from_dict(d["self_params"]),
            W_concatenate=d["W_concatenate"],
            num_heads=d.get("num_heads", 1),
            layer_norm=None if d.get("layer_norm") is None else LayerNormParams.from_dict(d["layer_norm"]),
            feed_forward=None
            if d.get("feed_forward") is None
            else {k: FeedForwardParams.from_dict(v) for k, v in d["feed_forward"].items()},
        )


@dataclass(frozen=True)
class PredictionTarget:
    horizon: float
    values: np.ndarray

    def __post_init__(self):
        check_positive(self.horizon, "horizon")
        object.__setattr__(self, "values", frozen(check_matrix(self.values, "prediction")))


def _other_modalities(host):
    return [m for m in MODALITIES if m is not host]


# --------------------------------------------------------------------------
# dimension alignment and encodings


def align_dimensions(seq, kernel, target_dim, bias=None):
    """Same-padded 1-D convolution along time.

    ``kernel`` has shape ``(width, d_in, target_dim)`` (a 2-D kernel is read
    as ``(width, d_in)`` with ``target_dim == 1``).  Implemented as
    cross-correlation centred on each step, zero padding at both ends.
    """
    x = seq.data if isinstance(seq, ModalSequence) else check_matrix(seq, "seq")
    T, d_in = x.shape
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim == 2:
        k = k[:, :, None]
    if k.ndim != 3:
        raise ValueError(f"kernel must be (width, d_in, d_out), got shape {k.shape}")
    width = k.shape[0]
    if width % 2 == 0:
        raise ValueError(f"kernel width must be odd, got {width}")
    if width > 2 * T - 1:
        raise ValueError(f"kernel width {width} exceeds 2T-1 = {2 * T - 1}")
    if k.shape[1] != d_in:
        raise ValueError(f"kernel expects {k.shape[1]} input features, sequence has {d_in}")
    if k.shape[2] != target_dim:
        raise ValueError(f"kernel produces {k.shape[2]} features, target_dim is {target_dim}")
    half = width // 2
    padded = np.zeros((T + 2 * half, d_in))
    padded[half : half + T] = x
    out = np.zeros((T, target_dim))
    for j in range(width):
        out += padded[j : j + T] @ k[j]
    if bias is not None:
        out += check_vector(bias, "bias")
    return out


def _sinusoid(angles_base, d):
    """Interleave sin/cos of ``angles_base[:, None] * freqs`` into ``d`` columns."""
    i = np.arange(d // 2)
    freqs = 1.0 / 10000.0 ** (2 * i / d)
    angles = np.asarray(angles_base, dtype=np.float64)[:, None] * freqs[None, :]
    out = np.empty((angles.shape[0], d))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def positional_encoding(T, d):
    """Standard interleaved sinusoidal position encoding, shape ``(T, d)``."""
    T = check_int(T, "T", minimum=1)
    d = check_int(d, "d", minimum=2)
    if d % 2:
        raise ValueError(f"d must be even, got {d}")
    return _sinusoid(np.arange(T), d)


def timestamp_encoding(timestamps, d, period=60.0):
    """Encode each timestamp's phase within ``period`` as sin/cos harmonics.

    Column pair ``i`` holds ``sin, cos`` of ``2*pi*(i+1)*phase`` with
    ``phase = (t mod period) / period``; exactly periodic, and phase 0 gives
    ``(0, 1, 0, 1, ...)``.
    """
    ts = check_vector(timestamps, "timestamps")
    d = check_int(d, "d", minimum=2)
    if d % 2:
        raise ValueError(f"d must be even, got {d}")
    period = check_positive(period, "period")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("timestamps must be strictly increasing")
    phase = np.mod(ts, period) / period
    harmonics = np.arange(1, d // 2 + 1)
    angles = 2 * np.pi * phase[:, None] * harmonics[None, :]
    out = np.empty((ts.size, d))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def encode_modality(aligned, pe, te, modality=None):
    """Elementwise ``aligned + pe + te``."""
    m = check_matrix(aligned, "aligned")
    pe = np.asarray(pe, dtype=np.float64)
    te = np.asarray(te, dtype=np.float64)
    if pe.shape != m.shape or te.shape != m.shape:
        raise ValueError(f"shape mismatch: M {m.shape}, PE {pe.shape}, TE {te.shape}")
    out = m + pe + te
    if modality is None:
        return out
    return EncodedSequence(modality, out)


# --------------------------------------------------------------------------
# attention


def softmax(scores, axis=-1):
    z = scores - np.max(scores, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=axis, keepdims=True)


def attention_weights(target_seq, source_seq, params, num_heads=1):
    """Softmax weights, shape ``(num_heads, T_target, T_source)``."""
    q_in = check_matrix(target_seq, "target_seq")
    k_in = check_matrix(source_seq, "source_seq")
    for name, x in (("target_seq", q_in), ("source_seq", k_in)):
        if x.shape[1] != params.d_model:
            raise ValueError(f"{name} has {x.shape[1]} features, params expect {params.d_model}")
    dh = params.d_k // num_heads
    Q = (q_in @ params.W_Q).reshape(q_in.shape[0], num_heads, dh).transpose(1, 0, 2)
    K = (k_in @ params.W_K).reshape(k_in.shape[0], num_heads, dh).transpose(1, 0, 2)
    return softmax(Q @ K.transpose(0, 2, 1) / math.sqrt(dh))


def crossmodal_attention(target_seq, source_seq, params, num_heads=1):
    """``softmax(Q K^T / sqrt(d_k)) V`` with queries from ``target_seq`` and
    keys/values from ``source_seq``.

    With ``num_heads > 1`` the projections are split evenly into heads and the
    head outputs are concatenated, giving shape ``(T_target, d_v)`` either way.
    """
    num_heads = check_int(num_heads, "num_heads", minimum=1)
    if params.d_k % num_heads or params.d_v % num_heads:
        raise ValueError(f"d_k={params.d_k}, d_v={params.d_v} not divisible by {num_heads} heads")
    weights = attention_weights(target_seq, source_seq, params, num_heads)
    src = check_matrix(source_seq, "source_seq")
    V = (src @ params.W_V).reshape(src.shape[0], num_heads, params.d_v // num_heads).transpose(1, 0, 2)
    heads = weights @ V  # (H, T_target, d_v/H)
    return heads.transpose(1, 0, 2).reshape(weights.shape[1], params.d_v)


def self_attention(seq, params, num_heads=1):
    return crossmodal_attention(seq, seq, params, num_heads)


def layer_norm(x, params):
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    return (x - mean) / np.sqrt(var + params.eps) * params.scale + params.shift


def feed_forward(x, params):
    return np.maximum(x @ params.W1 + params.b1, 0.0) @ params.W2 + params.b2


def _as_encoded(seq, modality=None):
    if isinstance(seq, EncodedSequence):
        return seq
    if modality is None:
        raise ValueError("plain matrices need an explicit modality")
    return EncodedSequence(modality, seq)


def fusion_core(host_seq, other_seqs, params):
    """Fused sequence ``F_host`` of shape ``(T_host, d_fused)``.

    ``other_seqs`` maps (or lists) the three non-host encoded sequences.  Block
    outputs are concatenated as the three crossmodal blocks in modality order
    (HM, EB, VO, GD, skipping the host) followed by the self-attention block.
    """
    host_seq = _as_encoded(host_seq, params.host)
    if host_seq.modality is not params.host:
        raise ValueError(f"host sequence is {host_seq.modality.value}, params are for {params.host.value}")
    if isinstance(other_seqs, dict):
        others = {_modality(k): _as_encoded(v, k) for k, v in other_seqs.items()}
    else:
        others = {s.modality: s for s in other_seqs}
    expected = set(_other_modalities(params.host))
    if set(others) != expected or len(others) != len(list(other_seqs)):
        raise ValueError(
            f"{params.host.value} core needs sequences for {sorted(m.value for m in expected)}, "
            f"got {sorted(m.value for m in others)}"
        )

    def norm(x):
        return x if params.layer_norm is None else layer_norm(x, params.layer_norm)

    def post(x, modality):
        if params.feed_forward is None:
            return x
        return feed_forward(x, params.feed_forward[modality])

    target = norm(host_seq.data)
    blocks = []
    for src in _other_modalities(params.host):
        out = crossmodal_attention(target, norm(others[src].data), params.cross_params[src], params.num_heads)
        blocks.append(post(out, src))
    own = self_attention(target, params.self_params, params.num_heads)
    blocks.append(post(own, params.host))
    return np.concatenate(blocks, axis=1) @ params.W_concatenate


def predict(fused, fc_weights, fc_bias, horizon=1.0):
    """Affine map of the concatenated fused sequences (order HM, EB, VO, GD)."""
    if isinstance(fused, dict):
        fused = {_modality(k): v for k, v in fused.items()}
        if set(fused) != set(MODALITIES):
            raise ValueError("fused sequences must cover HM, EB, VO and GD")
        fused = [fused[m] for m in MODALITIES]
    mats = [check_matrix(f, "fused") for f in fused]
    rows = {m.shape[0] for m in mats}
    if len(rows) != 1:
        raise ValueError(f"fused sequences differ in length: {sorted(rows)}")
    x = np.concatenate(mats, axis=1)
    W = check_matrix(fc_weights, "fc_weights")
    b = check_vector(fc_bias, "fc_bias")
    if W.shape[0] != x.shape[1]:
        raise ValueError(f"fc expects {W.shape[0]} inputs, fused width is {x.shape[1]}")
    if W.shape[1] != b.size:
        raise ValueError(f"fc bias has {b.size} entries for {W.shape[1]} outputs")
    return PredictionTarget(horizon, x @ W + b)


# --------------------------------------------------------------------------
# estimator


def _coerce_inputs(X):
    if isinstance(X, dict):
        seqs = {}
        for k, v in X.items():
            seq = v if isinstance(v, ModalSequence) else ModalSequence.from_dict(v) if isinstance(v, dict) else None
            if seq is None:
                raise TypeError(f"{k}: expected a ModalSequence or its dict form")
            if seq.modality is not _modality(k):
                raise ValueError(f"key {k} holds a {seq.modality.value} sequence")
            seqs[seq.modality] = seq
    else:
        seqs = {s.modality: s for s in X}
    if set(seqs) != set(MODALITIES):
        raise ValueError(f"need one sequence per modality HM, EB, VO, GD; got {sorted(m.value for m in seqs)}")
    lengths = {s.n_steps for s in seqs.values()}
    if len(lengths) != 1:
        raise ValueError(f"modal sequences must share their length, got {sorted(lengths)}")
    return seqs


class MultimodalPredictor(TransformerMixin, BaseEstimator):
    """Multimodal attention predictor (forward pass only).

    ``fit`` does not train: it reads the per-modality input widths and draws
    every weight matrix from a seeded uniform(-0.1, 0.1), much like a random
    projection.  ``transform`` returns the four fused sequences concatenated;
    ``predict`` applies the output layer and keeps the last ``n_pred_steps``
    rows.

    Parameters
    ----------
    d_model : int
        Common width after alignment (even).
    d_k, d_v : int
        Key and value widths per attention block, divisible by ``num_heads``.
    d_fused : int
        Width of each fused sequence.
    n_outputs : int or None
        Output features; defaults to the summed HM, EB and VO input widths.
    """

    def __init__(
        self,
        d_model=16,
        d_k=8,
        d_v=8,
        d_fused=16,
        num_heads=1,
        kernel_width=3,
        ff_hidden=32,
        use_layer_norm=True,
        use_feed_forward=True,
        te_period=60.0,
        horizon=1.0,
        n_outputs=None,
        n_pred_steps=1,
        random_state=0,
    ):
        self.d_model = d_model
        self.d_k = d_k
        self.d_v = d_v
        self.d_fused = d_fused
        self.num_heads = num_heads
        self.kernel_width = kernel_width
        self.ff_hidden = ff_hidden
        self.use_layer_norm = use_layer_norm
        self.use_feed_forward = use_feed_forward
        self.te_period = te_period
        self.horizon = horizon
        self.n_outputs = n_outputs
        self.n_pred_steps = n_pred_steps
        self.random_state = random_state

    def fit(self, X, y=None):
        seqs = _coerce_inputs(X)
        if self.d_model % 2:
            raise ValueError(f"d_model must be even, got {self.d_model}")
        rng = np.random.default_rng(self.random_state)

        def draw(*shape):
            return rng.uniform(-0.1, 0.1, size=shape)

        self.n_features_in_ = {m: seqs[m].n_features for m in MODALITIES}
        self.align_kernels_ = {m: draw(self.kernel_width, self.n_features_in_[m], self.d_model) for m in MODALITIES}
        self.align_bias_ = {m: np.zeros(self.d_model) for m in MODALITIES}
        self.cores_ = {}
        for host in MODALITIES:
            cross = {
                src: AttentionParams(src, host, draw(self.d_model, self.d_k), draw(self.d_model, self.d_k), draw(self.d_model, self.d_v))
                for src in _other_modalities(host)
            }
            own = AttentionParams(host, host, draw(self.d_model, self.d_k), draw(self.d_model, self.d_k), draw(self.d_model, self.d_v))
            ln = LayerNormParams(np.ones(self.d_model), np.zeros(self.d_model)) if self.use_layer_norm else None
            ff = None
            if self.use_feed_forward:
                ff = {
                    m: FeedForwardParams(draw(self.d_v, self.ff_hidden), np.zeros(self.ff_hidden), draw(self.ff_hidden, self.d_v), np.zeros(self.d_v))
                    for m in MODALITIES
                }
            self.cores_[host] = FusionCoreParams(
                host, cross, own, draw(4 * self.d_v, self.d_fused), self.num_heads, ln, ff
            )
        n_out = self.n_outputs or sum(self.n_features_in_[m] for m in TARGET_MODALITIES)
        self.fc_weights_ = draw(4 * self.d_fused, n_out)
        self.fc_bias_ = np.zeros(n_out)
        return self

    def encode(self, X):
        check_is_fitted(self, "cores_")
        seqs = _coerce_inputs(X)
        encoded = {}
        for m, seq in seqs.items():
            if seq.n_features != self.n_features_in_[m]:
                raise ValueError(f"{m.value} has {seq.n_features} features, fitted on {self.n_features_in_[m]}")
            aligned = align_dimensions(seq, self.align_kernels_[m], self.d_model, self.align_bias_[m])
            pe = positional_encoding(seq.n_steps, self.d_model)
            te = timestamp_encoding(seq.timestamps, self.d_model, self.te_period)
            encoded[m] = encode_modality(aligned, pe, te, modality=m)
        return encoded

    def fuse(self, X):
        encoded = self.encode(X)
        return {
            host: fusion_core(encoded[host], [encoded[m] for m in _other_modalities(host)], self.cores_[host])
            for host in MODALITIES
        }

    def transform(self, X):
        fused = self.fuse(X)
        return np.concatenate([fused[m] for m in MODALITIES], axis=1)

    def predict(self, X):
        fused = self.fuse(X)
        out = predict([fused[m] for m in MODALITIES], self.fc_weights_, self.fc_bias_, self.horizon)
        return PredictionTarget(self.horizon, out.values[-self.n_pred_steps :])

    def score(self, X, y):
        """Negative MAE of the prediction against ``y`` (higher is better)."""
        return -mae(self.predict(X).values, y)

    def export_weights(self):
        check_is_fitted(self, "cores_")
        return {
            "align": {
                m.value: {"kernel": self.align_kernels_[m].tolist(), "bias": self.align_bias_[m].tolist()}
                for m in MODALITIES
            },
            "cores": {m.value: self.cores_[m].to_dict() for m in MODALITIES},
            "fc": {"weights": self.fc_weights_.tolist(), "bias": self.fc_bias_.tolist()},
        }

    def load_weights(self, weights):
        """Install weights from :meth:`export_weights` output (dict or JSON text)."""
        if isinstance(weights, str):
            weights = json.loads(weights)
        self.align_kernels_ = {_modality(k): np.asarray(v["kernel"], float) for k, v in weights["align"].items()}
        self.align_bias_ = {_modality(k): np.asarray(v["bias"], float) for k, v in weights["align"].items()}
        self.n_features_in_ = {m: k.shape[1] for m, k in self.align_kernels_.items()}
        self.cores_ = {_modality(k): FusionCoreParams.from_dict(v) for k, v in weights["cores"].items()}
        self.fc_weights_ = np.asarray(weights["fc"]["weights"], float)
        self.fc_bias_ = np.asarray(weights["fc"]["bias"], float)
        return self


def load_modal_sequences(path):
    """Read a JSON list of ``{"modality", "data", "timestamps"}`` objects."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if isinstance(payload, dict):
        payload = payload.get("sequences", [payload])
    return {s.modality: s for s in map(ModalSequence.from_dict, payload)}
