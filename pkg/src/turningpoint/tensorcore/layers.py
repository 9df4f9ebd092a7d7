"""Recurrent, attention, and classifier layers built on the autograd core."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ContractError, ShapeError
from . import autograd as ag
from .autograd import EPS_PROB, Tensor, as_tensor


@dataclass
class LstmParams:
    """Fused gate parameters for one LSTM direction.

    w is (4S, input_dim), u is (4S, S), b is (4S,); gate order along the 4S
    axis is (input, forget, cell, output).
    """

    input_dim: int
    hidden_dim: int
    w: Tensor
    u: Tensor
    b: Tensor

    def tensors(self) -> list[Tensor]:
        return [self.w, self.u, self.b]


@dataclass
class AttentionParams:
    w_h: Tensor  # (2S,)
    b_h: Tensor  # scalar

    def tensors(self) -> list[Tensor]:
        return [self.w_h, self.b_h]


def init_lstm(input_dim: int, hidden_dim: int, rng: np.random.Generator) -> LstmParams:
    bound = 1.0 / np.sqrt(hidden_dim)
    shape_w = (4 * hidden_dim, input_dim)
    shape_u = (4 * hidden_dim, hidden_dim)
    return LstmParams(
        input_dim=input_dim,
        hidden_dim=hidden_dim,
        w=ag.parameter(rng.uniform(-bound, bound, shape_w)),
        u=ag.parameter(rng.uniform(-bound, bound, shape_u)),
        b=ag.parameter(np.zeros(4 * hidden_dim)),
    )


def zero_lstm(input_dim: int, hidden_dim: int) -> LstmParams:
    return LstmParams(
        input_dim=input_dim,
        hidden_dim=hidden_dim,
        w=ag.parameter(np.zeros((4 * hidden_dim, input_dim))),
        u=ag.parameter(np.zeros((4 * hidden_dim, hidden_dim))),
        b=ag.parameter(np.zeros(4 * hidden_dim)),
    )


def init_attention(width: int, rng: np.random.Generator) -> AttentionParams:
    bound = 1.0 / np.sqrt(width)
    return AttentionParams(
        w_h=ag.parameter(rng.uniform(-bound, bound, width)),
        b_h=ag.parameter(0.0),
    )


def _lstm_direction(params: LstmParams, seq: Sequence[Tensor]) -> list[Tensor]:
    s = params.hidden_dim
    dtype = seq[0].dtype
    h = as_tensor(np.zeros(s, dtype=dtype))
    c = as_tensor(np.zeros(s, dtype=dtype))
    states = []
    for x in seq:
        hc = ag.lstm_cell(params.w, params.u, params.b, x, h, c)
        h = ag.slice1d(hc, 0, s)
        c = ag.slice1d(hc, s, 2 * s)
        states.append(h)
    return states


def bilstm_forward(
    params_fwd: LstmParams, params_bwd: LstmParams, seq: Sequence[Tensor | np.ndarray]
) -> list[Tensor]:
    """Contextualize a sequence; element i becomes [fwd h_i ; bwd h_i] (2S,).

    Both directions start from zero states. Input vectors must match the
    params' input_dim.
    """
    if len(seq) == 0:
        raise ContractError("bilstm_forward needs a non-empty sequence")
    xs = [as_tensor(x) for x in seq]
    for x in xs:
        if x.shape != (params_fwd.input_dim,):
            raise ShapeError(
                f"sequence element shape {x.shape} does not match input_dim {params_fwd.input_dim}"
            )
    fwd = _lstm_direction(params_fwd, xs)
    bwd = list(reversed(_lstm_direction(params_bwd, list(reversed(xs)))))
    return [ag.concat([f, b]) for f, b in zip(fwd, bwd)]


def attention_pool(params: AttentionParams, hs: Sequence[Tensor] | Tensor) -> Tensor:
    """Softmax-weighted sum of vectors; weights from tanh(w_h . h_j + b_h)."""
    mat = hs if isinstance(hs, Tensor) else ag.stack_rows(list(hs))
    if mat.data.ndim != 2 or mat.shape[0] == 0:
        raise ContractError(f"attention_pool needs a non-empty (n, d) input, got {mat.shape}")
    scores = ag.tanh(ag.add(ag.matvec(mat, params.w_h), params.b_h))
    weights = ag.softmax(scores)
    return ag.vecmat(weights, mat)


def attention_weights(params: AttentionParams, hs: Sequence[Tensor] | Tensor) -> np.ndarray:
    mat = hs if isinstance(hs, Tensor) else ag.stack_rows(list(hs))
    scores = ag.tanh(ag.add(ag.matvec(mat, params.w_h), params.b_h))
    return ag.softmax(scores).data


def dense_sigmoid(w: Tensor, b: Tensor, x: Tensor | np.ndarray) -> Tensor:
    """Single-neuron classifier: sigmoid(w . x + b), a probability in (0,1).

    Output is clamped to [EPS_PROB, 1 - EPS_PROB] so saturated logits stay
    strictly inside the open interval even in float32.
    """
    x = as_tensor(x)
    return ag.clamp(ag.sigmoid(ag.add(ag.dot(w, x), b)), EPS_PROB, 1.0 - EPS_PROB)


def dense_sigmoid_rows(w: Tensor, b: Tensor, x_rows: Tensor) -> Tensor:
    """Row-wise classifier probabilities for an (n, d) feature matrix."""
    return ag.clamp(ag.sigmoid(ag.add(ag.matvec(x_rows, w), b)), EPS_PROB, 1.0 - EPS_PROB)


def weighted_bce(p: Tensor | float, y: int, w_pos: float, w_neg: float) -> Tensor:
    """Class-weighted binary cross-entropy for a single prediction.

    The probability is clamped to [EPS_PROB, 1 - EPS_PROB] before the log.
    """
    if y not in (0, 1):
        raise ContractError(f"label must be 0 or 1, got {y!r}")
    if w_pos <= 0 or w_neg <= 0:
        raise ContractError("class weights must be positive")
    p = as_tensor(p)
    pc = ag.clamp(p, EPS_PROB, 1.0 - EPS_PROB)
    if y == 1:
        return ag.neg(ag.mul(ag.log(pc), as_tensor(w_pos)))
    return ag.neg(ag.mul(ag.log(ag.sub(as_tensor(1.0), pc)), as_tensor(w_neg)))


def weighted_bce_mean(
    probs: Tensor, labels: np.ndarray, w_pos: float, w_neg: float
) -> Tensor:
    """Mean class-weighted BCE over a (n,) probability vector."""
    labels = np.asarray(labels)
    if probs.shape != labels.shape:
        raise ShapeError(f"probability shape {probs.shape} != label shape {labels.shape}")
    dtype = probs.dtype
    y = labels.astype(dtype)
    pos_w = (y * w_pos).astype(dtype)
    neg_w = ((1.0 - y) * w_neg).astype(dtype)
    pc = ag.clamp(probs, EPS_PROB, 1.0 - EPS_PROB)
    pos_term = ag.mul(ag.log(pc), as_tensor(pos_w))
    neg_term = ag.mul(ag.log(ag.sub(as_tensor(np.asarray(1.0, dtype=dtype)), pc)), as_tensor(neg_w))
    return ag.neg(ag.mean(ag.add(pos_term, neg_term)))


def dropout(
    x: Tensor, rate: float, rng: np.random.Generator | None, training: bool
) -> Tensor:
    """Inverted dropout: zero with probability `rate`, scale survivors."""
    if not 0.0 <= rate < 1.0:
        raise ContractError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return as_tensor(x)
    if rng is None:
        raise ContractError("training-mode dropout needs an rng")
    x = as_tensor(x)
    mask = (rng.random(x.shape) >= rate).astype(x.data.dtype) / (1.0 - rate)
    return ag.mul(x, as_tensor(mask))
