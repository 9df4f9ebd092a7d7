"""Reverse-mode differentiable numerical core: autograd, layers, Adam, checkpoints."""

from .autograd import (
    EPS_DENOM,
    EPS_PROB,
    LOGIT_CLAMP,
    Tensor,
    as_tensor,
    backward,
    parameter,
    zero_grads,
)
from .checkpoint import load_params, save_params
from .layers import (
    AttentionParams,
    LstmParams,
    attention_pool,
    attention_weights,
    bilstm_forward,
    dense_sigmoid,
    dense_sigmoid_rows,
    dropout,
    init_attention,
    init_lstm,
    weighted_bce,
    weighted_bce_mean,
    zero_lstm,
)
from .optim import AdamState, adam_step

__all__ = [
    "EPS_DENOM",
    "EPS_PROB",
    "LOGIT_CLAMP",
    "Tensor",
    "as_tensor",
    "backward",
    "parameter",
    "zero_grads",
    "load_params",
    "save_params",
    "AttentionParams",
    "LstmParams",
    "attention_pool",
    "attention_weights",
    "bilstm_forward",
    "dense_sigmoid",
    "dense_sigmoid_rows",
    "dropout",
    "init_attention",
    "init_lstm",
    "weighted_bce",
    "weighted_bce_mean",
    "zero_lstm",
    "AdamState",
    "adam_step",
]
