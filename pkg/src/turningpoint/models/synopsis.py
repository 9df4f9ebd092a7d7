"""Sentence-level turning point classifiers over synopsis embeddings.

Variants
  baseline          score each sentence embedding directly
  cam               contextualize with one BiLSTM first
  tam               cam plus left/right context-interaction features
  tam+views         five parallel encoders (one per TP), concatenated
  tam+entities      entity-aware sentence vectors appended before encoding
  tam+views+entities  both extensions together
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import N_TURNING_POINTS
from ..errors import ConfigError, ContractError
from ..tensorcore import (
    AttentionParams,
    LstmParams,
    Tensor,
    as_tensor,
    attention_pool,
    bilstm_forward,
    dense_sigmoid_rows,
    dropout,
    init_attention,
    init_lstm,
    zero_lstm,
)
from ..tensorcore import autograd as ag
from .interaction import batched_interaction, window_average_matrix

SYNOPSIS_VARIANTS = (
    "baseline",
    "cam",
    "tam",
    "tam+views",
    "tam+entities",
    "tam+views+entities",
)


@dataclass
class SynopsisModelConfig:
    variant: str
    input_dim: int
    lstm_hidden: int = 32
    window: int = 2
    entity_dim: int = 300
    entity_hidden: int = 32
    dropout: float = 0.2
    interaction_mode: str = "ratio"

    def __post_init__(self) -> None:
        self.variant = self.variant.lower()
        if self.variant not in SYNOPSIS_VARIANTS:
            raise ConfigError(f"unknown synopsis variant {self.variant!r}")
        if self.window < 1 or self.lstm_hidden < 1 or self.input_dim < 1:
            raise ConfigError("window, lstm_hidden and input_dim must be >= 1")

    @property
    def uses_entities(self) -> bool:
        return "entities" in self.variant

    @property
    def n_views(self) -> int:
        return N_TURNING_POINTS if "views" in self.variant else 1

    @property
    def encoder_input_dim(self) -> int:
        extra = 2 * self.entity_hidden if self.uses_entities else 0
        return self.input_dim + extra

    @property
    def feature_dim(self) -> int:
        if self.variant == "baseline":
            return self.input_dim
        d = 2 * self.lstm_hidden
        if self.variant == "cam":
            return d
        per_view = 2 * (3 * d + 2) + d  # [fl ; fr ; cp]
        return per_view * self.n_views


@dataclass
class _EntityEncoder:
    fwd: LstmParams
    bwd: LstmParams
    attn: AttentionParams


class SynopsisModel:
    """Holds all trainable tensors for one variant and runs the forward pass."""

    def __init__(self, config: SynopsisModelConfig, seed: int = 0, zero_init: bool = False):
        self.config = config
        rng = np.random.default_rng(seed)
        cfg = config
        self.encoders: list[tuple[LstmParams, LstmParams]] = []
        if cfg.variant != "baseline":
            for _ in range(cfg.n_views):
                if zero_init:
                    pair = (
                        zero_lstm(cfg.encoder_input_dim, cfg.lstm_hidden),
                        zero_lstm(cfg.encoder_input_dim, cfg.lstm_hidden),
                    )
                else:
                    pair = (
                        init_lstm(cfg.encoder_input_dim, cfg.lstm_hidden, rng),
                        init_lstm(cfg.encoder_input_dim, cfg.lstm_hidden, rng),
                    )
                self.encoders.append(pair)
        self.entity: _EntityEncoder | None = None
        if cfg.uses_entities:
            if zero_init:
                self.entity = _EntityEncoder(
                    fwd=zero_lstm(cfg.entity_dim, cfg.entity_hidden),
                    bwd=zero_lstm(cfg.entity_dim, cfg.entity_hidden),
                    attn=AttentionParams(
                        w_h=ag.parameter(np.zeros(2 * cfg.entity_hidden)),
                        b_h=ag.parameter(0.0),
                    ),
                )
            else:
                self.entity = _EntityEncoder(
                    fwd=init_lstm(cfg.entity_dim, cfg.entity_hidden, rng),
                    bwd=init_lstm(cfg.entity_dim, cfg.entity_hidden, rng),
                    attn=init_attention(2 * cfg.entity_hidden, rng),
                )
        if zero_init:
            self.cls_w = ag.parameter(np.zeros(cfg.feature_dim))
            self.cls_b = ag.parameter(0.0)
        else:
            bound = 1.0 / np.sqrt(cfg.feature_dim)
            self.cls_w = ag.parameter(rng.uniform(-bound, bound, cfg.feature_dim))
            self.cls_b = ag.parameter(0.0)

    def parameters(self) -> list[tuple[str, Tensor]]:
        named: list[tuple[str, Tensor]] = []
        for v, (fwd, bwd) in enumerate(self.encoders):
            for tag, p in (("fwd", fwd), ("bwd", bwd)):
                named.append((f"enc{v}.{tag}.w", p.w))
                named.append((f"enc{v}.{tag}.u", p.u))
                named.append((f"enc{v}.{tag}.b", p.b))
        if self.entity is not None:
            for tag, p in (("fwd", self.entity.fwd), ("bwd", self.entity.bwd)):
                named.append((f"ent.{tag}.w", p.w))
                named.append((f"ent.{tag}.u", p.u))
                named.append((f"ent.{tag}.b", p.b))
            named.append(("ent.attn.w_h", self.entity.attn.w_h))
            named.append(("ent.attn.b_h", self.entity.attn.b_h))
        named.append(("cls.w", self.cls_w))
        named.append(("cls.b", self.cls_b))
        return named

    def tensors(self) -> list[Tensor]:
        return [t for _, t in self.parameters()]

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        for name, tensor in self.parameters():
            if name not in state:
                raise ConfigError(f"checkpoint is missing parameter {name!r}")
            if state[name].shape != tensor.data.shape:
                raise ConfigError(
                    f"parameter {name!r} has shape {state[name].shape}, expected {tensor.data.shape}"
                )
            tensor.data = state[name].astype(np.float32, copy=True)

    def _entity_vectors(self, token_matrices: list[np.ndarray], dtype) -> list[Tensor]:
        assert self.entity is not None
        out = []
        zero = np.zeros(2 * self.config.entity_hidden, dtype=dtype)
        for mat in token_matrices:
            mat = np.asarray(mat, dtype=dtype)
            if mat.size == 0:
                out.append(as_tensor(zero))
                continue
            states = bilstm_forward(self.entity.fwd, self.entity.bwd, list(mat))
            out.append(attention_pool(self.entity.attn, states))
        return out

    def forward(
        self,
        x: np.ndarray,
        entity_tokens: list[np.ndarray] | None = None,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """Per-sentence TP probabilities for one synopsis, shape (N,)."""
        cfg = self.config
        x = np.asarray(x)
        if x.ndim != 2 or x.shape[1] != cfg.input_dim:
            raise ContractError(f"expected (N, {cfg.input_dim}) embeddings, got {x.shape}")
        n = x.shape[0]
        if n < 1:
            raise ContractError("synopsis must have at least one sentence")
        if cfg.uses_entities and entity_tokens is None:
            raise ConfigError(f"variant {cfg.variant!r} needs entity token vectors")
        if cfg.uses_entities and len(entity_tokens) != n:
            raise ContractError(
                f"got {len(entity_tokens)} entity token matrices for {n} sentences"
            )

        if cfg.variant == "baseline":
            features = as_tensor(x)
            return dense_sigmoid_rows(self.cls_w, self.cls_b, self._drop(features, training, rng))

        if cfg.uses_entities:
            ents = self._entity_vectors(entity_tokens, x.dtype)
            inputs = [ag.concat([as_tensor(x[i]), ents[i]]) for i in range(n)]
        else:
            inputs = [as_tensor(x[i]) for i in range(n)]

        view_features = []
        left = as_tensor(window_average_matrix(n, cfg.window, "left").astype(x.dtype))
        right = as_tensor(window_average_matrix(n, cfg.window, "right").astype(x.dtype))
        for fwd, bwd in self.encoders:
            cp = ag.stack_rows(bilstm_forward(fwd, bwd, inputs))
            if cfg.variant == "cam":
                view_features.append(cp)
                continue
            lc = ag.matmul(left, cp)
            rc = ag.matmul(right, cp)
            fl = batched_interaction(cp, lc, cfg.interaction_mode)
            fr = batched_interaction(cp, rc, cfg.interaction_mode)
            view_features.append(ag.hconcat([fl, fr, cp]))
        features = view_features[0] if len(view_features) == 1 else ag.hconcat(view_features)
        return dense_sigmoid_rows(self.cls_w, self.cls_b, self._drop(features, training, rng))

    def _drop(self, features: Tensor, training: bool, rng) -> Tensor:
        return dropout(features, self.config.dropout, rng, training)


def forward_synopsis(
    model: SynopsisModel,
    x: np.ndarray,
    entity_tokens: list[np.ndarray] | None = None,
) -> np.ndarray:
    """Inference-mode probabilities as a plain (N,) array."""
    return model.forward(x, entity_tokens=entity_tokens, training=False).data
