"""Scene-level turning point classifiers over screenplay embeddings.

Scenes are encoded from their sentence vectors (BiLSTM + attention pooling)
and contextualized by a screenplay-level BiLSTM. Each (scene, TP) pair is
scored from the scene representation, the TP sentence vector, and their
interaction features; the TAM variant first widens each scene with the mean
of its left and right context windows (a fixed fraction of the screenplay
length).
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
from .interaction import rows_vs_vector_interaction, window_average_matrix

SCREENPLAY_VARIANTS = ("cam", "tam", "cam+entities", "tam+entities")


@dataclass
class ScreenplayModelConfig:
    variant: str
    input_dim: int
    lstm_hidden: int = 64
    window_fraction: float = 0.20
    neighborhood_radius: int = 1
    entity_dim: int = 300
    entity_hidden: int = 64
    dropout: float = 0.2
    interaction_mode: str = "ratio"

    def __post_init__(self) -> None:
        self.variant = self.variant.lower()
        if self.variant not in SCREENPLAY_VARIANTS:
            raise ConfigError(f"unknown screenplay variant {self.variant!r}")
        if not 0.0 < self.window_fraction < 1.0:
            raise ConfigError(f"window_fraction must be in (0, 1), got {self.window_fraction}")
        if self.input_dim < 1 or self.lstm_hidden < 1:
            raise ConfigError("input_dim and lstm_hidden must be >= 1")

    @property
    def uses_entities(self) -> bool:
        return "entities" in self.variant

    @property
    def tp_dim(self) -> int:
        extra = 2 * self.entity_hidden if self.uses_entities else 0
        return self.input_dim + extra

    @property
    def scene_input_dim(self) -> int:
        return self.tp_dim

    @property
    def scene_dim(self) -> int:
        return 2 * self.lstm_hidden

    @property
    def context_dim(self) -> int:
        if self.variant.startswith("tam"):
            return 3 * self.scene_dim  # [lc ; sc ; rc]
        return self.scene_dim

    @property
    def feature_dim(self) -> int:
        return self.context_dim + 2 * self.tp_dim + 2  # [z ; tp ; b ; c ; u]

    def window_length(self, n_scenes: int) -> int:
        return max(1, int(self.window_fraction * n_scenes))


@dataclass
class _EntityEncoder:
    fwd: LstmParams
    bwd: LstmParams
    attn: AttentionParams


class ScreenplayModel:
    def __init__(self, config: ScreenplayModelConfig, seed: int = 0, zero_init: bool = False):
        self.config = config
        cfg = config
        rng = np.random.default_rng(seed)

        def lstm(in_dim: int, hidden: int) -> LstmParams:
            return zero_lstm(in_dim, hidden) if zero_init else init_lstm(in_dim, hidden, rng)

        def attention(width: int) -> AttentionParams:
            if zero_init:
                return AttentionParams(w_h=ag.parameter(np.zeros(width)), b_h=ag.parameter(0.0))
            return init_attention(width, rng)

        self.scene_fwd = lstm(cfg.scene_input_dim, cfg.lstm_hidden)
        self.scene_bwd = lstm(cfg.scene_input_dim, cfg.lstm_hidden)
        self.scene_attn = attention(cfg.scene_dim)
        self.script_fwd = lstm(cfg.scene_dim, cfg.lstm_hidden)
        self.script_bwd = lstm(cfg.scene_dim, cfg.lstm_hidden)
        if zero_init:
            self.proj = ag.parameter(np.zeros((cfg.tp_dim, cfg.context_dim)))
            self.cls_w = ag.parameter(np.zeros(cfg.feature_dim))
            self.cls_b = ag.parameter(0.0)
        else:
            bound = 1.0 / np.sqrt(cfg.context_dim)
            self.proj = ag.parameter(rng.uniform(-bound, bound, (cfg.tp_dim, cfg.context_dim)))
            bound = 1.0 / np.sqrt(cfg.feature_dim)
            self.cls_w = ag.parameter(rng.uniform(-bound, bound, cfg.feature_dim))
            self.cls_b = ag.parameter(0.0)
        self.entity: _EntityEncoder | None = None
        if cfg.uses_entities:
            self.entity = _EntityEncoder(
                fwd=lstm(cfg.entity_dim, cfg.entity_hidden),
                bwd=lstm(cfg.entity_dim, cfg.entity_hidden),
                attn=attention(2 * cfg.entity_hidden),
            )

    def parameters(self) -> list[tuple[str, Tensor]]:
        named: list[tuple[str, Tensor]] = []
        for tag, p in (
            ("scene.fwd", self.scene_fwd),
            ("scene.bwd", self.scene_bwd),
            ("script.fwd", self.script_fwd),
            ("script.bwd", self.script_bwd),
        ):
            named.append((f"{tag}.w", p.w))
            named.append((f"{tag}.u", p.u))
            named.append((f"{tag}.b", p.b))
        named.append(("scene.attn.w_h", self.scene_attn.w_h))
        named.append(("scene.attn.b_h", self.scene_attn.b_h))
        if self.entity is not None:
            for tag, p in (("ent.fwd", self.entity.fwd), ("ent.bwd", self.entity.bwd)):
                named.append((f"{tag}.w", p.w))
                named.append((f"{tag}.u", p.u))
                named.append((f"{tag}.b", p.b))
            named.append(("ent.attn.w_h", self.entity.attn.w_h))
            named.append(("ent.attn.b_h", self.entity.attn.b_h))
        named.append(("proj", self.proj))
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

    def entity_vector(self, token_matrix: np.ndarray, dtype=np.float32) -> Tensor:
        """Attention-pooled entity representation of one sentence."""
        if self.entity is None:
            raise ConfigError(f"variant {self.config.variant!r} has no entity encoder")
        mat = np.asarray(token_matrix, dtype=dtype)
        if mat.size == 0:
            return as_tensor(np.zeros(2 * self.config.entity_hidden, dtype=dtype))
        states = bilstm_forward(self.entity.fwd, self.entity.bwd, list(mat))
        return attention_pool(self.entity.attn, states)

    def scene_encode(self, sentence_vectors: np.ndarray | list[Tensor]) -> Tensor:
        """Scene vector: attention-pooled BiLSTM states of its sentences."""
        if isinstance(sentence_vectors, np.ndarray):
            if sentence_vectors.ndim != 2 or sentence_vectors.shape[0] == 0:
                raise ContractError(
                    f"scene needs a non-empty (k, {self.config.scene_input_dim}) matrix, "
                    f"got {sentence_vectors.shape}"
                )
            sentence_vectors = [as_tensor(v) for v in sentence_vectors]
        if not sentence_vectors:
            raise ContractError("scene_encode needs at least one sentence vector")
        states = bilstm_forward(self.scene_fwd, self.scene_bwd, sentence_vectors)
        return attention_pool(self.scene_attn, states)

    def forward_scenes(
        self,
        scene_vectors: list[Tensor],
        tp_vectors: list[Tensor | np.ndarray],
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """(5, M) relevance probabilities from encoded scene vectors."""
        cfg = self.config
        m = len(scene_vectors)
        if m < 1:
            raise ContractError("screenplay must have at least one scene")
        if len(tp_vectors) != N_TURNING_POINTS:
            raise ContractError(f"need exactly 5 TP vectors, got {len(tp_vectors)}")
        tp_vectors = [as_tensor(v) for v in tp_vectors]
        for v in tp_vectors:
            if v.shape != (cfg.tp_dim,):
                raise ContractError(f"TP vector shape {v.shape}, expected ({cfg.tp_dim},)")

        sc = ag.stack_rows(bilstm_forward(self.script_fwd, self.script_bwd, scene_vectors))
        if cfg.variant.startswith("tam"):
            window = cfg.window_length(m)
            dtype = sc.data.dtype
            lc = ag.matmul(as_tensor(window_average_matrix(m, window, "left").astype(dtype)), sc)
            rc = ag.matmul(as_tensor(window_average_matrix(m, window, "right").astype(dtype)), sc)
            z = ag.hconcat([lc, sc, rc])
        else:
            z = sc
        z_proj = ag.matmul(z, ag.transpose(self.proj))

        rows = []
        for tp_vec in tp_vectors:
            b, c, u = rows_vs_vector_interaction(z_proj, tp_vec, cfg.interaction_mode)
            feats = ag.hconcat([z, ag.tile_rows(tp_vec, m), b, c, u])
            feats = dropout(feats, cfg.dropout, rng, training)
            rows.append(dense_sigmoid_rows(self.cls_w, self.cls_b, feats))
        return ag.stack_rows(rows)

    def forward(
        self,
        scene_sentence_vectors: list[np.ndarray],
        tp_vectors: list[np.ndarray],
        scene_entity_tokens: list[list[np.ndarray]] | None = None,
        tp_entity_tokens: list[np.ndarray] | None = None,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        """Full pass from per-scene sentence matrices, shape (5, M)."""
        cfg = self.config
        if cfg.uses_entities:
            if scene_entity_tokens is None or tp_entity_tokens is None:
                raise ConfigError(f"variant {cfg.variant!r} needs entity token matrices")
            dtype = np.asarray(scene_sentence_vectors[0]).dtype
            scene_vecs = []
            for mat, toks in zip(scene_sentence_vectors, scene_entity_tokens):
                mat = np.asarray(mat, dtype=dtype)
                sent_tensors = [
                    ag.concat([as_tensor(mat[j]), self.entity_vector(toks[j], dtype)])
                    for j in range(mat.shape[0])
                ]
                scene_vecs.append(self.scene_encode(sent_tensors))
            tps = [
                ag.concat([as_tensor(np.asarray(v, dtype=dtype)), self.entity_vector(t, dtype)])
                for v, t in zip(tp_vectors, tp_entity_tokens)
            ]
        else:
            scene_vecs = [self.scene_encode(np.asarray(mat)) for mat in scene_sentence_vectors]
            tps = [as_tensor(np.asarray(v)) for v in tp_vectors]
        return self.forward_scenes(scene_vecs, tps, training=training, rng=rng)


def forward_screenplay(
    model: ScreenplayModel,
    scene_sentence_vectors: list[np.ndarray],
    tp_vectors: list[np.ndarray],
    **kwargs,
) -> np.ndarray:
    """Inference-mode (5, M) probability matrix as a plain array."""
    return model.forward(scene_sentence_vectors, tp_vectors, training=False, **kwargs).data
