"""Composition: predict TP sentences in the synopsis, then project them
onto screenplay scenes."""

from __future__ import annotations

import numpy as np

from ..corpus import Movie
from ..embedstore import EmbeddingStore, scene_matrices, synopsis_matrix, WordVectorTable
from ..supervision import TpStats
from .inference import infer_scene_tps, infer_synopsis_tps
from .screenplay import ScreenplayModel
from .synopsis import SynopsisModel
from .trace import PosteriorTrace
from .entities import movie_entity_tokens, sentence_token_matrices


def predict_synopsis_trace(
    model: SynopsisModel,
    movie: Movie,
    store: EmbeddingStore,
    stats: TpStats,
    word_table: WordVectorTable | None = None,
) -> PosteriorTrace:
    x = synopsis_matrix(store, movie)
    tokens = None
    if model.config.uses_entities:
        tokens = sentence_token_matrices(movie.synopsis, word_table)
    probs = model.forward(x, entity_tokens=tokens, training=False).data
    selected = infer_synopsis_tps(probs, stats)
    return PosteriorTrace(movie.id, "synopsis", probs.astype(np.float64), selected)


def predict_screenplay_trace(
    model: ScreenplayModel,
    movie: Movie,
    store: EmbeddingStore,
    tp_indices: list[int],
    word_table: WordVectorTable | None = None,
) -> PosteriorTrace:
    scene_vecs = scene_matrices(store, movie)
    syn = synopsis_matrix(store, movie)
    tp_vectors = [syn[i] for i in tp_indices]
    scene_tokens = tp_tokens = None
    if model.config.uses_entities:
        scene_tokens, _ = movie_entity_tokens(movie, word_table)
        tp_tokens = [
            sentence_token_matrices([movie.synopsis[i]], word_table)[0] for i in tp_indices
        ]
    matrix = model.forward(
        scene_vecs,
        tp_vectors,
        scene_entity_tokens=scene_tokens,
        tp_entity_tokens=tp_tokens,
        training=False,
    ).data
    selected = infer_scene_tps(matrix, model.config.neighborhood_radius)
    return PosteriorTrace(movie.id, "screenplay", matrix.astype(np.float64), selected)


def end_to_end(
    synopsis_model: SynopsisModel,
    screenplay_model: ScreenplayModel,
    movie: Movie,
    store: EmbeddingStore,
    stats: TpStats,
    word_table: WordVectorTable | None = None,
    gold_tp_indices: list[int] | None = None,
) -> PosteriorTrace:
    """Screenplay trace from predicted (or, in bypass mode, gold) TP sentences."""
    if gold_tp_indices is not None:
        tp_indices = list(gold_tp_indices)
    else:
        syn_trace = predict_synopsis_trace(synopsis_model, movie, store, stats, word_table)
        tp_indices = list(syn_trace.selected)
    return predict_screenplay_trace(screenplay_model, movie, store, tp_indices, word_table)
