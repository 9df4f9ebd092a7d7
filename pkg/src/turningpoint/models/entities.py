"""Token-to-vector plumbing for the entity-aware model variants."""

from __future__ import annotations

import numpy as np

from ..corpus import Movie
from ..embedstore import WordVectorTable
from ..errors import ConfigError
from ..text import tokenize


def sentence_token_matrices(
    sentences, word_table: WordVectorTable | None
) -> list[np.ndarray]:
    """One (T_i, dim) matrix per sentence; empty sentences give (0, dim)."""
    if word_table is None:
        raise ConfigError("entity variants need a word-vector table")
    out = []
    for sentence in sentences:
        tokens = tokenize(sentence)
        if tokens:
            out.append(np.stack([word_table.lookup(t) for t in tokens]))
        else:
            out.append(np.zeros((0, word_table.dim), dtype=np.float32))
    return out


def movie_entity_tokens(
    movie: Movie, word_table: WordVectorTable | None
) -> tuple[list[list[np.ndarray]], list[np.ndarray]]:
    """Per-scene sentence token matrices and synopsis token matrices."""
    scenes = [
        sentence_token_matrices(scene.sentences, word_table) for scene in movie.screenplay
    ]
    synopsis = sentence_token_matrices(movie.synopsis, word_table)
    return scenes, synopsis
