"""Sentence encoders. Heavy backends load lazily and fail fast when their
packages or weights are unavailable."""

from __future__ import annotations

import re

import numpy as np

from . import ExportError

ENCODER_CHOICES = ("word-average", "bert-class", "universal-sentence-encoder")

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def _tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if len(t) >= 2]


class WordAverageEncoder:
    """Mean of known word vectors; empty or all-unknown sentences map to zero."""

    def __init__(self, dim: int, entries: dict[str, np.ndarray]):
        self.name = "word-average"
        self.dim = dim
        self.entries = entries

    def encode(self, sentences: list[str]) -> np.ndarray:
        out = np.zeros((len(sentences), self.dim), dtype=np.float32)
        for row, sentence in enumerate(sentences):
            hits = [self.entries[t] for t in _tokenize(sentence) if t in self.entries]
            if hits:
                out[row] = np.mean(hits, axis=0)
        return out


class BertClassEncoder:
    def __init__(self, model_name: str = "all-MiniLM-L6-v2"):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ExportError(
                "bert-class encoder needs the sentence-transformers package"
            ) from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise ExportError(f"could not load encoder model {model_name!r}: {exc}") from exc
        self.name = f"bert-class:{model_name}"
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, sentences: list[str]) -> np.ndarray:
        vecs = self._model.encode(
            sentences, convert_to_numpy=True, show_progress_bar=False, batch_size=64
        )
        return np.asarray(vecs, dtype=np.float32)


class UniversalSentenceEncoder:
    HUB_URL = "https://tfhub.dev/google/universal-sentence-encoder/4"

    def __init__(self, hub_url: str | None = None):
        try:
            import tensorflow_hub as hub
        except ImportError as exc:
            raise ExportError(
                "universal-sentence-encoder needs tensorflow and tensorflow-hub"
            ) from exc
        try:
            self._model = hub.load(hub_url or self.HUB_URL)
        except Exception as exc:
            raise ExportError(f"could not load the sentence encoder module: {exc}") from exc
        self.name = "universal-sentence-encoder"
        probe = np.asarray(self._model(["probe"]))
        self.dim = int(probe.shape[1])

    def encode(self, sentences: list[str]) -> np.ndarray:
        return np.asarray(self._model(sentences), dtype=np.float32)


def build_encoder(choice: str, word_table: tuple[int, dict[str, np.ndarray]] | None = None):
    if choice == "word-average":
        if word_table is None:
            raise ExportError("word-average encoder needs --word-table")
        dim, entries = word_table
        return WordAverageEncoder(dim, entries)
    if choice == "bert-class":
        return BertClassEncoder()
    if choice == "universal-sentence-encoder":
        return UniversalSentenceEncoder()
    raise ExportError(f"unknown encoder {choice!r}; choose from {', '.join(ENCODER_CHOICES)}")
