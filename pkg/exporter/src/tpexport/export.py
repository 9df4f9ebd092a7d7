"""Export jobs: encode every corpus sentence, write the store atomically."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ExportError
from .corpusio import load_corpus
from .encoders import ENCODER_CHOICES, _tokenize, build_encoder
from .storeio import encode_store, encode_word_table, parse_word_table

BATCH = 256


@dataclass
class ExportJob:
    corpus_path: Path
    encoder: str
    out_path: Path
    word_table_path: Path | None = None

    def __post_init__(self) -> None:
        if self.encoder not in ENCODER_CHOICES:
            raise ExportError(
                f"unknown encoder {self.encoder!r}; choose from {', '.join(ENCODER_CHOICES)}"
            )


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _load_table(path: Path | None):
    if path is None:
        return None
    if not path.exists():
        raise ExportError(f"word-vector table not found: {path}")
    return parse_word_table(path.read_bytes())


def export_embeddings(job: ExportJob) -> Path:
    """One vector per synopsis and scene sentence, keyed canonically."""
    if not job.corpus_path.exists():
        raise ExportError(f"corpus file not found: {job.corpus_path}")
    corpus = load_corpus(job.corpus_path.read_bytes())
    encoder = build_encoder(job.encoder, _load_table(job.word_table_path))

    records: dict[str, np.ndarray] = {}
    texts = corpus.texts()
    keys = corpus.keys()
    for start in range(0, len(texts), BATCH):
        chunk = encoder.encode(texts[start : start + BATCH])
        if chunk.shape != (len(texts[start : start + BATCH]), encoder.dim):
            raise ExportError(f"encoder returned shape {chunk.shape}")
        for offset, vec in enumerate(chunk):
            records[keys[start + offset]] = vec
    data = encode_store(encoder.name, encoder.dim, records)
    _atomic_write(job.out_path, data)
    return job.out_path


def export_entity_vectors(
    corpus_path: Path, word_table_path: Path, out_path: Path
) -> Path:
    """Vectors for cast-name tokens plus the corpus vocabulary; tokens the
    table does not know are omitted (the pipeline substitutes zero)."""
    if not corpus_path.exists():
        raise ExportError(f"corpus file not found: {corpus_path}")
    dim, entries = _load_table(word_table_path)
    corpus = load_corpus(corpus_path.read_bytes())
    wanted: set[str] = set()
    for cast in corpus.casts.values():
        for name in cast:
            wanted.update(_tokenize(name))
    for text in corpus.texts():
        wanted.update(_tokenize(text))
    found = {tok: entries[tok] for tok in wanted if tok in entries}
    _atomic_write(out_path, encode_word_table(dim, found))
    return out_path
