"""Storage of precomputed sentence vectors plus a deterministic test embedder.

Vectors are keyed by ``movie|section|scene_idx|sent_idx`` where section is
``synopsis`` (scene_idx fixed at -1) or ``scene``. The canonical on-disk
format is a little-endian binary container; a JSONL flavour is provided for
interchange. ``hash_embed`` is a dependency-free fallback embedder used by
the test suite and by runs without exported encoder vectors.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusSet, Movie
from .errors import StoreError

MAGIC = b"TPEMB\x01"
VERSION = 1

Key = str


def make_key(movie_id: str, section: str, scene_idx: int, sent_idx: int) -> Key:
    if section not in ("synopsis", "scene"):
        raise StoreError(f"unknown section {section!r}")
    return f"{movie_id}|{section}|{scene_idx}|{sent_idx}"


def synopsis_key(movie_id: str, sent_idx: int) -> Key:
    return make_key(movie_id, "synopsis", -1, sent_idx)


def scene_key(movie_id: str, scene_idx: int, sent_idx: int) -> Key:
    return make_key(movie_id, "scene", scene_idx, sent_idx)


def corpus_keys(corpus: CorpusSet) -> list[Key]:
    """Every sentence key a corpus requires, in corpus order."""
    keys: list[Key] = []
    for movie in corpus.movies:
        for i in range(movie.n_sentences):
            keys.append(synopsis_key(movie.id, i))
        for si, scene in enumerate(movie.screenplay):
            for j in range(len(scene.sentences)):
                keys.append(scene_key(movie.id, si, j))
    return keys


@dataclass
class EmbeddingStore:
    encoder_name: str
    dim: int
    records: dict[Key, np.ndarray] = field(default_factory=dict)

    def put(self, key: Key, vector: np.ndarray) -> None:
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (self.dim,):
            raise StoreError(f"vector for {key!r} has shape {vec.shape}, store dim is {self.dim}")
        if not np.all(np.isfinite(vec)):
            raise StoreError(f"vector for {key!r} has non-finite components")
        self.records[key] = vec

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, key: Key) -> bool:
        return key in self.records


def get_vec(store: EmbeddingStore, key: Key) -> np.ndarray:
    """Stored vector for `key`; missing keys signal a corpus/store mismatch."""
    try:
        return store.records[key]
    except KeyError:
        raise StoreError(f"embedding store has no vector for key {key!r}") from None


def synopsis_matrix(store: EmbeddingStore, movie: Movie) -> np.ndarray:
    """(N, dim) matrix of a movie's synopsis sentence vectors."""
    return np.stack([get_vec(store, synopsis_key(movie.id, i)) for i in range(movie.n_sentences)])


def scene_matrices(store: EmbeddingStore, movie: Movie) -> list[np.ndarray]:
    """Per-scene (n_sentences, dim) matrices for a movie's screenplay."""
    out = []
    for si, scene in enumerate(movie.screenplay):
        out.append(
            np.stack([get_vec(store, scene_key(movie.id, si, j)) for j in range(len(scene.sentences))])
        )
    return out


def write_store(store: EmbeddingStore) -> bytes:
    """Serialize to the binary layout. Records are written sorted by key so
    identical stores produce identical bytes."""
    name = store.encoder_name.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<H", len(name)),
        name,
        struct.pack("<I", store.dim),
        struct.pack("<Q", len(store.records)),
    ]
    for key in sorted(store.records):
        kb = key.encode("utf-8")
        parts.append(struct.pack("<H", len(kb)))
        parts.append(kb)
        parts.append(store.records[key].astype("<f4").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise StoreError(f"truncated store file while reading {what}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))[0]


def read_store(data: bytes) -> EmbeddingStore:
    """Parse the binary layout, validating magic, version and vector shapes."""
    r = _Reader(data)
    if r.take(len(MAGIC), "magic") != MAGIC:
        raise StoreError("bad magic: not an embedding store file")
    version = r.unpack("<I", "version")
    if version != VERSION:
        raise StoreError(f"unsupported store version {version}")
    name_len = r.unpack("<H", "encoder name length")
    encoder_name = r.take(name_len, "encoder name").decode("utf-8")
    dim = r.unpack("<I", "dim")
    if dim < 1:
        raise StoreError(f"invalid dim {dim}")
    count = r.unpack("<Q", "record count")
    store = EmbeddingStore(encoder_name=encoder_name, dim=dim)
    for _ in range(count):
        key_len = r.unpack("<H", "key length")
        key = r.take(key_len, "key").decode("utf-8")
        raw = r.take(4 * dim, f"vector for {key!r}")
        vec = np.frombuffer(raw, dtype="<f4").astype(np.float32, copy=True)
        if not np.all(np.isfinite(vec)):
            raise StoreError(f"vector for {key!r} has non-finite components")
        store.records[key] = vec
    if r.pos != len(data):
        raise StoreError(f"{len(data) - r.pos} trailing bytes after last record")
    return store


def write_store_jsonl(store: EmbeddingStore) -> bytes:
    """JSONL interchange: header line, then one record per line."""
    lines = [
        json.dumps(
            {"encoder_name": store.encoder_name, "dim": store.dim, "count": len(store.records)}
        )
    ]
    for key in sorted(store.records):
        lines.append(json.dumps({"key": key, "vector": store.records[key].tolist()}))
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_store_jsonl(data: bytes) -> EmbeddingStore:
    lines = data.decode("utf-8").splitlines()
    if not lines:
        raise StoreError("empty JSONL store")
    header = json.loads(lines[0])
    store = EmbeddingStore(encoder_name=header["encoder_name"], dim=int(header["dim"]))
    for line in lines[1:]:
        if not line.strip():
            continue
        rec = json.loads(line)
        store.put(rec["key"], np.asarray(rec["vector"], dtype=np.float32))
    return store


def hash_embed(sentence: str, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic bag-of-tokens embedding.

    Each whitespace token is hashed into one of `dim` buckets with a +/-1
    sign; token vectors are summed and the result L2-normalized. The empty
    sentence maps to the zero vector (the only non-unit output).
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    key = seed.to_bytes(8, "little", signed=False)
    first_bucket: int | None = None
    for token in sentence.split():
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=16, key=key).digest()
        bucket = int.from_bytes(digest[:8], "little") % dim
        sign = 1.0 if digest[8] & 1 else -1.0
        vec[bucket] += sign
        if first_bucket is None:
            first_bucket = bucket
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    elif first_bucket is not None:
        # tokens cancelled exactly; only the empty sentence may map to zero
        vec[first_bucket] = 1.0
    return vec.astype(np.float32)


def hash_store_for_corpus(corpus: CorpusSet, dim: int, seed: int = 0) -> EmbeddingStore:
    """Build a complete store for a corpus using hash_embed."""
    store = EmbeddingStore(encoder_name=f"hash-{dim}-{seed}", dim=dim)
    for movie in corpus.movies:
        for i, sent in enumerate(movie.synopsis):
            store.put(synopsis_key(movie.id, i), hash_embed(sent, dim, seed))
        for si, scene in enumerate(movie.screenplay):
            for j, sent in enumerate(scene.sentences):
                store.put(scene_key(movie.id, si, j), hash_embed(sent, dim, seed))
    return store


@dataclass
class WordVectorTable:
    """Token -> vector lookup; unknown tokens resolve to the zero vector."""

    dim: int = 300
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def put(self, token: str, vector: np.ndarray) -> None:
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (self.dim,):
            raise StoreError(f"vector for token {token!r} has shape {vec.shape}, table dim is {self.dim}")
        self.entries[token] = vec

    def lookup(self, token: str) -> np.ndarray:
        hit = self.entries.get(token)
        if hit is None:
            hit = self.entries.get(token.lower())
        if hit is None:
            return np.zeros(self.dim, dtype=np.float32)
        return hit


def read_word_table(data: bytes) -> WordVectorTable:
    """Parse word2vec text format (optional "count dim" header line)."""
    lines = data.decode("utf-8").splitlines()
    if not lines:
        raise StoreError("empty word-vector table")
    start = 0
    first = lines[0].split()
    dim: int | None = None
    if len(first) == 2 and all(p.lstrip("-").isdigit() for p in first):
        dim = int(first[1])
        start = 1
    table: WordVectorTable | None = None
    for line in lines[start:]:
        if not line.strip():
            continue
        parts = line.rstrip("\n").split(" ")
        token = parts[0]
        values = [float(p) for p in parts[1:] if p]
        if table is None:
            table = WordVectorTable(dim=dim if dim is not None else len(values))
        table.put(token, np.asarray(values, dtype=np.float32))
    if table is None:
        if dim is None:
            raise StoreError("word-vector table has no entries and no header")
        table = WordVectorTable(dim=dim)
    return table


def write_word_table(table: WordVectorTable) -> bytes:
    lines = [f"{len(table.entries)} {table.dim}"]
    for token in sorted(table.entries):
        vec = table.entries[token]
        lines.append(token + " " + " ".join(repr(float(v)) for v in vec))
    return ("\n".join(lines) + "\n").encode("utf-8")
