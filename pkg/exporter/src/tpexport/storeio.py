"""Writers for the embedding-store binary layout and the word2vec text
format (little-endian, magic TPEMB)."""

from __future__ import annotations

import struct

import numpy as np

from . import ExportError

MAGIC = b"TPEMB\x01"
VERSION = 1


def encode_store(encoder_name: str, dim: int, records: dict[str, np.ndarray]) -> bytes:
    """Records are written sorted by key so output bytes are deterministic."""
    if dim < 1:
        raise ExportError(f"dim must be >= 1, got {dim}")
    name = encoder_name.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", VERSION),
        struct.pack("<H", len(name)),
        name,
        struct.pack("<I", dim),
        struct.pack("<Q", len(records)),
    ]
    for key in sorted(records):
        vec = np.asarray(records[key], dtype="<f4")
        if vec.shape != (dim,):
            raise ExportError(f"vector for {key!r} has shape {vec.shape}, expected ({dim},)")
        if not np.all(np.isfinite(vec)):
            raise ExportError(f"vector for {key!r} has non-finite components")
        kb = key.encode("utf-8")
        parts.append(struct.pack("<H", len(kb)))
        parts.append(kb)
        parts.append(vec.tobytes())
    return b"".join(parts)


def encode_word_table(dim: int, entries: dict[str, np.ndarray]) -> bytes:
    lines = [f"{len(entries)} {dim}"]
    for token in sorted(entries):
        vec = np.asarray(entries[token], dtype=np.float32)
        if vec.shape != (dim,):
            raise ExportError(f"vector for token {token!r} has shape {vec.shape}")
        lines.append(token + " " + " ".join(repr(float(v)) for v in vec))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_word_table(data: bytes) -> tuple[int, dict[str, np.ndarray]]:
    lines = data.decode("utf-8").splitlines()
    if not lines:
        raise ExportError("empty word-vector table")
    start = 0
    first = lines[0].split()
    dim = None
    if len(first) == 2 and all(p.lstrip("-").isdigit() for p in first):
        dim = int(first[1])
        start = 1
    entries: dict[str, np.ndarray] = {}
    for line in lines[start:]:
        if not line.strip():
            continue
        parts = line.split(" ")
        values = np.asarray([float(p) for p in parts[1:] if p], dtype=np.float32)
        if dim is None:
            dim = values.shape[0]
        if values.shape != (dim,):
            raise ExportError(f"token {parts[0]!r} has {values.shape[0]} values, expected {dim}")
        entries[parts[0]] = values
    if dim is None:
        raise ExportError("word-vector table has no entries and no header")
    return dim, entries
