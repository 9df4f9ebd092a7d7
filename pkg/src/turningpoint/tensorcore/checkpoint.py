"""Binary parameter checkpoints (magic TPNET, little-endian)."""

from __future__ import annotations

import struct

import numpy as np

from ..errors import StoreError
from .autograd import Tensor
from .optim import AdamState

MAGIC = b"TPNET\x01"


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def _pack_array(arr: np.ndarray) -> bytes:
    parts = [struct.pack("<B", arr.ndim)]
    for d in arr.shape:
        parts.append(struct.pack("<I", d))
    parts.append(arr.astype("<f4").tobytes())
    return b"".join(parts)


def save_params(
    variant_tag: str,
    named_params: list[tuple[str, Tensor]],
    seed: int,
    adam: AdamState | None = None,
) -> bytes:
    parts = [MAGIC, _pack_str(variant_tag), struct.pack("<Q", seed)]
    parts.append(struct.pack("<I", len(named_params)))
    for name, tensor in named_params:
        parts.append(_pack_str(name))
        parts.append(_pack_array(tensor.data))
    if adam is None:
        parts.append(struct.pack("<B", 0))
    else:
        parts.append(struct.pack("<B", 1))
        parts.append(struct.pack("<Q", adam.t))
        for buf in list(adam.m) + list(adam.v):
            parts.append(_pack_array(buf))
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise StoreError(f"truncated checkpoint while reading {what}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))[0]

    def read_str(self, what: str) -> str:
        n = self.unpack("<H", what)
        return self.take(n, what).decode("utf-8")

    def read_array(self, what: str) -> np.ndarray:
        ndim = self.unpack("<B", what)
        shape = tuple(self.unpack("<I", what) for _ in range(ndim))
        size = int(np.prod(shape)) if shape else 1
        raw = self.take(4 * size, what)
        return np.frombuffer(raw, dtype="<f4").astype(np.float32, copy=True).reshape(shape)


def load_params(
    data: bytes,
) -> tuple[str, dict[str, np.ndarray], int, AdamState | None]:
    """Returns (variant_tag, name -> array, seed, adam state or None)."""
    r = _Reader(data)
    if r.take(len(MAGIC), "magic") != MAGIC:
        raise StoreError("bad magic: not a checkpoint file")
    tag = r.read_str("variant tag")
    seed = r.unpack("<Q", "seed")
    count = r.unpack("<I", "parameter count")
    params: dict[str, np.ndarray] = {}
    order: list[str] = []
    for _ in range(count):
        name = r.read_str("parameter name")
        params[name] = r.read_array(f"parameter {name!r}")
        order.append(name)
    adam: AdamState | None = None
    if r.unpack("<B", "adam flag"):
        adam = AdamState()
        adam.t = r.unpack("<Q", "adam step")
        adam.m = [r.read_array("adam m") for _ in order]
        adam.v = [r.read_array("adam v") for _ in order]
    if r.pos != len(data):
        raise StoreError(f"{len(data) - r.pos} trailing bytes in checkpoint")
    return tag, params, seed, adam
