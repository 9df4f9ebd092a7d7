"""Posterior traces: per-sentence or per-(scene, TP) probabilities plus the
selected indices, exported as CSV."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ..corpus import N_TURNING_POINTS
from ..errors import ContractError


@dataclass
class PosteriorTrace:
    movie_id: str
    kind: str  # "synopsis" | "screenplay"
    probabilities: np.ndarray  # (N,) or (5, M)
    selected: list[int] | list[frozenset[int]]

    def __post_init__(self) -> None:
        if self.kind not in ("synopsis", "screenplay"):
            raise ContractError(f"unknown trace kind {self.kind!r}")
        probs = np.asarray(self.probabilities, dtype=np.float64)
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ContractError("probabilities must lie in [0, 1]")
        if self.kind == "synopsis":
            if probs.ndim != 1:
                raise ContractError(f"synopsis trace needs a vector, got shape {probs.shape}")
            if len(self.selected) != N_TURNING_POINTS:
                raise ContractError("need 5 selected sentence indices")
            for i in self.selected:
                if not 0 <= i < probs.shape[0]:
                    raise ContractError(f"selected index {i} out of range")
        else:
            if probs.ndim != 2 or probs.shape[0] != N_TURNING_POINTS:
                raise ContractError(f"screenplay trace needs a (5, M) matrix, got {probs.shape}")
            if len(self.selected) != N_TURNING_POINTS:
                raise ContractError("need 5 selected scene sets")
            for sel in self.selected:
                for i in sel:
                    if not 0 <= i < probs.shape[1]:
                        raise ContractError(f"selected scene {i} out of range")
        self.probabilities = probs


def trace_to_csv(trace: PosteriorTrace, gold: list[frozenset[int]] | None = None) -> str:
    """Render a trace as CSV; `gold` adds a gold-membership column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    unit = "index" if trace.kind == "synopsis" else "scene"
    header = ["tp", unit, "probability", "selected"]
    if gold is not None:
        header.append("gold")
    writer.writerow(header)
    for tp in range(N_TURNING_POINTS):
        if trace.kind == "synopsis":
            row_probs = trace.probabilities
            chosen = {trace.selected[tp]}
        else:
            row_probs = trace.probabilities[tp]
            chosen = set(trace.selected[tp])
        for i, p in enumerate(row_probs):
            rec = [tp + 1, i, f"{float(p):.6f}", int(i in chosen)]
            if gold is not None:
                rec.append(int(i in gold[tp]) if gold[tp] is not None else "")
            writer.writerow(rec)
    return buf.getvalue()


def trace_from_csv(movie_id: str, text: str) -> PosteriorTrace:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "tp":
        raise ContractError("not a posterior trace CSV")
    kind = "synopsis" if header[1] == "index" else "screenplay"
    probs: dict[tuple[int, int], float] = {}
    chosen: dict[int, set[int]] = {t: set() for t in range(N_TURNING_POINTS)}
    max_i = -1
    for rec in reader:
        if not rec:
            continue
        tp, i = int(rec[0]) - 1, int(rec[1])
        probs[(tp, i)] = float(rec[2])
        if int(rec[3]):
            chosen[tp].add(i)
        max_i = max(max_i, i)
    n = max_i + 1
    for t in range(N_TURNING_POINTS):
        if not chosen[t]:
            raise ContractError(f"trace CSV has no selected row for TP{t + 1}")
    if kind == "synopsis":
        vec = np.zeros(n)
        for (tp, i), p in probs.items():
            vec[i] = p
        selected = [min(chosen[t]) for t in range(N_TURNING_POINTS)]
        return PosteriorTrace(movie_id, kind, vec, selected)
    mat = np.zeros((N_TURNING_POINTS, n))
    for (tp, i), p in probs.items():
        mat[tp, i] = p
    return PosteriorTrace(
        movie_id, kind, mat, [frozenset(chosen[t]) for t in range(N_TURNING_POINTS)]
    )
