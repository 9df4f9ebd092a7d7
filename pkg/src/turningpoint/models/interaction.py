"""Context windows and similarity-interaction features.

A position's representation is compared against the mean of its left and
right context windows through three signals: the elementwise product, the
epsilon-guarded cosine, and a second normalized-dot ratio. The ratio form
is the default; a Euclidean-distance reading is available via `mode`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ContractError, ShapeError
from ..tensorcore import Tensor
from ..tensorcore import autograd as ag
from ..tensorcore.autograd import EPS_DENOM

_NORM_FLOOR = 1e-24

MODES = ("ratio", "euclidean")


def context_windows(
    reps: Sequence[np.ndarray], i: int, window: int
) -> tuple[np.ndarray, np.ndarray]:
    """Mean of the `window` representations before and after position i.

    An empty window (at either boundary) yields the zero vector.
    """
    if len(reps) == 0:
        raise ContractError("context_windows needs a non-empty sequence")
    if window < 1:
        raise ContractError(f"window must be >= 1, got {window}")
    reps = [np.asarray(r) for r in reps]
    left = reps[max(0, i - window) : i]
    right = reps[i + 1 : i + 1 + window]
    zero = np.zeros_like(reps[0])
    lc = np.mean(left, axis=0) if left else zero.copy()
    rc = np.mean(right, axis=0) if right else zero.copy()
    return lc, rc


def window_average_matrix(n: int, window: int, side: str) -> np.ndarray:
    """(n, n) matrix A with A @ reps giving each position's window mean."""
    mat = np.zeros((n, n))
    for i in range(n):
        if side == "left":
            lo, hi = max(0, i - window), i
        else:
            lo, hi = i + 1, min(n, i + 1 + window)
        if hi > lo:
            mat[i, lo:hi] = 1.0 / (hi - lo)
    return mat


@dataclass
class InteractionSide:
    """Features comparing a representation with one of its context vectors."""

    b: np.ndarray
    c: float
    u: float
    fl: np.ndarray


def interaction(cp: np.ndarray, ctx: np.ndarray, mode: str = "ratio") -> InteractionSide:
    """[cp ; ctx ; cp*ctx ; c ; u] plus the individual similarity values."""
    cp = np.asarray(cp, dtype=np.float64)
    ctx = np.asarray(ctx, dtype=np.float64)
    if cp.shape != ctx.shape or cp.ndim != 1:
        raise ShapeError(f"interaction needs equal-length vectors, got {cp.shape} and {ctx.shape}")
    if mode not in MODES:
        raise ContractError(f"unknown interaction mode {mode!r}")
    b = cp * ctx
    denom = max(float(np.linalg.norm(cp) * np.linalg.norm(ctx)), EPS_DENOM)
    c = float(cp @ ctx) / denom
    if mode == "ratio":
        u = c
    else:
        u = float(np.linalg.norm(cp - ctx))
    fl = np.concatenate([cp, ctx, b, [c], [u]])
    return InteractionSide(b=b, c=c, u=u, fl=fl)


def _row_norms(x: Tensor) -> Tensor:
    return ag.sqrt(ag.clamp_min(ag.row_dot(x, x), _NORM_FLOOR))


def batched_interaction(cp: Tensor, ctx: Tensor, mode: str = "ratio") -> Tensor:
    """Row-wise interaction features: (n, 3d + 2) tensor on the graph."""
    if mode not in MODES:
        raise ContractError(f"unknown interaction mode {mode!r}")
    b = ag.mul(cp, ctx)
    dots = ag.row_dot(cp, ctx)
    denom = ag.clamp_min(ag.mul(_row_norms(cp), _row_norms(ctx)), EPS_DENOM)
    c = ag.div(dots, denom)
    if mode == "ratio":
        u = c
    else:
        diff = ag.sub(cp, ctx)
        u = ag.sqrt(ag.clamp_min(ag.row_dot(diff, diff), _NORM_FLOOR))
    return ag.hconcat([cp, ctx, b, c, u])


def vector_norm(x: Tensor) -> Tensor:
    return ag.sqrt(ag.clamp_min(ag.dot(x, x), _NORM_FLOOR))


def rows_vs_vector_interaction(rows: Tensor, vec: Tensor, mode: str = "ratio") -> tuple[Tensor, Tensor, Tensor]:
    """(b, c, u) of each row of `rows` against a single vector `vec`."""
    if mode not in MODES:
        raise ContractError(f"unknown interaction mode {mode!r}")
    n = rows.shape[0]
    b = ag.mul(rows, vec)
    dots = ag.matvec(rows, vec)
    denom = ag.clamp_min(ag.mul(_row_norms(rows), vector_norm(vec)), EPS_DENOM)
    c = ag.div(dots, denom)
    if mode == "ratio":
        u = c
    else:
        diff = ag.sub(rows, ag.tile_rows(vec, n))
        u = ag.sqrt(ag.clamp_min(ag.row_dot(diff, diff), _NORM_FLOOR))
    return b, c, u
