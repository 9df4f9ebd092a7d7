"""Selection rules turning posterior probabilities into TP predictions."""

from __future__ import annotations

import numpy as np

from ..corpus import N_TURNING_POINTS
from ..errors import ContractError
from ..supervision import TpStats, window_indices


def _argmax_order(probs: np.ndarray, candidates: list[int]) -> list[int]:
    """Candidates sorted by descending probability, ties to the lowest index."""
    return sorted(candidates, key=lambda i: (-probs[i], i))


def infer_synopsis_tps(probs: np.ndarray, stats: TpStats) -> list[int]:
    """Pick one sentence per TP: the in-window posterior argmax, made distinct.

    Per TP (in order) the argmax over the mu +/- sigma window is taken, with
    ties broken toward the lower index. Collisions are repaired by moving a
    TP to its next-best free in-window index; when a window is exhausted, an
    earlier TP holding one of its indices is relocated through an
    augmenting-path search so every TP stays inside its own window whenever
    possible. Only a genuinely infeasible window falls back to the free
    index nearest its mu. The five indices are returned sorted.
    """
    probs = np.asarray(probs, dtype=np.float64)
    n = probs.shape[0]
    if n < N_TURNING_POINTS:
        raise ContractError(f"need at least 5 sentences, got {n}")
    windows = [window_indices(n, stats, tp) for tp in range(N_TURNING_POINTS)]

    chosen: dict[int, int] = {}  # tp -> index
    holder: dict[int, int] = {}  # index -> tp

    def try_place(tp: int, banned: set[int]) -> bool:
        """Give `tp` a free in-window index, relocating earlier holders if needed."""
        for idx in _argmax_order(probs, windows[tp]):
            if idx in banned:
                continue
            if idx not in holder:
                chosen[tp] = idx
                holder[idx] = tp
                return True
        for idx in _argmax_order(probs, windows[tp]):
            if idx in banned:
                continue
            other = holder[idx]
            if try_place(other, banned | {idx}):
                chosen[tp] = idx
                holder[idx] = tp
                return True
        return False

    for tp in range(N_TURNING_POINTS):
        if not try_place(tp, set()):
            free = [i for i in range(n) if i not in holder]
            idx = min(free, key=lambda i: (abs(i / n - stats.mu[tp]), i))
            chosen[tp] = idx
            holder[idx] = tp

    return sorted(chosen.values())


def neighborhood(peak: int, n_scenes: int, radius: int = 1) -> frozenset[int]:
    """2*radius+1 distinct indices around a peak, shifted inside [0, n_scenes)."""
    width = 2 * radius + 1
    if n_scenes < width:
        return frozenset(range(n_scenes))
    start = min(max(peak - radius, 0), n_scenes - width)
    return frozenset(range(start, start + width))


def infer_scene_tps(matrix: np.ndarray, radius: int = 1) -> list[frozenset[int]]:
    """Per TP: the 3-scene neighborhood around the posterior peak.

    The peak is the row argmax (lowest index on ties); boundary peaks shift
    the neighborhood inward so exactly 3 distinct indices are returned. When
    the screenplay has fewer than 3 scenes, every scene is returned.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != N_TURNING_POINTS:
        raise ContractError(f"expected a (5, M) matrix, got shape {matrix.shape}")
    out = []
    for tp in range(N_TURNING_POINTS):
        peak = int(np.argmax(matrix[tp]))
        out.append(neighborhood(peak, matrix.shape[1], radius))
    return out
