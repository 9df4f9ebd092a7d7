"""Position, random, and tf*idf baselines for both tasks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import N_TURNING_POINTS, Scene
from .errors import ContractError
from .models.inference import neighborhood
from .supervision import TpStats, window_indices
from .text import tokenize


def position_baseline(length: int, stats: TpStats) -> list[int]:
    """One index per TP at floor(mu * length), collisions advanced upward.

    A collision moves to the next free index above; if that runs off the
    end, the largest free index is used instead. The result is sorted, so
    it is strictly increasing for any length >= 5.
    """
    if length < N_TURNING_POINTS:
        raise ContractError(f"need length >= 5, got {length}")
    taken: set[int] = set()
    out: list[int] = []
    for tp in range(N_TURNING_POINTS):
        idx = min(int(math.floor(stats.mu[tp] * length)), length - 1)
        while idx in taken and idx < length:
            idx += 1
        if idx >= length:
            idx = max(i for i in range(length) if i not in taken)
        taken.add(idx)
        out.append(idx)
    return sorted(out)


def position_baseline_scenes(n_scenes: int, stats: TpStats) -> list[frozenset[int]]:
    """Screenplay flavour: the 3-scene neighborhood around each expected peak."""
    peaks = position_baseline(max(n_scenes, N_TURNING_POINTS), stats)
    return [neighborhood(min(p, n_scenes - 1), n_scenes) for p in peaks]


def position_density(n_scenes: int, stats: TpStats) -> np.ndarray:
    """(5, M) pseudo-posterior: Gaussian bump at each TP's expected position."""
    positions = np.arange(n_scenes, dtype=np.float64) / n_scenes
    out = np.empty((N_TURNING_POINTS, n_scenes))
    for tp in range(N_TURNING_POINTS):
        sigma = max(stats.sigma[tp], 1e-3)
        out[tp] = np.exp(-0.5 * ((positions - stats.mu[tp]) / sigma) ** 2)
    return out


def random_baseline(length: int, seed: int) -> list[int]:
    """Five distinct uniform indices, sorted; reproducible from the seed."""
    if length < N_TURNING_POINTS:
        raise ContractError(f"need length >= 5, got {length}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(length, size=N_TURNING_POINTS, replace=False)
    return sorted(int(i) for i in picks)


@dataclass
class TfidfIndex:
    vocabulary: dict[str, int]
    idf: np.ndarray

    def vectorize(self, tokens: list[str]) -> dict[int, float]:
        """L2-normalized sparse tf*idf vector."""
        counts: dict[int, int] = {}
        for tok in tokens:
            tid = self.vocabulary.get(tok)
            if tid is not None:
                counts[tid] = counts.get(tid, 0) + 1
        vec = {tid: tf * float(self.idf[tid]) for tid, tf in counts.items()}
        norm = math.sqrt(sum(w * w for w in vec.values()))
        if norm > 0.0:
            vec = {tid: w / norm for tid, w in vec.items()}
        return vec


def build_tfidf(docs: list[list[str]]) -> TfidfIndex:
    """Index with smoothed idf = ln((1 + D) / (1 + df)) + 1."""
    if not docs:
        raise ContractError("cannot build a tf*idf index from zero documents")
    vocabulary: dict[str, int] = {}
    df: dict[int, int] = {}
    for doc in docs:
        for tok in set(doc):
            tid = vocabulary.setdefault(tok, len(vocabulary))
            df[tid] = df.get(tid, 0) + 1
    n_docs = len(docs)
    idf = np.zeros(len(vocabulary))
    for tid, count in df.items():
        idf[tid] = math.log((1.0 + n_docs) / (1.0 + count)) + 1.0
    return TfidfIndex(vocabulary=vocabulary, idf=idf)


def sparse_cosine(a: dict[int, float], b: dict[int, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(w * b.get(tid, 0.0) for tid, w in a.items())


def movie_tfidf_index(screenplay: tuple[Scene, ...] | list[Scene], tp_sentences: list[str]) -> TfidfIndex:
    """Per-movie index over all scene sentences plus the TP sentences."""
    docs = [tokenize(sent) for scene in screenplay for sent in scene.sentences]
    docs.extend(tokenize(sent) for sent in tp_sentences)
    return build_tfidf(docs)


def tfidf_scene_scores(
    tp_sentences: list[str],
    screenplay: tuple[Scene, ...] | list[Scene],
    index: TfidfIndex,
    constrain: TpStats | None = None,
) -> tuple[np.ndarray, list[frozenset[int]]]:
    """(5, M) max-cosine scores of each scene against each TP sentence.

    Unconstrained selection takes the 3-scene neighborhood around the
    best-scoring scene. With `constrain` both the argmax and the selected
    set are restricted to each TP's mu +/- sigma window: the peak plus its
    nearest in-window indices, up to 3. When every candidate scores zero
    the midpoint of the candidate range is used instead of an arbitrary
    argmax.
    """
    if len(tp_sentences) != N_TURNING_POINTS:
        raise ContractError(f"need exactly 5 TP sentences, got {len(tp_sentences)}")
    m = len(screenplay)
    scene_vecs = [
        [index.vectorize(tokenize(sent)) for sent in scene.sentences] for scene in screenplay
    ]
    scores = np.zeros((N_TURNING_POINTS, m))
    for tp, sentence in enumerate(tp_sentences):
        query = index.vectorize(tokenize(sentence))
        for i, vecs in enumerate(scene_vecs):
            scores[tp, i] = max(sparse_cosine(query, v) for v in vecs)
    np.clip(scores, 0.0, 1.0, out=scores)  # roundoff can exceed 1 by an ulp

    selections = []
    for tp in range(N_TURNING_POINTS):
        if constrain is not None:
            candidates = window_indices(m, constrain, tp)
        else:
            candidates = list(range(m))
        best = max(candidates, key=lambda i: (scores[tp, i], -i))
        if scores[tp, best] == 0.0:
            best = candidates[len(candidates) // 2]
        if constrain is None:
            selections.append(neighborhood(best, m))
        else:
            nearest = sorted(candidates, key=lambda i: (abs(i - best), i))[:3]
            selections.append(frozenset(nearest))
    return scores, selections
