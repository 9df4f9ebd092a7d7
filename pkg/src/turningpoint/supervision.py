"""Position statistics, distant-supervision windows, class weights, augmentation.

Turning points cluster at characteristic fractions of a story's length.
Fitting the mean and spread of those fractions on annotated synopses gives a
per-TP window that projects onto screenplays as noisy relevance labels and
constrains inference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import Movie, N_TURNING_POINTS, SynopsisAnnotation, normalize_position
from .errors import ContractError, CorpusError

# Screenwriting-theory positions for the five turning points, as fractions
# of document length.
THEORY_POSITIONS = (0.10, 0.25, 0.50, 0.75, 0.945)


@dataclass(frozen=True)
class TpStats:
    """Per-TP mean and standard deviation of normalized positions."""

    mu: tuple[float, ...]
    sigma: tuple[float, ...]
    source: str = "fitted"

    def __post_init__(self) -> None:
        if len(self.mu) != N_TURNING_POINTS or len(self.sigma) != N_TURNING_POINTS:
            raise ContractError("TpStats needs 5 mu and 5 sigma values")
        if any(b <= a for a, b in zip(self.mu, self.mu[1:])):
            raise ContractError(f"mu values must be strictly increasing, got {self.mu}")
        if any(not np.isfinite(s) or s < 0 for s in self.sigma):
            raise ContractError(f"sigma values must be finite and non-negative, got {self.sigma}")

    def window(self, tp: int) -> tuple[float, float]:
        """[mu - sigma, mu + sigma] for a zero-based TP index."""
        return self.mu[tp] - self.sigma[tp], self.mu[tp] + self.sigma[tp]

    def to_json(self) -> str:
        return json.dumps(
            {"mu": list(self.mu), "sigma": list(self.sigma), "source": self.source}
        )

    @classmethod
    def from_json(cls, text: str) -> "TpStats":
        doc = json.loads(text)
        return cls(
            mu=tuple(float(v) for v in doc["mu"]),
            sigma=tuple(float(v) for v in doc["sigma"]),
            source=str(doc.get("source", "fitted")),
        )


def theory_stats() -> TpStats:
    """Expected TP positions from screenwriting theory; zero spread."""
    return TpStats(mu=THEORY_POSITIONS, sigma=(0.0,) * N_TURNING_POINTS, source="theory")


def fit_position_stats(annotated: list[tuple[Movie, SynopsisAnnotation]]) -> TpStats:
    """Mean and population standard deviation of normalized TP positions.

    Every (movie, annotation) pair counts once, so multiply-annotated movies
    contribute one sample per annotator copy.
    """
    if not annotated:
        raise CorpusError("cannot fit position statistics on an empty training set")
    positions = np.empty((len(annotated), N_TURNING_POINTS), dtype=np.float64)
    for row, (movie, ann) in enumerate(annotated):
        for t, idx in enumerate(ann.tp_indices):
            positions[row, t] = normalize_position(idx, movie.n_sentences)
    # Sort before reducing so permuting the training set gives bit-identical
    # statistics (summation order would otherwise leak into the last ulp).
    positions = np.sort(positions, axis=0)
    mu = positions.mean(axis=0)
    deviations = np.sort((positions - mu) ** 2, axis=0)
    sigma = np.sqrt(deviations.mean(axis=0))  # population std, ddof=0
    return TpStats(mu=tuple(float(v) for v in mu), sigma=tuple(float(v) for v in sigma))


def training_annotations(movies) -> list[tuple[Movie, SynopsisAnnotation]]:
    """All (movie, annotation) pairs, in corpus order.

    Accepts a CorpusSet or any iterable of movies.
    """
    if hasattr(movies, "movies"):
        movies = movies.movies
    pairs = []
    for movie in movies:
        for ann in movie.synopsis_annotations:
            pairs.append((movie, ann))
    return pairs


# augment_training_set is the historical name for the same expansion: each
# duplicate or triplicate annotation becomes its own training instance.
augment_training_set = training_annotations


def window_indices(length: int, stats: TpStats, tp: int) -> list[int]:
    """Indices whose normalized position falls inside TP `tp`'s window.

    Falls back to the single index nearest mu when the window catches
    nothing, so the result is never empty.
    """
    if length < 1:
        raise ContractError(f"length must be positive, got {length}")
    lo, hi = stats.window(tp)
    inside = [i for i in range(length) if lo <= i / length <= hi]
    if inside:
        return inside
    nearest = int(np.argmin([abs(i / length - stats.mu[tp]) for i in range(length)]))
    return [nearest]


def make_noisy_labels(n_scenes: int, stats: TpStats) -> np.ndarray:
    """(5, M) binary matrix: scene relevant to a TP iff inside its window."""
    labels = np.zeros((N_TURNING_POINTS, n_scenes), dtype=np.int8)
    for tp in range(N_TURNING_POINTS):
        labels[tp, window_indices(n_scenes, stats, tp)] = 1
    return labels


def class_weights(labels) -> tuple[float, float]:
    """Inverse-frequency weights (w_pos, w_neg): w_c = total / (2 * count_c)."""
    arr = np.asarray(labels).ravel()
    total = arr.size
    pos = int((arr == 1).sum())
    neg = int((arr == 0).sum())
    if pos + neg != total:
        raise ContractError("labels must be binary")
    if pos == 0 or neg == 0:
        raise CorpusError("degenerate training set: only one class present")
    return total / (2.0 * pos), total / (2.0 * neg)
