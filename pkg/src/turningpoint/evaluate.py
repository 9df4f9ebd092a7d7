"""Agreement metrics (total/partial agreement, annotation distance) and the
experiment harness that averages them over a corpus."""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import CorpusSet, N_TURNING_POINTS
from .errors import ContractError, CorpusError


def d_synopsis(p: int, tp: int, n_sentences: int) -> float:
    """Distance between two sentence picks, normalized by synopsis length."""
    if not (0 <= p < n_sentences and 0 <= tp < n_sentences):
        raise ContractError(
            f"indices {p}, {tp} out of range [0, {n_sentences})"
        )
    return abs(p - tp) / n_sentences


def ta_synopsis(pred: Sequence[int], gold: Sequence[int]) -> float:
    """Fraction of the five TPs placed on the exact same sentence."""
    if len(pred) != N_TURNING_POINTS or len(gold) != N_TURNING_POINTS:
        raise ContractError(f"need 5 indices per side, got {len(pred)} and {len(gold)}")
    return sum(1 for a, b in zip(pred, gold) if a == b) / N_TURNING_POINTS


def _check_scene_sets(pred, gold) -> None:
    if len(pred) != N_TURNING_POINTS or len(gold) != N_TURNING_POINTS:
        raise ContractError(f"need 5 scene sets per side, got {len(pred)} and {len(gold)}")
    for t in range(N_TURNING_POINTS):
        if not pred[t] or not gold[t]:
            raise ContractError(f"TP{t + 1} scene set is empty")


def ta_scenes(pred: Sequence[Iterable[int]], gold: Sequence[Iterable[int]]) -> float:
    """Mean Jaccard overlap of predicted and gold scene sets across TPs."""
    _check_scene_sets(pred, gold)
    acc = 0.0
    for s, g in zip(pred, gold):
        s, g = set(s), set(g)
        acc += len(s & g) / len(s | g)
    return acc / N_TURNING_POINTS


def pa_scenes(pred: Sequence[Iterable[int]], gold: Sequence[Iterable[int]]) -> float:
    """Fraction of TPs whose scene sets overlap in at least one scene."""
    _check_scene_sets(pred, gold)
    return sum(1 for s, g in zip(pred, gold) if set(s) & set(g)) / N_TURNING_POINTS


def d_scenes_per_tp(
    pred: Sequence[Iterable[int]], gold: Sequence[Iterable[int]], n_scenes: int
) -> list[float]:
    """Per-TP minimum pairwise scene distance, normalized by screenplay length."""
    _check_scene_sets(pred, gold)
    out = []
    for s_set, g_set in zip(pred, gold):
        best = min(abs(s - g) for s in s_set for g in g_set)
        out.append(best / n_scenes)
    return out


def d_scenes(pred: Sequence[Iterable[int]], gold: Sequence[Iterable[int]], n_scenes: int) -> float:
    """Mean over TPs of the minimum pairwise scene distance."""
    return float(np.mean(d_scenes_per_tp(pred, gold, n_scenes)))


@dataclass
class MetricReport:
    ta: float
    pa: float | None
    d_mean: float
    d_std: float
    per_tp_d: tuple[float, ...]
    n_movies: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "ta": self.ta,
                "pa": self.pa,
                "d_mean": self.d_mean,
                "d_std": self.d_std,
                "per_tp_d": list(self.per_tp_d),
                "n_movies": self.n_movies,
            }
        )

    def table(self, label: str = "model") -> str:
        """Aligned text table in TA / PA / D column order."""
        header = f"{'':24}  {'TA':>7}  {'PA':>7}  {'D':>14}"
        pa = f"{self.pa:7.2f}" if self.pa is not None else f"{'-':>7}"
        line = f"{label:24}  {self.ta:7.2f}  {pa}  {self.d_mean:6.2f} ({self.d_std:.2f})"
        return header + "\n" + line


SynopsisPrediction = Sequence[int]
ScenePrediction = Sequence[Iterable[int]]


def evaluate_run(
    predictions: Mapping[str, SynopsisPrediction | ScenePrediction],
    corpus: CorpusSet,
    kind: str,
) -> MetricReport:
    """Average metrics over movies, in percent.

    Movies with several gold annotations are scored against each one and the
    per-annotation values averaged before entering the corpus mean. D's
    standard deviation is the population spread of per-movie mean distances.
    """
    if kind not in ("synopsis", "screenplay"):
        raise ContractError(f"unknown evaluation kind {kind!r}")
    missing = []
    for movie_id in predictions:
        movie = corpus.get(movie_id)
        anns = movie.synopsis_annotations if kind == "synopsis" else movie.screenplay_annotations
        if not anns:
            missing.append(movie_id)
    if missing:
        raise CorpusError(f"no gold {kind} annotations for movies: {', '.join(sorted(missing))}")
    if not predictions:
        raise ContractError("nothing to evaluate")

    ta_values, pa_values, d_values = [], [], []
    per_tp = np.zeros((len(predictions), N_TURNING_POINTS))
    for row, (movie_id, pred) in enumerate(predictions.items()):
        movie = corpus.get(movie_id)
        if kind == "synopsis":
            anns = movie.synopsis_annotations
            ta = np.mean([ta_synopsis(pred, a.tp_indices) for a in anns])
            tp_d = np.mean(
                [
                    [d_synopsis(p, t, movie.n_sentences) for p, t in zip(pred, a.tp_indices)]
                    for a in anns
                ],
                axis=0,
            )
        else:
            anns = movie.screenplay_annotations
            ta = np.mean([ta_scenes(pred, a.tp_scene_sets) for a in anns])
            pa_values.append(
                float(np.mean([pa_scenes(pred, a.tp_scene_sets) for a in anns]))
            )
            tp_d = np.mean(
                [d_scenes_per_tp(pred, a.tp_scene_sets, movie.n_scenes) for a in anns], axis=0
            )
        ta_values.append(float(ta))
        per_tp[row] = tp_d
        d_values.append(float(tp_d.mean()))

    d_arr = np.asarray(d_values)
    return MetricReport(
        ta=100.0 * float(np.mean(ta_values)),
        pa=None if kind == "synopsis" else 100.0 * float(np.mean(pa_values)),
        d_mean=100.0 * float(d_arr.mean()),
        d_std=100.0 * float(d_arr.std()),
        per_tp_d=tuple(100.0 * float(v) for v in per_tp.mean(axis=0)),
        n_movies=len(predictions),
    )


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[str, ...], ...]

    def all_ids(self) -> list[str]:
        return [mid for fold in self.folds for mid in fold]


def make_folds(movie_ids: Sequence[str], k: int = 5, seed: int = 0) -> FoldPlan:
    """Seeded shuffle, then partition as evenly as possible."""
    ids = list(movie_ids)
    if k < 1 or k > len(ids):
        raise ContractError(f"cannot make {k} folds from {len(ids)} movies")
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    base, extra = divmod(len(order), k)
    folds = []
    pos = 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        folds.append(tuple(order[pos : pos + size]))
        pos += size
    return FoldPlan(folds=tuple(folds))
