from __future__ import annotations

import numpy as np
import pytest

from helpers import planted_signal_corpus
from turningpoint.corpus import Movie, Scene, SynopsisAnnotation
from turningpoint.errors import ContractError, CorpusError
from turningpoint.supervision import (
    TpStats,
    class_weights,
    fit_position_stats,
    make_noisy_labels,
    theory_stats,
    training_annotations,
    window_indices,
)

# Fitted position statistics over the historical training synopses,
# in normalized-position fractions.
FITTED_MU = (0.1139, 0.3186, 0.5065, 0.7415, 0.8943)
FITTED_SIGMA = (0.0672, 0.1126, 0.1215, 0.0840, 0.0474)


def movie_with_indices(mid: str, n: int, indices) -> tuple[Movie, SynopsisAnnotation]:
    ann = SynopsisAnnotation(annotator="a", tp_indices=tuple(indices))
    movie = Movie(
        id=mid,
        title=mid,
        synopsis=tuple(f"s{i}." for i in range(n)),
        screenplay=(Scene(heading="INT. X", sentences=("x.",)),),
        synopsis_annotations=(ann,),
    )
    return movie, ann


def test_theory_stats_constants():
    stats = theory_stats()
    assert stats.mu == (0.10, 0.25, 0.50, 0.75, 0.945)
    assert stats.sigma == (0.0,) * 5
    assert stats.source == "theory"
    assert all(b > a for a, b in zip(stats.mu, stats.mu[1:]))


def test_fit_single_movie():
    pair = movie_with_indices("m", 10, [1, 2, 5, 7, 9])
    stats = fit_position_stats([pair])
    assert stats.mu == (0.1, 0.2, 0.5, 0.7, 0.9)
    assert stats.sigma == (0.0,) * 5


def test_fit_uses_population_std():
    pairs = [
        movie_with_indices("a", 10, [0, 2, 5, 7, 9]),
        movie_with_indices("b", 10, [2, 4, 5, 7, 9]),
    ]
    stats = fit_position_stats(pairs)
    # TP1 samples 0.0 and 0.2: population std is 0.1 (sample std would be ~0.1414)
    assert abs(stats.sigma[0] - 0.1) < 1e-12
    assert stats.sigma[2] == 0.0


def test_fit_is_permutation_invariant_and_in_range():
    rng = np.random.default_rng(0)
    corpus = planted_signal_corpus(n_movies=12, seed=3)
    pairs = training_annotations(corpus.movies)
    stats = fit_position_stats(pairs)
    shuffled = [pairs[i] for i in rng.permutation(len(pairs))]
    assert fit_position_stats(shuffled) == stats
    assert all(0.0 <= m < 1.0 for m in stats.mu)


def test_fit_empty_is_error():
    with pytest.raises(CorpusError):
        fit_position_stats([])


def test_stats_json_roundtrip():
    stats = TpStats(mu=FITTED_MU, sigma=FITTED_SIGMA)
    assert TpStats.from_json(stats.to_json()) == stats


def test_stats_rejects_non_monotone_mu():
    with pytest.raises(ContractError):
        TpStats(mu=(0.2, 0.1, 0.5, 0.7, 0.9), sigma=(0.0,) * 5)


def test_noisy_labels_window_rule_oracle():
    stats = TpStats(mu=FITTED_MU, sigma=FITTED_SIGMA)
    labels = make_noisy_labels(100, stats)
    # independent evaluation of the window predicate
    for tp in range(5):
        lo, hi = FITTED_MU[tp] - FITTED_SIGMA[tp], FITTED_MU[tp] + FITTED_SIGMA[tp]
        expected = [i for i in range(100) if lo <= i / 100 <= hi]
        assert list(np.flatnonzero(labels[tp])) == expected
    assert list(np.flatnonzero(labels[0])) == list(range(5, 19))


def test_noisy_labels_point_window():
    stats = TpStats(mu=(0.1, 0.3, 0.5, 0.7, 0.9), sigma=(0.0,) * 5)
    labels = make_noisy_labels(10, stats)
    assert list(np.flatnonzero(labels[2])) == [5]


def test_noisy_labels_single_scene_clamps():
    stats = theory_stats()
    labels = make_noisy_labels(1, stats)
    assert labels.shape == (5, 1)
    assert np.all(labels == 1)


def test_noisy_labels_rows_nonempty_and_contiguous():
    rng = np.random.default_rng(1)
    for _ in range(50):
        mu = np.sort(rng.uniform(0.05, 0.95, size=5))
        while np.any(np.diff(mu) <= 0):
            mu = np.sort(rng.uniform(0.05, 0.95, size=5))
        sigma = rng.uniform(0.0, 0.2, size=5)
        stats = TpStats(mu=tuple(mu), sigma=tuple(sigma))
        m = int(rng.integers(1, 40))
        labels = make_noisy_labels(m, stats)
        for tp in range(5):
            positives = np.flatnonzero(labels[tp])
            assert positives.size >= 1
            assert np.all(np.diff(positives) == 1)  # contiguous range


def test_window_indices_fallback_nearest():
    stats = TpStats(mu=(0.101, 0.3, 0.5, 0.7, 0.9), sigma=(0.0,) * 5)
    # with length 7, no index hits 0.101 exactly; nearest to 0.101*7 is index 1
    assert window_indices(7, stats, 0) == [1]


def test_class_weights_formula():
    w_pos, w_neg = class_weights([1] * 10 + [0] * 90)
    assert w_pos == 5.0
    assert abs(w_neg - 100.0 / 180.0) < 1e-12
    assert class_weights([1, 0, 1, 0]) == (1.0, 1.0)
    w_pos, _ = class_weights([1] + [0] * 999)
    assert w_pos == 500.0


def test_class_weights_balance_identity():
    rng = np.random.default_rng(2)
    labels = (rng.random(200) < 0.3).astype(int)
    w_pos, w_neg = class_weights(labels)
    pos, neg = int(labels.sum()), int((1 - labels).sum())
    assert abs(w_pos * pos - len(labels) / 2) < 1e-9
    assert abs(w_neg * neg - len(labels) / 2) < 1e-9


def test_class_weights_degenerate_error():
    with pytest.raises(CorpusError):
        class_weights([1, 1, 1])


def test_training_annotations_expand_multi_annotated():
    movie, _ = movie_with_indices("m", 12, [0, 3, 6, 9, 11])
    tripled = Movie(
        id="t",
        title="t",
        synopsis=movie.synopsis,
        screenplay=movie.screenplay,
        synopsis_annotations=tuple(
            SynopsisAnnotation(annotator=f"a{k}", tp_indices=(0, 3, 6, 9, 11)) for k in range(3)
        ),
    )
    pairs = training_annotations([movie, tripled])
    assert len(pairs) == 4
    single = training_annotations([movie])
    assert len(single) == 1
