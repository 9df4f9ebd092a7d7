from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from turningpoint.corpus import Movie, Scene, ScreenplayAnnotation, SynopsisAnnotation, CorpusSet
from turningpoint.errors import ContractError, CorpusError
from turningpoint.evaluate import (
    MetricReport,
    d_scenes,
    d_synopsis,
    evaluate_run,
    make_folds,
    pa_scenes,
    ta_scenes,
    ta_synopsis,
)


def test_d_synopsis_values():
    assert d_synopsis(10, 15, 50) == 0.10
    assert d_synopsis(7, 7, 40) == 0.0
    assert d_synopsis(3, 9, 30) == d_synopsis(9, 3, 30)
    with pytest.raises(ContractError):
        d_synopsis(50, 0, 50)


def test_ta_synopsis_values():
    assert ta_synopsis([1, 2, 3, 4, 5], [1, 2, 3, 4, 5]) == 1.0
    assert ta_synopsis([1, 2, 3, 4, 5], [6, 7, 8, 9, 10]) == 0.0
    assert ta_synopsis([1, 2, 3, 4, 5], [1, 2, 9, 9, 9]) == 0.4
    with pytest.raises(ContractError):
        ta_synopsis([1, 2, 3], [1, 2, 3, 4, 5])


def test_ta_scenes_jaccard():
    pred = [{3, 4}] * 5
    gold = [{4, 5}] * 5
    assert abs(ta_scenes(pred, gold) - 1.0 / 3.0) < 1e-12
    assert ta_scenes(gold, gold) == 1.0


def test_ta_scenes_mixed_fixture_hand_mean():
    pred = [{0}, {1, 2}, {5}, {7, 8}, {9}]
    gold = [{0}, {2, 3}, {6}, {7, 8}, {8, 9, 10}]
    # hand-enumerated Jaccards: 1, 1/3, 0, 1, 1/3
    expected = (1.0 + 1.0 / 3.0 + 0.0 + 1.0 + 1.0 / 3.0) / 5.0
    assert abs(ta_scenes(pred, gold) - expected) < 1e-12


def test_pa_scenes_values():
    pred = [{1}, {2}, {3}, {4}, {5}]
    assert pa_scenes(pred, pred) == 1.0
    assert pa_scenes(pred, [{9}] * 5) == 0.0
    gold = [{1}, {2}, {3}, {9}, {9}]
    assert pa_scenes(pred, gold) == 0.6


def test_d_scenes_values():
    assert d_scenes([{10, 12}] * 5, [{20}] * 5, 100) == 0.08
    assert d_scenes([{3}] * 5, [{3, 4}] * 5, 10) == 0.0
    assert d_scenes([{2, 40}] * 5, [{41}] * 5, 100) == 0.01


def test_metric_relations_and_symmetry_small_brute_force():
    """Exhaustive-pair oracle over random small instances."""
    rng = np.random.default_rng(7)
    for _ in range(300):
        m = int(rng.integers(3, 13))
        pred = [frozenset(rng.choice(m, size=int(rng.integers(1, 4)), replace=False)) for _ in range(5)]
        gold = [frozenset(rng.choice(m, size=int(rng.integers(1, 4)), replace=False)) for _ in range(5)]
        # brute-force oracles
        jac = [len(s & g) / len(s | g) for s, g in zip(pred, gold)]
        ind = [1.0 if s & g else 0.0 for s, g in zip(pred, gold)]
        dmin = [min(abs(a - b) for a, b in itertools.product(s, g)) / m for s, g in zip(pred, gold)]
        assert abs(ta_scenes(pred, gold) - float(np.mean(jac))) < 1e-12
        assert abs(pa_scenes(pred, gold) - float(np.mean(ind))) < 1e-12
        assert abs(d_scenes(pred, gold, m) - float(np.mean(dmin))) < 1e-12
        # invariant relations
        assert ta_scenes(pred, gold) <= pa_scenes(pred, gold) + 1e-12
        assert d_scenes(pred, gold, m) == d_scenes(gold, pred, m)


def _movie(mid: str, n: int, m: int, syn_indices, scene_sets, extra_ann=None) -> Movie:
    syn_anns = [SynopsisAnnotation(annotator="a", tp_indices=tuple(syn_indices))]
    scr_anns = [ScreenplayAnnotation(annotator="a", tp_scene_sets=tuple(map(frozenset, scene_sets)))]
    if extra_ann is not None:
        syn_anns.append(SynopsisAnnotation(annotator="b", tp_indices=tuple(extra_ann)))
    return Movie(
        id=mid,
        title=mid,
        synopsis=tuple(f"s{i}." for i in range(n)),
        screenplay=tuple(Scene(heading="INT. X", sentences=("x.",)) for _ in range(m)),
        synopsis_annotations=tuple(syn_anns),
        screenplay_annotations=tuple(scr_anns),
    )


def corpus_two_movies() -> CorpusSet:
    m1 = _movie("m1", 20, 10, [1, 5, 9, 13, 18], [[0], [2], [4], [6], [9]])
    m2 = _movie("m2", 10, 8, [0, 2, 4, 6, 8], [[1], [2], [3], [4], [5]], extra_ann=[1, 2, 4, 6, 9])
    return CorpusSet(movies=(m1, m2), split_tags={"m1": "test", "m2": "test"})


def test_evaluate_run_identity_synopsis():
    corpus = corpus_two_movies()
    preds = {"m1": [1, 5, 9, 13, 18]}
    report = evaluate_run(preds, corpus, "synopsis")
    assert report.ta == 100.0
    assert report.d_mean == 0.0
    assert report.pa is None
    assert report.n_movies == 1


def test_evaluate_run_multi_annotation_averaging():
    corpus = corpus_two_movies()
    preds = {"m2": [0, 2, 4, 6, 8]}
    report = evaluate_run(preds, corpus, "synopsis")
    # annotation a matches exactly (TA 1); annotation b matches 3 of 5
    assert abs(report.ta - 100.0 * (1.0 + 0.6) / 2.0) < 1e-9
    # D: zero against a; against b distances (1+0+0+0+1)/10/5
    expected_d = 100.0 * (0.0 + (0.1 + 0.0 + 0.0 + 0.0 + 0.1) / 5.0) / 2.0
    assert abs(report.d_mean - expected_d) < 1e-9


def test_evaluate_run_screenplay_identity():
    corpus = corpus_two_movies()
    preds = {
        "m1": [{0}, {2}, {4}, {6}, {9}],
        "m2": [{1}, {2}, {3}, {4}, {5}],
    }
    report = evaluate_run(preds, corpus, "screenplay")
    assert report.ta == 100.0
    assert report.pa == 100.0
    assert report.d_mean == 0.0
    assert report.per_tp_d == (0.0,) * 5


def test_evaluate_run_missing_gold_is_error():
    corpus = corpus_two_movies()
    bare = Movie(
        id="m3",
        title="m3",
        synopsis=tuple(f"s{i}." for i in range(6)),
        screenplay=(Scene(heading="INT. X", sentences=("x.",)),),
    )
    extended = CorpusSet(movies=corpus.movies + (bare,), split_tags=dict(corpus.split_tags))
    with pytest.raises(CorpusError, match="m3"):
        evaluate_run({"m3": [0, 1, 2, 3, 4]}, extended, "synopsis")


def test_report_json_and_table():
    report = MetricReport(ta=22.0, pa=None, d_mean=7.47, d_std=6.75, per_tp_d=(1, 2, 3, 4, 5), n_movies=15)
    doc = json.loads(report.to_json())
    assert doc["ta"] == 22.0 and doc["pa"] is None
    table = report.table("theory")
    assert "22.00" in table and "7.47" in table


def test_make_folds_partition():
    ids = [f"m{i}" for i in range(15)]
    plan = make_folds(ids, k=5, seed=3)
    assert len(plan.folds) == 5
    assert all(len(f) == 3 for f in plan.folds)
    assert sorted(plan.all_ids()) == sorted(ids)
    assert make_folds(ids, k=5, seed=3) == plan
    other = make_folds(ids, k=5, seed=4)
    assert sorted(other.all_ids()) == sorted(ids)
    with pytest.raises(ContractError):
        make_folds(ids, k=16, seed=0)


def test_make_folds_uneven():
    plan = make_folds([f"m{i}" for i in range(7)], k=3, seed=0)
    sizes = sorted(len(f) for f in plan.folds)
    assert sizes == [2, 2, 3]
