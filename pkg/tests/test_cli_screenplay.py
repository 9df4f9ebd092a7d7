from __future__ import annotations

import json
from pathlib import Path

import pytest

from helpers import screenplay_fixture_corpus
from turningpoint.cli import main
from turningpoint.corpus import serialize_corpus


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("scr") / "corpus.json"
    path.write_bytes(serialize_corpus(screenplay_fixture_corpus()))
    return path


@pytest.fixture(scope="module")
def stats_file(corpus_file, tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("scr-stats") / "stats.json"
    assert main(["fit-stats", "--corpus", str(corpus_file), "--out", str(out)]) == 0
    return out


def test_screenplay_baselines(corpus_file, stats_file, tmp_path):
    for which in ("theory", "distribution", "tfidf", "tfidf+distribution"):
        out_dir = tmp_path / which.replace("+", "_")
        code = main(
            [
                "baseline",
                "--corpus",
                str(corpus_file),
                "--which",
                which,
                "--task",
                "screenplay",
                "--split",
                "all",
                "--stats",
                str(stats_file),
                "--out",
                str(out_dir),
            ]
        )
        assert code == 0, which
        metrics = json.loads((out_dir / "metrics.json").read_text())
        assert metrics["n_movies"] == 8
        assert metrics["pa"] is not None


@pytest.fixture(scope="module")
def screenplay_ckpt(corpus_file, stats_file, tmp_path_factory) -> Path:
    ckpt = tmp_path_factory.mktemp("scr-train") / "screenplay.ckpt"
    code = main(
        [
            "train",
            "--corpus",
            str(corpus_file),
            "--embeddings",
            "hash:dim=32,seed=1",
            "--task",
            "screenplay",
            "--variant",
            "tam",
            "--epochs",
            "2",
            "--seed",
            "0",
            "--stats",
            str(stats_file),
            "--out",
            str(ckpt),
        ]
    )
    assert code == 0
    return ckpt


@pytest.fixture(scope="module")
def synopsis_ckpt(corpus_file, tmp_path_factory) -> Path:
    ckpt = tmp_path_factory.mktemp("syn-train") / "synopsis.ckpt"
    code = main(
        [
            "train",
            "--corpus",
            str(corpus_file),
            "--embeddings",
            "hash:dim=32,seed=1",
            "--task",
            "synopsis",
            "--variant",
            "cam",
            "--epochs",
            "2",
            "--seed",
            "0",
            "--out",
            str(ckpt),
        ]
    )
    assert code == 0
    return ckpt


def test_screenplay_predict_gold_tps(corpus_file, screenplay_ckpt, tmp_path):
    out_dir = tmp_path / "preds"
    code = main(
        [
            "predict",
            "--corpus",
            str(corpus_file),
            "--embeddings",
            "hash:dim=32,seed=1",
            "--checkpoint",
            str(screenplay_ckpt),
            "--split",
            "test",
            "--out",
            str(out_dir),
        ]
    )
    assert code == 0
    csvs = list(out_dir.glob("*.csv"))
    assert len(csvs) == 2
    # screenplay traces have no highlights files
    assert not list(out_dir.glob("*.highlights.txt"))
    header = csvs[0].read_text().splitlines()[0]
    assert header == "tp,scene,probability,selected"


def test_end_to_end_predict_via_cli(corpus_file, screenplay_ckpt, synopsis_ckpt, tmp_path):
    out_dir = tmp_path / "e2e"
    code = main(
        [
            "predict",
            "--corpus",
            str(corpus_file),
            "--embeddings",
            "hash:dim=32,seed=1",
            "--checkpoint",
            str(screenplay_ckpt),
            "--synopsis-checkpoint",
            str(synopsis_ckpt),
            "--split",
            "test",
            "--out",
            str(out_dir),
        ]
    )
    assert code == 0
    assert len(list(out_dir.glob("*.csv"))) == 2


def test_eval_screenplay_predictions(corpus_file, screenplay_ckpt, tmp_path, capsys):
    out_dir = tmp_path / "preds"
    main(
        [
            "predict",
            "--corpus",
            str(corpus_file),
            "--embeddings",
            "hash:dim=32,seed=1",
            "--checkpoint",
            str(screenplay_ckpt),
            "--split",
            "test",
            "--out",
            str(out_dir),
        ]
    )
    code = main(["eval", "--corpus", str(corpus_file), "--predictions", str(out_dir)])
    assert code == 0
    out = capsys.readouterr().out
    assert "TA" in out and "PA" in out


def test_crossval_cli(corpus_file, stats_file, tmp_path, capsys):
    report_path = tmp_path / "cv.json"
    code = main(
        [
            "crossval",
            "--corpus",
            str(corpus_file),
            "--embeddings",
            "hash:dim=32,seed=1",
            "--variant",
            "cam",
            "--folds",
            "4",
            "--epochs",
            "1",
            "--stats",
            str(stats_file),
            "--out",
            str(report_path),
        ]
    )
    assert code == 0
    doc = json.loads(report_path.read_text())
    assert doc["n_movies"] == 8
