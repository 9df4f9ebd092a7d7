from __future__ import annotations

import json
import os
from pathlib import Path

import pytest

from turningpoint.corpus import CorpusSet, parse_corpus

TRIPOD_ENV = "TURNINGPOINT_TRIPOD"


def tripod_path() -> Path | None:
    """Location of a real TRIPOD corpus export, when the user provides one."""
    env = os.environ.get(TRIPOD_ENV)
    if env:
        return Path(env)
    default = Path(__file__).resolve().parents[1] / "data" / "tripod.json"
    return default if default.exists() else None


@pytest.fixture(scope="session")
def tripod_corpus() -> CorpusSet:
    path = tripod_path()
    if path is None or not path.exists():
        pytest.skip(
            f"public TRIPOD annotations not available (set {TRIPOD_ENV} or add data/tripod.json)"
        )
    return parse_corpus(path.read_bytes())


@pytest.fixture()
def tiny_corpus_doc() -> dict:
    return {
        "movies": [
            {
                "id": "mv1",
                "title": "Tiny",
                "synopsis": ["One.", "Two.", "Three.", "Four.", "Five."],
                "screenplay": [
                    {"heading": "INT. ROOM - DAY", "sentences": ["A man waits."]},
                    {"heading": "EXT. STREET - NIGHT", "sentences": ["He leaves.", "Rain falls."]},
                ],
                "cast": ["Ann"],
                "synopsis_annotations": [{"annotator": "a", "tp_indices": [0, 1, 2, 3, 4]}],
                "screenplay_annotations": [
                    {"annotator": "a", "tp_scene_sets": [[0], [0], [1], [1], [1]]}
                ],
            }
        ],
        "splits": {"mv1": "train"},
    }


@pytest.fixture()
def tiny_corpus(tiny_corpus_doc) -> CorpusSet:
    return parse_corpus(json.dumps(tiny_corpus_doc))
