"""Read-only view of the corpus JSON interchange format.

The exporter deliberately reimplements this small reader instead of
importing the pipeline package: the JSON schema and the store byte layout
are the only contracts shared between the two sides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import ExportError


@dataclass(frozen=True)
class SentenceRef:
    key: str
    text: str


@dataclass(frozen=True)
class CorpusView:
    sentences: tuple[SentenceRef, ...]
    casts: dict[str, tuple[str, ...]]

    def texts(self) -> list[str]:
        return [ref.text for ref in self.sentences]

    def keys(self) -> list[str]:
        return [ref.key for ref in self.sentences]


def load_corpus(data: bytes | str) -> CorpusView:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ExportError(f"corpus is not valid JSON: {exc}") from exc
    movies = doc.get("movies")
    if not isinstance(movies, list):
        raise ExportError("corpus JSON has no 'movies' list")
    refs: list[SentenceRef] = []
    casts: dict[str, tuple[str, ...]] = {}
    for movie in movies:
        mid = movie.get("id")
        if not mid:
            raise ExportError("movie without an id")
        casts[mid] = tuple(movie.get("cast", []))
        for i, text in enumerate(movie.get("synopsis", [])):
            refs.append(SentenceRef(key=f"{mid}|synopsis|-1|{i}", text=text))
        for si, scene in enumerate(movie.get("screenplay", [])):
            for j, text in enumerate(scene.get("sentences", [])):
                refs.append(SentenceRef(key=f"{mid}|scene|{si}|{j}", text=text))
    return CorpusView(sentences=tuple(refs), casts=casts)
