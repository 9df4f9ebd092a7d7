"""Data model for movies, synopses, screenplays and turning-point annotations.

A corpus is a JSON document holding movies with their synopsis sentences,
screenplay scenes, cast lists, and zero or more annotations per movie.
Synopsis annotations mark exactly one sentence per turning point (five in
total, in story order); screenplay annotations mark a non-empty set of
scenes per turning point.

All types are immutable after construction and safe to share across
parallel readers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import ContractError, CorpusError

N_TURNING_POINTS = 5

SPLIT_TAGS = ("train", "dev", "test")

# Standard scriptwriting scene-heading prefixes, matched case-insensitively
# against the trimmed start of a line.
SCENE_HEADING_PREFIXES = ("INT.", "EXT.", "INT/EXT", "I/E.")

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.?!])\s+")


@dataclass(frozen=True)
class Scene:
    """One screenplay scene: an optional heading plus its sentences."""

    heading: str
    sentences: tuple[str, ...]


@dataclass(frozen=True)
class SynopsisAnnotation:
    """Five strictly increasing sentence indices, one per turning point."""

    annotator: str
    tp_indices: tuple[int, ...]


@dataclass(frozen=True)
class ScreenplayAnnotation:
    """Five non-empty scene-index sets, one per turning point."""

    annotator: str
    tp_scene_sets: tuple[frozenset[int], ...]


@dataclass(frozen=True)
class Movie:
    id: str
    title: str
    synopsis: tuple[str, ...]
    screenplay: tuple[Scene, ...]
    cast: tuple[str, ...] = ()
    synopsis_annotations: tuple[SynopsisAnnotation, ...] = ()
    screenplay_annotations: tuple[ScreenplayAnnotation, ...] = ()

    @property
    def n_sentences(self) -> int:
        return len(self.synopsis)

    @property
    def n_scenes(self) -> int:
        return len(self.screenplay)


@dataclass(frozen=True)
class CorpusSet:
    """All movies of a corpus plus their train/dev/test split tags."""

    movies: tuple[Movie, ...]
    split_tags: dict[str, str] = field(default_factory=dict)

    def get(self, movie_id: str) -> Movie:
        for movie in self.movies:
            if movie.id == movie_id:
                return movie
        raise CorpusError(f"movie {movie_id!r} not in corpus")

    def split(self, tag: str) -> tuple[Movie, ...]:
        """Movies tagged with `tag`, in corpus order."""
        if tag not in SPLIT_TAGS:
            raise CorpusError(f"unknown split tag {tag!r}")
        return tuple(m for m in self.movies if self.split_tags.get(m.id) == tag)


def validate_movie(movie: Movie) -> None:
    """Check every Movie invariant, raising CorpusError on violation."""
    mid = movie.id
    if not mid:
        raise CorpusError("movie with empty id")
    if movie.n_sentences < 5:
        raise CorpusError(f"movie {mid!r}: synopsis has {movie.n_sentences} sentences, need >= 5")
    if movie.n_scenes < 1:
        raise CorpusError(f"movie {mid!r}: screenplay is empty")
    for i, sent in enumerate(movie.synopsis):
        if not sent.strip():
            raise CorpusError(f"movie {mid!r}: synopsis sentence {i} is empty")
    for si, scene in enumerate(movie.screenplay):
        if not scene.sentences:
            raise CorpusError(f"movie {mid!r}: scene {si} has no sentences")
        for j, sent in enumerate(scene.sentences):
            if not sent.strip():
                raise CorpusError(f"movie {mid!r}: scene {si} sentence {j} is empty")
    for ann in movie.synopsis_annotations:
        idx = ann.tp_indices
        if len(idx) != N_TURNING_POINTS:
            raise CorpusError(f"movie {mid!r}: tp_indices must have 5 entries, got {len(idx)}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise CorpusError(f"movie {mid!r}: non-increasing TP indices {list(idx)}")
        for t, i in enumerate(idx):
            if not 0 <= i < movie.n_sentences:
                raise CorpusError(
                    f"movie {mid!r}: TP{t + 1} index {i} out of range [0, {movie.n_sentences})"
                )
    for ann in movie.screenplay_annotations:
        sets = ann.tp_scene_sets
        if len(sets) != N_TURNING_POINTS:
            raise CorpusError(f"movie {mid!r}: tp_scene_sets must have 5 entries, got {len(sets)}")
        for t, scene_set in enumerate(sets):
            if not scene_set:
                raise CorpusError(f"movie {mid!r}: TP{t + 1} scene set is empty")
            for i in scene_set:
                if not 0 <= i < movie.n_scenes:
                    raise CorpusError(
                        f"movie {mid!r}: TP{t + 1} scene index {i} out of range [0, {movie.n_scenes})"
                    )


def validate_corpus(corpus: CorpusSet) -> None:
    seen: set[str] = set()
    for movie in corpus.movies:
        if movie.id in seen:
            raise CorpusError(f"duplicate movie id {movie.id!r}")
        seen.add(movie.id)
        validate_movie(movie)
    for mid, tag in corpus.split_tags.items():
        if mid not in seen:
            raise CorpusError(f"split tag for unknown movie {mid!r}")
        if tag not in SPLIT_TAGS:
            raise CorpusError(f"movie {mid!r}: unknown split tag {tag!r}")


def _require(obj: dict, key: str, kind: type, where: str):
    if key not in obj:
        raise CorpusError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise CorpusError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def parse_corpus(data: bytes | str) -> CorpusSet:
    """Parse and validate a corpus JSON document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorpusError("top level must be a JSON object")

    movies = []
    for raw in _require(doc, "movies", list, "corpus"):
        if not isinstance(raw, dict):
            raise CorpusError("corpus: movie entries must be objects")
        mid = _require(raw, "id", str, "movie")
        where = f"movie {mid!r}"
        scenes = []
        for rs in _require(raw, "screenplay", list, where):
            if not isinstance(rs, dict):
                raise CorpusError(f"{where}: screenplay entries must be objects")
            scenes.append(
                Scene(
                    heading=str(rs.get("heading", "")),
                    sentences=tuple(_require(rs, "sentences", list, where)),
                )
            )
        syn_anns = []
        for ra in raw.get("synopsis_annotations", []):
            syn_anns.append(
                SynopsisAnnotation(
                    annotator=str(ra.get("annotator", "")),
                    tp_indices=tuple(_require(ra, "tp_indices", list, where)),
                )
            )
        scr_anns = []
        for ra in raw.get("screenplay_annotations", []):
            sets = _require(ra, "tp_scene_sets", list, where)
            scr_anns.append(
                ScreenplayAnnotation(
                    annotator=str(ra.get("annotator", "")),
                    tp_scene_sets=tuple(frozenset(s) for s in sets),
                )
            )
        movies.append(
            Movie(
                id=mid,
                title=_require(raw, "title", str, where),
                synopsis=tuple(_require(raw, "synopsis", list, where)),
                screenplay=tuple(scenes),
                cast=tuple(raw.get("cast", [])),
                synopsis_annotations=tuple(syn_anns),
                screenplay_annotations=tuple(scr_anns),
            )
        )

    splits = doc.get("splits", {})
    if not isinstance(splits, dict):
        raise CorpusError("corpus: 'splits' must be an object")
    corpus = CorpusSet(movies=tuple(movies), split_tags=dict(splits))
    validate_corpus(corpus)
    return corpus


def serialize_corpus(corpus: CorpusSet) -> bytes:
    """Serialize a corpus back to its JSON schema (round-trip stable)."""
    doc = {
        "movies": [
            {
                "id": m.id,
                "title": m.title,
                "synopsis": list(m.synopsis),
                "screenplay": [
                    {"heading": s.heading, "sentences": list(s.sentences)} for s in m.screenplay
                ],
                "cast": list(m.cast),
                "synopsis_annotations": [
                    {"annotator": a.annotator, "tp_indices": list(a.tp_indices)}
                    for a in m.synopsis_annotations
                ],
                "screenplay_annotations": [
                    {"annotator": a.annotator, "tp_scene_sets": [sorted(s) for s in a.tp_scene_sets]}
                    for a in m.screenplay_annotations
                ],
            }
            for m in corpus.movies
        ],
        "splits": dict(corpus.split_tags),
    }
    return json.dumps(doc, ensure_ascii=False, indent=1).encode("utf-8")


def is_scene_heading(line: str) -> bool:
    stripped = line.strip().upper()
    return stripped.startswith(SCENE_HEADING_PREFIXES)


def split_sentences(text: str) -> list[str]:
    """Split on '.', '?' or '!' followed by whitespace; drop empty pieces."""
    return [piece.strip() for piece in _SENTENCE_BOUNDARY.split(text) if piece.strip()]


def split_scenes(raw_screenplay: str) -> list[Scene]:
    """Segment raw screenplay text into scenes at heading lines.

    A new scene starts at each line whose trimmed, uppercased prefix is one
    of SCENE_HEADING_PREFIXES. Text before the first heading becomes scene 0
    with an empty heading. Always returns at least one scene; a scene whose
    body is empty gets an empty sentence tuple (such scenes never survive
    corpus validation, but the segmentation itself is total).
    """
    blocks: list[tuple[str, list[str]]] = []
    current_heading = ""
    current_lines: list[str] = []
    for line in raw_screenplay.splitlines():
        if is_scene_heading(line):
            blocks.append((current_heading, current_lines))
            current_heading = line.strip()
            current_lines = []
        else:
            current_lines.append(line)
    blocks.append((current_heading, current_lines))

    # The leading block is the pre-heading preamble; drop it when contentless.
    if len(blocks) > 1 and not blocks[0][0] and not "".join(blocks[0][1]).strip():
        blocks = blocks[1:]

    scenes = []
    for heading, lines in blocks:
        text = " ".join(part.strip() for part in lines if part.strip())
        scenes.append(Scene(heading=heading, sentences=tuple(split_sentences(text))))
    return scenes


def normalize_position(index: int, length: int) -> float:
    """Zero-based index as a fraction of sequence length, in [0, 1)."""
    if length <= 0:
        raise ContractError(f"length must be positive, got {length}")
    if not 0 <= index < length:
        raise ContractError(f"index {index} out of range [0, {length})")
    return index / length
