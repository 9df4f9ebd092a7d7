"""Shared builders for synthetic corpora and embedding fixtures."""

from __future__ import annotations

import numpy as np

from turningpoint.corpus import (
    CorpusSet,
    Movie,
    Scene,
    ScreenplayAnnotation,
    SynopsisAnnotation,
    validate_corpus,
)
from turningpoint.embedstore import hash_store_for_corpus

MARKER = "zqx_turningmark"
ANCHORS = (0.10, 0.30, 0.50, 0.72, 0.92)

# Planted-corpus geometry: fixed synopsis length with anchor sentences six
# apart. Train movies offset each TP by +/-2 with exactly balanced signs,
# making the fitted window [anchor-2, anchor+2] (five candidate sentences);
# dev and test offsets of +/-1 sit strictly inside that window, so every
# gold pick is reachable by window-constrained inference.
PLANTED_N = 30
PLANTED_ANCHOR_IDX = (3, 9, 15, 21, 27)


def random_sentence(rng: np.random.Generator, n_tokens: int = 8) -> str:
    return " ".join(f"w{rng.integers(4000):04d}" for _ in range(n_tokens))


def planted_tp_indices(rng: np.random.Generator, n: int = PLANTED_N) -> list[int]:
    """Five strictly increasing indices, each anchor +/- a small offset."""
    scale = n / PLANTED_N
    return [
        min(max(round((a + 2 * (1 if rng.random() < 0.5 else -1)) * scale), 0), n - 1)
        for a in PLANTED_ANCHOR_IDX
    ]


def make_movie(
    rng: np.random.Generator,
    movie_id: str,
    tp_indices: list[int],
    n_sentences: int = PLANTED_N,
    n_scenes: int = 3,
    planted: bool = True,
) -> Movie:
    sentences = [random_sentence(rng) for _ in range(n_sentences)]
    if planted:
        for idx in tp_indices:
            # Repeat the marker so its hash bucket dominates the sentence vector.
            sentences[idx] = sentences[idx] + " " + " ".join([MARKER] * 4)
    scenes = tuple(
        Scene(heading=f"INT. PLACE {i}", sentences=tuple(random_sentence(rng, 5) for _ in range(3)))
        for i in range(n_scenes)
    )
    return Movie(
        id=movie_id,
        title=f"Movie {movie_id}",
        synopsis=tuple(sentences),
        screenplay=scenes,
        cast=("Ada", "Grace"),
        synopsis_annotations=(SynopsisAnnotation(annotator="a1", tp_indices=tuple(tp_indices)),),
    )


def planted_signal_corpus(
    n_movies: int = 20, seed: int = 7, n_train: int = 14, n_dev: int = 3
) -> CorpusSet:
    """Synthetic synopsis corpus whose TP sentences carry a marker token.

    The marker direction in hash-embedding space is the planted signal a
    classifier must pick up; non-TP sentences are random filler.
    """
    if n_train % 2:
        raise ValueError("n_train must be even so the +/-2 offsets balance exactly")
    rng = np.random.default_rng(seed)
    movies = []
    splits = {}
    for i in range(n_movies):
        if i < n_train:
            offsets = [2 if (i + t) % 2 == 0 else -2 for t in range(5)]
        else:
            offsets = [1 if rng.random() < 0.5 else -1 for _ in range(5)]
        tp_indices = [a + o for a, o in zip(PLANTED_ANCHOR_IDX, offsets)]
        movie = make_movie(rng, f"m{i:02d}", tp_indices)
        movies.append(movie)
        if i < n_train:
            splits[movie.id] = "train"
        elif i < n_train + n_dev:
            splits[movie.id] = "dev"
        else:
            splits[movie.id] = "test"
    corpus = CorpusSet(movies=tuple(movies), split_tags=splits)
    validate_corpus(corpus)
    return corpus


def screenplay_fixture_corpus(
    n_movies: int = 8, n_scenes: int = 24, seed: int = 11
) -> CorpusSet:
    """Movies with screenplays and scene-set annotations near the anchors.

    Scene sentences at TP-window positions reuse their TP sentence's tokens,
    so windows are separable from scene content alone.
    """
    rng = np.random.default_rng(seed)
    movies = []
    splits = {}
    for i in range(n_movies):
        n = int(rng.integers(18, 25))
        sentences = [random_sentence(rng) for _ in range(n)]
        tp_indices = planted_tp_indices(rng, n)
        scenes = []
        scene_sets = []
        for tp, anchor in enumerate(ANCHORS):
            scene_sets.append(frozenset({min(max(round(anchor * n_scenes), 0), n_scenes - 1)}))
        tp_peak = {next(iter(s)): tp for tp, s in enumerate(scene_sets)}
        for si in range(n_scenes):
            if si in tp_peak:
                base = sentences[tp_indices[tp_peak[si]]]
                body = (base, random_sentence(rng, 4))
            else:
                body = (random_sentence(rng, 6), random_sentence(rng, 4))
            scenes.append(Scene(heading=f"INT. SCENE {si}", sentences=body))
        movie = Movie(
            id=f"s{i:02d}",
            title=f"Script {i}",
            synopsis=tuple(sentences),
            screenplay=tuple(scenes),
            synopsis_annotations=(
                SynopsisAnnotation(annotator="a1", tp_indices=tuple(tp_indices)),
            ),
            screenplay_annotations=(
                ScreenplayAnnotation(annotator="a1", tp_scene_sets=tuple(scene_sets)),
            ),
        )
        movies.append(movie)
        splits[movie.id] = "train" if i < n_movies - 2 else "test"
    corpus = CorpusSet(movies=tuple(movies), split_tags=splits)
    validate_corpus(corpus)
    return corpus


def corpus_with_store(corpus: CorpusSet, dim: int = 48, seed: int = 0):
    return corpus, hash_store_for_corpus(corpus, dim=dim, seed=seed)


def dataset_shaped_corpus(seed: int = 23) -> CorpusSet:
    """A corpus with the public dataset's shape (not its content): 99 movies,
    84 train / 15 test, triplicate annotations on 17 train movies and
    duplicates on 5 more, screenplay scene-set annotations on the test 15.

    Lets the data-gated harness code paths run end to end without claiming
    to reproduce any published number.
    """
    rng = np.random.default_rng(seed)
    movies = []
    splits = {}
    for i in range(99):
        is_test = i >= 84
        n = int(rng.integers(25, 46))
        sentences = [random_sentence(rng) for _ in range(n)]
        tp_indices = planted_tp_indices(rng, n)
        if i < 17:
            n_copies = 3
        elif i < 22:
            n_copies = 2
        else:
            n_copies = 1
        annotations = []
        for copy in range(n_copies):
            indices = tp_indices
            if copy:
                shifted = [min(max(j + int(rng.integers(-1, 2)), 0), n - 1) for j in tp_indices]
                if all(b > a for a, b in zip(shifted, shifted[1:])):
                    indices = shifted
            annotations.append(
                SynopsisAnnotation(annotator=f"a{copy}", tp_indices=tuple(indices))
            )
        m = int(rng.integers(20, 41))
        scenes = tuple(
            Scene(
                heading=f"INT. LOC {si}",
                sentences=tuple(random_sentence(rng, 5) for _ in range(int(rng.integers(1, 4)))),
            )
            for si in range(m)
        )
        scr_annotations = ()
        if is_test:
            sets = []
            for frac in ANCHORS:
                center = min(max(round(frac * m), 0), m - 1)
                width = int(rng.integers(1, 3))
                sets.append(frozenset(min(max(center + d, 0), m - 1) for d in range(width)))
            scr_annotations = (
                ScreenplayAnnotation(annotator="a0", tp_scene_sets=tuple(sets)),
            )
        movie = Movie(
            id=f"d{i:02d}",
            title=f"Shaped {i}",
            synopsis=tuple(sentences),
            screenplay=scenes,
            synopsis_annotations=tuple(annotations),
            screenplay_annotations=scr_annotations,
        )
        movies.append(movie)
        splits[movie.id] = "test" if is_test else "train"
    corpus = CorpusSet(movies=tuple(movies), split_tags=splits)
    validate_corpus(corpus)
    return corpus


def to_float64(tensors) -> None:
    for t in tensors:
        t.data = t.data.astype(np.float64)


def finite_difference_grads(forward, tensors, h: float = 1e-6):
    """Central finite differences of a scalar forward() w.r.t. each tensor."""
    grads = []
    for t in tensors:
        grad = np.zeros_like(t.data)
        flat_data = t.data.ravel()
        flat_grad = grad.ravel()
        for i in range(flat_data.size):
            original = flat_data[i]
            flat_data[i] = original + h
            f_plus = forward().item()
            flat_data[i] = original - h
            f_minus = forward().item()
            flat_data[i] = original
            flat_grad[i] = (f_plus - f_minus) / (2.0 * h)
        grads.append(grad)
    return grads


def max_relative_error(analytic, numeric) -> float:
    # The 1e-6 denominator floor absorbs central-difference noise (~5e-11 at
    # h=1e-6 in float64) on near-zero gradients without hiding real bugs,
    # which show up at the gradient's own scale.
    worst = 0.0
    for a, n in zip(analytic, numeric):
        a = np.zeros_like(n) if a is None else a
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-6)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def gradcheck(forward, tensors, tol: float = 1e-3, h: float = 1e-6) -> float:
    """Compare autograd gradients with the finite-difference oracle.

    `forward` must rebuild the graph from the tensors' current .data on
    every call. Returns the worst relative error (asserts it is < tol).
    """
    from turningpoint.tensorcore import backward, zero_grads

    zero_grads(tensors)
    loss = forward()
    backward(loss)
    analytic = [t.grad for t in tensors]
    numeric = finite_difference_grads(forward, tensors, h=h)
    err = max_relative_error(analytic, numeric)
    assert err < tol, f"gradient mismatch: max relative error {err:.3e} >= {tol}"
    return err
