"""Training loops for the synopsis and screenplay tasks, plus cross-validation.

Training is one Adam step per movie (the data sets are tiny), with the
movie order reshuffled from the run seed every epoch. Synopsis models early
stop on dev total agreement; screenplay models on dev annotation distance.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import CorpusSet, Movie, N_TURNING_POINTS
from .embedstore import EmbeddingStore, WordVectorTable, corpus_keys, scene_matrices, synopsis_matrix
from .errors import ConfigError, CorpusError, StoreError
from .evaluate import FoldPlan, MetricReport, evaluate_run, make_folds, ta_synopsis
from .models.end2end import predict_screenplay_trace, predict_synopsis_trace
from .models.entities import movie_entity_tokens, sentence_token_matrices
from .models.screenplay import ScreenplayModel, ScreenplayModelConfig
from .models.synopsis import SynopsisModel, SynopsisModelConfig
from .supervision import (
    TpStats,
    class_weights,
    fit_position_stats,
    make_noisy_labels,
    training_annotations,
)
from .tensorcore import AdamState, adam_step, backward, save_params, load_params, zero_grads
from .tensorcore.layers import weighted_bce_mean


@dataclass
class TrainConfig:
    task: str  # "synopsis" | "screenplay"
    variant: str
    epochs: int = 300
    learning_rate: float = 1e-3
    seed: int = 0
    patience: int = 10
    dropout: float = 0.2
    dev_fraction: float = 0.2
    interaction_mode: str = "ratio"
    lstm_hidden: int | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if self.task not in ("synopsis", "screenplay"):
            raise ConfigError(f"unknown task {self.task!r}")

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "variant": self.variant,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "patience": self.patience,
            "dropout": self.dropout,
            "dev_fraction": self.dev_fraction,
            "interaction_mode": self.interaction_mode,
            "lstm_hidden": self.lstm_hidden,
        }


@dataclass
class Checkpoint:
    config: TrainConfig
    stats: TpStats
    model: SynopsisModel | ScreenplayModel
    history: list[dict] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        tag = f"{self.config.task}:{self.config.variant}"
        return save_params(tag, self.model.parameters(), self.config.seed)

    def sidecar_json(self) -> str:
        return json.dumps(
            {
                "config": self.config.to_dict(),
                "stats": json.loads(self.stats.to_json()),
                "input_dim": self.model.config.input_dim,
                "history": self.history,
            },
            indent=1,
        )


def load_checkpoint(data: bytes, sidecar: str) -> Checkpoint:
    tag, state, seed, _ = load_params(data)
    meta = json.loads(sidecar)
    config = TrainConfig(**meta["config"])
    if tag != f"{config.task}:{config.variant}":
        raise StoreError(f"checkpoint tag {tag!r} does not match sidecar config")
    stats = TpStats(
        mu=tuple(meta["stats"]["mu"]),
        sigma=tuple(meta["stats"]["sigma"]),
        source=meta["stats"].get("source", "fitted"),
    )
    model = build_model(config, int(meta["input_dim"]))
    model.load_state(state)
    return Checkpoint(config=config, stats=stats, model=model, history=meta.get("history", []))


def build_model(config: TrainConfig, input_dim: int):
    if config.task == "synopsis":
        cfg = SynopsisModelConfig(
            variant=config.variant,
            input_dim=input_dim,
            dropout=config.dropout,
            interaction_mode=config.interaction_mode,
        )
        if config.lstm_hidden is not None:
            cfg.lstm_hidden = config.lstm_hidden
        return SynopsisModel(cfg, seed=config.seed)
    cfg = ScreenplayModelConfig(
        variant=config.variant,
        input_dim=input_dim,
        dropout=config.dropout,
        interaction_mode=config.interaction_mode,
    )
    if config.lstm_hidden is not None:
        cfg.lstm_hidden = config.lstm_hidden
    return ScreenplayModel(cfg, seed=config.seed)


def check_embedding_coverage(movies, store: EmbeddingStore) -> None:
    """Movies may be a CorpusSet or an iterable of Movie objects."""
    if isinstance(movies, CorpusSet):
        keys = corpus_keys(movies)
    else:
        keys = corpus_keys(CorpusSet(movies=tuple(movies), split_tags={}))
    missing = [k for k in keys if k not in store]
    if missing:
        shown = ", ".join(missing[:5])
        raise StoreError(
            f"embedding store is missing {len(missing)} corpus keys (first: {shown})"
        )


def content_hash(store: EmbeddingStore) -> str:
    h = hashlib.sha256()
    for key in sorted(store.records):
        h.update(key.encode())
        h.update(store.records[key].tobytes())
    return h.hexdigest()


def split_train_dev(
    corpus: CorpusSet, config: TrainConfig
) -> tuple[list[Movie], list[Movie]]:
    """Use dev-tagged movies when present, else carve a seeded tail of train."""
    train = list(corpus.split("train"))
    dev = list(corpus.split("dev"))
    if dev:
        return train, dev
    if not train:
        raise CorpusError("corpus has no train-tagged movies")
    if len(train) < 2:
        return train, list(train)
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(train))
    n_dev = max(1, int(round(config.dev_fraction * len(train))))
    dev_ids = {train[i].id for i in order[:n_dev]}
    return [m for m in train if m.id not in dev_ids], [m for m in train if m.id in dev_ids]


def _synopsis_labels(movie: Movie, tp_indices) -> np.ndarray:
    labels = np.zeros(movie.n_sentences, dtype=np.int8)
    labels[list(tp_indices)] = 1
    return labels


def _dev_ta(
    model: SynopsisModel,
    dev: list[Movie],
    store: EmbeddingStore,
    stats: TpStats,
    word_table: WordVectorTable | None,
) -> float:
    scores = []
    for movie in dev:
        trace = predict_synopsis_trace(model, movie, store, stats, word_table)
        per_ann = [ta_synopsis(trace.selected, a.tp_indices) for a in movie.synopsis_annotations]
        if per_ann:
            scores.append(float(np.mean(per_ann)))
    return float(np.mean(scores)) if scores else 0.0


def train_synopsis(
    config: TrainConfig,
    corpus: CorpusSet,
    store: EmbeddingStore,
    word_table: WordVectorTable | None = None,
    stats: TpStats | None = None,
) -> Checkpoint:
    """Train a sentence-level TP classifier with weighted BCE.

    Each (movie, annotation) pair is one training instance, so duplicate
    and triplicate annotations are seen as additional instances. Returns
    the best-dev-TA parameters.
    """
    if config.task != "synopsis":
        raise ConfigError(f"config task is {config.task!r}, expected 'synopsis'")
    train_movies, dev_movies = split_train_dev(corpus, config)
    instances = training_annotations(train_movies)
    if not instances:
        raise CorpusError("no annotated training movies")
    check_embedding_coverage(train_movies + dev_movies, store)
    if stats is None:
        stats = fit_position_stats(instances)

    n_pos = sum(N_TURNING_POINTS for _ in instances)
    n_total = sum(movie.n_sentences for movie, _ in instances)
    if n_total == n_pos:
        raise CorpusError("degenerate training set: every sentence is a TP")
    w_pos, w_neg = class_weights(
        np.concatenate([_synopsis_labels(m, a.tp_indices) for m, a in instances])
    )

    model = build_model(config, store.dim)
    params = model.tensors()
    adam = AdamState.for_params(params, lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)

    inputs = []
    for movie, ann in instances:
        tokens = None
        if model.config.uses_entities:
            tokens = sentence_token_matrices(movie.synopsis, word_table)
        inputs.append((synopsis_matrix(store, movie), tokens, _synopsis_labels(movie, ann.tp_indices)))

    best_state: dict[str, np.ndarray] | None = None
    best_ta = -1.0
    best_loss = float("inf")
    history: list[dict] = []
    stale = 0
    for epoch in range(config.epochs):
        order = rng.permutation(len(inputs))
        losses = []
        for idx in order:
            x, tokens, labels = inputs[idx]
            zero_grads(params)
            probs = model.forward(x, entity_tokens=tokens, training=True, rng=rng)
            loss = weighted_bce_mean(probs, labels, w_pos, w_neg)
            backward(loss)
            adam_step(adam, params)
            losses.append(loss.item())
        dev_ta = _dev_ta(model, dev_movies, store, stats, word_table)
        epoch_loss = float(np.mean(losses))
        history.append({"epoch": epoch, "loss": epoch_loss, "dev_ta": dev_ta})
        improved = dev_ta > best_ta
        # ties on the dev metric go to the lower-training-loss epoch
        if improved or (dev_ta == best_ta and epoch_loss < best_loss):
            best_ta = dev_ta
            best_loss = epoch_loss
            best_state = {name: t.data.copy() for name, t in model.parameters()}
        if improved:
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    if best_state is not None:
        model.load_state(best_state)
    return Checkpoint(config=config, stats=stats, model=model, history=history)


def _dev_distance(
    model: ScreenplayModel,
    dev: list[Movie],
    store: EmbeddingStore,
    word_table: WordVectorTable | None,
) -> float:
    from .evaluate import d_scenes

    scores = []
    for movie in dev:
        gold_anns = movie.screenplay_annotations
        syn_anns = movie.synopsis_annotations
        if not gold_anns or not syn_anns:
            continue
        trace = predict_screenplay_trace(
            model, movie, store, list(syn_anns[0].tp_indices), word_table
        )
        scores.append(
            float(np.mean([d_scenes(trace.selected, a.tp_scene_sets, movie.n_scenes) for a in gold_anns]))
        )
    return float(np.mean(scores)) if scores else float("inf")


def train_screenplay(
    config: TrainConfig,
    corpus: CorpusSet,
    store: EmbeddingStore,
    stats: TpStats,
    word_table: WordVectorTable | None = None,
    train_movies: list[Movie] | None = None,
    dev_movies: list[Movie] | None = None,
) -> Checkpoint:
    """Distant supervision: noisy window labels over (scene, TP) pairs.

    Gold TP synopsis sentences provide the TP vectors during training. Dev
    selection minimizes annotation distance on movies that carry gold
    screenplay annotations; without any, the lowest-training-loss epoch wins.
    """
    if config.task != "screenplay":
        raise ConfigError(f"config task is {config.task!r}, expected 'screenplay'")
    if train_movies is None or dev_movies is None:
        auto_train, auto_dev = split_train_dev(corpus, config)
        train_movies = train_movies if train_movies is not None else auto_train
        dev_movies = dev_movies if dev_movies is not None else auto_dev
    instances = training_annotations(train_movies)
    if not instances:
        raise CorpusError("no annotated training movies")
    check_embedding_coverage(train_movies + dev_movies, store)

    all_labels = np.concatenate(
        [make_noisy_labels(m.n_scenes, stats).ravel() for m, _ in instances]
    )
    w_pos, w_neg = class_weights(all_labels)

    model = build_model(config, store.dim)
    params = model.tensors()
    adam = AdamState.for_params(params, lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)

    inputs = []
    for movie, ann in instances:
        scene_vecs = scene_matrices(store, movie)
        syn = synopsis_matrix(store, movie)
        tp_vectors = [syn[i] for i in ann.tp_indices]
        scene_tokens = tp_tokens = None
        if model.config.uses_entities:
            scene_tokens, _ = movie_entity_tokens(movie, word_table)
            tp_tokens = [
                sentence_token_matrices([movie.synopsis[i]], word_table)[0]
                for i in ann.tp_indices
            ]
        labels = make_noisy_labels(movie.n_scenes, stats)
        inputs.append((scene_vecs, tp_vectors, scene_tokens, tp_tokens, labels))

    best_state: dict[str, np.ndarray] | None = None
    best_d = float("inf")
    best_loss = float("inf")
    history: list[dict] = []
    stale = 0
    for epoch in range(config.epochs):
        order = rng.permutation(len(inputs))
        losses = []
        for idx in order:
            scene_vecs, tp_vectors, scene_tokens, tp_tokens, labels = inputs[idx]
            zero_grads(params)
            matrix = model.forward(
                scene_vecs,
                tp_vectors,
                scene_entity_tokens=scene_tokens,
                tp_entity_tokens=tp_tokens,
                training=True,
                rng=rng,
            )
            loss = weighted_bce_mean(matrix, labels.astype(matrix.dtype), w_pos, w_neg)
            backward(loss)
            adam_step(adam, params)
            losses.append(loss.item())
        dev_d = _dev_distance(model, dev_movies, store, word_table)
        epoch_loss = float(np.mean(losses))
        history.append({"epoch": epoch, "loss": epoch_loss, "dev_d": dev_d})
        improved = dev_d < best_d
        if improved or (dev_d == best_d and epoch_loss < best_loss):
            best_d = dev_d
            best_loss = epoch_loss
            best_state = {name: t.data.copy() for name, t in model.parameters()}
        if improved:
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    if best_state is not None:
        model.load_state(best_state)
    return Checkpoint(config=config, stats=stats, model=model, history=history)


def run_crossval(
    config: TrainConfig,
    corpus: CorpusSet,
    store: EmbeddingStore,
    stats: TpStats,
    k: int = 5,
    word_table: WordVectorTable | None = None,
) -> tuple[MetricReport, FoldPlan]:
    """K-fold evaluation over the movies holding gold screenplay annotations.

    Each fold is predicted by a model tuned (dev selection) on the remaining
    annotated movies; training instances come from the corpus train split.
    """
    annotated = [
        m for m in corpus.movies
        if m.screenplay_annotations and m.synopsis_annotations
    ]
    if len(annotated) < k:
        raise CorpusError(f"need at least {k} movies with screenplay annotations, have {len(annotated)}")
    plan = make_folds([m.id for m in annotated], k=k, seed=config.seed)
    by_id = {m.id: m for m in annotated}
    train_pool = [m for m in corpus.split("train") if m.synopsis_annotations]

    predictions: dict[str, list[frozenset[int]]] = {}
    for fold in plan.folds:
        held_out = [by_id[mid] for mid in fold]
        tune = [by_id[mid] for mid in plan.all_ids() if mid not in fold]
        # a held-out movie must not supply its own noisy training labels
        train_movies = [m for m in train_pool if m.id not in fold]
        ckpt = train_screenplay(
            config,
            corpus,
            store,
            stats,
            word_table=word_table,
            train_movies=train_movies or tune,
            dev_movies=tune,
        )
        for movie in held_out:
            trace = predict_screenplay_trace(
                ckpt.model, movie, store, list(movie.synopsis_annotations[0].tp_indices), word_table
            )
            predictions[movie.id] = trace.selected
    report = evaluate_run(predictions, corpus, "screenplay")
    return report, plan
