"""Command-line surface: dataset stats, baselines, training, prediction,
evaluation, and posterior export.

Exit codes: 0 success, 1 input error, 2 contract violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines as bl
from .corpus import CorpusSet, Movie, parse_corpus
from .embedstore import (
    EmbeddingStore,
    WordVectorTable,
    hash_store_for_corpus,
    read_store,
    read_word_table,
)
from .errors import ContractError, InputError
from .evaluate import evaluate_run
from .models.end2end import end_to_end, predict_screenplay_trace, predict_synopsis_trace
from .models.inference import neighborhood
from .models.trace import PosteriorTrace, trace_from_csv, trace_to_csv
from .supervision import TpStats, fit_position_stats, theory_stats, training_annotations
from .training import (
    Checkpoint,
    TrainConfig,
    load_checkpoint,
    run_crossval,
    train_screenplay,
    train_synopsis,
)

BASELINE_NAMES = ("theory", "distribution", "random", "tfidf", "tfidf+distribution")


@dataclass
class CommandResult:
    """Outcome of one CLI command: exit code, summary, artifacts written."""

    exit_code: int = 0
    summary: str = ""
    artifacts: list[Path] = field(default_factory=list)


def _load_corpus(path: str) -> CorpusSet:
    p = Path(path)
    if not p.exists():
        raise InputError(f"corpus file not found: {path}")
    return parse_corpus(p.read_bytes())


def _load_embeddings(spec: str, corpus: CorpusSet) -> EmbeddingStore:
    """A store file path, or `hash:dim=D[,seed=S]` for on-the-fly vectors."""
    if spec.startswith("hash:"):
        options = {}
        for part in spec[len("hash:") :].split(","):
            if not part:
                continue
            key, _, value = part.partition("=")
            options[key.strip()] = value.strip()
        try:
            dim = int(options.get("dim", "64"))
            seed = int(options.get("seed", "0"))
        except ValueError as exc:
            raise InputError(f"bad hash embedding spec {spec!r}: {exc}") from exc
        return hash_store_for_corpus(corpus, dim=dim, seed=seed)
    p = Path(spec)
    if not p.exists():
        raise InputError(f"embedding store not found: {spec}")
    return read_store(p.read_bytes())


def _load_stats(args, corpus: CorpusSet) -> TpStats:
    if getattr(args, "stats", None):
        p = Path(args.stats)
        if not p.exists():
            raise InputError(f"stats file not found: {args.stats}")
        return TpStats.from_json(p.read_text())
    pairs = training_annotations(corpus.split("train"))
    if not pairs:
        raise InputError("no train-split annotations to fit position stats on; pass --stats")
    return fit_position_stats(pairs)


def _load_word_table(args) -> WordVectorTable | None:
    path = getattr(args, "word_table", None)
    if not path:
        return None
    p = Path(path)
    if not p.exists():
        raise InputError(f"word-vector table not found: {path}")
    return read_word_table(p.read_bytes())


def _split_movies(corpus: CorpusSet, split: str) -> list[Movie]:
    if split == "all":
        return list(corpus.movies)
    return list(corpus.split(split))


def _mean_std(values) -> str:
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        return "0.0 (0.0)"
    return f"{arr.mean():.1f} ({arr.std():.1f})"


def cmd_stats(args) -> CommandResult:
    corpus = _load_corpus(args.corpus)
    movies = _split_movies(corpus, args.split)
    if not movies:
        raise InputError(f"no movies in split {args.split!r}")

    syn_tokens = [sum(len(s.split()) for s in m.synopsis) for m in movies]
    syn_sentences = [m.n_sentences for m in movies]
    syn_sent_tokens = [len(s.split()) for m in movies for s in m.synopsis]
    scene_lists = [[s for s in m.screenplay] for m in movies]
    script_tokens = [
        sum(len(t.split()) for sc in scenes for t in sc.sentences) for scenes in scene_lists
    ]
    script_sentences = [sum(len(sc.sentences) for sc in scenes) for scenes in scene_lists]
    script_scenes = [m.n_scenes for m in movies]
    scene_tokens = [
        sum(len(t.split()) for t in sc.sentences) for scenes in scene_lists for sc in scenes
    ]
    scene_sentences = [len(sc.sentences) for scenes in scene_lists for sc in scenes]
    scene_sent_tokens = [
        len(t.split()) for scenes in scene_lists for sc in scenes for t in sc.sentences
    ]
    syn_vocab = {t.lower() for m in movies for s in m.synopsis for t in s.split()}
    script_vocab = {
        t.lower() for m in movies for sc in m.screenplay for s in sc.sentences for t in s.split()
    }
    annotated = sum(1 for m in movies if m.synopsis_annotations)

    rows = [
        ("movies", str(len(movies))),
        ("turning points", str(5 * annotated)),
        ("synopsis sentences", str(sum(syn_sentences))),
        ("screenplay scenes", str(sum(script_scenes))),
        ("synopsis vocabulary", str(len(syn_vocab))),
        ("screenplay vocabulary", str(len(script_vocab))),
        ("per synopsis: tokens", _mean_std(syn_tokens)),
        ("per synopsis: sentences", _mean_std(syn_sentences)),
        ("per synopsis: sentence tokens", _mean_std(syn_sent_tokens)),
        ("per screenplay: tokens", _mean_std(script_tokens)),
        ("per screenplay: sentences", _mean_std(script_sentences)),
        ("per screenplay: scenes", _mean_std(script_scenes)),
        ("per scene: tokens", _mean_std(scene_tokens)),
        ("per scene: sentences", _mean_std(scene_sentences)),
        ("per scene: sentence tokens", _mean_std(scene_sent_tokens)),
    ]
    width = max(len(name) for name, _ in rows)
    lines = [f"{name:<{width}}  {value}" for name, value in rows]
    return CommandResult(summary="\n".join(lines))


def cmd_fit_stats(args) -> CommandResult:
    corpus = _load_corpus(args.corpus)
    pairs = training_annotations(corpus.split(args.split))
    if not pairs:
        raise InputError(f"no annotations in split {args.split!r}")
    stats = fit_position_stats(pairs)
    artifacts = []
    if args.out:
        Path(args.out).write_text(stats.to_json() + "\n")
        artifacts.append(Path(args.out))
    summary = (
        "mu   : " + " ".join(f"{100 * v:.2f}" for v in stats.mu)
        + "\nsigma: " + " ".join(f"{100 * v:.2f}" for v in stats.sigma)
    )
    return CommandResult(summary=summary, artifacts=artifacts)


def _baseline_synopsis_trace(which: str, movie: Movie, stats: TpStats, seed: int) -> PosteriorTrace:
    n = movie.n_sentences
    if which == "random":
        selected = bl.random_baseline(n, seed)
        probs = np.zeros(n)
        probs[selected] = 1.0
    else:
        selected = bl.position_baseline(n, stats)
        probs = bl.position_density(n, stats).max(axis=0)
    return PosteriorTrace(movie.id, "synopsis", probs, selected)


def _baseline_screenplay_trace(
    which: str, movie: Movie, stats: TpStats, seed: int
) -> PosteriorTrace:
    m = movie.n_scenes
    if which in ("theory", "distribution"):
        matrix = bl.position_density(m, stats)
        selected = bl.position_baseline_scenes(m, stats)
    elif which == "random":
        rng = np.random.default_rng(seed)
        matrix = np.zeros((5, m))
        for tp in range(5):
            matrix[tp, int(rng.integers(m))] = 1.0
        selected = [neighborhood(int(np.argmax(matrix[tp])), m) for tp in range(5)]
    else:  # tfidf variants
        if not movie.synopsis_annotations:
            raise InputError(f"movie {movie.id!r} has no synopsis annotation for tf*idf queries")
        ann = movie.synopsis_annotations[0]
        tp_sentences = [movie.synopsis[i] for i in ann.tp_indices]
        index = bl.movie_tfidf_index(movie.screenplay, tp_sentences)
        constrain = stats if which == "tfidf+distribution" else None
        matrix, selected = bl.tfidf_scene_scores(tp_sentences, movie.screenplay, index, constrain)
    return PosteriorTrace(movie.id, "screenplay", matrix, selected)


def cmd_baseline(args) -> CommandResult:
    if args.which not in BASELINE_NAMES:
        raise InputError(f"unknown baseline {args.which!r}; choose from {', '.join(BASELINE_NAMES)}")
    if args.which.startswith("tfidf") and args.task != "screenplay":
        raise InputError("tf*idf baselines apply to the screenplay task only")
    corpus = _load_corpus(args.corpus)
    if args.which == "theory":
        stats = theory_stats()
    elif args.which in ("distribution", "tfidf+distribution"):
        stats = _load_stats(args, corpus)
    else:
        stats = None  # random and plain tf*idf are position-free

    movies = _split_movies(corpus, args.split)
    if args.task == "synopsis":
        movies = [m for m in movies if m.synopsis_annotations]
    else:
        movies = [m for m in movies if m.screenplay_annotations]
        if args.which.startswith("tfidf"):
            # tf*idf queries are the gold TP synopsis sentences
            movies = [m for m in movies if m.synopsis_annotations]
    if not movies:
        raise InputError(f"no annotated movies for task {args.task!r} in split {args.split!r}")

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    predictions = {}
    for i, movie in enumerate(movies):
        if args.task == "synopsis":
            trace = _baseline_synopsis_trace(args.which, movie, stats, args.seed + i)
        else:
            trace = _baseline_screenplay_trace(args.which, movie, stats, args.seed + i)
        (out_dir / f"{movie.id}.csv").write_text(trace_to_csv(trace))
        predictions[movie.id] = trace.selected
    report = evaluate_run(predictions, corpus, args.task)
    (out_dir / "metrics.json").write_text(report.to_json() + "\n")
    artifacts = [out_dir / f"{m.id}.csv" for m in movies] + [out_dir / "metrics.json"]
    return CommandResult(summary=report.table(f"{args.which}/{args.task}"), artifacts=artifacts)


def cmd_train(args) -> CommandResult:
    corpus = _load_corpus(args.corpus)
    store = _load_embeddings(args.embeddings, corpus)
    word_table = _load_word_table(args)
    config = TrainConfig(
        task=args.task,
        variant=args.variant,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        seed=args.seed,
        patience=args.patience,
        dropout=args.dropout,
        lstm_hidden=args.lstm_hidden,
    )
    if args.task == "synopsis":
        ckpt = train_synopsis(config, corpus, store, word_table=word_table)
    else:
        stats = _load_stats(args, corpus)
        ckpt = train_screenplay(config, corpus, store, stats, word_table=word_table)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(ckpt.to_bytes())
    sidecar = Path(str(out) + ".json")
    sidecar.write_text(ckpt.sidecar_json() + "\n")
    best = ckpt.history[-1] if ckpt.history else {}
    return CommandResult(
        summary=f"wrote {out} ({len(ckpt.history)} epochs, last: {json.dumps(best)})",
        artifacts=[out, sidecar],
    )


def _load_ckpt(path: str) -> Checkpoint:
    p = Path(path)
    sidecar = Path(str(p) + ".json")
    if not p.exists() or not sidecar.exists():
        raise InputError(f"checkpoint or sidecar missing: {path}(.json)")
    return load_checkpoint(p.read_bytes(), sidecar.read_text())


def _predict_movie(ckpt: Checkpoint, movie: Movie, store, word_table) -> PosteriorTrace:
    if ckpt.config.task == "synopsis":
        return predict_synopsis_trace(ckpt.model, movie, store, ckpt.stats, word_table)
    if not movie.synopsis_annotations:
        raise InputError(
            f"movie {movie.id!r} has no gold synopsis annotation; screenplay prediction "
            "needs TP sentences (or use an end-to-end synopsis checkpoint)"
        )
    gold = list(movie.synopsis_annotations[0].tp_indices)
    return predict_screenplay_trace(ckpt.model, movie, store, gold, word_table)


def cmd_predict(args) -> CommandResult:
    corpus = _load_corpus(args.corpus)
    store = _load_embeddings(args.embeddings, corpus)
    word_table = _load_word_table(args)
    ckpt = _load_ckpt(args.checkpoint)
    syn_ckpt = _load_ckpt(args.synopsis_checkpoint) if args.synopsis_checkpoint else None

    movies = _split_movies(corpus, args.split)
    if not movies:
        raise InputError(f"no movies in split {args.split!r}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def run(movie: Movie) -> PosteriorTrace:
        if syn_ckpt is not None and ckpt.config.task == "screenplay":
            return end_to_end(
                syn_ckpt.model, ckpt.model, movie, store, syn_ckpt.stats, word_table
            )
        return _predict_movie(ckpt, movie, store, word_table)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            traces = list(pool.map(run, movies))
    else:
        traces = [run(m) for m in movies]

    artifacts = []
    for movie, trace in zip(movies, traces):
        trace_path = out_dir / f"{movie.id}.csv"
        trace_path.write_text(trace_to_csv(trace))
        artifacts.append(trace_path)
        if trace.kind == "synopsis":
            lines = [movie.synopsis[i] for i in trace.selected]
            highlight_path = out_dir / f"{movie.id}.highlights.txt"
            highlight_path.write_text("\n".join(lines) + "\n")
            artifacts.append(highlight_path)
    return CommandResult(summary=f"wrote {len(traces)} traces to {out_dir}", artifacts=artifacts)


def cmd_eval(args) -> CommandResult:
    corpus = _load_corpus(args.corpus)
    pred_dir = Path(args.predictions)
    if not pred_dir.is_dir():
        raise InputError(f"predictions directory not found: {args.predictions}")
    predictions = {}
    kind = None
    for csv_path in sorted(pred_dir.glob("*.csv")):
        if csv_path.name == "metrics.json":
            continue
        movie_id = csv_path.stem
        if movie_id == "metrics":
            continue
        trace = trace_from_csv(movie_id, csv_path.read_text())
        kind = trace.kind
        predictions[movie_id] = trace.selected
    if not predictions:
        raise InputError(f"no trace CSVs found in {args.predictions}")
    report = evaluate_run(predictions, corpus, kind)
    artifacts = []
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n")
        artifacts.append(Path(args.out))
    return CommandResult(summary=report.table(args.label), artifacts=artifacts)


def cmd_export_posteriors(args) -> CommandResult:
    corpus = _load_corpus(args.corpus)
    store = _load_embeddings(args.embeddings, corpus)
    word_table = _load_word_table(args)
    ckpt = _load_ckpt(args.checkpoint)
    movie = corpus.get(args.movie)
    trace = _predict_movie(ckpt, movie, store, word_table)
    if trace.kind == "screenplay":
        gold = []
        for tp in range(5):
            union: set[int] = set()
            for ann in movie.screenplay_annotations:
                union |= set(ann.tp_scene_sets[tp])
            gold.append(frozenset(union) if union else None)
    else:
        gold = []
        for tp in range(5):
            union = {ann.tp_indices[tp] for ann in movie.synopsis_annotations}
            gold.append(frozenset(union) if union else None)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(trace_to_csv(trace, gold=gold))
    return CommandResult(summary=f"wrote {out}", artifacts=[out])


def cmd_crossval(args) -> CommandResult:
    corpus = _load_corpus(args.corpus)
    store = _load_embeddings(args.embeddings, corpus)
    word_table = _load_word_table(args)
    stats = _load_stats(args, corpus)
    config = TrainConfig(
        task="screenplay",
        variant=args.variant,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        seed=args.seed,
        patience=args.patience,
        dropout=args.dropout,
        lstm_hidden=args.lstm_hidden,
    )
    report, plan = run_crossval(config, corpus, store, stats, k=args.folds, word_table=word_table)
    del plan
    artifacts = []
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n")
        artifacts.append(Path(args.out))
    return CommandResult(summary=report.table(f"{args.variant}/crossval"), artifacts=artifacts)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="corpus JSON file")
    p.add_argument("--seed", type=int, default=0)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embeddings", required=True, help="store file or hash:dim=D[,seed=S]")
    p.add_argument("--word-table", default=None, help="word2vec text file for entity variants")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--lstm-hidden", type=int, default=None, help="override encoder width")
    p.add_argument("--stats", default=None, help="stats JSON (default: fit on train split)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="turningpoint",
        description="Identify the five turning points in plot synopses and screenplays.",
    )
    parser.add_argument("--config", default=None, help="key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)
    parser._command_parsers = {}  # config-file defaults are pushed into these

    p = parser._command_parsers["stats"] = sub.add_parser("stats", help="corpus statistics")
    _add_common(p)
    p.add_argument("--split", default="all", choices=("train", "dev", "test", "all"))
    p.set_defaults(func=cmd_stats)

    p = parser._command_parsers["fit-stats"] = sub.add_parser("fit-stats", help="fit TP position statistics")
    _add_common(p)
    p.add_argument("--split", default="train", choices=("train", "dev", "test"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit_stats)

    p = parser._command_parsers["baseline"] = sub.add_parser("baseline", help="run a baseline and evaluate it")
    _add_common(p)
    p.add_argument("--which", required=True, help="|".join(BASELINE_NAMES))
    p.add_argument("--task", required=True, choices=("synopsis", "screenplay"))
    p.add_argument("--split", default="test", choices=("train", "dev", "test", "all"))
    p.add_argument("--stats", default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_baseline)

    p = parser._command_parsers["train"] = sub.add_parser("train", help="train a model")
    _add_common(p)
    _add_train_flags(p)
    p.add_argument("--task", required=True, choices=("synopsis", "screenplay"))
    p.add_argument("--variant", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.set_defaults(func=cmd_train)

    p = parser._command_parsers["predict"] = sub.add_parser("predict", help="write posterior traces and highlights")
    _add_common(p)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--word-table", default=None)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--synopsis-checkpoint", default=None, help="enables end-to-end screenplay runs")
    p.add_argument("--split", default="test", choices=("train", "dev", "test", "all"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_predict)

    p = parser._command_parsers["eval"] = sub.add_parser("eval", help="evaluate trace CSVs against gold annotations")
    _add_common(p)
    p.add_argument("--predictions", required=True, help="directory of trace CSVs")
    p.add_argument("--label", default="model")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = parser._command_parsers["export-posteriors"] = sub.add_parser("export-posteriors", help="per-movie posterior CSV with gold column")
    _add_common(p)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--word-table", default=None)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--movie", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_posteriors)

    p = parser._command_parsers["crossval"] = sub.add_parser("crossval", help="five-fold screenplay cross-validation")
    _add_common(p)
    _add_train_flags(p)
    p.add_argument("--variant", default="tam")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_crossval)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Load key=value defaults from --config; explicit flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise InputError("--config needs a file argument")
    path = Path(argv[idx + 1])
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    defaults = {}
    for line_no, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        defaults[key.strip().replace("-", "_")] = value.strip()
    # Subparsers parse into a fresh namespace (argparse behavior since 3.9),
    # so defaults must land on each command parser that knows the key.
    for command in parser._command_parsers.values():
        known = {a.dest for a in command._actions}
        hits = {k: v for k, v in defaults.items() if k in known}
        if hits:
            command.set_defaults(**hits)
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        # Coerce config-file strings for numeric flags.
        for name in ("seed", "epochs", "patience", "jobs", "folds"):
            if hasattr(args, name) and isinstance(getattr(args, name), str):
                setattr(args, name, int(getattr(args, name)))
        for name in ("learning_rate", "dropout"):
            if hasattr(args, name) and isinstance(getattr(args, name), str):
                setattr(args, name, float(getattr(args, name)))
        result = args.func(args)
        if result.summary:
            print(result.summary)
        return result.exit_code
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ContractError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
