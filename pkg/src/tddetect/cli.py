"""Command-line interface.

Subcommands: ingest, gen-synthetic, train-embeddings, featurize, train,
predict, evaluate, prevalence, sample-next, dump-trees, curves, run-all,
serve. Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import fields as dc_fields
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import embeddings, evaluation, features, gbm, pipeline, synthgen
from .errors import DataError, UsageError

_TRAIN_KEYS = {f.name for f in dc_fields(gbm.TrainConfig)}
_PIPELINE_KEYS = {
    "corpus_path", "labels_path", "pretrained_path", "out_dir", "use_ngrams",
    "al_floor", "al_batch_size", "holdout_fraction", "bootstrap", "seed",
}


def parse_config_file(path: str | Path) -> dict:
    """key=value config lines; '#' starts a comment; booleans true/false."""
    out: dict = {}
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PIPELINE_KEYS and key not in _TRAIN_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = value
    return out


def _coerce(value: str, target_type):
    if target_type is bool:
        if value.lower() in ("true", "1", "yes", "on"):
            return True
        if value.lower() in ("false", "0", "no", "off"):
            return False
        raise UsageError(f"expected boolean, got {value!r}")
    try:
        return target_type(value)
    except ValueError as exc:
        raise UsageError(f"bad value {value!r}: {exc}") from exc


def build_pipeline_config(raw: dict, seed: int | None, out: str | None) -> pipeline.PipelineConfig:
    pipe_kwargs: dict = {}
    train_kwargs: dict = {}
    type_of = {f.name: f.type for f in dc_fields(pipeline.PipelineConfig)}
    train_type_of = {f.name: f.type for f in dc_fields(gbm.TrainConfig)}
    casts = {"str": str, "int": int, "float": float, "bool": bool}
    for key, value in raw.items():
        # "seed" belongs to both configs; the pipeline seed wins and is
        # propagated to the training config below
        if key in _TRAIN_KEYS and key not in _PIPELINE_KEYS:
            train_kwargs[key] = _coerce(value, casts[train_type_of[key]])
        else:
            pipe_kwargs[key] = _coerce(value, casts.get(type_of.get(key, "str"), str))
    if seed is not None:
        pipe_kwargs["seed"] = seed
    if out is not None:
        pipe_kwargs["out_dir"] = out
    if "seed" in pipe_kwargs and "seed" not in train_kwargs:
        train_kwargs["seed"] = pipe_kwargs["seed"]
    try:
        return pipeline.PipelineConfig(train=gbm.TrainConfig(**train_kwargs), **pipe_kwargs)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# shared loaders


def _load_feature_csv(path: str | Path) -> features.FeatureMatrix:
    try:
        with Path(path).open(encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if not header or header[0] != "ticket_id":
                raise DataError(f"{path}: not a feature CSV (missing ticket_id header)")
            names = tuple(header[1:])
            ids = []
            rows = []
            for row in reader:
                ids.append(row[0])
                rows.append([float(x) for x in row[1:]])
    except OSError as exc:
        raise DataError(f"cannot read feature file {path}: {exc}") from exc
    except ValueError as exc:
        raise DataError(f"{path}: bad feature value: {exc}") from exc
    default = features.FeatureRegistry.default()
    if names == default.names:
        registry = default
    else:
        registry = features.FeatureRegistry(
            names=names, families=tuple("unknown" for _ in names), version="external"
        )
    return features.FeatureMatrix(
        ticket_ids=ids, X=np.array(rows, dtype=float), registry=registry
    )


def _load_labels(path: str | Path) -> dict[str, corpus_mod.LabelRecord]:
    return corpus_mod.active_label_map(corpus_mod.load_labels_jsonl(path))


def _aligned_labels(fmatrix: features.FeatureMatrix, label_map) -> tuple[np.ndarray, np.ndarray]:
    """(row indices into fmatrix, label values) for labeled tickets."""
    rows = []
    y = []
    for i, tid in enumerate(fmatrix.ticket_ids):
        if tid in label_map:
            rows.append(i)
            y.append(label_map[tid].label)
    if not rows:
        raise DataError("no labeled tickets found in the feature matrix")
    return np.array(rows), np.array(y)


def _write_json(obj, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", "utf-8")


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_ingest(args) -> int:
    corpus, skipped = corpus_mod.ingest_jsonl(args.tickets)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_jsonl(corpus, out_dir / "corpus.jsonl")
    print(f"ingested {len(corpus)} tickets, skipped {skipped} malformed lines")
    return 0


def cmd_gen_synthetic(args) -> int:
    corpus, truth = synthgen.generate_synthetic_corpus(args.n, args.td_rate, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_jsonl(corpus, out_dir / "corpus.jsonl")
    _write_json(truth, out_dir / "truth.json")
    synthgen.write_fixture_embedding(out_dir / "pretrained.txt")
    print(f"wrote {len(corpus)} tickets ({sum(truth.values())} TD) to {out_dir}")
    return 0


def cmd_train_embeddings(args) -> int:
    corpus, _ = corpus_mod.ingest_jsonl(args.corpus)
    ids = corpus.ticket_ids()
    from . import textprep

    streams = [textprep.tokenize_clean(corpus.tickets[t].free_text()) for t in ids]
    word_model = embeddings.train_cbow(streams, seed=args.seed)
    doc_model = embeddings.train_docvecs(ids, streams, seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    embeddings.save_word_embedding(word_model, out_dir / "word_embedding.json")
    embeddings.save_doc_embedding(doc_model, out_dir / "doc_embedding.json")
    print(f"trained embeddings over {len(ids)} tickets -> {out_dir}")
    return 0


def _context_from_args(corpus, args) -> features.FeatureContext:
    if getattr(args, "word_emb", None) and getattr(args, "doc_emb", None):
        word_model = embeddings.load_word_embedding(args.word_emb)
        doc_model = embeddings.load_doc_embedding(args.doc_emb)
        pretrained = embeddings.load_pretrained(args.pretrained)
        registry = features.FeatureRegistry.default()
        return features.FeatureContext(
            pretrained=pretrained, word_model=word_model, doc_model=doc_model,
            registry=registry, infer_seed=args.seed,
        )
    return pipeline.build_feature_context(
        corpus, args.pretrained, use_ngrams=getattr(args, "ngrams", False), seed=args.seed
    )


def cmd_featurize(args) -> int:
    corpus, _ = corpus_mod.ingest_jsonl(args.corpus)
    context = _context_from_args(corpus, args)
    fmatrix = features.featurize_corpus(corpus, context)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fmatrix.to_csv(out_dir / "features.csv")
    print(f"featurized {len(fmatrix.ticket_ids)} tickets x {len(fmatrix.registry)} features")
    return 0


def cmd_train(args) -> int:
    fmatrix = _load_feature_csv(args.features)
    label_map = _load_labels(args.labels)
    rows, y = _aligned_labels(fmatrix, label_map)
    config = gbm.TrainConfig(seed=args.seed)
    model = gbm.train(
        fmatrix.X[rows], y, config,
        feature_names=list(fmatrix.registry.names),
        registry_version=fmatrix.registry.version,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    gbm.save_model(model, out_dir / "model.json")
    print(f"trained on {len(rows)} labeled tickets -> {out_dir / 'model.json'}")
    return 0


def cmd_predict(args) -> int:
    model = gbm.load_model(args.model)
    fmatrix = _load_feature_csv(args.features)
    scores = model.predict_proba(fmatrix.X)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "predictions.csv").open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["ticket_id", "score"])
        for tid, s in zip(fmatrix.ticket_ids, scores):
            writer.writerow([tid, repr(float(s))])
    print(f"scored {len(scores)} tickets -> {out_dir / 'predictions.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    model = gbm.load_model(args.model)
    fmatrix = _load_feature_csv(args.features)
    label_map = _load_labels(args.labels)
    rows, y = _aligned_labels(fmatrix, label_map)
    scores = model.predict_proba(fmatrix.X[rows])
    ew = evaluation.compute_eval_weights(y)
    weighted = evaluation.metric_report(
        scores, y, ew.w, bootstrap=args.bootstrap, seed=args.seed
    )
    unweighted = evaluation.metric_report(scores, y)
    report = {"weighted": weighted.to_dict(), "unweighted": unweighted.to_dict(), "n": len(y)}
    _write_json(report, Path(args.out) / "metrics.json")
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def cmd_prevalence(args) -> int:
    label_map = _load_labels(args.labels)
    probs_obj = json.loads(Path(args.probs).read_text("utf-8"))
    ids = sorted(label_map)
    missing = [t for t in ids if t not in probs_obj]
    if missing:
        raise DataError(f"missing inclusion probabilities for {len(missing)} tickets")
    y = np.array([float(label_map[t].label > 0.5) for t in ids])
    p = np.array([float(probs_obj[t]) for t in ids])
    est = evaluation.estimate_prevalence(y, p, n_total=args.n_total, B=args.bootstrap, seed=args.seed)
    out = {
        "naive_rate": est.naive_rate, "corrected_rate": est.corrected_rate,
        "alt_rate": est.alt_rate, "ci": [est.ci_lo, est.ci_hi],
        "n_labeled": est.n_labeled, "n_total": est.n_total,
    }
    _write_json(out, Path(args.out) / "prevalence.json")
    print(json.dumps(out, sort_keys=True, indent=2))
    return 0


def cmd_sample_next(args) -> int:
    model = gbm.load_model(args.model)
    fmatrix = _load_feature_csv(args.features)
    label_map = _load_labels(args.labels) if args.labels else {}
    pool = [t for t in fmatrix.ticket_ids if t not in label_map]
    if not pool:
        raise DataError("no unlabeled tickets remain")
    index = {t: i for i, t in enumerate(fmatrix.ticket_ids)}
    probs = model.predict_proba(fmatrix.X[np.array([index[t] for t in pool])])
    batch = pipeline.sample_next_batch(pool, probs, args.batch, floor=args.floor, seed=args.seed)
    for tid in batch:
        print(tid)
    return 0


def cmd_dump_trees(args) -> int:
    model = gbm.load_model(args.model)
    sys.stdout.write(gbm.dump_trees(model))
    return 0


def cmd_curves(args) -> int:
    model = gbm.load_model(args.model)
    fmatrix = _load_feature_csv(args.features)
    label_map = _load_labels(args.labels)
    rows, y = _aligned_labels(fmatrix, label_map)
    ids = [fmatrix.ticket_ids[i] for i in rows]
    scores = model.predict_proba(fmatrix.X[rows])
    curves = evaluation.cumulative_recall_curve(scores, y, ids)
    curves["progress"] = pipeline.label_progress_curve(list(label_map.values()))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pipeline._curves_to_csv(curves, out_dir / "curves.csv")
    print(f"wrote {out_dir / 'curves.csv'}")
    return 0


def cmd_run_all(args) -> int:
    raw = parse_config_file(args.config) if args.config else {}
    for key, attr in (("corpus_path", "corpus"), ("labels_path", "labels"), ("pretrained_path", "pretrained")):
        value = getattr(args, attr, None)
        if value:
            raw[key] = value
    config = build_pipeline_config(raw, args.seed, args.out)
    if not config.corpus_path or not config.labels_path or not config.pretrained_path:
        raise UsageError("run-all needs corpus, labels and pretrained embedding paths")
    result = pipeline.run_end_to_end(config)
    report = result["report"]
    print(f"main weighted AUROC: {report['main_weighted']['auroc']}")
    print(f"keyphrase baseline AUROC (k={report['baseline_keyphrase']['k']}): "
          f"{report['baseline_keyphrase']['auroc']}")
    print(f"corrected prevalence: {report['prevalence']['corrected_rate']} "
          f"CI {report['prevalence']['ci']}")
    print(f"artifacts in {config.out_dir}")
    return 0


def cmd_serve(args) -> int:
    from . import service

    service.run_server(
        corpus_path=args.corpus,
        labels_path=args.labels,
        pretrained_path=args.pretrained,
        listen=args.listen,
        seed=args.seed,
        frontend_dir=args.frontend,
    )
    return 0


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tddetect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="out", help="output directory")
        return p

    p = add("ingest", cmd_ingest, help="normalize a ticket JSONL file")
    p.add_argument("tickets")

    p = add("gen-synthetic", cmd_gen_synthetic, help="generate a synthetic corpus")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--td-rate", type=float, default=0.16)

    p = add("train-embeddings", cmd_train_embeddings, help="train word/doc embeddings")
    p.add_argument("--corpus", required=True)

    p = add("featurize", cmd_featurize, help="extract the feature matrix")
    p.add_argument("--corpus", required=True)
    p.add_argument("--pretrained", required=True)
    p.add_argument("--word-emb", default=None)
    p.add_argument("--doc-emb", default=None)
    p.add_argument("--ngrams", action="store_true")

    p = add("train", cmd_train, help="train the classifier")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)

    p = add("predict", cmd_predict, help="score tickets")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)

    p = add("evaluate", cmd_evaluate, help="weighted metrics on labeled tickets")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--bootstrap", type=int, default=500)

    p = add("prevalence", cmd_prevalence, help="corrected prevalence estimate")
    p.add_argument("--labels", required=True)
    p.add_argument("--probs", required=True, help="JSON map ticket_id -> inclusion prob")
    p.add_argument("--n-total", type=int, required=True)
    p.add_argument("--bootstrap", type=int, default=500)

    p = add("sample-next", cmd_sample_next, help="draw the next labeling batch")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--batch", type=int, default=50)
    p.add_argument("--floor", type=float, default=0.05)

    p = add("dump-trees", cmd_dump_trees, help="print every tree")
    p.add_argument("--model", required=True)

    p = add("curves", cmd_curves, help="cumulative recall and progress curves")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)

    p = add("run-all", cmd_run_all, help="full train/evaluate/report flow")
    p.add_argument("--corpus", default=None)
    p.add_argument("--labels", default=None)
    p.add_argument("--pretrained", default=None)

    p = add("serve", cmd_serve, help="start the labeling service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--pretrained", required=True)
    p.add_argument("--listen", default="127.0.0.1:8080")
    p.add_argument("--frontend", default=None, help="static frontend directory")

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 3
    except Exception as exc:  # internal failure
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
