"""Orchestration: baselines, active-learning sampling, end-to-end runs.

run_end_to_end composes the full flow: train embeddings on all ticket text,
featurize, split labeled tickets into train/holdout, train the main model,
evaluate it and both baselines on the holdout with bootstrap CIs, estimate
corpus prevalence, and write every artifact deterministically.
"""

from __future__ import annotations

import contextlib
import csv
import json
from dataclasses import dataclass, field, replace
from datetime import timedelta
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import embeddings, evaluation, features, gbm, textprep
from .corpus import Corpus, LabelRecord
from .errors import DataError, UsageError

DEFAULT_HOLDOUT_FRACTION = 588 / 1934


@dataclass
class PipelineConfig:
    corpus_path: str = ""
    labels_path: str = ""
    pretrained_path: str = ""
    out_dir: str = "out"
    use_ngrams: bool = False
    train: gbm.TrainConfig = field(default_factory=gbm.TrainConfig)
    al_floor: float = 0.05
    al_batch_size: int = 50
    holdout_fraction: float = DEFAULT_HOLDOUT_FRACTION
    bootstrap: int = 500
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.al_floor <= 1.0:
            raise UsageError(f"active-learning floor must lie in (0,1]: {self.al_floor}")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise UsageError(f"holdout fraction must lie in (0,1): {self.holdout_fraction}")


@contextlib.contextmanager
def _stage(name: str):
    """Re-raise any stage failure with the stage name attached."""
    try:
        yield
    except (DataError, UsageError) as exc:
        raise type(exc)(f"[{name}] {exc}") from exc
    except Exception as exc:
        raise RuntimeError(f"[{name}] {exc}") from exc


# ---------------------------------------------------------------------------
# baselines


def baseline_no_td(_ticket=None) -> float:
    """The do-nothing baseline: every ticket gets probability 0."""
    return 0.0


def keyphrase_match(text: str, k: int = 12) -> int:
    """1 iff any of the first k key phrases occurs in the text."""
    if not 1 <= k <= len(features.KEY_PHRASES):
        raise UsageError(f"k must lie in 1..{len(features.KEY_PHRASES)}: {k}")
    lowered = text.lower()
    return int(any(p in lowered for p in features.KEY_PHRASES[:k]))


def baseline_keyphrase(ticket, k: int = 12) -> int:
    return keyphrase_match(ticket.free_text(), k)


def tune_keyphrase_k(
    texts: list[str],
    labels,
    target_ratio: float,
    weights=None,
) -> int:
    """Pick the k whose precision/recall ratio is nearest target_ratio.

    Evaluates every k exhaustively on the given labeled set; ties go to the
    smaller k. Raises when no k yields a defined precision and recall.
    """
    labels = np.asarray(labels, dtype=float)
    lowered = [t.lower() for t in texts]
    best_k = None
    best_dist = None
    any_defined = False
    for k in range(1, len(features.KEY_PHRASES) + 1):
        prefix = features.KEY_PHRASES[:k]
        preds = np.array(
            [1.0 if any(p in t for p in prefix) else 0.0 for t in lowered]
        )
        prec = evaluation.weighted_precision(preds, labels, weights)
        rec = evaluation.weighted_recall(preds, labels, weights)
        if prec is None or rec is None or rec == 0.0:
            continue
        any_defined = True
        dist = abs(prec / rec - target_ratio)
        if best_dist is None or dist < best_dist:
            best_dist = dist
            best_k = k
    if not any_defined or best_k is None:
        raise DataError("no k yields a defined precision/recall ratio")
    return best_k


# ---------------------------------------------------------------------------
# active learning


def sample_next_batch(
    unlabeled_ids: list[str],
    probs,
    n: int,
    floor: float = 0.05,
    seed: int = 0,
) -> list[str]:
    """Weighted sampling without replacement via exponential keys.

    weight_i = max(p_i, floor); key_i = u_i^(1/weight_i); take the top n keys.
    """
    if not unlabeled_ids:
        raise DataError("empty unlabeled pool")
    if n > len(unlabeled_ids):
        raise DataError(f"batch size {n} exceeds pool size {len(unlabeled_ids)}")
    if floor <= 0:
        raise UsageError("floor must be positive")
    probs = np.asarray(probs, dtype=float)
    if len(probs) != len(unlabeled_ids):
        raise DataError("ids and probabilities must align")
    w = np.maximum(probs, floor)
    rng = np.random.default_rng(seed)
    u = rng.random(len(unlabeled_ids))
    keys = u ** (1.0 / w)
    order = sorted(range(len(keys)), key=lambda i: (-keys[i], unlabeled_ids[i]))
    return [unlabeled_ids[i] for i in order[:n]]


def label_progress_curve(records: list[LabelRecord]) -> evaluation.Curve:
    """Cumulative sum of label values in labeling-time order."""
    ordered = sorted(records, key=lambda r: (r.labeled_at, r.ticket_id))
    points = []
    total = 0.0
    for i, rec in enumerate(ordered, start=1):
        total += rec.label
        points.append((float(i), total))
    return evaluation.Curve(variant="progress", points=points)


def simulate_active_learning(
    corpus: Corpus,
    truth: dict[str, int],
    fmatrix: features.FeatureMatrix,
    n_labels: int,
    batch_size: int = 50,
    floor: float = 0.05,
    seed: int = 0,
    train_config: gbm.TrainConfig | None = None,
) -> None:
    """Drive the label-retrain loop against known ground truth.

    The first batch is uniform (no model yet); each later batch is drawn by
    sample_next_batch under the model retrained on all labels so far.
    Simulated expert labels are soft: high for TD tickets, low otherwise.
    """
    rng = np.random.default_rng(seed)
    cfg = train_config or gbm.TrainConfig()
    id_index = {t: i for i, t in enumerate(fmatrix.ticket_ids)}
    when = min(t.opened_at for t in corpus.tickets.values()) + timedelta(days=365)

    def record_labels(ids: list[str]) -> None:
        nonlocal when
        for tid in ids:
            if truth[tid]:
                y = float(rng.uniform(0.7, 1.0))
            else:
                y = float(rng.uniform(0.0, 0.25))
            when += timedelta(minutes=1)
            corpus.upsert_label(
                LabelRecord(ticket_id=tid, label=round(y, 2), rater="sim", labeled_at=when)
            )

    model = None
    round_no = 0
    while len(corpus.active_labels()) < n_labels:
        pool = corpus.unlabeled_ids()
        take = min(batch_size, n_labels - len(corpus.active_labels()), len(pool))
        if take == 0:
            break
        if model is None:
            probs = np.full(len(pool), 1.0)
        else:
            rows = np.array([id_index[t] for t in pool])
            probs = model.predict_proba(fmatrix.X[rows])
        batch = sample_next_batch(pool, probs, take, floor=floor, seed=seed + round_no)
        record_labels(batch)
        active = corpus.active_labels()
        ids = sorted(active)
        rows = np.array([id_index[t] for t in ids])
        y = np.array([active[t].label for t in ids])
        if len(ids) >= 2 * cfg.min_data_in_leaf:
            model = gbm.train(fmatrix.X[rows], y, cfg)
        round_no += 1


# ---------------------------------------------------------------------------
# end-to-end


def build_feature_context(
    corpus: Corpus,
    pretrained_path: str | Path,
    use_ngrams: bool = False,
    seed: int = 0,
) -> features.FeatureContext:
    """Train word/doc embeddings on every ticket's text and assemble the registry."""
    ids = corpus.ticket_ids()
    streams = [textprep.tokenize_clean(corpus.tickets[t].free_text()) for t in ids]
    word_model = embeddings.train_cbow(streams, seed=seed)
    doc_model = embeddings.train_docvecs(ids, streams, seed=seed)
    pretrained = embeddings.load_pretrained(pretrained_path)
    registry = features.FeatureRegistry.default()
    ngram_vocab: list[str] = []
    if use_ngrams:
        ngram_vocab = features.extract_ngram_vocab(streams)
        registry = registry.with_ngrams(ngram_vocab)
    return features.FeatureContext(
        pretrained=pretrained, word_model=word_model, doc_model=doc_model,
        registry=registry, ngram_vocab=ngram_vocab, infer_seed=seed,
    )


def split_holdout(
    corpus: Corpus, fraction: float, seed: int = 0
) -> tuple[list[str], list[str]]:
    """Split labeled ticket ids into (train, holdout).

    The latest-labeled tickets form the holdout when labeling times vary;
    with indistinguishable timestamps the split is seeded random.
    """
    active = corpus.active_labels()
    ids = sorted(active)
    if len(ids) < 2:
        raise DataError("need at least 2 labeled tickets to split")
    n_holdout = max(1, int(round(fraction * len(ids))))
    if n_holdout >= len(ids):
        n_holdout = len(ids) - 1
    times = {active[t].labeled_at for t in ids}
    if len(times) > 1:
        ordered = sorted(ids, key=lambda t: (active[t].labeled_at, t))
    else:
        rng = np.random.default_rng(seed)
        ordered = [ids[i] for i in rng.permutation(len(ids))]
    train = sorted(ordered[:-n_holdout])
    holdout = sorted(ordered[-n_holdout:])
    return train, holdout


def _curves_to_csv(curves: dict[str, evaluation.Curve], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["variant", "n_examined", "n_td_found"])
        for name in sorted(curves):
            for x, y in curves[name].points:
                writer.writerow([curves[name].variant, repr(float(x)), repr(float(y))])


def _importance_to_csv(importance: dict[str, float], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["feature", "gain_share"])
        for name, gain in sorted(importance.items(), key=lambda kv: (-kv[1], kv[0])):
            writer.writerow([name, repr(float(gain))])


def _write_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", "utf-8")


def run_end_to_end(
    config: PipelineConfig,
    corpus: Corpus | None = None,
    context: features.FeatureContext | None = None,
) -> dict:
    """Full train/evaluate/report flow; artifacts land in config.out_dir."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if corpus is None:
        with _stage("ingest"):
            corpus, skipped = corpus_mod.ingest_jsonl(config.corpus_path)
            for rec in corpus_mod.load_labels_jsonl(config.labels_path):
                corpus.upsert_label(rec)

    with _stage("embeddings"):
        if context is None:
            context = build_feature_context(
                corpus, config.pretrained_path, config.use_ngrams, config.seed
            )

    with _stage("featurize"):
        fmatrix = features.featurize_corpus(corpus, context)
        id_index = {t: i for i, t in enumerate(fmatrix.ticket_ids)}

    with _stage("split"):
        train_ids, holdout_ids = split_holdout(corpus, config.holdout_fraction, config.seed)
        active = corpus.active_labels()
        train_rows = np.array([id_index[t] for t in train_ids])
        hold_rows = np.array([id_index[t] for t in holdout_ids])
        y_train = np.array([active[t].label for t in train_ids])
        y_hold = np.array([active[t].label for t in holdout_ids])

    with _stage("sampling-weights"):
        labeled = set(train_ids) | set(holdout_ids)
        included = np.array([t in labeled for t in fmatrix.ticket_ids])
        if included.all():
            # fully labeled corpus: inclusion is certain, weights are uniform
            w1_all = np.ones(int(included.sum()))
            p_inclusion = np.ones(len(fmatrix.ticket_ids))
        else:
            w1_all, p_inclusion = evaluation.estimate_sampling_weights(
                fmatrix.X, included, replace(config.train, num_trees=20)
            )
        labeled_sorted = [t for t in fmatrix.ticket_ids if t in labeled]
        w1_by_id = dict(zip(labeled_sorted, w1_all))
        w1_hold = np.array([w1_by_id[t] for t in holdout_ids])

    with _stage("train"):
        model = gbm.train(
            fmatrix.X[train_rows], y_train, config.train,
            feature_names=list(fmatrix.registry.names),
            registry_version=fmatrix.registry.version,
        )

    with _stage("evaluate"):
        scores_hold = model.predict_proba(fmatrix.X[hold_rows])
        ew = evaluation.compute_eval_weights(y_hold, w1_hold)
        report_weighted = evaluation.metric_report(
            scores_hold, y_hold, ew.w, bootstrap=config.bootstrap, seed=config.seed
        )
        report_unweighted = evaluation.metric_report(scores_hold, y_hold)

        # baselines, tuned only on training data
        scores_train = model.predict_proba(fmatrix.X[train_rows])
        prec_t = evaluation.weighted_precision(scores_train, y_train)
        rec_t = evaluation.weighted_recall(scores_train, y_train)
        texts_train = [corpus.tickets[t].free_text() for t in train_ids]
        try:
            target_ratio = prec_t / rec_t if prec_t and rec_t else 1.0
            tuned_k = tune_keyphrase_k(texts_train, y_train, target_ratio)
        except DataError:
            tuned_k = 12
        kp_hold = np.array(
            [float(baseline_keyphrase(corpus.tickets[t], tuned_k)) for t in holdout_ids]
        )
        report_keyphrase = evaluation.metric_report(kp_hold, y_hold, ew.w)
        zeros = np.zeros(len(holdout_ids))
        report_no_td = evaluation.metric_report(zeros, y_hold, ew.w)

    with _stage("curves"):
        recall_curves = evaluation.cumulative_recall_curve(
            scores_hold, y_hold, holdout_ids
        )
        progress = label_progress_curve(list(corpus.labels))

    with _stage("prevalence"):
        labeled_rows = np.array([id_index[t] for t in labeled_sorted])
        y_labeled = np.array([active[t].label for t in labeled_sorted])
        p_labeled = np.clip(p_inclusion[labeled_rows], 1e-3, 1.0)
        prevalence = evaluation.estimate_prevalence(
            (y_labeled > 0.5).astype(float), p_labeled,
            n_total=len(corpus), B=config.bootstrap, seed=config.seed,
        )

    with _stage("write-artifacts"):
        gbm.save_model(model, out_dir / "model.json")
        importance = gbm.feature_importance(model)
        _importance_to_csv(importance, out_dir / "importance.csv")
        _curves_to_csv(
            {**recall_curves, "progress": progress}, out_dir / "curves.csv"
        )
        report = {
            "main_weighted": report_weighted.to_dict(),
            "main_unweighted": report_unweighted.to_dict(),
            "baseline_keyphrase": {**report_keyphrase.to_dict(), "k": tuned_k},
            "baseline_no_td": report_no_td.to_dict(),
            "prevalence": {
                "naive_rate": prevalence.naive_rate,
                "corrected_rate": prevalence.corrected_rate,
                "alt_rate": prevalence.alt_rate,
                "ci": [prevalence.ci_lo, prevalence.ci_hi],
                "n_labeled": prevalence.n_labeled,
                "n_total": prevalence.n_total,
            },
            "n_train": len(train_ids),
            "n_holdout": len(holdout_ids),
            "holdout_ids": holdout_ids,
            "registry_version": fmatrix.registry.version,
            "seed": config.seed,
        }
        _write_json(report, out_dir / "report.json")

    return {
        "model": model,
        "features": fmatrix,
        "context": context,
        "report": report,
        "report_weighted": report_weighted,
        "report_keyphrase": report_keyphrase,
        "report_no_td": report_no_td,
        "prevalence": prevalence,
        "curves": recall_curves,
        "progress": progress,
        "train_ids": train_ids,
        "holdout_ids": holdout_ids,
        "tuned_k": tuned_k,
    }
