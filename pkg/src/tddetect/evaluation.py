"""Importance-weighted evaluation and corrected prevalence estimation.

Expert labels are binarized with a strict y > 0.5; predictions with
p >= threshold. Every weighted metric reduces to its textbook unweighted
form under constant weights, and all are invariant to rescaling the
weights by a positive constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gbm
from .errors import DataError
from .features import percentile


@dataclass
class EvalWeights:
    w1: np.ndarray  # sampling weights
    w2: np.ndarray  # label-uncertainty weights
    w: np.ndarray  # combined, w1 * w2


@dataclass
class MetricReport:
    accuracy: float | None = None
    precision: float | None = None
    recall: float | None = None
    auroc: float | None = None
    accuracy_ci: tuple[float, float] | None = None
    precision_ci: tuple[float, float] | None = None
    recall_ci: tuple[float, float] | None = None
    auroc_ci: tuple[float, float] | None = None
    threshold: float = 0.5
    weighted: bool = False

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "auroc": self.auroc,
            "accuracy_ci": self.accuracy_ci, "precision_ci": self.precision_ci,
            "recall_ci": self.recall_ci, "auroc_ci": self.auroc_ci,
            "threshold": self.threshold, "weighted": self.weighted,
        }


@dataclass
class PrevalenceEstimate:
    naive_rate: float
    corrected_rate: float
    ci_lo: float
    ci_hi: float
    n_labeled: int
    n_total: int
    # the printed alternative form sum(p*y)/sum(p), exposed for comparison
    alt_rate: float | None = None


@dataclass
class Curve:
    variant: str  # model | optimal | random
    points: list[tuple[float, float]] = field(default_factory=list)


def label_uncertainty_weight(y: float) -> float:
    """(0.5 - y)^2: zero at total uncertainty, 0.25 at a certain label."""
    if not 0.0 <= y <= 1.0:
        raise DataError(f"label out of range [0,1]: {y}")
    return (0.5 - y) ** 2


def compute_eval_weights(labels: np.ndarray, w1: np.ndarray | None = None) -> EvalWeights:
    labels = np.asarray(labels, dtype=float)
    w2 = np.array([label_uncertainty_weight(y) for y in labels])
    w1 = np.ones_like(w2) if w1 is None else np.asarray(w1, dtype=float)
    return EvalWeights(w1=w1, w2=w2, w=w1 * w2)


def estimate_sampling_weights(
    X_all: np.ndarray,
    included: np.ndarray,
    config: gbm.TrainConfig | None = None,
    clamp_lo: float = 1e-3,
) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of the regression-estimated inclusion rate.

    Fits the boosted-tree logistic regressor over ALL tickets with the
    inclusion flag as the target. Returns (w1 for included rows in row
    order, fitted rate for every row).
    """
    included = np.asarray(included, dtype=bool)
    if included.all() or not included.any():
        raise DataError("inclusion regression needs both included and excluded tickets")
    model = gbm.train(X_all, included.astype(float), config or gbm.TrainConfig())
    p_hat = model.predict_proba(X_all)
    p_clamped = np.clip(p_hat[included], clamp_lo, 1.0)
    return 1.0 / p_clamped, p_hat


def _binarize(scores, labels, weights, threshold):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    weights = np.ones_like(scores) if weights is None else np.asarray(weights, dtype=float)
    if not (len(scores) == len(labels) == len(weights)):
        raise DataError("scores, labels and weights must align")
    if np.any(weights < 0):
        raise DataError("negative weights")
    if weights.sum() <= 0:
        raise DataError("weights must have positive sum")
    return scores >= threshold, labels > 0.5, weights


def weighted_accuracy(scores, labels, weights=None, threshold: float = 0.5) -> float:
    pred, truth, w = _binarize(scores, labels, weights, threshold)
    return float(np.sum(w * (pred == truth)) / np.sum(w))


def weighted_precision(scores, labels, weights=None, threshold: float = 0.5) -> float | None:
    pred, truth, w = _binarize(scores, labels, weights, threshold)
    denom = float(np.sum(w * pred))
    if denom == 0.0:
        return None
    return float(np.sum(w * pred * truth) / denom)


def weighted_recall(scores, labels, weights=None, threshold: float = 0.5) -> float | None:
    pred, truth, w = _binarize(scores, labels, weights, threshold)
    denom = float(np.sum(w * truth))
    if denom == 0.0:
        return None
    return float(np.sum(w * pred * truth) / denom)


def weighted_auroc(scores, labels, weights=None) -> float:
    """Weighted pair statistic via one sorted sweep; ties get half credit."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    weights = np.ones_like(scores) if weights is None else np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise DataError("negative weights")
    truth = labels > 0.5
    w_pos_total = float(weights[truth].sum())
    w_neg_total = float(weights[~truth].sum())
    if w_pos_total == 0.0 or w_neg_total == 0.0:
        raise DataError("AUROC undefined: need both a positive and a negative class")
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    pos_w = np.where(truth[order], weights[order], 0.0)
    neg_w = np.where(truth[order], 0.0, weights[order])
    total = 0.0
    i = 0
    n = len(s)
    pos_above = w_pos_total
    while i < n:
        j = i
        group_pos = 0.0
        group_neg = 0.0
        while j < n and s[j] == s[i]:
            group_pos += pos_w[j]
            group_neg += neg_w[j]
            j += 1
        pos_above -= group_pos
        total += group_neg * (pos_above + 0.5 * group_pos)
        i = j
    return total / (w_pos_total * w_neg_total)


def bootstrap_ci(
    metric_fn, n: int, B: int = 500, seed: int = 0
) -> tuple[float, float]:
    """Percentile-method CI from B index resamples of size n.

    metric_fn takes an integer index array (a resample, with repeats) and
    returns the metric or None when undefined; undefined replicates are
    dropped, and more than 50% undefined is an error.
    """
    if n <= 0:
        raise DataError("cannot bootstrap empty data")
    rng = np.random.default_rng(seed)
    values = []
    undefined = 0
    for _ in range(B):
        idx = rng.integers(0, n, size=n)
        v = metric_fn(idx)
        if v is None:
            undefined += 1
        else:
            values.append(float(v))
    if undefined > B / 2:
        raise DataError(f"metric undefined in {undefined}/{B} bootstrap replicates")
    return (percentile(values, 0.025), percentile(values, 0.975))


def metric_report(
    scores,
    labels,
    weights=None,
    threshold: float = 0.5,
    bootstrap: int = 0,
    seed: int = 0,
) -> MetricReport:
    """All four metrics, optionally with bootstrap CIs carrying fixed weights."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    w = np.ones_like(scores) if weights is None else np.asarray(weights, dtype=float)

    def safe_auroc(s, y, wt):
        try:
            return weighted_auroc(s, y, wt)
        except DataError:
            return None

    report = MetricReport(
        accuracy=weighted_accuracy(scores, labels, w, threshold),
        precision=weighted_precision(scores, labels, w, threshold),
        recall=weighted_recall(scores, labels, w, threshold),
        auroc=safe_auroc(scores, labels, w),
        threshold=threshold,
        weighted=weights is not None,
    )
    if bootstrap > 0:
        n = len(scores)

        def ci_for(fn):
            try:
                return bootstrap_ci(
                    lambda idx: fn(scores[idx], labels[idx], w[idx]),
                    n, B=bootstrap, seed=seed,
                )
            except DataError:
                return None

        report.accuracy_ci = ci_for(lambda s, y, wt: weighted_accuracy(s, y, wt, threshold))
        report.precision_ci = ci_for(lambda s, y, wt: weighted_precision(s, y, wt, threshold))
        report.recall_ci = ci_for(lambda s, y, wt: weighted_recall(s, y, wt, threshold))
        report.auroc_ci = ci_for(safe_auroc)
    return report


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    config: gbm.TrainConfig | None = None,
    weights: np.ndarray | None = None,
    k: int = 10,
    seed: int = 0,
) -> tuple[list[MetricReport], MetricReport]:
    """Seeded disjoint k-fold CV; fold sizes differ by at most one."""
    if k < 2:
        raise DataError("k must be >= 2")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if n < k:
        raise DataError("need at least k labeled tickets")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    folds = [perm[i::k] for i in range(k)]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    reports = []
    for fold in folds:
        holdout = np.zeros(n, dtype=bool)
        holdout[fold] = True
        model = gbm.train(X[~holdout], y[~holdout], config or gbm.TrainConfig())
        scores = model.predict_proba(X[holdout])
        reports.append(metric_report(scores, y[holdout], w[holdout]))
    def mean_of(attr):
        vals = [getattr(r, attr) for r in reports if getattr(r, attr) is not None]
        return float(np.mean(vals)) if vals else None
    mean = MetricReport(
        accuracy=mean_of("accuracy"), precision=mean_of("precision"),
        recall=mean_of("recall"), auroc=mean_of("auroc"), weighted=weights is not None,
    )
    return reports, mean


def cumulative_recall_curve(
    scores, labels, ticket_ids: list[str] | None = None
) -> dict[str, Curve]:
    """TD found after examining the top-m tickets by descending score."""
    scores = np.asarray(scores, dtype=float)
    truth = (np.asarray(labels, dtype=float) > 0.5).astype(float)
    n = len(scores)
    if n == 0:
        raise DataError("empty input")
    if ticket_ids is None:
        ticket_ids = [str(i) for i in range(n)]
    order = sorted(range(n), key=lambda i: (-scores[i], ticket_ids[i]))
    model_y = np.cumsum(truth[np.array(order)])
    total = float(truth.sum())
    optimal_y = np.cumsum(np.sort(truth)[::-1])
    xs = np.arange(1, n + 1)
    return {
        "model": Curve("model", list(zip(xs.tolist(), model_y.tolist()))),
        "optimal": Curve("optimal", list(zip(xs.tolist(), optimal_y.tolist()))),
        "random": Curve("random", list(zip(xs.tolist(), (xs * total / n).tolist()))),
    }


def estimate_prevalence(
    labels,
    inclusion_probs,
    n_total: int,
    B: int = 500,
    seed: int = 0,
    refit_fn=None,
) -> PrevalenceEstimate:
    """Inverse-probability-weighted prevalence with a bootstrap CI.

    corrected = sum(y/p) / sum(1/p). refit_fn, when given, maps a replicate
    index array to refreshed inclusion probabilities; otherwise the fixed
    probabilities are resampled alongside the labels.
    """
    y = np.asarray(labels, dtype=float)
    p = np.asarray(inclusion_probs, dtype=float)
    if np.any(p <= 0) or np.any(p > 1):
        raise DataError("inclusion probabilities must lie in (0,1]")
    if len(y) != len(p):
        raise DataError("labels and inclusion probabilities must align")
    naive = float(np.mean(y))
    inv = 1.0 / p
    corrected = float(np.sum(y * inv) / np.sum(inv))
    alt = float(np.sum(p * y) / np.sum(p))

    def replicate(idx):
        pr = refit_fn(idx) if refit_fn is not None else p[idx]
        inv_r = 1.0 / pr
        return float(np.sum(y[idx] * inv_r) / np.sum(inv_r))

    lo, hi = bootstrap_ci(replicate, len(y), B=B, seed=seed)
    return PrevalenceEstimate(
        naive_rate=naive, corrected_rate=corrected, ci_lo=lo, ci_hi=hi,
        n_labeled=len(y), n_total=n_total, alt_rate=alt,
    )
