"""Brute-force reference implementations used to check the fast paths."""

from __future__ import annotations

import numpy as np

from tddetect import gbm

_FLOOR = 1e-12


def brute_force_best_split(X, rows, g, h, config) -> gbm.Split | None:
    """Exhaustive split search: every feature, every adjacent-value boundary.

    Left-side sums are accumulated sequentially in sorted order (the natural
    way to enumerate boundaries), which keeps floating-point rounding
    identical across candidate splits so exact ties resolve consistently.
    """
    Xn = np.asarray(X, dtype=float)[rows]
    gn = np.asarray(g, dtype=float)[rows]
    hn = np.asarray(h, dtype=float)[rows]
    n = len(rows)
    G, H = gn.sum(), hn.sum()
    lam = config.l2_reg
    parent = G * G / max(H + lam, _FLOOR)
    best = None
    for f in range(Xn.shape[1]):
        order = np.argsort(Xn[:, f], kind="stable")
        xs = Xn[order, f]
        GL = 0.0
        HL = 0.0
        for i in range(n - 1):
            GL += gn[order[i]]
            HL += hn[order[i]]
            if xs[i + 1] == xs[i]:
                continue
            nl = i + 1
            if nl < config.min_data_in_leaf or (n - nl) < config.min_data_in_leaf:
                continue
            GR, HR = G - GL, H - HL
            gain = 0.5 * (
                GL**2 / max(HL + lam, _FLOOR)
                + GR**2 / max(HR + lam, _FLOOR)
                - parent
            )
            if gain <= config.min_split_gain:
                continue
            # ties: lower feature index, then lower threshold (iteration order)
            if best is None or gain > best.gain:
                best = gbm.Split(
                    feature=f, threshold=float((xs[i] + xs[i + 1]) / 2.0),
                    gain=float(gain),
                )
    return best


def pairwise_weighted_auroc(scores, labels, weights=None) -> float:
    """O(n^2) weighted pair statistic with half credit for score ties."""
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(labels, dtype=float) > 0.5
    w = np.ones_like(scores) if weights is None else np.asarray(weights, dtype=float)
    num = 0.0
    for i in range(len(scores)):
        if not truth[i]:
            continue
        for j in range(len(scores)):
            if truth[j]:
                continue
            if scores[i] > scores[j]:
                num += w[i] * w[j]
            elif scores[i] == scores[j]:
                num += 0.5 * w[i] * w[j]
    return num / (w[truth].sum() * w[~truth].sum())
