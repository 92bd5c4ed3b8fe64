"""Numba inner loops for embedding training.

All randomness (negative-sample draws) is precomputed outside the kernels,
so the kernels are pure deterministic number crunching.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _sigmoid(x):
    if x > 30.0:
        return 1.0
    if x < -30.0:
        return 0.0
    return 1.0 / (1.0 + np.exp(-x))


@njit(cache=True)
def cbow_train(flat, offsets, W, Wp, negs, window, negative, epochs, lr_start, lr_end):
    """CBOW with negative sampling over concatenated token-id streams.

    flat: int32 token ids; offsets: int64 stream boundaries (len = n+1).
    negs is consumed sequentially: `negative` draws per center word per epoch.
    Returns per-epoch accumulated negative-sampling loss.
    """
    dim = W.shape[1]
    n_tokens = flat.shape[0]
    total = epochs * n_tokens
    losses = np.zeros(epochs)
    processed = 0
    neg_pos = 0
    h = np.zeros(dim)
    e = np.zeros(dim)
    for epoch in range(epochs):
        for s in range(offsets.shape[0] - 1):
            start = offsets[s]
            end = offsets[s + 1]
            for t in range(start, end):
                lr = lr_start + (lr_end - lr_start) * (processed / total)
                processed += 1
                center = flat[t]
                lo = max(start, t - window)
                hi = min(end, t + window + 1)
                n_ctx = 0
                for d in range(dim):
                    h[d] = 0.0
                for c in range(lo, hi):
                    if c == t:
                        continue
                    wc = flat[c]
                    for d in range(dim):
                        h[d] += W[wc, d]
                    n_ctx += 1
                if n_ctx == 0:
                    neg_pos += negative
                    continue
                for d in range(dim):
                    h[d] /= n_ctx
                    e[d] = 0.0
                # positive target plus `negative` noise words
                for k in range(negative + 1):
                    if k == 0:
                        target = center
                        label = 1.0
                    else:
                        target = negs[neg_pos]
                        neg_pos += 1
                        if target == center:
                            continue
                        label = 0.0
                    dot = 0.0
                    for d in range(dim):
                        dot += h[d] * Wp[target, d]
                    f = _sigmoid(dot)
                    if label > 0.5:
                        losses[epoch] -= np.log(max(f, 1e-12))
                    else:
                        losses[epoch] -= np.log(max(1.0 - f, 1e-12))
                    g = (label - f) * lr
                    for d in range(dim):
                        e[d] += g * Wp[target, d]
                        Wp[target, d] += g * h[d]
                for c in range(lo, hi):
                    if c == t:
                        continue
                    wc = flat[c]
                    for d in range(dim):
                        W[wc, d] += e[d]
    return losses


@njit(cache=True)
def dbow_train(flat, offsets, D, Wp, negs, negative, epochs, lr_start, lr_end):
    """PV-DBOW: each document vector predicts its own words.

    D: doc vectors (n_docs x dim); Wp: shared output word weights.
    """
    dim = D.shape[1]
    n_tokens = flat.shape[0]
    total = epochs * n_tokens
    losses = np.zeros(epochs)
    processed = 0
    neg_pos = 0
    for epoch in range(epochs):
        for s in range(offsets.shape[0] - 1):
            for t in range(offsets[s], offsets[s + 1]):
                lr = lr_start + (lr_end - lr_start) * (processed / total)
                processed += 1
                word = flat[t]
                for k in range(negative + 1):
                    if k == 0:
                        target = word
                        label = 1.0
                    else:
                        target = negs[neg_pos]
                        neg_pos += 1
                        if target == word:
                            continue
                        label = 0.0
                    dot = 0.0
                    for d in range(dim):
                        dot += D[s, d] * Wp[target, d]
                    f = _sigmoid(dot)
                    if label > 0.5:
                        losses[epoch] -= np.log(max(f, 1e-12))
                    else:
                        losses[epoch] -= np.log(max(1.0 - f, 1e-12))
                    g = (label - f) * lr
                    for d in range(dim):
                        tmp = D[s, d]
                        D[s, d] += g * Wp[target, d]
                        Wp[target, d] += g * tmp
    return losses


@njit(cache=True)
def dbow_infer(tokens, vec, Wp, negs, negative, steps, lr_start, lr_end):
    """Gradient steps on a fresh doc vector with frozen output weights."""
    dim = vec.shape[0]
    n_tokens = tokens.shape[0]
    total = steps * n_tokens
    processed = 0
    neg_pos = 0
    for _ in range(steps):
        for t in range(n_tokens):
            lr = lr_start + (lr_end - lr_start) * (processed / total)
            processed += 1
            word = tokens[t]
            for k in range(negative + 1):
                if k == 0:
                    target = word
                    label = 1.0
                else:
                    target = negs[neg_pos]
                    neg_pos += 1
                    if target == word:
                        continue
                    label = 0.0
                dot = 0.0
                for d in range(dim):
                    dot += vec[d] * Wp[target, d]
                g = (label - _sigmoid(dot)) * lr
                for d in range(dim):
                    vec[d] += g * Wp[target, d]
