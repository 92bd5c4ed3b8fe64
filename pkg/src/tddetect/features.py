"""The feature registry: named, ordered features extracted from a ticket.

The default registry (n-grams off) has exactly 105 features:
19 metadata + 9 counts + 25 key phrases + 10 concept words + 22 word-vector
summaries + 20 document-vector dimensions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Corpus, Ticket
from .embeddings import DocEmbedding, WordEmbedding, infer_docvec
from .errors import DataError
from . import textprep

REGISTRY_VERSION = "v1"

# Ordered exactly as queried by the key-phrase baseline ("descending order
# of expected usefulness"); matching is case-insensitive substring on the
# raw free text.
KEY_PHRASES: tuple[str, ...] = (
    "debt", "hack", "workaround", "cleanup", "clean-up", "clean up", "give up",
    "problematic", "not up to date", "inconsisten", "short term", "deviate",
    "tweak", "mess", "buggy", "complex", "doesn't work", "out of date",
    "insufficient", "rework", "remove", "redesign", "refactor", "depend",
    "structure",
)

CONCEPT_TARGETS: tuple[str, ...] = (
    "deviate", "outdated", "redundant", "redesign", "decouple",
    "complicated", "regret", "corrupt", "horrible", "delay",
)

AUTHOR_DOMAINS: tuple[str, ...] = ("chromium.org", "gmail.com", "google.com", "etouch.net")
STATUS_FLAGS: tuple[str, ...] = (
    "WontFix", "Fixed", "Duplicate", "Verified", "Archived", "Assigned",
    "Available", "Untriaged",
)


def _phrase_feature_name(phrase: str) -> str:
    return "KEYPHRASE_" + phrase.replace("'", "").replace(" ", "_")


def _default_names_families() -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    for domain in AUTHOR_DOMAINS:
        out.append((f"author_domain_{domain.replace('.', '_')}", "metadata"))
    out.append(("author_is_project_member", "metadata"))
    for p in (1, 2, 3):
        out.append((f"priority_{p}", "metadata"))
    for status in STATUS_FLAGS:
        out.append((f"status_{status.lower()}", "metadata"))
    out.extend(
        [("type_starts_bug", "metadata"), ("type_starts_bug_dash", "metadata"),
         ("type_not_bug", "metadata")]
    )
    for name in (
        "n_char", "n_char_longest_sentence", "median_chars_per_word_no_html",
        "n_word_clean", "n_word_no_html", "avg_nword_clean_per_sent",
        "avg_nword_no_html_per_sent", "n_sent", "n_sha1",
    ):
        out.append((name, "count"))
    for phrase in KEY_PHRASES:
        out.append((_phrase_feature_name(phrase), "keyphrase"))
    for target in CONCEPT_TARGETS:
        out.append((f"CONCEPT_{target}", "concept"))
    for q in (5, 95):
        for d in range(1, 11):
            out.append((f"wordvec_{d}_percentile_{q}", "wordvec"))
    out.append(("wordvec_seqdiff_percentile_5", "wordvec"))
    out.append(("wordvec_seqdiff_percentile_95", "wordvec"))
    for d in range(1, 21):
        out.append((f"docvec_{d}", "docvec"))
    return out


@dataclass(frozen=True)
class FeatureRegistry:
    names: tuple[str, ...]
    families: tuple[str, ...]
    version: str = REGISTRY_VERSION

    def __post_init__(self):
        if len(self.names) != len(set(self.names)):
            raise ValueError("duplicate feature names")
        if len(self.names) != len(self.families):
            raise ValueError("names/families length mismatch")

    def __len__(self) -> int:
        return len(self.names)

    @classmethod
    def default(cls) -> "FeatureRegistry":
        pairs = _default_names_families()
        return cls(
            names=tuple(n for n, _ in pairs), families=tuple(f for _, f in pairs)
        )

    def with_ngrams(self, ngram_vocab: list[str]) -> "FeatureRegistry":
        names = list(self.names) + [f"NGRAM_{g}" for g in ngram_vocab]
        families = list(self.families) + ["ngram"] * len(ngram_vocab)
        return FeatureRegistry(
            names=tuple(names), families=tuple(families),
            version=self.version + "+ngrams",
        )


def percentile(values, q: float) -> float:
    """Linear interpolation between order statistics at h = q*(n-1)."""
    vals = sorted(float(v) for v in values)
    if not vals:
        raise ValueError("percentile of empty list")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must be in [0,1]")
    h = q * (len(vals) - 1)
    lo = math.floor(h)
    hi = math.ceil(h)
    if lo == hi:
        return vals[lo]
    return vals[lo] + (h - lo) * (vals[hi] - vals[lo])


# ---------------------------------------------------------------------------
# feature families


def metadata_features(ticket: Ticket) -> np.ndarray:
    out = np.zeros(19)
    email = (ticket.author_email or "").lower()
    domain = email.rsplit("@", 1)[1] if "@" in email else ""
    for i, d in enumerate(AUTHOR_DOMAINS):
        if domain.endswith(d):
            out[i] = 1.0
    out[4] = 1.0 if ticket.author_is_project_member else 0.0
    for i, p in enumerate((1, 2, 3)):
        if ticket.priority == p:
            out[5 + i] = 1.0
    status = (ticket.status or "").lower()
    for i, s in enumerate(STATUS_FLAGS):
        if status == s.lower():
            out[8 + i] = 1.0
    itype = (ticket.issue_type or "").lower()
    out[16] = 1.0 if itype.startswith("bug") else 0.0
    out[17] = 1.0 if itype.startswith("bug-") else 0.0
    out[18] = 1.0 if not itype.startswith("bug") else 0.0
    return out


def count_features(ticket: Ticket, clean_tokens: list[str] | None = None) -> np.ndarray:
    text = ticket.free_text()
    if clean_tokens is None:
        clean_tokens = textprep.tokenize_clean(text)
    sentences = textprep.split_sentences(text)
    no_html = textprep.strip_html(text)
    no_html_words = no_html.split()
    n_sent = len(sentences)
    n_word_clean = len(clean_tokens)
    n_word_no_html = len(no_html_words)
    word_lens = sorted(len(w) for w in no_html_words)
    if word_lens:
        median_chars = percentile(word_lens, 0.5)
    else:
        median_chars = 0.0
    return np.array(
        [
            float(len(text)),
            float(max((len(s) for s in sentences), default=0)),
            median_chars,
            float(n_word_clean),
            float(n_word_no_html),
            n_word_clean / n_sent if n_sent else 0.0,
            n_word_no_html / n_sent if n_sent else 0.0,
            float(n_sent),
            float(textprep.count_sha1_hashes(text)),
        ]
    )


def keyphrase_features(ticket: Ticket) -> np.ndarray:
    text = ticket.free_text().lower()
    return np.array([1.0 if p in text else 0.0 for p in KEY_PHRASES])


def validate_concept_targets(pretrained: WordEmbedding) -> None:
    missing = [t for t in CONCEPT_TARGETS if t not in pretrained]
    if missing:
        raise DataError(f"pretrained embedding missing concept targets: {missing}")


def concept_features(unstemmed_tokens: list[str], pretrained: WordEmbedding) -> np.ndarray:
    """Max cosine between any distinct in-vocab ticket word and each target."""
    out = np.zeros(len(CONCEPT_TARGETS))
    rows = []
    for word in sorted(set(unstemmed_tokens)):
        vec = pretrained.get(word)
        if vec is not None:
            norm = np.linalg.norm(vec)
            if norm > 0:
                rows.append(vec / norm)
    if not rows:
        return out
    mat = np.vstack(rows)
    for i, target in enumerate(CONCEPT_TARGETS):
        tvec = pretrained.get(target)
        if tvec is None:
            raise DataError(f"concept target missing from embedding: {target}")
        tnorm = np.linalg.norm(tvec)
        if tnorm == 0:
            continue
        out[i] = float(np.max(mat @ (tvec / tnorm)))
    return out


def wordvec_features(tokens: list[str], word_model: WordEmbedding) -> np.ndarray:
    """Percentile summaries of the ticket's k x dim word-vector matrix."""
    dim = word_model.dim
    rows = [word_model.get(t) for t in tokens]
    rows = [r for r in rows if r is not None]
    out = np.zeros(2 * dim + 2)
    if not rows:
        return out
    mat = np.vstack(rows)
    for d in range(dim):
        col = mat[:, d]
        out[d] = percentile(col, 0.05)
        out[dim + d] = percentile(col, 0.95)
    if mat.shape[0] >= 2:
        dists = np.linalg.norm(np.diff(mat, axis=0), axis=1)
        out[2 * dim] = percentile(dists, 0.05)
        out[2 * dim + 1] = percentile(dists, 0.95)
    return out


def docvec_features(
    ticket_id: str,
    tokens: list[str],
    doc_model: DocEmbedding,
    infer_seed: int = 0,
) -> tuple[np.ndarray, bool]:
    """The ticket's trained vector, or an inferred one. Returns (vec, inferred)."""
    stored = doc_model.get(ticket_id)
    if stored is not None:
        return np.asarray(stored, dtype=float), False
    return infer_docvec(doc_model, tokens, seed=infer_seed), True


# ---------------------------------------------------------------------------
# n-grams (off by default)


def extract_ngram_vocab(
    token_lists: list[list[str]], n_max: int = 3, min_present: int = 3, min_absent: int = 3
) -> list[str]:
    """1..n_max-grams present in >= min_present and absent in >= min_absent docs."""
    n_docs = len(token_lists)
    doc_freq: dict[str, int] = {}
    for tokens in token_lists:
        for gram in set(_grams(tokens, n_max)):
            doc_freq[gram] = doc_freq.get(gram, 0) + 1
    kept = [
        g for g, df in doc_freq.items()
        if df >= min_present and (n_docs - df) >= min_absent
    ]
    return sorted(kept)


def _grams(tokens: list[str], n_max: int) -> list[str]:
    out = []
    for n in range(1, n_max + 1):
        for i in range(len(tokens) - n + 1):
            out.append("_".join(tokens[i : i + n]))
    return out


def ngram_flags(tokens: list[str], ngram_vocab: list[str]) -> np.ndarray:
    present = set(_grams(tokens, 3))
    return np.array([1.0 if g in present else 0.0 for g in ngram_vocab])


# ---------------------------------------------------------------------------
# composition


@dataclass
class FeatureContext:
    pretrained: WordEmbedding
    word_model: WordEmbedding
    doc_model: DocEmbedding
    registry: FeatureRegistry
    ngram_vocab: list[str] = field(default_factory=list)
    infer_seed: int = 0

    def __post_init__(self):
        validate_concept_targets(self.pretrained)


def featurize(
    ticket: Ticket,
    context: FeatureContext,
    clean_tokens: list[str] | None = None,
    unstemmed_tokens: list[str] | None = None,
) -> np.ndarray:
    """Assemble one feature vector in registry order."""
    text = ticket.free_text()
    if clean_tokens is None:
        clean_tokens = textprep.tokenize_clean(text)
    if unstemmed_tokens is None:
        unstemmed_tokens = textprep.tokenize_unstemmed(text)
    parts = [
        metadata_features(ticket),
        count_features(ticket, clean_tokens),
        keyphrase_features(ticket),
        concept_features(unstemmed_tokens, context.pretrained),
        wordvec_features(clean_tokens, context.word_model),
        docvec_features(ticket.id, clean_tokens, context.doc_model, context.infer_seed)[0],
    ]
    if context.ngram_vocab:
        parts.append(ngram_flags(clean_tokens, context.ngram_vocab))
    vec = np.concatenate(parts)
    if len(vec) != len(context.registry):
        raise ValueError(
            f"feature vector length {len(vec)} != registry size {len(context.registry)}"
        )
    return vec


@dataclass
class FeatureMatrix:
    ticket_ids: list[str]  # sorted
    X: np.ndarray  # n x |registry|
    registry: FeatureRegistry

    def row(self, ticket_id: str) -> np.ndarray:
        return self.X[self.ticket_ids.index(ticket_id)]

    def subset(self, ids: list[str]) -> "FeatureMatrix":
        index = {t: i for i, t in enumerate(self.ticket_ids)}
        ids = sorted(ids)
        rows = np.array([index[t] for t in ids], dtype=int)
        return FeatureMatrix(ticket_ids=ids, X=self.X[rows], registry=self.registry)

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["ticket_id", *self.registry.names])
            for tid, row in zip(self.ticket_ids, self.X):
                writer.writerow([tid, *[repr(float(x)) for x in row]])


def featurize_corpus(corpus: Corpus, context: FeatureContext) -> FeatureMatrix:
    """Feature matrix over all tickets, rows sorted by ticket id."""
    ids = corpus.ticket_ids()
    rows = []
    for tid in ids:
        ticket = corpus.tickets[tid]
        unstemmed = textprep.tokenize_unstemmed(ticket.free_text())
        clean = [textprep.stem(t) for t in unstemmed]
        rows.append(
            featurize(ticket, context, clean_tokens=clean, unstemmed_tokens=unstemmed)
        )
    return FeatureMatrix(ticket_ids=ids, X=np.vstack(rows), registry=context.registry)
