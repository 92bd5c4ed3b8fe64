"""Text normalization shared by all feature extractors.

Everything here is a pure function. The clean/tokenize pipeline follows a
fixed order: lowercase, URL removal, stripping of digits/punctuation/
symbols/hyphens, stop-word removal, then stemming.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from .porter import stem

__all__ = [
    "strip_html",
    "split_sentences",
    "tokenize_clean",
    "tokenize_unstemmed",
    "stem",
    "count_sha1_hashes",
    "load_stop_words",
]

_TAG_RE = re.compile(r"<[^<>]*>")
_ENTITIES = [("&lt;", "<"), ("&gt;", ">"), ("&quot;", '"'), ("&#39;", "'"), ("&amp;", "&")]
_URL_RE = re.compile(r"\b(?:[a-z][a-z0-9+.-]*://\S+|www\.\S+)", re.IGNORECASE)
_NON_ALPHA_RE = re.compile(r"[^a-z]+")
_SENT_SPLIT_RE = re.compile(r"[.!?\n]")
_SHA1_RE = re.compile(r"(?<![0-9a-fA-F])[0-9a-fA-F]{40}(?![0-9a-fA-F])")


def strip_html(text: str) -> str:
    """Remove <...> tags and decode the five basic entities.

    Applied to fixpoint so the result is idempotent even when decoding an
    entity exposes a new tag (e.g. "&lt;b&gt;").
    """
    out = text
    while True:
        new = _TAG_RE.sub("", out)
        for entity, char in _ENTITIES:
            new = new.replace(entity, char)
        if new == out:
            return out
        out = new


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!', '?' and newline; drop empty fragments."""
    parts = (p.strip() for p in _SENT_SPLIT_RE.split(text))
    return [p for p in parts if p]


@lru_cache(maxsize=1)
def load_stop_words() -> frozenset[str]:
    data = resources.files("tddetect").joinpath("data/stopwords.txt").read_text("utf-8")
    words = set()
    for line in data.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def _alpha_tokens(text: str) -> list[str]:
    """Lowercase, drop URLs, and reduce to purely alphabetic tokens."""
    text = text.lower()
    text = _URL_RE.sub(" ", text)
    return [t for t in _NON_ALPHA_RE.split(text) if t]


def tokenize_unstemmed(text: str) -> list[str]:
    """Clean tokens with stop words removed but no stemming applied."""
    stops = load_stop_words()
    return [t for t in _alpha_tokens(text) if t not in stops]


def tokenize_clean(text: str) -> list[str]:
    """The full cleaning pipeline: tokenize_unstemmed plus Porter stemming."""
    return [stem(t) for t in tokenize_unstemmed(text)]


def count_sha1_hashes(text: str) -> int:
    """Count maximal runs of exactly 40 hex characters."""
    return len(_SHA1_RE.findall(text))
