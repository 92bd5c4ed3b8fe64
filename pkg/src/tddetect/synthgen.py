"""Synthetic ticket corpus for tests and desk-scale benchmark runs.

TD tickets mix three text styles: explicit key-phrase discussions, longer
multi-comment design threads, and paraphrased debt talk that contains none
of the key phrases (so a key-phrase query cannot find them but embeddings
and concept words can). Non-TD tickets are neutral bug reports, a fraction
of which contain generic key-phrase words as confusers.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .corpus import Comment, Corpus, Ticket
from .features import CONCEPT_TARGETS, KEY_PHRASES

_EPOCH = datetime(2016, 1, 4, 9, 0, 0, tzinfo=timezone.utc)

# Synonym families anchored on the concept-target words. The fixture
# embedding places each family near its target so concept features fire on
# paraphrased TD text.
CONCEPT_SYNONYMS: dict[str, list[str]] = {
    "deviate": ["diverge", "stray", "drift"],
    "outdated": ["stale", "obsolete", "antiquated"],
    "redundant": ["duplicated", "superfluous"],
    "redesign": ["overhaul", "rearchitect"],
    "decouple": ["untangle", "disentangle"],
    "complicated": ["convoluted", "tangled", "intricate"],
    "regret": ["unfortunate", "lament"],
    "corrupt": ["garbled", "mangled"],
    "horrible": ["awful", "dreadful"],
    "delay": ["postponed", "deferred"],
}

_NEUTRAL_TITLES = [
    "Crash when opening settings page",
    "Button misaligned on profile screen",
    "Login fails with expired session",
    "Video playback stutters on fullscreen",
    "Tab favicon missing after reload",
    "Scrollbar flickers while resizing window",
    "Bookmark sync stops after network blip",
    "Font rendering blurry at high zoom",
    "Download progress bar stuck at zero",
    "Print preview shows blank page",
]

_NEUTRAL_SENTENCES = [
    "Steps to reproduce: open the page and click the toolbar icon twice.",
    "The browser crashes with a null pointer on startup.",
    "Observed on the latest canary build with a clean profile.",
    "The error console shows a timeout from the renderer process.",
    "Attached a screenshot of the broken layout.",
    "This only happens on the second monitor at high dpi.",
    "The spinner never stops and the tab must be closed manually.",
    "Could you attach the crash id from the internals page?",
    "Unable to reproduce on linux, only on the mac build.",
    "The regression range points at last week's branch cut.",
    "Marking as blocking the next beta release.",
    "The page scrolls back to the top after every keystroke.",
    "Verified the fix on trunk, awaiting merge approval.",
]

# Neutral sentences that happen to contain generic key-phrase words; these
# create false positives for the key-phrase baseline.
_CONFUSER_SENTENCES = [
    "Please remove the stale screenshot from the report.",
    "The failure may depend on the graphics driver version.",
    "The page structure looks fine in the inspector.",
    "This interaction is complex to reproduce reliably.",
    "We can tweak the repro steps if that helps triage.",
    "The error message mentions a missing codec.",
]

_TD_TITLES = [
    "Consolidate duplicated socket setup logic",
    "Legacy cache layer needs an overhaul",
    "Stopgap in layout engine is spreading",
    "Shortcut taken in ipc wiring keeps biting us",
    "Old observer plumbing blocks new features",
    "Temporary parser path still in tree years later",
]

# Sentences that each plant one key phrase (index-aligned templates; the
# phrase itself is formatted in verbatim so substring matching always fires).
_TD_PHRASE_TEMPLATES = [
    "We are still paying down the {p} from the original landing.",
    "This whole path is a {p} that was never meant to ship.",
    "The {p} in the event loop needs a real fix.",
    "Scheduling a {p} pass over this directory next quarter.",
    "Honestly this code is {p} and nobody wants to touch it.",
    "The interface has become {p} since the split.",
    "We took a {p} solution and it stuck.",
    "Comments in the file admit the design is {p}.",
]

# Paraphrased TD sentences: contain NO key phrase substrings. Concept-word
# synonyms are slotted in so embedding features can still find the signal.
_TD_PARAPHRASE_TEMPLATES = [
    "The {w} binding layer forces every caller to copy state twice.",
    "We keep having to {w} the scheduler from the renderer internals.",
    "This module is {w} and diverges from how the rest of the tree is laid out.",
    "The design was a {w} choice made before the api settled.",
    "Each release the {w} glue grows and slows the team down.",
    "It is {w} that the original shortcut was never revisited.",
    "The cache invalidation here is {w} beyond what anyone can follow.",
    "We should {w} the io layer into its own target and retire the shim.",
    "The old entry points are {w} and new callers still land on them.",
    "Every change risks a {w} state file because the writer was rushed.",
]

_TD_PLAIN_SENTENCES = [
    "The team agreed the current layering is a liability for the roadmap.",
    "We keep postponing the rewrite because the owners moved on.",
    "New contributors get lost in the tangled init path.",
    "The shim was meant to last one milestone and it is still here.",
    "An overhaul of this subsystem would unblock three other teams.",
    "The brittle wiring between these targets makes testing painful.",
    "We traded velocity for a kludge and are paying the interest now.",
]

_DOMAINS_TD = (["chromium.org"] * 50 + ["google.com"] * 20 + ["gmail.com"] * 25 + ["etouch.net"] * 5)
_DOMAINS_OTHER = (["chromium.org"] * 25 + ["google.com"] * 10 + ["gmail.com"] * 60 + ["etouch.net"] * 5)
_STATUSES = ["WontFix", "Fixed", "Duplicate", "Verified", "Archived", "Assigned", "Available", "Untriaged"]
_TYPES = ["Bug", "Bug-Regression", "Feature", "Task"]


def _pick(rng: np.random.Generator, items: list[str]) -> str:
    return items[int(rng.integers(0, len(items)))]


def _phrase_sentence(rng: np.random.Generator) -> str:
    # geometric-ish bias toward the front of the list, mirroring a list
    # ordered by expected usefulness
    idx = min(int(rng.geometric(0.18)) - 1, len(KEY_PHRASES) - 1)
    template = _pick(rng, _TD_PHRASE_TEMPLATES)
    return template.format(p=KEY_PHRASES[idx])


def _paraphrase_sentence(rng: np.random.Generator) -> str:
    target = _pick(rng, sorted(CONCEPT_SYNONYMS))
    word = _pick(rng, [target] + CONCEPT_SYNONYMS[target]) if target not in KEY_PHRASES else _pick(rng, CONCEPT_SYNONYMS[target])
    # key-phrase targets ("deviate", "redesign") must not leak verbatim
    if any(p in word for p in KEY_PHRASES):
        word = CONCEPT_SYNONYMS[target][0]
    return _pick(rng, _TD_PARAPHRASE_TEMPLATES).format(w=word)


def _td_sentence(rng: np.random.Generator, with_phrases: bool) -> str:
    roll = rng.random()
    if with_phrases and roll < 0.45:
        return _phrase_sentence(rng)
    if roll < 0.75:
        return _paraphrase_sentence(rng)
    return _pick(rng, _TD_PLAIN_SENTENCES)


def _neutral_sentence(rng: np.random.Generator, confusers: bool) -> str:
    if confusers and rng.random() < 0.12:
        return _pick(rng, _CONFUSER_SENTENCES)
    return _pick(rng, _NEUTRAL_SENTENCES)


def generate_synthetic_corpus(
    n_tickets: int, td_rate: float, seed: int
) -> tuple[Corpus, dict[str, int]]:
    """Deterministically generate a corpus and its exact TD ground truth."""
    if n_tickets <= 0:
        raise ValueError("n_tickets must be positive")
    rng = np.random.default_rng(seed)
    n_td = int(round(td_rate * n_tickets))
    td_indices = set(rng.permutation(n_tickets)[:n_td].tolist())

    corpus = Corpus()
    truth: dict[str, int] = {}
    for idx in range(n_tickets):
        tid = f"T{idx:06d}"
        is_td = idx in td_indices
        truth[tid] = int(is_td)
        opened = _EPOCH + timedelta(minutes=idx * 7)
        if is_td:
            with_phrases = rng.random() < 0.55
            title = _pick(rng, _TD_TITLES)
            desc = " ".join(_td_sentence(rng, with_phrases) for _ in range(int(rng.integers(2, 5))))
            n_comments = int(rng.integers(2, 6))
            comments = []
            for c in range(n_comments):
                n_sent = int(rng.integers(1, 4))
                body = " ".join(
                    _td_sentence(rng, with_phrases) if rng.random() < 0.7 else _neutral_sentence(rng, False)
                    for _ in range(n_sent)
                )
                comments.append(Comment(author=f"dev{c}", posted_at=opened + timedelta(hours=c + 1), text=body))
            domain = _pick(rng, _DOMAINS_TD)
            member = rng.random() < 0.7
            priority = int(rng.integers(1, 3))
            status = _pick(rng, _STATUSES[:6])
            issue_type = _pick(rng, ["Bug", "Bug-Regression", "Task"])
        else:
            title = _pick(rng, _NEUTRAL_TITLES)
            desc = " ".join(_neutral_sentence(rng, True) for _ in range(int(rng.integers(1, 4))))
            n_comments = int(rng.integers(0, 4))
            comments = []
            for c in range(n_comments):
                body = " ".join(_neutral_sentence(rng, True) for _ in range(int(rng.integers(1, 3))))
                comments.append(Comment(author=f"user{c}", posted_at=opened + timedelta(hours=c + 1), text=body))
            domain = _pick(rng, _DOMAINS_OTHER)
            member = rng.random() < 0.35
            priority = int(rng.integers(2, 4)) if rng.random() < 0.8 else None
            status = _pick(rng, _STATUSES)
            issue_type = _pick(rng, _TYPES)
        corpus.add_ticket(
            Ticket(
                id=tid,
                title=title,
                description=desc,
                comments=tuple(comments),
                author_email=f"person{idx}@{domain}",
                author_is_project_member=bool(member),
                priority=priority,
                status=status,
                issue_type=issue_type,
                opened_at=opened,
            )
        )
    return corpus, truth


def _template_words() -> set[str]:
    import re

    chunks = (
        _NEUTRAL_TITLES
        + _NEUTRAL_SENTENCES
        + _CONFUSER_SENTENCES
        + _TD_TITLES
        + _TD_PHRASE_TEMPLATES
        + _TD_PARAPHRASE_TEMPLATES
        + _TD_PLAIN_SENTENCES
        + list(KEY_PHRASES)
        + list(CONCEPT_TARGETS)
        + [w for ws in CONCEPT_SYNONYMS.values() for w in ws]
    )
    words = set()
    for chunk in chunks:
        words.update(re.findall(r"[a-z]+", chunk.lower()))
    return words


def write_fixture_embedding(path: str | Path, dim: int = 100, seed: int = 12345) -> None:
    """Write a plain-text embedding covering the generator vocabulary.

    Concept-target words get anchor vectors; their synonym families are
    placed nearby (cosine well above the background), everything else is
    drawn independently.
    """
    rng = np.random.default_rng(seed)
    words = sorted(_template_words())
    anchors: dict[str, np.ndarray] = {}
    for target in sorted(CONCEPT_SYNONYMS):
        v = rng.standard_normal(dim)
        anchors[target] = v / np.linalg.norm(v)
    rows: dict[str, np.ndarray] = {}
    for target, syns in sorted(CONCEPT_SYNONYMS.items()):
        rows[target] = anchors[target]
        for syn in syns:
            noise = rng.standard_normal(dim)
            # unit-norm noise keeps each synonym at cosine ~0.94 to its anchor
            v = anchors[target] + 0.35 * noise / np.linalg.norm(noise)
            rows[syn] = v / np.linalg.norm(v)
    for word in words:
        if word not in rows:
            v = rng.standard_normal(dim)
            rows[word] = v / np.linalg.norm(v)
    with Path(path).open("w", encoding="utf-8") as f:
        for word in sorted(rows):
            vec = " ".join(f"{x:.6f}" for x in rows[word])
            f.write(f"{word} {vec}\n")


def oversampled_labeling(
    truth: dict[str, int], base_rate: float, td_factor: float, seed: int
) -> tuple[list[str], dict[str, float]]:
    """Bernoulli-sample ticket ids with TD tickets oversampled.

    Returns (sampled ids, inclusion probability for every ticket).
    """
    rng = np.random.default_rng(seed)
    probs: dict[str, float] = {}
    sampled: list[str] = []
    for tid in sorted(truth):
        p = min(1.0, base_rate * (td_factor if truth[tid] else 1.0))
        probs[tid] = p
        if rng.random() < p:
            sampled.append(tid)
    return sampled, probs
