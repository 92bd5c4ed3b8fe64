"""Ticket and label data model plus JSONL persistence.

A corpus is immutable once ingested except for the label journal, which is
append-only: the active label for a (ticket, rater) pair is the record with
the latest labeled_at timestamp (ties broken by journal order).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import DataError

log = logging.getLogger(__name__)

RUBRIC_KEYS = (
    "artifact_evidence",
    "improvement_or_defect",
    "design_limitation",
    "side_effects_or_extra_work",
)


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime (seconds precision)."""
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Comment:
    author: str
    posted_at: datetime
    text: str


@dataclass(frozen=True)
class Ticket:
    id: str
    title: str
    description: str
    comments: tuple[Comment, ...]
    author_email: str
    author_is_project_member: bool
    priority: int | None
    status: str
    issue_type: str
    opened_at: datetime

    def free_text(self) -> str:
        """Title, description and each comment joined by single newlines."""
        parts = [self.title, self.description]
        parts.extend(c.text for c in self.comments)
        return "\n".join(parts)


@dataclass(frozen=True)
class LabelRecord:
    ticket_id: str
    label: float
    rater: str
    labeled_at: datetime
    rubric_path: dict[str, bool | None] = field(default_factory=dict)
    notes: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.label <= 1.0:
            raise DataError(f"label out of range [0,1]: {self.label}")


def free_text(ticket: Ticket) -> str:
    return ticket.free_text()


class Corpus:
    """Tickets keyed by id plus the label journal."""

    def __init__(self, tickets: dict[str, Ticket] | None = None):
        self.tickets: dict[str, Ticket] = dict(tickets or {})
        self.labels: list[LabelRecord] = []

    def __len__(self) -> int:
        return len(self.tickets)

    def ticket_ids(self) -> list[str]:
        return sorted(self.tickets)

    def iter_tickets(self):
        for tid in self.ticket_ids():
            yield self.tickets[tid]

    def add_ticket(self, ticket: Ticket) -> None:
        if ticket.id in self.tickets:
            raise DataError(f"duplicate ticket id: {ticket.id}")
        if not ticket.id:
            raise DataError("empty ticket id")
        self.tickets[ticket.id] = ticket

    def upsert_label(self, record: LabelRecord) -> None:
        """Append to the journal; the active record per (ticket, rater) is the latest."""
        if record.ticket_id not in self.tickets:
            raise DataError(f"unknown ticket: {record.ticket_id}")
        self.labels.append(record)

    def active_labels_by_rater(self) -> dict[tuple[str, str], LabelRecord]:
        """Last-write-wins per (ticket_id, rater)."""
        active: dict[tuple[str, str], LabelRecord] = {}
        for rec in self.labels:
            key = (rec.ticket_id, rec.rater)
            prev = active.get(key)
            if prev is None or rec.labeled_at >= prev.labeled_at:
                active[key] = rec
        return active

    def active_labels(self) -> dict[str, LabelRecord]:
        """One active record per ticket: the most recent across raters."""
        active: dict[str, LabelRecord] = {}
        for rec in self.active_labels_by_rater().values():
            prev = active.get(rec.ticket_id)
            if prev is None or rec.labeled_at >= prev.labeled_at:
                active[rec.ticket_id] = rec
        return active

    def labeled_ids(self) -> list[str]:
        return sorted(self.active_labels())

    def unlabeled_ids(self) -> list[str]:
        labeled = set(self.active_labels())
        return [tid for tid in self.ticket_ids() if tid not in labeled]


def active_label_map(records: list[LabelRecord]) -> dict[str, LabelRecord]:
    """Active record per ticket from a raw journal (no ticket check).

    Last-write-wins per (ticket, rater), then the most recent across raters.
    """
    by_rater: dict[tuple[str, str], LabelRecord] = {}
    for rec in records:
        key = (rec.ticket_id, rec.rater)
        prev = by_rater.get(key)
        if prev is None or rec.labeled_at >= prev.labeled_at:
            by_rater[key] = rec
    active: dict[str, LabelRecord] = {}
    for rec in by_rater.values():
        prev = active.get(rec.ticket_id)
        if prev is None or rec.labeled_at >= prev.labeled_at:
            active[rec.ticket_id] = rec
    return active


# ---------------------------------------------------------------------------
# JSONL serialization


def _ticket_to_obj(t: Ticket) -> dict:
    return {
        "id": t.id,
        "title": t.title,
        "description": t.description,
        "comments": [
            {"author": c.author, "posted_at": format_timestamp(c.posted_at), "text": c.text}
            for c in t.comments
        ],
        "author_email": t.author_email,
        "author_is_project_member": t.author_is_project_member,
        "priority": t.priority,
        "status": t.status,
        "issue_type": t.issue_type,
        "opened_at": format_timestamp(t.opened_at),
    }


def _ticket_from_obj(obj: dict) -> Ticket:
    tid = obj["id"]
    if not isinstance(tid, str) or not tid:
        raise ValueError("ticket id must be a non-empty string")
    priority = obj.get("priority")
    if priority is not None:
        priority = int(priority)
        if priority < 0:
            raise ValueError("priority must be non-negative")
    comments = tuple(
        Comment(author=str(c.get("author", "")), posted_at=parse_timestamp(c["posted_at"]), text=str(c.get("text", "")))
        for c in obj.get("comments", [])
    )
    return Ticket(
        id=tid,
        title=str(obj.get("title", "")),
        description=str(obj.get("description", "")),
        comments=comments,
        author_email=str(obj.get("author_email", "")),
        author_is_project_member=bool(obj.get("author_is_project_member", False)),
        priority=priority,
        status=str(obj.get("status", "")),
        issue_type=str(obj.get("issue_type", "")),
        opened_at=parse_timestamp(obj["opened_at"]),
    )


def ingest_jsonl(path: str | Path) -> tuple[Corpus, int]:
    """Read a ticket JSONL file. Returns (corpus, count of skipped lines).

    Malformed lines are skipped with a warning; duplicate ids are fatal.
    """
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus file {path}: {exc}") from exc
    corpus = Corpus()
    skipped = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            ticket = _ticket_from_obj(obj)
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("skipping malformed line %d: %s", lineno, exc)
            skipped += 1
            continue
        corpus.add_ticket(ticket)
    return corpus, skipped


def write_jsonl(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for ticket in corpus.iter_tickets():
            f.write(json.dumps(_ticket_to_obj(ticket), ensure_ascii=False) + "\n")


def _label_to_obj(rec: LabelRecord) -> dict:
    return {
        "ticket_id": rec.ticket_id,
        "label": rec.label,
        "rater": rec.rater,
        "labeled_at": format_timestamp(rec.labeled_at),
        "rubric_path": {k: rec.rubric_path.get(k) for k in RUBRIC_KEYS},
        "notes": rec.notes,
    }


def _label_from_obj(obj: dict) -> LabelRecord:
    rubric = obj.get("rubric_path") or {}
    return LabelRecord(
        ticket_id=str(obj["ticket_id"]),
        label=float(obj["label"]),
        rater=str(obj.get("rater", "")),
        labeled_at=parse_timestamp(obj["labeled_at"]),
        rubric_path={k: rubric.get(k) for k in RUBRIC_KEYS},
        notes=obj.get("notes"),
    )


def append_label_jsonl(record: LabelRecord, path: str | Path) -> None:
    """Append one record to the on-disk journal."""
    with Path(path).open("a", encoding="utf-8") as f:
        f.write(json.dumps(_label_to_obj(record), ensure_ascii=False) + "\n")


def load_labels_jsonl(path: str | Path) -> list[LabelRecord]:
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read label file {path}: {exc}") from exc
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(_label_from_obj(json.loads(line)))
        except (ValueError, KeyError, TypeError, DataError) as exc:
            raise DataError(f"bad label record at line {lineno}: {exc}") from exc
    return records


def write_labels_jsonl(records: list[LabelRecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(_label_to_obj(rec), ensure_ascii=False) + "\n")
