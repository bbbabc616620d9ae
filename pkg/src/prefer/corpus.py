"""Review corpus ingestion: dedup, sentence splitting, JSONL persistence.

Reviews are deduplicated on the (user_id, product_id, timestamp) key and then
split into sentence-level units with whitespace token counts, which is the
granularity the rest of the pipeline works at.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

ReviewKey = tuple[str, str, int]

_SENT_BOUNDARY = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class ReviewRecord:
    user_id: str
    product_id: str
    timestamp: int
    title: str
    text: str
    helpful_votes: int
    verified: bool

    @property
    def key(self) -> ReviewKey:
        return (self.user_id, self.product_id, self.timestamp)


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: int
    review_key: ReviewKey
    user_id: str
    product_id: str
    text: str
    token_count: int


@dataclass
class CorpusTables:
    reviews: list[ReviewRecord]
    sentences: list[SentenceRecord] = field(default_factory=list)

    def product_index(self) -> dict[str, list[int]]:
        """product_id -> sentence_id list, rebuilt on demand (not persisted)."""
        index: dict[str, list[int]] = {}
        for s in self.sentences:
            index.setdefault(s.product_id, []).append(s.sentence_id)
        return index


@dataclass(frozen=True)
class IngestError:
    index: int
    reason: str


@dataclass
class IngestResult:
    tables: CorpusTables
    errors: list[IngestError]


class CorpusFormatError(ValueError):
    def __init__(self, line: int, offset: int, message: str):
        self.line = line
        self.offset = offset
        super().__init__(f"line {line}, offset {offset}: {message}")


def ingest(records: Iterable[ReviewRecord]) -> IngestResult:
    """Deduplicate reviews on (user_id, product_id, timestamp).

    Among duplicates the record with more helpful votes wins; equal votes are
    broken in favor of verified purchases; remaining ties keep the first-seen
    record, so the result is deterministic for a fixed input order.  Records
    with an empty user or product id are rejected into the error report and
    ingestion continues.
    """
    kept: dict[ReviewKey, ReviewRecord] = {}
    errors: list[IngestError] = []
    for i, rec in enumerate(records):
        if not rec.user_id:
            errors.append(IngestError(i, "empty user_id"))
            continue
        if not rec.product_id:
            errors.append(IngestError(i, "empty product_id"))
            continue
        cur = kept.get(rec.key)
        if cur is None:
            kept[rec.key] = rec
        elif (rec.helpful_votes, rec.verified) > (cur.helpful_votes, cur.verified):
            kept[rec.key] = rec
    return IngestResult(CorpusTables(reviews=list(kept.values())), errors)


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation (. ! ?) followed by whitespace.

    Whitespace inside each sentence is collapsed to single spaces.
    """
    parts = _SENT_BOUNDARY.split(text.strip())
    out = []
    for part in parts:
        norm = " ".join(part.split())
        if norm:
            out.append(norm)
    return out


def sentence_split(
    tables: CorpusTables,
    min_words: int = 3,
    max_sentences_per_review: int = 20,
) -> CorpusTables:
    """Populate the sentence table from ingested reviews.

    Sentences with fewer than ``min_words`` whitespace tokens are dropped and
    at most ``max_sentences_per_review`` are kept per review, in order.
    Sentence ids are dense 0..M-1 in build order.
    """
    if min_words < 1:
        raise ValueError("min_words must be >= 1")
    if max_sentences_per_review < 1:
        raise ValueError("max_sentences_per_review must be >= 1")
    sentences: list[SentenceRecord] = []
    next_id = 0
    for review in tables.reviews:
        kept = 0
        for sent in split_sentences(review.text):
            if kept >= max_sentences_per_review:
                break
            tokens = sent.split()
            if len(tokens) < min_words:
                continue
            sentences.append(
                SentenceRecord(
                    sentence_id=next_id,
                    review_key=review.key,
                    user_id=review.user_id,
                    product_id=review.product_id,
                    text=sent,
                    token_count=len(tokens),
                )
            )
            next_id += 1
            kept += 1
    return CorpusTables(reviews=list(tables.reviews), sentences=sentences)


def _review_to_json(r: ReviewRecord) -> dict:
    return {
        "user_id": r.user_id,
        "product_id": r.product_id,
        "timestamp": r.timestamp,
        "title": r.title,
        "text": r.text,
        "helpful_votes": r.helpful_votes,
        "verified": r.verified,
    }


def _sentence_to_json(s: SentenceRecord) -> dict:
    return {
        "sentence_id": s.sentence_id,
        "review_key": list(s.review_key),
        "user_id": s.user_id,
        "product_id": s.product_id,
        "text": s.text,
        "token_count": s.token_count,
    }


def save_tables(tables: CorpusTables, path: str | Path) -> None:
    """Write one JSON object per line: reviews first, then sentences."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for r in tables.reviews:
            fh.write(json.dumps(_review_to_json(r), ensure_ascii=False) + "\n")
        for s in tables.sentences:
            fh.write(json.dumps(_sentence_to_json(s), ensure_ascii=False) + "\n")


def load_tables(path: str | Path) -> CorpusTables:
    """Load tables saved by save_tables; the round trip is lossless.

    An empty file yields empty tables.  Malformed lines raise
    CorpusFormatError naming the line and character offset.
    """
    reviews: list[ReviewRecord] = []
    sentences: list[SentenceRecord] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(lineno, e.pos, e.msg) from e
            try:
                if "sentence_id" in obj:
                    key = obj["review_key"]
                    sentences.append(
                        SentenceRecord(
                            sentence_id=int(obj["sentence_id"]),
                            review_key=(str(key[0]), str(key[1]), int(key[2])),
                            user_id=str(obj["user_id"]),
                            product_id=str(obj["product_id"]),
                            text=str(obj["text"]),
                            token_count=int(obj["token_count"]),
                        )
                    )
                else:
                    reviews.append(
                        ReviewRecord(
                            user_id=str(obj["user_id"]),
                            product_id=str(obj["product_id"]),
                            timestamp=int(obj["timestamp"]),
                            title=str(obj["title"]),
                            text=str(obj["text"]),
                            helpful_votes=int(obj["helpful_votes"]),
                            verified=bool(obj["verified"]),
                        )
                    )
            except (KeyError, IndexError, TypeError) as e:
                raise CorpusFormatError(lineno, 0, f"missing or bad field: {e}") from e
    return CorpusTables(reviews=reviews, sentences=sentences)


def parse_raw_reviews(lines: Iterable[str]) -> tuple[list[ReviewRecord], list[IngestError]]:
    """Parse raw review JSONL lines, tolerating bad rows via the error report."""
    records: list[ReviewRecord] = []
    errors: list[IngestError] = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            records.append(
                ReviewRecord(
                    user_id=str(obj.get("user_id", "")),
                    product_id=str(obj.get("product_id", "")),
                    timestamp=int(obj.get("timestamp", 0)),
                    title=str(obj.get("title", "")),
                    text=str(obj.get("text", "")),
                    helpful_votes=int(obj.get("helpful_votes", 0)),
                    verified=bool(obj.get("verified", False)),
                )
            )
        except (json.JSONDecodeError, TypeError, ValueError) as e:
            errors.append(IngestError(i, str(e)))
    return records, errors
