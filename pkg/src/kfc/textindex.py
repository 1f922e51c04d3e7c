"""Tokenization, sublinear TF-IDF weighting and inverted index maintenance.

Stored vectors carry tf weights only (``1 + ln f``). IDF depends on corpus-wide
counters that move on every ingest, so it is applied at query time from the
``terms`` table; that keeps a commit proportional to the changed documents.
"""

from __future__ import annotations

import math
import re
import sqlite3
import unicodedata
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import IntegrityError

_TOKEN_RE = re.compile(r"[^\W_]+")

# term_id u32 + weight f64, little-endian, no padding
VECTOR_DTYPE = np.dtype([("term", "<u4"), ("weight", "<f8")])
_COUNT_DTYPE = np.dtype("<u4")


def tokenize(text: str) -> list[str]:
    """Lowercase runs of Unicode letters/digits; everything else separates."""
    return _TOKEN_RE.findall(text.lower())


def fold_case(text: str) -> str:
    """NFC-normalized lowercase form used for exact-substring matching."""
    if text.isascii():
        return text.lower()
    return unicodedata.normalize("NFC", unicodedata.normalize("NFC", text).lower())


def contains_folded(content: str, needle: str) -> bool:
    return needle in fold_case(content)


def sublinear_tf(raw_count: int) -> float:
    if raw_count < 1:
        raise ValueError(f"raw_count must be >= 1, got {raw_count}")
    return 1.0 + math.log(raw_count)


def idf(n_segments: int, df: int) -> float:
    if n_segments < 1 or not 1 <= df <= n_segments:
        raise ValueError(f"idf needs 1 <= df <= N, got df={df} N={n_segments}")
    return math.log(n_segments / (1 + df)) + 1.0


@dataclass(frozen=True)
class SparseVector:
    """Ascending ``(term_id, weight)`` pairs."""

    entries: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        prev = 0
        for term_id, weight in self.entries:
            if term_id <= prev:
                raise ValueError("term ids must be positive and strictly ascending")
            if not weight > 0:
                raise ValueError(f"weight for term {term_id} must be > 0")
            prev = term_id

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def as_dict(self) -> dict[int, float]:
        return dict(self.entries)

    @property
    def term_ids(self) -> list[int]:
        return [t for t, _ in self.entries]

    def encode(self) -> bytes:
        arr = np.empty(len(self.entries), dtype=VECTOR_DTYPE)
        if self.entries:
            arr["term"] = [t for t, _ in self.entries]
            arr["weight"] = [w for _, w in self.entries]
        return np.array([len(self.entries)], dtype=_COUNT_DTYPE).tobytes() + arr.tobytes()

    @classmethod
    def decode(cls, blob: bytes) -> SparseVector:
        (count,) = np.frombuffer(blob, dtype=_COUNT_DTYPE, count=1)
        if len(blob) != 4 + int(count) * VECTOR_DTYPE.itemsize:
            raise ValueError(f"vector blob length {len(blob)} does not match count {count}")
        arr = np.frombuffer(blob, dtype=VECTOR_DTYPE, offset=4)
        return cls(tuple(zip(arr["term"].tolist(), arr["weight"].tolist())))


class TermRegistry(Protocol):
    def term_id(self, term: str) -> int:
        """Return the id for ``term``, registering it if unseen."""


class DictVocabulary:
    """In-memory registry; ids are handed out from 1 upwards and never reused."""

    def __init__(self) -> None:
        self.ids: dict[str, int] = {}

    def term_id(self, term: str) -> int:
        tid = self.ids.get(term)
        if tid is None:
            tid = self.ids[term] = len(self.ids) + 1
        return tid


def build_document_vector(
    tokens: Iterable[str], vocab: TermRegistry
) -> tuple[SparseVector, dict[int, int]]:
    """Bag-of-words tf vector for one segment.

    Returns the vector together with the raw ``term_id -> count`` map, which the
    inverted index needs (postings hold raw counts, not weights).
    """
    counts = Counter(tokens)
    raw = {vocab.term_id(term): f for term, f in counts.items()}
    entries = tuple((tid, sublinear_tf(raw[tid])) for tid in sorted(raw))
    return SparseVector(entries), raw


@dataclass
class IdfTable:
    n_segments: int
    df: dict[int, int] = field(default_factory=dict)

    def idf(self, term_id: int) -> float:
        return idf(self.n_segments, self.df[term_id])


def weighted_norm(vector: SparseVector, idf_table: IdfTable | Mapping[int, float]) -> float:
    """Euclidean length of the tf*idf vector; 0.0 for an empty vector.

    ``idf_table`` may be an :class:`IdfTable` or a precomputed ``term_id -> idf``
    mapping.
    """
    if not vector.entries:
        return 0.0
    lookup = idf_table.idf if isinstance(idf_table, IdfTable) else idf_table.__getitem__
    return math.sqrt(math.fsum((w * lookup(t)) ** 2 for t, w in vector.entries))


def apply_index_delta(
    conn: sqlite3.Connection,
    added: Mapping[int, Mapping[int, int]],
    removed: Mapping[int, Iterable[int]],
) -> None:
    """Update postings, df counters and the segment count inside an open transaction.

    ``added`` maps a new segment_id to its raw ``term_id -> count``;
    ``removed`` maps a deleted segment_id to the term_ids of its vector. Terms
    whose df falls to zero are evicted. Raises :class:`IntegrityError` if the
    stored counters disagree with the delta.
    """
    touched: set[int] = set()
    for segment_id, term_ids in removed.items():
        term_ids = list(term_ids)
        if not term_ids:
            continue
        cur = conn.executemany(
            "DELETE FROM postings WHERE term_id = ? AND segment_id = ?",
            [(t, segment_id) for t in term_ids],
        )
        if cur.rowcount != len(term_ids):
            raise IntegrityError(f"segment {segment_id}: posting entries missing on removal")
        conn.executemany("UPDATE terms SET df = df - 1 WHERE term_id = ?", [(t,) for t in term_ids])
        touched.update(term_ids)

    for segment_id, counts in added.items():
        if not counts:
            continue
        rows = sorted(counts.items())
        if any(f < 1 for _, f in rows):
            raise IntegrityError(f"segment {segment_id}: raw counts must be >= 1")
        conn.executemany(
            "INSERT INTO postings (term_id, segment_id, count) VALUES (?, ?, ?)",
            [(t, segment_id, f) for t, f in rows],
        )
        conn.executemany("UPDATE terms SET df = df + 1 WHERE term_id = ?", [(t,) for t, _ in rows])
        touched.update(counts)

    if touched:
        ids = sorted(touched)
        for start in range(0, len(ids), 500):
            chunk = ids[start : start + 500]
            marks = ",".join("?" * len(chunk))
            if conn.execute(
                f"SELECT 1 FROM terms WHERE df < 0 AND term_id IN ({marks}) LIMIT 1", chunk
            ).fetchone():
                raise IntegrityError("negative document frequency")
            conn.execute(f"DELETE FROM terms WHERE df = 0 AND term_id IN ({marks})", chunk)

    delta = len(added) - len(removed)
    if delta:
        conn.execute(
            "UPDATE meta SET value = CAST(value AS INTEGER) + ? WHERE key = 'kf.segment_count'",
            (delta,),
        )
