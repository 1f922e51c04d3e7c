"""Plain record types shared by the container, ingest and query layers."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Modality(str, enum.Enum):
    PLAIN_TEXT = "plain_text"
    MARKDOWN = "markdown"
    JSON = "json"
    CSV = "csv"
    TABULAR_SPREADSHEET = "tabular_spreadsheet"
    PDF = "pdf"
    DOCX = "docx"
    IMAGE = "image"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DocumentRecord:
    source_path: str
    signature: bytes
    size_bytes: int
    modality: Modality = Modality.PLAIN_TEXT
    ingested_at: int = 0
    doc_id: int = 0

    def __post_init__(self) -> None:
        if len(self.signature) != 32:
            raise ValueError(f"signature must be 32 bytes, got {len(self.signature)}")
        if self.size_bytes < 0:
            raise ValueError("size_bytes must be non-negative")


@dataclass(frozen=True)
class SegmentRecord:
    segment_id: int
    doc_id: int
    ordinal: int
    content: str

    @property
    def char_count(self) -> int:
        return len(self.content)


@dataclass(frozen=True)
class VocabEntry:
    term_id: int
    term: str
    document_frequency: int


@dataclass(frozen=True)
class PostingList:
    term_id: int
    postings: tuple[tuple[int, int], ...]

    @property
    def document_frequency(self) -> int:
        return len(self.postings)


@dataclass(frozen=True)
class ContainerStats:
    documents: int
    segments: int
    terms: int
    file_bytes: int
