"""Magic-byte modality detection."""

from __future__ import annotations

import codecs

from ..records import Modality

PREFIX_BYTES = 512

_IMAGE_MAGIC = (b"\x89PNG", b"\xff\xd8\xff", b"GIF8")
_ZIP_MAGIC = b"PK\x03\x04"


def _as_utf8(prefix: bytes) -> str | None:
    # A full-size prefix may end mid-character; only a short (complete) file
    # must decode to the last byte.
    decoder = codecs.getincrementaldecoder("utf-8")()
    try:
        return decoder.decode(prefix, final=len(prefix) < PREFIX_BYTES)
    except UnicodeDecodeError:
        return None


def detect_modality(prefix: bytes, extension: str) -> Modality:
    """Classify a file from its first bytes; the extension only breaks ties.

    >>> detect_modality(b"\\x89PNG\\r\\n", "txt")
    <Modality.IMAGE: 'image'>
    """
    prefix = prefix[:PREFIX_BYTES]
    ext = extension.lower().lstrip(".")

    if prefix.startswith(b"%PDF"):
        return Modality.PDF
    if prefix.startswith(_ZIP_MAGIC):
        if ext == "docx":
            return Modality.DOCX
        if ext == "xlsx":
            return Modality.TABULAR_SPREADSHEET
        return Modality.UNKNOWN
    if prefix.startswith(_IMAGE_MAGIC):
        return Modality.IMAGE

    text = _as_utf8(prefix)
    if text is None:
        return Modality.UNKNOWN
    if ext == "json" and text.lstrip("\ufeff").strip()[:1] in ("{", "["):
        return Modality.JSON
    if ext == "csv":
        return Modality.CSV
    if ext == "md":
        return Modality.MARKDOWN
    return Modality.PLAIN_TEXT
