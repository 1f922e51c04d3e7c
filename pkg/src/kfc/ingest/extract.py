"""Text extraction, normalization and segmentation.

Extractors turn a file into either prose (one ``str``, split on blank lines)
or records (a ``list[str]``, one line per JSON leaf or table row). The
framework then normalizes and packs the result into bounded segments.
PDF and image extraction are not built in; register a plugin with
:func:`register_extractor`.
"""

from __future__ import annotations

import csv
import io
import json
import re
import unicodedata
import zipfile
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any
from xml.etree import ElementTree

from ..errors import ExtractionError
from ..records import Modality

DEFAULT_MAX_SEGMENT_CHARS = 2000

_HSPACE_RE = re.compile(r"[^\S\n]+")
_MANY_LF_RE = re.compile(r"\n{3,}")
_BLANK_LINE_RE = re.compile(r"\n[^\S\n]*\n")


@dataclass(frozen=True)
class ExtractConfig:
    max_segment_chars: int = DEFAULT_MAX_SEGMENT_CHARS

    def __post_init__(self) -> None:
        if self.max_segment_chars < 1:
            raise ValueError("max_segment_chars must be positive")


@dataclass
class ExtractedText:
    segments: list[str]
    warnings: list[str] = field(default_factory=list)


Extractor = Callable[[Path, ExtractConfig], "str | list[str]"]
_PLUGINS: dict[Modality, Extractor] = {}


def register_extractor(modality: Modality | str, func: Extractor | None) -> None:
    """Install (or with ``None``, remove) an extractor for a modality.

    Plugins override the built-ins, so this is also the hook for PDF and OCR.
    """
    modality = Modality(modality)
    if func is None:
        _PLUGINS.pop(modality, None)
    else:
        _PLUGINS[modality] = func


def normalize_text(raw: str) -> str:
    text = unicodedata.normalize("NFC", raw)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = _HSPACE_RE.sub(" ", text)
    text = _MANY_LF_RE.sub("\n\n", text)
    return text.strip()


def _hard_split(text: str, limit: int) -> list[str]:
    pieces = []
    while len(text) > limit:
        cut = -1
        for i in range(limit, 0, -1):
            if text[i].isspace():
                cut = i
                break
        if cut > 0:
            head, text = text[:cut].rstrip(), text[cut:].lstrip()
        else:
            head, text = text[:limit], text[limit:]
        pieces.append(head)
    if text:
        pieces.append(text)
    return pieces


def _pack(units: Iterable[str], sep: str, limit: int) -> list[str]:
    segments: list[str] = []
    current = ""
    for unit in units:
        for piece in _hard_split(unit, limit):
            if not current:
                current = piece
            elif len(current) + len(sep) + len(piece) <= limit:
                current += sep + piece
            else:
                segments.append(current)
                current = piece
    if current:
        segments.append(current)
    return segments


def segment_text(text: str, max_chars: int = DEFAULT_MAX_SEGMENT_CHARS) -> list[str]:
    """Split normalized prose on blank lines and greedily pack paragraphs."""
    paragraphs = (p.strip() for p in _BLANK_LINE_RE.split(text))
    return _pack((p for p in paragraphs if p), "\n\n", max_chars)


def segment_records(records: Iterable[str], max_chars: int = DEFAULT_MAX_SEGMENT_CHARS) -> list[str]:
    """Pack one-line records (JSON leaves, table rows) into segments."""
    lines = (normalize_text(r).replace("\n", " ") for r in records)
    return _pack((line for line in lines if line), "\n", max_chars)


def serialize_tabular_row(headers: list[str], row: list[str]) -> str:
    """``h1: v1; h2: v2`` with empty cells dropped and the row fitted to the headers."""
    if not headers:
        raise ValueError("headers must be non-empty")
    cells = list(row[: len(headers)]) + [""] * (len(headers) - len(row))
    parts = []
    for i, (header, value) in enumerate(zip(headers, cells)):
        value = (value or "").strip()
        if value:
            parts.append(f"{header.strip() or f'column_{i + 1}'}: {value}")
    return "; ".join(parts)


# -- built-in extractors ------------------------------------------------------


def _read_utf8(path: Path) -> str:
    try:
        return path.read_bytes().decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ExtractionError(f"not valid UTF-8: {exc}") from exc


def _json_scalar(value: Any) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False)


def flatten_json(value: Any, prefix: str = "") -> list[str]:
    """Leaf values as ``dotted.path: value`` lines; list indices become path parts."""
    if isinstance(value, dict):
        items: Iterable[tuple[str, Any]] = ((str(k), v) for k, v in value.items())
    elif isinstance(value, list):
        items = ((str(i), v) for i, v in enumerate(value))
    else:
        return [f"{prefix}: {_json_scalar(value)}" if prefix else _json_scalar(value)]
    lines = []
    for key, child in items:
        lines.extend(flatten_json(child, f"{prefix}.{key}" if prefix else key))
    return lines


def _extract_json(path: Path, config: ExtractConfig) -> list[str]:
    try:
        data = json.loads(_read_utf8(path))
    except json.JSONDecodeError as exc:
        raise ExtractionError(f"malformed JSON: {exc}") from exc
    return flatten_json(data)


def _table_rows(rows: Iterable[list[str]]) -> list[str]:
    headers: list[str] | None = None
    out = []
    for row in rows:
        if headers is None:
            if any(cell.strip() for cell in row):
                headers = row
            continue
        line = serialize_tabular_row(headers, row)
        if line:
            out.append(line)
    return out


def _extract_csv(path: Path, config: ExtractConfig) -> list[str]:
    text = _read_utf8(path)
    try:
        return _table_rows(csv.reader(io.StringIO(text, newline=""), strict=True))
    except csv.Error as exc:
        raise ExtractionError(f"malformed CSV: {exc}") from exc


_W = "{http://schemas.openxmlformats.org/wordprocessingml/2006/main}"
_S = "{http://schemas.openxmlformats.org/spreadsheetml/2006/main}"
_R = "{http://schemas.openxmlformats.org/officeDocument/2006/relationships}"
_PKG_REL = "{http://schemas.openxmlformats.org/package/2006/relationships}"


def _open_zip(path: Path) -> zipfile.ZipFile:
    try:
        return zipfile.ZipFile(path)
    except zipfile.BadZipFile as exc:
        raise ExtractionError(f"corrupt archive: {exc}") from exc


def _extract_docx(path: Path, config: ExtractConfig) -> str:
    with _open_zip(path) as zf:
        try:
            root = ElementTree.fromstring(zf.read("word/document.xml"))
        except (KeyError, ElementTree.ParseError) as exc:
            raise ExtractionError(f"unreadable docx body: {exc}") from exc
    paragraphs = []
    for para in root.iter(f"{_W}p"):
        chunks = []
        for node in para.iter():
            if node.tag == f"{_W}t" and node.text:
                chunks.append(node.text)
            elif node.tag == f"{_W}tab":
                chunks.append(" ")
            elif node.tag in (f"{_W}br", f"{_W}cr"):
                chunks.append("\n")
        paragraphs.append("".join(chunks))
    return "\n\n".join(paragraphs)


def _column_index(ref: str) -> int:
    n = 0
    for ch in ref:
        if not ch.isalpha():
            break
        n = n * 26 + (ord(ch.upper()) - 64)
    return n - 1


def _sheet_rows(root: ElementTree.Element, shared: list[str]) -> list[list[str]]:
    rows = []
    for row in root.iter(f"{_S}row"):
        cells: dict[int, str] = {}
        for pos, cell in enumerate(row.iter(f"{_S}c")):
            col = _column_index(cell.get("r", "")) if cell.get("r") else pos
            kind = cell.get("t")
            if kind == "inlineStr":
                value = "".join(t.text or "" for t in cell.iter(f"{_S}t"))
            else:
                v = cell.find(f"{_S}v")
                value = "" if v is None or v.text is None else v.text
                if kind == "s" and value:
                    value = shared[int(value)]
                elif kind == "b":
                    value = "TRUE" if value == "1" else "FALSE"
            cells[col] = value
        width = max(cells) + 1 if cells else 0
        rows.append([cells.get(i, "") for i in range(width)])
    return rows


def _extract_xlsx(path: Path, config: ExtractConfig) -> list[str]:
    """Every sheet in workbook order, each introduced by a ``sheet: <name>`` line."""
    with _open_zip(path) as zf:
        try:
            shared: list[str] = []
            if "xl/sharedStrings.xml" in zf.namelist():
                sroot = ElementTree.fromstring(zf.read("xl/sharedStrings.xml"))
                shared = ["".join(t.text or "" for t in si.iter(f"{_S}t")) for si in sroot.iter(f"{_S}si")]
            book = ElementTree.fromstring(zf.read("xl/workbook.xml"))
            rels = ElementTree.fromstring(zf.read("xl/_rels/workbook.xml.rels"))
            targets = {r.get("Id"): r.get("Target", "") for r in rels.iter(f"{_PKG_REL}Relationship")}
            lines = []
            for sheet in book.iter(f"{_S}sheet"):
                target = targets[sheet.get(f"{_R}id")].lstrip("/")
                member = target if target.startswith("xl/") else f"xl/{target}"
                rows = _sheet_rows(ElementTree.fromstring(zf.read(member)), shared)
                lines.append(f"sheet: {sheet.get('name', '')}")
                lines.extend(_table_rows(rows))
        except (KeyError, IndexError, ValueError, ElementTree.ParseError) as exc:
            raise ExtractionError(f"unreadable xlsx workbook: {exc}") from exc
    return lines


_BUILTINS: dict[Modality, Extractor] = {
    Modality.PLAIN_TEXT: lambda path, config: _read_utf8(path),
    Modality.MARKDOWN: lambda path, config: _read_utf8(path),
    Modality.JSON: _extract_json,
    Modality.CSV: _extract_csv,
    Modality.DOCX: _extract_docx,
    Modality.TABULAR_SPREADSHEET: _extract_xlsx,
}


def extract_text(
    path: str | Path, modality: Modality, config: ExtractConfig | None = None
) -> ExtractedText:
    """Run the extractor for ``modality`` and return normalized segments.

    Raises :class:`ExtractionError` when no extractor exists or the file is
    malformed; I/O errors propagate as ``OSError``.
    """
    config = config or ExtractConfig()
    path = Path(path)
    modality = Modality(modality)
    func = _PLUGINS.get(modality) or _BUILTINS.get(modality)
    if func is None:
        raise ExtractionError(f"no extractor registered for {modality.value}")
    result = func(path, config)
    warnings = []
    if isinstance(result, str):
        segments = segment_text(normalize_text(result), config.max_segment_chars)
    else:
        segments = segment_records(result, config.max_segment_chars)
    if not segments:
        warnings.append("no text extracted")
    return ExtractedText(segments, warnings)
