import hashlib
import json
import os
import threading
import time
import zipfile

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kfc.errors import ExtractionError
from kfc.ingest import (
    ExtractConfig,
    SyncConfig,
    compute_file_signature,
    detect_modality,
    extract_text,
    normalize_text,
    register_extractor,
    serialize_tabular_row,
    sync_directory,
    watch_directory,
)
from kfc.ingest.extract import segment_text
from kfc.ingest.sync import glob_to_regex
from kfc.records import Modality

# -- modality ------------------------------------------------------------------


@pytest.mark.parametrize(
    "prefix, ext, expected",
    [
        (b"%PDF-1.7\n...", "pdf", Modality.PDF),
        (b"%PDF-1.4", "txt", Modality.PDF),
        (b"\x89PNG\r\n\x1a\n", "txt", Modality.IMAGE),
        (b"\xff\xd8\xff\xe0", "jpg", Modality.IMAGE),
        (b"GIF89a", "gif", Modality.IMAGE),
        (b"PK\x03\x04rest", "docx", Modality.DOCX),
        (b"PK\x03\x04rest", ".XLSX", Modality.TABULAR_SPREADSHEET),
        (b"PK\x03\x04rest", "zip", Modality.UNKNOWN),
        (b"hello world", "csv", Modality.CSV),
        (b'  {"a": 1}', "json", Modality.JSON),
        (b"[1, 2]", "json", Modality.JSON),
        (b"not json", "json", Modality.PLAIN_TEXT),
        (b"# Title", "md", Modality.MARKDOWN),
        (b"plain", "", Modality.PLAIN_TEXT),
        (b"", "txt", Modality.PLAIN_TEXT),
        (b"\xff\xfe\x00bad", "txt", Modality.UNKNOWN),
    ],
)
def test_detect_modality(prefix, ext, expected):
    assert detect_modality(prefix, ext) is expected


def test_detect_modality_tolerates_cut_multibyte_char():
    prefix = ("a" * 511 + "é").encode()[:512]  # full prefix ending mid-character
    assert detect_modality(prefix, "txt") is Modality.PLAIN_TEXT
    assert detect_modality(prefix[:-1] + b"\xc3", "txt") is Modality.PLAIN_TEXT
    assert detect_modality(b"ab\xc3", "txt") is Modality.UNKNOWN  # short file: truncated char is invalid


# -- normalization and segmentation ------------------------------------------------


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("a\r\nb", "a\nb"),
        ("x\t\t y", "x y"),
        ("", ""),
        ("a\rb", "a\nb"),
        ("p1\n\n\n\n\np2", "p1\n\np2"),
        ("  padded \n", "padded"),
        ("é", "é"),
    ],
)
def test_normalize_text(raw, expected):
    assert normalize_text(raw) == expected


@given(st.text())
def test_normalize_is_idempotent(raw):
    once = normalize_text(raw)
    assert normalize_text(once) == once
    assert "\r" not in once and "\n\n\n" not in once


@pytest.mark.parametrize(
    "headers, row, expected",
    [
        (["name", "price"], ["Widget", "9.99"], "name: Widget; price: 9.99"),
        (["a", "b"], ["x", ""], "a: x"),
        (["a"], ["x", "y"], "a: x"),
        (["a", "b"], ["x"], "a: x"),
        (["a", "b"], ["", " "], ""),
        (["", "b"], ["x", "y"], "column_1: x; b: y"),
    ],
)
def test_serialize_tabular_row(headers, row, expected):
    assert serialize_tabular_row(headers, row) == expected


def test_serialize_requires_headers():
    with pytest.raises(ValueError):
        serialize_tabular_row([], ["x"])


def _paragraphs(n, seed=0):
    words = "ledger invoice quarterly revenue margin audit forecast budget".split()
    out = []
    for i in range(n):
        length = 20 + (i * 37 + seed) % 60
        out.append(" ".join(words[(i + j) % len(words)] for j in range(length)) + f" p{i}.")
    return out


def test_ten_kb_plain_text_segmentation(tmp_path):
    body = "\n\n".join(_paragraphs(40))
    assert len(body) >= 10_000
    path = tmp_path / "long.txt"
    path.write_text(body)
    segments = extract_text(path, Modality.PLAIN_TEXT).segments
    assert len(segments) > 1
    assert all(0 < len(s) <= 2000 for s in segments)
    assert "\n\n".join(segments) == body  # order preserved, nothing lost


@given(
    st.lists(st.text(st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=300), max_size=20),
    st.integers(5, 400),
)
def test_segments_respect_limit_and_keep_tokens(paras, limit):
    text = normalize_text("\n\n".join(paras))
    segments = segment_text(text, limit)
    assert all(0 < len(s) <= limit for s in segments)
    # hard splits may cut inside a word, so compare with all whitespace removed
    assert "".join("".join(segments).split()) == "".join(text.split())


def test_extract_json(tmp_path):
    path = tmp_path / "a.json"
    path.write_text('{"a": {"b": 1}}')
    assert extract_text(path, Modality.JSON).segments == ["a.b: 1"]
    path.write_text(json.dumps({"items": [{"sku": "X1", "ok": True}, None], "n": 2.5}))
    assert extract_text(path, Modality.JSON).segments == [
        "items.0.sku: X1\nitems.0.ok: true\nitems.1: null\nn: 2.5"
    ]


def test_extract_csv(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("name,price\nWidget,9.99")
    assert extract_text(path, Modality.CSV).segments == ["name: Widget; price: 9.99"]
    path.write_text('name,note\n"Gadget","has, comma"\n,\nBolt,\n')
    assert extract_text(path, Modality.CSV).segments == ["name: Gadget; note: has, comma\nname: Bolt"]


@pytest.mark.parametrize(
    "name, content, modality",
    [
        ("bad.json", "{not json", Modality.JSON),
        ("bad.csv", 'a,b\n"unterminated,x\n', Modality.CSV),
        ("bin.txt", b"\xff\xfe\xfa", Modality.PLAIN_TEXT),
        ("bad.docx", b"PK\x03\x04garbage", Modality.DOCX),
    ],
)
def test_malformed_inputs_raise(tmp_path, name, content, modality):
    path = tmp_path / name
    path.write_bytes(content if isinstance(content, bytes) else content.encode())
    with pytest.raises(ExtractionError):
        extract_text(path, modality)


@pytest.mark.parametrize("modality", [Modality.PDF, Modality.IMAGE, Modality.UNKNOWN])
def test_no_extractor(tmp_path, modality):
    path = tmp_path / "f.bin"
    path.write_bytes(b"%PDF-1.7")
    with pytest.raises(ExtractionError, match="no extractor"):
        extract_text(path, modality)


def test_plugin_registration(tmp_path):
    path = tmp_path / "f.pdf"
    path.write_bytes(b"%PDF-1.7 fake")
    register_extractor("pdf", lambda p, cfg: "Invoice INV-2024\n\nsecond page")
    try:
        assert extract_text(path, Modality.PDF).segments == ["Invoice INV-2024\n\nsecond page"]
    finally:
        register_extractor(Modality.PDF, None)
    with pytest.raises(ExtractionError):
        extract_text(path, Modality.PDF)


_W_NS = "http://schemas.openxmlformats.org/wordprocessingml/2006/main"
_S_NS = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
_R_NS = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
_P_NS = "http://schemas.openxmlformats.org/package/2006/relationships"


def make_docx(path, paragraphs):
    body = "".join(f"<w:p><w:r><w:t>{p}</w:t></w:r></w:p>" for p in paragraphs)
    with zipfile.ZipFile(path, "w") as zf:
        zf.writestr("word/document.xml", f'<w:document xmlns:w="{_W_NS}"><w:body>{body}</w:body></w:document>')


def make_xlsx(path, sheets):
    with zipfile.ZipFile(path, "w") as zf:
        entries, rels = [], []
        for i, (name, rows) in enumerate(sheets, 1):
            entries.append(f'<sheet name="{name}" sheetId="{i}" r:id="rId{i}"/>')
            rels.append(f'<Relationship Id="rId{i}" Target="worksheets/sheet{i}.xml"/>')
            xml_rows = "".join(
                "<row>" + "".join(f'<c t="inlineStr"><is><t>{v}</t></is></c>' for v in row) + "</row>"
                for row in rows
            )
            zf.writestr(f"xl/worksheets/sheet{i}.xml", f'<worksheet xmlns="{_S_NS}"><sheetData>{xml_rows}</sheetData></worksheet>')
        zf.writestr("xl/workbook.xml", f'<workbook xmlns="{_S_NS}" xmlns:r="{_R_NS}"><sheets>{"".join(entries)}</sheets></workbook>')
        zf.writestr("xl/_rels/workbook.xml.rels", f'<Relationships xmlns="{_P_NS}">{"".join(rels)}</Relationships>')


def test_docx_and_xlsx(tmp_path):
    doc = tmp_path / "memo.docx"
    make_docx(doc, ["First paragraph.", "Second one."])
    with open(doc, "rb") as f:
        assert detect_modality(f.read(512), ".docx") is Modality.DOCX
    assert extract_text(doc, Modality.DOCX).segments == ["First paragraph.\n\nSecond one."]

    book = tmp_path / "book.xlsx"
    make_xlsx(book, [("Q1", [["item", "qty"], ["bolt", "4"]]), ("Q2", [["item", "qty"], ["nut", ""]])])
    assert extract_text(book, Modality.TABULAR_SPREADSHEET).segments == [
        "sheet: Q1\nitem: bolt; qty: 4\nsheet: Q2\nitem: nut"
    ]


# -- signatures ------------------------------------------------------------------


def test_signature_vectors(tmp_path):
    empty, abc, other = tmp_path / "e", tmp_path / "abc", tmp_path / "abc2"
    empty.write_bytes(b"")
    abc.write_bytes(b"abc")
    other.write_bytes(b"abc")
    assert compute_file_signature(empty).hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    assert compute_file_signature(abc).hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    assert compute_file_signature(other) == compute_file_signature(abc)
    with pytest.raises(OSError):
        compute_file_signature(tmp_path / "missing")


def test_signature_streams_multi_chunk_files(tmp_path):
    data = os.urandom((1 << 20) * 2 + 12345)
    path = tmp_path / "big"
    path.write_bytes(data)
    assert compute_file_signature(path) == hashlib.sha256(data).digest()


# -- globs --------------------------------------------------------------------


@pytest.mark.parametrize(
    "pattern, path, matches",
    [
        ("*.txt", "a.txt", True),
        ("*.txt", "sub/a.txt", False),
        ("**/*.txt", "sub/deep/a.txt", True),
        ("**/*.txt", "a.txt", True),
        ("docs/**", "docs/x/y.md", True),
        ("?.md", "a.md", True),
        ("?.md", "ab.md", False),
        ("[ab].csv", "b.csv", True),
        ("[!ab].csv", "b.csv", False),
    ],
)
def test_glob_to_regex(pattern, path, matches):
    assert bool(glob_to_regex(pattern).match(path)) is matches


# -- sync -------------------------------------------------------------------------


def write_tree(root, files):
    for rel, content in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)


@pytest.fixture
def corpus(tmp_path):
    root = tmp_path / "docs"
    files = {f"f{i:02d}.txt": f"document number {i} about topic{i % 5}" for i in range(20)}
    files["sub/notes.md"] = "# Notes\n\nmarkdown body"
    files["sub/data.json"] = '{"k": "v"}'
    write_tree(root, files)
    return root


def test_cold_sync_and_idempotent_resync(kb, corpus):
    report = sync_directory(kb, corpus)
    assert (report.scanned, report.added, report.updated, report.skipped) == (22, 22, 0, 0)
    assert report.failed == [] and kb.stats().documents == 22
    assert kb.get_document("sub/notes.md").modality is Modality.MARKDOWN
    assert kb.get_document("sub/data.json").modality is Modality.JSON

    generation, commits = kb.generation, kb.commit_count
    again = sync_directory(kb, corpus)
    assert (again.added, again.updated, again.skipped) == (0, 0, 22)
    assert kb.generation == generation and kb.commit_count == commits  # no region writes


def test_modify_seven_files(kb, corpus):
    sync_directory(kb, corpus)
    changed = [f"f{i:02d}.txt" for i in (1, 3, 4, 8, 11, 15, 19)]
    for rel in changed:
        (corpus / rel).write_text("rewritten content")
    commits = kb.commit_count
    report = sync_directory(kb, corpus)
    assert (report.added, report.updated, report.skipped) == (0, 7, 15)
    assert kb.commit_count - commits == report.added + report.updated
    for rel in changed:
        assert kb.get_document(rel).signature == compute_file_signature(corpus / rel)


def test_touch_without_content_change_is_skipped(kb, corpus):
    sync_directory(kb, corpus)
    os.utime(corpus / "f00.txt", (time.time() + 100, time.time() + 100))
    assert sync_directory(kb, corpus).skipped == 22


def test_prune(kb, corpus):
    sync_directory(kb, corpus)
    (corpus / "f00.txt").unlink()
    kept = sync_directory(kb, corpus)
    assert kept.removed == 0 and kb.get_document("f00.txt") is not None
    pruned = sync_directory(kb, corpus, SyncConfig(prune=True))
    assert pruned.removed == 1 and kb.get_document("f00.txt") is None
    # a filtered-out file is not "gone"
    filtered = sync_directory(kb, corpus, SyncConfig(prune=True, include_globs=("sub/**",)))
    assert filtered.removed == 0 and kb.stats().documents == 21


def test_failures_do_not_abort(kb, corpus):
    (corpus / "broken.json").write_text('{"a": ')
    (corpus / "scan.pdf").write_bytes(b"%PDF-1.7 binary")
    (corpus / "pic.png").write_bytes(b"\x89PNG\r\n\x1a\n")
    report = sync_directory(kb, corpus)
    assert report.added == 22 and report.scanned == 25
    reasons = dict(report.failed)
    assert set(reasons) == {"broken.json", "scan.pdf", "pic.png"}
    assert "malformed JSON" in reasons["broken.json"]
    assert "no extractor" in reasons["pic.png"]
    assert json.loads(report.to_json())["failed"][0] == ["broken.json", reasons["broken.json"]]
    # fixed file is picked up next pass
    (corpus / "broken.json").write_text('{"a": 1}')
    assert sync_directory(kb, corpus).added == 1


def test_include_exclude_and_hidden(kb, corpus):
    (corpus / ".hidden.txt").write_text("secret")
    write_tree(corpus, {".git/config": "x"})
    config = SyncConfig(include_globs=("**/*.txt", "**/*.md"), exclude_globs=("f1*",))
    report = sync_directory(kb, corpus, config)
    paths = {d.source_path for d in kb.documents()}
    assert report.scanned == len(paths) == 11  # f00-f09 plus notes.md
    assert "sub/notes.md" in paths and not any(p.startswith(("f1", ".")) for p in paths)
    report = sync_directory(kb, corpus, SyncConfig(include_hidden=True))
    assert {".hidden.txt", ".git/config"} <= {d.source_path for d in kb.documents()}


def test_container_inside_root_is_ignored(tmp_path):
    from kfc import create_container

    root = tmp_path / "docs"
    write_tree(root, {"a.txt": "alpha"})
    with create_container(root / "kb.kfc") as handle:
        report = sync_directory(handle, root)
        assert report.scanned == 1 and report.failed == []
        assert sync_directory(handle, root).skipped == 1


def test_missing_root(kb, tmp_path):
    with pytest.raises(NotADirectoryError):
        sync_directory(kb, tmp_path / "nope")


def test_segment_limit_applies_during_sync(kb, tmp_path):
    root = tmp_path / "docs"
    write_tree(root, {"long.txt": "\n\n".join(_paragraphs(30))})
    sync_directory(kb, root, SyncConfig(extract=ExtractConfig(max_segment_chars=500)))
    segs = kb.segments()
    assert len(segs) > 10 and all(s.char_count <= 500 for s in segs)
    assert [s.ordinal for s in segs] == list(range(len(segs)))


# -- watch ------------------------------------------------------------------------


def test_watch_passes(kb, corpus):
    sync_directory(kb, corpus)
    reports = list(watch_directory(kb, corpus, interval=0.01, max_passes=3))
    assert len(reports) == 3 and all(r.added == 0 for r in reports)


def test_watch_sees_new_file_between_passes(kb, corpus):
    passes = watch_directory(kb, corpus, interval=0.01, max_passes=2)
    first = next(passes)
    assert first.added == 22
    (corpus / "new.txt").write_text("fresh")
    second = next(passes)
    assert second.added == 1 and second.skipped == 22
    assert list(passes) == []


def test_watch_stop_during_sleep(kb, corpus):
    stop = threading.Event()
    reports = []

    def run():
        for r in watch_directory(kb, corpus, interval=30.0, stop=stop):
            reports.append(r)

    worker = threading.Thread(target=run)
    start = time.monotonic()
    worker.start()
    while not reports:
        time.sleep(0.01)
    stop.set()
    worker.join(5)
    assert not worker.is_alive() and time.monotonic() - start < 5
    assert len(reports) == 1
