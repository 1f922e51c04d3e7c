"""Single-file knowledge container.

All retrieval state lives in one SQLite database file run in WAL mode: one
serialized writer, any number of snapshot readers. The file holds four
logical regions:

    M  ``documents``           provenance: path, SHA-256, timestamps, modality
    C  ``segments``            normalized text segments
    V  ``vectors``             encoded sublinear-tf sparse vectors, one per segment
    I  ``terms`` + ``postings`` vocabulary with df counters and posting lists

Each document is committed in one transaction, so a reader (or a reopen after
a crash) sees either the whole document or none of it.
"""

from __future__ import annotations

import logging
import os
import sqlite3
import threading
import time
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any
from urllib.parse import quote

from . import errors
from .records import (
    ContainerStats,
    DocumentRecord,
    Modality,
    PostingList,
    SegmentRecord,
    VocabEntry,
)
from .textindex import (
    IdfTable,
    SparseVector,
    apply_index_delta,
    build_document_vector,
    contains_folded,
    tokenize,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = range(1, FORMAT_VERSION + 1)
APPLICATION_ID = 0x4B464331  # b"KFC1"
FORMAT_KEY = "kf.format_version"

_MODALITIES = ", ".join(f"'{m.value}'" for m in Modality)

# Foreign keys are deferred so a replacement commit can drop old rows and
# insert new ones in any order; they are checked at COMMIT.
_SCHEMA = f"""
CREATE TABLE meta (
    key   TEXT PRIMARY KEY,
    value TEXT NOT NULL
) WITHOUT ROWID;

CREATE TABLE documents (
    doc_id      INTEGER PRIMARY KEY AUTOINCREMENT,
    source_path TEXT NOT NULL UNIQUE,
    signature   BLOB NOT NULL CHECK (length(signature) = 32),
    ingested_at INTEGER NOT NULL,
    size_bytes  INTEGER NOT NULL CHECK (size_bytes >= 0),
    modality    TEXT NOT NULL CHECK (modality IN ({_MODALITIES}))
);

CREATE TABLE segments (
    segment_id INTEGER PRIMARY KEY AUTOINCREMENT,
    doc_id     INTEGER NOT NULL
               REFERENCES documents(doc_id) DEFERRABLE INITIALLY DEFERRED,
    ordinal    INTEGER NOT NULL CHECK (ordinal >= 0),
    content    TEXT NOT NULL CHECK (length(content) > 0),
    char_count INTEGER NOT NULL CHECK (char_count = length(content)),
    UNIQUE (doc_id, ordinal)
);

CREATE TABLE vectors (
    segment_id INTEGER PRIMARY KEY
               REFERENCES segments(segment_id) DEFERRABLE INITIALLY DEFERRED,
    data       BLOB NOT NULL
);

CREATE TABLE terms (
    term_id INTEGER PRIMARY KEY AUTOINCREMENT,
    term    TEXT NOT NULL UNIQUE,
    df      INTEGER NOT NULL CHECK (df >= 0)
);

CREATE TABLE postings (
    term_id    INTEGER NOT NULL
               REFERENCES terms(term_id) DEFERRABLE INITIALLY DEFERRED,
    segment_id INTEGER NOT NULL
               REFERENCES segments(segment_id) DEFERRABLE INITIALLY DEFERRED,
    count      INTEGER NOT NULL CHECK (count >= 1),
    PRIMARY KEY (term_id, segment_id)
) WITHOUT ROWID;
"""

_WRITE_VERBS = ("INSERT", "UPDATE", "DELETE")


class _WriteTxn:
    """Connection proxy used inside a write transaction.

    Counts region writes so the fault-injection hook can interrupt a commit
    between any two of them.
    """

    def __init__(self, handle: Container, conn: sqlite3.Connection) -> None:
        self._handle = handle
        self._conn = conn
        self.dirty = False

    def _tick(self, sql: str) -> None:
        if sql.lstrip()[:6].upper() in _WRITE_VERBS:
            self.dirty = True
            self._handle._region_write()

    def execute(self, sql: str, params: Sequence[Any] = ()) -> sqlite3.Cursor:
        cur = self._conn.execute(sql, params)
        self._tick(sql)
        return cur

    def executemany(self, sql: str, seq: Any) -> sqlite3.Cursor:
        cur = self._conn.executemany(sql, seq)
        self._tick(sql)
        return cur


class _SqlVocabulary:
    """Term registry backed by the ``terms`` table of an open write transaction."""

    def __init__(self, txn: _WriteTxn) -> None:
        self._txn = txn
        self._ids: dict[str, int] = {}

    def term_id(self, term: str) -> int:
        tid = self._ids.get(term)
        if tid is None:
            row = self._txn.execute("SELECT term_id FROM terms WHERE term = ?", (term,)).fetchone()
            if row is None:
                cur = self._txn.execute("INSERT INTO terms (term, df) VALUES (?, 0)", (term,))
                tid = cur.lastrowid
            else:
                tid = row[0]
            self._ids[term] = tid
        return tid


def _connect(path: Path, read_only: bool) -> sqlite3.Connection:
    if read_only:
        uri = f"file:{quote(str(path.resolve()))}?mode=ro"
        conn = sqlite3.connect(uri, uri=True, isolation_level=None, check_same_thread=False)
    else:
        conn = sqlite3.connect(str(path), isolation_level=None, check_same_thread=False)
    conn.execute("PRAGMA busy_timeout = 10000")
    conn.execute("PRAGMA foreign_keys = ON")
    conn.create_function("kf_contains", 2, contains_folded, deterministic=True)
    return conn


def _read_version(conn: sqlite3.Connection, path: Path) -> int:
    try:
        app_id = conn.execute("PRAGMA application_id").fetchone()[0]
        row = None
        if app_id == APPLICATION_ID:
            row = conn.execute("SELECT value FROM meta WHERE key = ?", (FORMAT_KEY,)).fetchone()
    except sqlite3.DatabaseError as exc:
        raise errors.ForeignFileError(f"{path}: not a knowledge container ({exc})") from exc
    if row is None:
        raise errors.ForeignFileError(f"{path}: not a knowledge container")
    try:
        version = int(row[0])
    except ValueError as exc:
        raise errors.ForeignFileError(f"{path}: malformed format version {row[0]!r}") from exc
    if version not in SUPPORTED_VERSIONS:
        raise errors.UnsupportedVersionError(
            f"{path}: unsupported version {version} (this build reads "
            f"{SUPPORTED_VERSIONS.start}..{SUPPORTED_VERSIONS.stop - 1})"
        )
    return version


class Container:
    """Open handle on a knowledge container file.

    Use :func:`create_container` / :func:`open_container` rather than the
    constructor. A read-write handle serializes its own mutations; read-only
    handles may be shared between threads.
    """

    def __init__(self, path: Path, conn: sqlite3.Connection, read_only: bool, version: int) -> None:
        self.path = path
        self.read_only = read_only
        self.format_version = version
        self._conn = conn
        self._lock = threading.RLock()
        self._depth = 0
        self._fault_after: int | None = None
        self._fault_action = "raise"
        self._writes = 0
        self.commit_count = 0
        # scratch space for query-time caches, keyed by index generation
        self.cache: dict[str, Any] = {}

    @property
    def mode(self) -> str:
        return "read-only" if self.read_only else "read-write"

    def __repr__(self) -> str:
        return f"<Container {str(self.path)!r} {self.mode} v{self.format_version}>"

    def __enter__(self) -> Container:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def close(self) -> None:
        with self._lock:
            if self._conn is not None:
                self._conn.close()
                self._conn = None

    @property
    def closed(self) -> bool:
        return self._conn is None

    def _check_open(self) -> sqlite3.Connection:
        if self._conn is None:
            raise errors.ContainerError(f"{self.path}: handle is closed")
        return self._conn

    # -- transactions -------------------------------------------------------

    @contextmanager
    def snapshot(self) -> Iterator[sqlite3.Connection]:
        """Read transaction: every query inside sees one committed state."""
        with self._lock:
            conn = self._check_open()
            outer = self._depth == 0
            if outer:
                conn.execute("BEGIN")
                # a deferred BEGIN pins nothing until the first read
                conn.execute("SELECT 1 FROM meta LIMIT 1").fetchall()
            self._depth += 1
            try:
                yield conn
            finally:
                self._depth -= 1
                if outer:
                    conn.execute("COMMIT")

    @contextmanager
    def _write_txn(self) -> Iterator[_WriteTxn]:
        if self.read_only:
            raise errors.ReadOnlyError(f"{self.path}: read-only handle")
        with self._lock:
            conn = self._check_open()
            if self._depth:
                raise errors.ContainerError("write attempted inside a read snapshot")
            conn.execute("BEGIN IMMEDIATE")
            self._writes = 0
            txn = _WriteTxn(self, conn)
            try:
                yield txn
                if not txn.dirty:
                    conn.execute("ROLLBACK")
                    return
                conn.execute(
                    "UPDATE meta SET value = CAST(value AS INTEGER) + 1 WHERE key = 'kf.generation'"
                )
                conn.execute("COMMIT")
            except sqlite3.IntegrityError as exc:
                if conn.in_transaction:
                    conn.execute("ROLLBACK")
                raise errors.IntegrityError(str(exc)) from exc
            except BaseException:
                if conn.in_transaction:
                    conn.execute("ROLLBACK")
                raise

    def inject_fault(self, after_writes: int | None, action: str = "raise") -> None:
        """Arm a one-shot fault after ``after_writes`` region writes of the next commit.

        ``action="raise"`` throws :class:`~kfc.errors.InjectedFault`;
        ``action="exit"`` kills the process on the spot, leaving the
        transaction uncommitted exactly as a crash would.
        """
        if action not in ("raise", "exit"):
            raise ValueError(f"unknown fault action {action!r}")
        self._fault_after = after_writes
        self._fault_action = action

    def _region_write(self) -> None:
        self._writes += 1
        if self._fault_after is not None and self._writes >= self._fault_after:
            self._fault_after = None
            if self._fault_action == "exit":
                os._exit(86)
            raise errors.InjectedFault(f"injected fault after {self._writes} region writes")

    # -- mutations ----------------------------------------------------------

    def commit_document(self, record: DocumentRecord, segments: Sequence[str]) -> int:
        """Store a document and its segments atomically, replacing any older
        version at the same ``source_path``. Segment ordinals follow list order.
        Returns the new doc_id.
        """
        if self.read_only:
            raise errors.ReadOnlyError(f"{self.path}: read-only handle")
        for i, text in enumerate(segments):
            if not isinstance(text, str) or not text:
                raise errors.IntegrityError(f"segment {i} of {record.source_path!r} is empty")
        token_lists = [tokenize(text) for text in segments]
        ingested_at = record.ingested_at or int(time.time())

        with self._write_txn() as txn:
            removed = self._drop_document_rows(txn, record.source_path) or {}
            cur = txn.execute(
                "INSERT INTO documents (source_path, signature, ingested_at, size_bytes, modality) "
                "VALUES (?, ?, ?, ?, ?)",
                (
                    record.source_path,
                    bytes(record.signature),
                    ingested_at,
                    record.size_bytes,
                    Modality(record.modality).value,
                ),
            )
            doc_id = cur.lastrowid
            vocab = _SqlVocabulary(txn)
            added: dict[int, dict[int, int]] = {}
            for ordinal, (text, tokens) in enumerate(zip(segments, token_lists)):
                cur = txn.execute(
                    "INSERT INTO segments (doc_id, ordinal, content, char_count) VALUES (?, ?, ?, ?)",
                    (doc_id, ordinal, text, len(text)),
                )
                segment_id = cur.lastrowid
                vector, raw = build_document_vector(tokens, vocab)
                txn.execute(
                    "INSERT INTO vectors (segment_id, data) VALUES (?, ?)",
                    (segment_id, vector.encode()),
                )
                added[segment_id] = raw
            apply_index_delta(txn, added, removed)
        self.commit_count += 1
        return doc_id

    def delete_document(self, source_path: str) -> bool:
        with self._write_txn() as txn:
            removed = self._drop_document_rows(txn, source_path)
            if removed is None:
                return False
            apply_index_delta(txn, {}, removed)
        return True

    def _drop_document_rows(self, txn: _WriteTxn, source_path: str) -> dict[int, list[int]] | None:
        """Delete the M/C/V rows of a document; return its segments' term ids
        for the index delta, or ``None`` when the path is not stored."""
        row = txn.execute(
            "SELECT doc_id FROM documents WHERE source_path = ?", (source_path,)
        ).fetchone()
        if row is None:
            return None
        doc_id = row[0]
        removed: dict[int, list[int]] = {}
        for segment_id, blob in txn.execute(
            "SELECT s.segment_id, v.data FROM segments s JOIN vectors v USING (segment_id) "
            "WHERE s.doc_id = ?",
            (doc_id,),
        ).fetchall():
            removed[segment_id] = SparseVector.decode(blob).term_ids
        txn.execute(
            "DELETE FROM vectors WHERE segment_id IN "
            "(SELECT segment_id FROM segments WHERE doc_id = ?)",
            (doc_id,),
        )
        txn.execute("DELETE FROM segments WHERE doc_id = ?", (doc_id,))
        txn.execute("DELETE FROM documents WHERE doc_id = ?", (doc_id,))
        return removed

    # -- reads --------------------------------------------------------------

    @property
    def generation(self) -> int:
        with self.snapshot() as conn:
            return int(conn.execute("SELECT value FROM meta WHERE key = 'kf.generation'").fetchone()[0])

    def stats(self) -> ContainerStats:
        with self.snapshot() as conn:
            docs = conn.execute("SELECT count(*) FROM documents").fetchone()[0]
            segs = conn.execute("SELECT count(*) FROM segments").fetchone()[0]
            terms = conn.execute("SELECT count(*) FROM terms").fetchone()[0]
        size = self.path.stat().st_size
        wal = self.path.with_name(self.path.name + "-wal")
        if wal.exists():
            size += wal.stat().st_size
        return ContainerStats(docs, segs, terms, size)

    def signatures(self) -> dict[str, bytes]:
        with self.snapshot() as conn:
            return dict(conn.execute("SELECT source_path, signature FROM documents").fetchall())

    def get_document(self, source_path: str) -> DocumentRecord | None:
        with self.snapshot() as conn:
            row = conn.execute(
                "SELECT source_path, signature, size_bytes, modality, ingested_at, doc_id "
                "FROM documents WHERE source_path = ?",
                (source_path,),
            ).fetchone()
        return None if row is None else _doc_from_row(row)

    def documents(self) -> list[DocumentRecord]:
        with self.snapshot() as conn:
            rows = conn.execute(
                "SELECT source_path, signature, size_bytes, modality, ingested_at, doc_id "
                "FROM documents ORDER BY doc_id"
            ).fetchall()
        return [_doc_from_row(r) for r in rows]

    def segments(self, doc_id: int | None = None) -> list[SegmentRecord]:
        sql = "SELECT segment_id, doc_id, ordinal, content FROM segments"
        params: tuple = ()
        if doc_id is not None:
            sql += " WHERE doc_id = ?"
            params = (doc_id,)
        with self.snapshot() as conn:
            rows = conn.execute(sql + " ORDER BY segment_id", params).fetchall()
        return [SegmentRecord(*r) for r in rows]

    def vectors(self) -> dict[int, SparseVector]:
        with self.snapshot() as conn:
            rows = conn.execute("SELECT segment_id, data FROM vectors ORDER BY segment_id").fetchall()
        return {sid: SparseVector.decode(blob) for sid, blob in rows}

    def vocabulary(self) -> list[VocabEntry]:
        with self.snapshot() as conn:
            rows = conn.execute("SELECT term_id, term, df FROM terms ORDER BY term_id").fetchall()
        return [VocabEntry(*r) for r in rows]

    def posting_list(self, term: str) -> PostingList | None:
        with self.snapshot() as conn:
            row = conn.execute("SELECT term_id FROM terms WHERE term = ?", (term,)).fetchone()
            if row is None:
                return None
            postings = conn.execute(
                "SELECT segment_id, count FROM postings WHERE term_id = ? ORDER BY segment_id",
                (row[0],),
            ).fetchall()
        return PostingList(row[0], tuple(postings))

    def idf_table(self) -> IdfTable:
        with self.snapshot() as conn:
            n = int(conn.execute("SELECT value FROM meta WHERE key = 'kf.segment_count'").fetchone()[0])
            df = dict(conn.execute("SELECT term_id, df FROM terms").fetchall())
        return IdfTable(n, df)


def _doc_from_row(row: tuple) -> DocumentRecord:
    path, sig, size, modality, ingested_at, doc_id = row
    return DocumentRecord(path, bytes(sig), size, Modality(modality), ingested_at, doc_id)


def create_container(path: str | os.PathLike[str]) -> Container:
    """Create an empty container at ``path`` and return a read-write handle.

    Refuses to touch a path that already holds data, container or not.
    """
    path = Path(path)
    if path.exists() and path.stat().st_size > 0:
        try:
            probe = _connect(path, read_only=True)
        except sqlite3.Error as exc:
            raise errors.ForeignFileError(f"{path}: exists and is not a container") from exc
        try:
            _read_version(probe, path)
        except errors.ForeignFileError:
            raise errors.ForeignFileError(f"{path}: exists and is not a container") from None
        except errors.UnsupportedVersionError:
            pass
        finally:
            probe.close()
        raise errors.ContainerExistsError(f"{path}: container already exists")

    try:
        conn = _connect(path, read_only=False)
        conn.execute("PRAGMA journal_mode = WAL")
        conn.execute("PRAGMA synchronous = NORMAL")
        conn.executescript(
            f"BEGIN IMMEDIATE; PRAGMA application_id = {APPLICATION_ID};"
            + _SCHEMA
            + f"INSERT INTO meta (key, value) VALUES ('{FORMAT_KEY}', '{FORMAT_VERSION}'),"
            " ('kf.generation', '0'), ('kf.segment_count', '0'); COMMIT;"
        )
    except sqlite3.Error as exc:
        raise OSError(f"{path}: cannot create container: {exc}") from exc
    logger.debug("created container %s", path)
    return Container(path, conn, read_only=False, version=FORMAT_VERSION)


def open_container(path: str | os.PathLike[str], mode: str = "read-write") -> Container:
    """Open an existing container. ``mode`` is ``"read-only"`` or ``"read-write"``."""
    if mode not in ("read-only", "read-write"):
        raise ValueError(f"mode must be 'read-only' or 'read-write', got {mode!r}")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such container file")
    read_only = mode == "read-only"
    try:
        conn = _connect(path, read_only=read_only)
    except sqlite3.Error as exc:
        raise errors.ForeignFileError(f"{path}: cannot open as container ({exc})") from exc
    try:
        version = _read_version(conn, path)
        if not read_only:
            conn.execute("PRAGMA synchronous = NORMAL")
    except BaseException:
        conn.close()
        raise
    return Container(path, conn, read_only=read_only, version=version)
