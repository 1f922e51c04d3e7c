"""Hash-based incremental directory sync.

Every pass walks the tree and hashes each file. Files whose SHA-256 matches
the signature stored in the container are skipped without touching the
container; only new or changed files go through extract -> normalize ->
vectorize -> commit. The number of commits is therefore the number of
changed files, not the size of the tree.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
import unicodedata
from collections.abc import Iterator
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..container import Container
from ..errors import InjectedFault
from ..records import DocumentRecord
from .extract import ExtractConfig, extract_text
from .modality import PREFIX_BYTES, detect_modality

logger = logging.getLogger(__name__)

_CHUNK = 1 << 20
DEFAULT_MAX_FILE_BYTES = 64 * 1024 * 1024


def compute_file_signature(path: str | os.PathLike[str]) -> bytes:
    """SHA-256 of the file's bytes, read in 1 MiB chunks."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        while chunk := f.read(_CHUNK):
            h.update(chunk)
    return h.digest()


def glob_to_regex(pattern: str) -> re.Pattern[str]:
    """Compile a glob over ``/``-separated relative paths.

    ``*`` and ``?`` stay inside one path component, ``**`` crosses them and
    ``**/`` also matches zero directories.
    """
    out = []
    i, n = 0, len(pattern)
    while i < n:
        if pattern.startswith("**/", i):
            out.append("(?:.*/)?")
            i += 3
        elif pattern.startswith("**", i):
            out.append(".*")
            i += 2
        elif pattern[i] == "*":
            out.append("[^/]*")
            i += 1
        elif pattern[i] == "?":
            out.append("[^/]")
            i += 1
        elif pattern[i] == "[" and "]" in pattern[i + 2 :]:
            j = pattern.index("]", i + 2)
            body = pattern[i + 1 : j]
            if body.startswith("!"):
                body = "^" + body[1:]
            out.append("[" + body.replace("\\", "\\\\") + "]")
            i = j + 1
        else:
            out.append(re.escape(pattern[i]))
            i += 1
    return re.compile("".join(out) + r"\Z", re.DOTALL)


@dataclass
class SyncConfig:
    prune: bool = False
    include_globs: tuple[str, ...] = ()
    exclude_globs: tuple[str, ...] = ()
    include_hidden: bool = False
    max_file_bytes: int = DEFAULT_MAX_FILE_BYTES
    extract: ExtractConfig = field(default_factory=ExtractConfig)

    def __post_init__(self) -> None:
        self._include = [glob_to_regex(g) for g in self.include_globs]
        self._exclude = [glob_to_regex(g) for g in self.exclude_globs]

    def wants(self, rel_path: str) -> bool:
        if self._include and not any(p.match(rel_path) for p in self._include):
            return False
        return not any(p.match(rel_path) for p in self._exclude)


@dataclass
class SyncReport:
    scanned: int = 0
    added: int = 0
    updated: int = 0
    skipped: int = 0
    removed: int = 0
    failed: list[tuple[str, str]] = field(default_factory=list)
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["failed"] = [list(pair) for pair in self.failed]
        d["elapsed"] = round(self.elapsed, 3)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _container_files(handle: Container) -> set[Path]:
    main = handle.path.resolve()
    return {main} | {main.with_name(main.name + s) for s in ("-wal", "-shm", "-journal")}


def iter_files(root: Path, config: SyncConfig, ignore: set[Path] = frozenset()) -> Iterator[tuple[str, Path]]:
    """Yield ``(relative posix path, absolute path)`` in a stable order."""
    for dirpath, dirnames, filenames in os.walk(root):
        if not config.include_hidden:
            dirnames[:] = [d for d in dirnames if not d.startswith(".")]
        dirnames.sort()
        for name in sorted(filenames):
            if not config.include_hidden and name.startswith("."):
                continue
            full = Path(dirpath, name)
            if not full.is_file() or full.resolve() in ignore:
                continue
            rel = unicodedata.normalize("NFC", full.relative_to(root).as_posix())
            if not config.wants(rel):
                continue
            try:
                if full.stat().st_size > config.max_file_bytes:
                    logger.info("skipping %s: larger than %d bytes", rel, config.max_file_bytes)
                    continue
            except OSError:
                pass
            yield rel, full


def sync_file(handle: Container, rel: str, full: Path, signature: bytes, config: SyncConfig) -> None:
    """Extract, vectorize and commit one file whose signature is already known."""
    with open(full, "rb") as f:
        prefix = f.read(PREFIX_BYTES)
    modality = detect_modality(prefix, full.suffix)
    extracted = extract_text(full, modality, config.extract)
    for note in extracted.warnings:
        logger.debug("%s: %s", rel, note)
    if compute_file_signature(full) != signature:
        raise OSError("file changed while being indexed")
    record = DocumentRecord(rel, signature, full.stat().st_size, modality)
    handle.commit_document(record, extracted.segments)


def sync_directory(
    handle: Container, root: str | os.PathLike[str], config: SyncConfig | None = None
) -> SyncReport:
    config = config or SyncConfig()
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(f"{root}: sync root is not a readable directory")
    os.scandir(root).close()  # surfaces PermissionError up front

    start = time.perf_counter()
    report = SyncReport()
    stored = handle.signatures()
    seen: set[str] = set()

    for rel, full in iter_files(root, config, _container_files(handle)):
        report.scanned += 1
        seen.add(rel)
        try:
            signature = compute_file_signature(full)
        except OSError as exc:
            report.failed.append((rel, f"unreadable: {exc}"))
            continue
        previous = stored.get(rel)
        if previous == signature:
            report.skipped += 1
            continue
        try:
            sync_file(handle, rel, full, signature, config)
        except InjectedFault:
            raise
        except Exception as exc:  # one bad file must not abort the pass
            logger.warning("failed to index %s: %s", rel, exc)
            report.failed.append((rel, str(exc) or type(exc).__name__))
            continue
        if previous is None:
            report.added += 1
        else:
            report.updated += 1

    if config.prune:
        for rel in sorted(stored.keys() - seen):
            if not (root / rel).is_file() and handle.delete_document(rel):
                report.removed += 1

    report.elapsed = time.perf_counter() - start
    logger.info(
        "sync %s: scanned=%d added=%d updated=%d skipped=%d removed=%d failed=%d in %.3fs",
        root, report.scanned, report.added, report.updated, report.skipped,
        report.removed, len(report.failed), report.elapsed,
    )
    return report


def watch_directory(
    handle: Container,
    root: str | os.PathLike[str],
    config: SyncConfig | None = None,
    interval: float = 2.0,
    stop: threading.Event | None = None,
    max_passes: int | None = None,
) -> Iterator[SyncReport]:
    """Poll ``root`` every ``interval`` seconds, yielding one report per pass.

    Passes never overlap. Setting ``stop`` ends the loop at the next wait,
    without finishing the interval.
    """
    stop = stop or threading.Event()
    passes = 0
    while not stop.is_set():
        yield sync_directory(handle, root, config)
        passes += 1
        if max_passes is not None and passes >= max_passes:
            return
        if stop.wait(interval):
            return
