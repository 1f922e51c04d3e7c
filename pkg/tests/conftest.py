from __future__ import annotations

import hashlib

import pytest

from kfc import DocumentRecord, create_container

ACCEPTANCE_LINES: list[str] = []


def record(path: str, payload: bytes | str = b"", size: int | None = None) -> DocumentRecord:
    if isinstance(payload, str):
        payload = payload.encode()
    return DocumentRecord(
        source_path=path,
        signature=hashlib.sha256(payload or path.encode()).digest(),
        size_bytes=len(payload) if size is None else size,
    )


@pytest.fixture
def kb(tmp_path):
    handle = create_container(tmp_path / "kb.kfc")
    yield handle
    handle.close()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
