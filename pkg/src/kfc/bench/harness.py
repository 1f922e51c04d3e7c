"""Benchmark harness: ingestion speedup, entity recall and query latency.

Each run checks its own correctness (report counts, commit counts, rank-1
hits) before any timing is accepted; a failed check raises
:class:`~kfc.errors.BenchmarkError` instead of returning numbers.
"""

from __future__ import annotations

import json
import math
import os
import statistics
import threading
import time
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..container import Container, create_container, open_container
from ..errors import BenchmarkError
from ..ingest.sync import SyncReport, sync_directory
from ..query import SearchOptions, search
from .corpus import CorpusSpec, ManifestEntry, SplitMix64, default_injections, generate_corpus


@dataclass
class RQ1Result:
    cold_seconds: float
    incremental_seconds: float
    speedup: float
    cold_docs_per_sec: float
    mutated: list[str]
    cold_report: SyncReport
    incremental_report: SyncReport
    incremental_commits: int


@dataclass
class BenchReport:
    cold_seconds: float | None = None
    incremental_seconds: float | None = None
    speedup: float | None = None
    cold_docs_per_sec: float | None = None
    recall_at_1: float | None = None
    mean_query_ms: float | None = None
    p95_query_ms: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def table(self) -> str:
        rows = [(k, v) for k, v in self.to_dict().items() if k != "extras"]
        rows += sorted(self.extras.items())
        width = max(len(k) for k, _ in rows)
        out = []
        for key, value in rows:
            if isinstance(value, float):
                value = f"{value:.4f}"
            out.append(f"{key:<{width}}  {'-' if value is None else value}")
        return "\n".join(out)


def mutate_files(corpus_dir: str | os.PathLike[str], count: int, seed: int = 99) -> list[str]:
    """Append a revision line to ``count`` distinct ``.txt`` files, chosen by seed."""
    root = Path(corpus_dir)
    names = sorted(p.relative_to(root).as_posix() for p in root.rglob("*.txt"))
    if count > len(names):
        raise ValueError(f"cannot mutate {count} of {len(names)} files")
    rng = SplitMix64(seed)
    # partial Fisher-Yates
    for i in range(count):
        j = i + rng.below(len(names) - i)
        names[i], names[j] = names[j], names[i]
    chosen = sorted(names[:count])
    for rel in chosen:
        with open(root / rel, "a", encoding="utf-8", newline="\n") as f:
            f.write(f"\nRevision note {seed} for {rel}.\n")
    return chosen


def run_rq1(handle: Container, corpus_dir: str | os.PathLike[str], mutate_count: int = 0, seed: int = 99) -> RQ1Result:
    """Cold sync, optional mutation of ``mutate_count`` files, then a timed re-sync."""
    if handle.stats().documents:
        raise BenchmarkError("rq1 needs a fresh container")

    start = time.perf_counter()
    cold = sync_directory(handle, corpus_dir)
    cold_seconds = time.perf_counter() - start
    if cold.failed or cold.added != cold.scanned or cold.added == 0:
        raise BenchmarkError(f"cold sync invalid: {cold.to_dict()}")

    mutated = mutate_files(corpus_dir, mutate_count, seed) if mutate_count else []
    commits_before = handle.commit_count
    start = time.perf_counter()
    incremental = sync_directory(handle, corpus_dir)
    incremental_seconds = time.perf_counter() - start
    commits = handle.commit_count - commits_before

    expected = (0, len(mutated), cold.added - len(mutated))
    got = (incremental.added, incremental.updated, incremental.skipped)
    if got != expected or incremental.failed or commits != len(mutated):
        raise BenchmarkError(
            f"incremental sync invalid: expected added/updated/skipped={expected}, got {got}, "
            f"commits={commits}"
        )
    return RQ1Result(
        cold_seconds=cold_seconds,
        incremental_seconds=incremental_seconds,
        speedup=cold_seconds / incremental_seconds,
        cold_docs_per_sec=cold.added / cold_seconds,
        mutated=mutated,
        cold_report=cold,
        incremental_report=incremental,
        incremental_commits=commits,
    )


def run_rq2(
    handle: Container, manifest: Sequence[ManifestEntry], options: SearchOptions | None = None
) -> float:
    """Fraction of injected entity codes whose rank-1 hit is the right document."""
    probes = [e for e in manifest if e.entity]
    if not probes:
        raise BenchmarkError("nothing to measure: manifest has no injected entities")
    options = options or SearchOptions()
    hits = 0
    for entry in probes:
        results = search(handle, entry.entity, options)
        if results and results[0].source_path == entry.path:
            hits += 1
    return hits / len(probes)


def default_query_set(handle: Container, manifest: Sequence[ManifestEntry]) -> list[str]:
    """25 common-word pairs, 20 rare single words and up to 5 entity codes."""
    with handle.snapshot() as conn:
        common = [r[0] for r in conn.execute("SELECT term FROM terms ORDER BY df DESC, term LIMIT 50")]
        rare = [r[0] for r in conn.execute("SELECT term FROM terms ORDER BY df ASC, term LIMIT 20")]
    queries = [f"{common[i]} {common[i + 25]}" for i in range(min(25, len(common) - 25))]
    queries += rare
    queries += [e.entity for e in manifest if e.entity][:5]
    return queries


def _percentile(sorted_values: Sequence[float], q: float) -> float:
    rank = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[rank - 1]


def run_rq3(
    handle: Container,
    queries: Sequence[str],
    warmup: int = 1,
    iterations: int = 1,
    threads: int = 1,
) -> tuple[float, float]:
    """Mean and p95 in-process ``search`` latency in milliseconds.

    ``warmup`` and ``iterations`` count passes over ``queries``. With
    ``threads > 1`` each thread runs the passes on its own read-only handle.
    """
    if iterations < 1:
        raise BenchmarkError("iterations must be >= 1")
    if not queries:
        raise BenchmarkError("empty query set")

    def timed(h: Container, sink: list[float]) -> None:
        for _ in range(warmup):
            for q in queries:
                search(h, q)
        for _ in range(iterations):
            for q in queries:
                t0 = time.perf_counter()
                search(h, q)
                sink.append((time.perf_counter() - t0) * 1000.0)

    latencies: list[float] = []
    if threads <= 1:
        timed(handle, latencies)
    else:
        sinks: list[list[float]] = [[] for _ in range(threads)]
        readers = [open_container(handle.path, "read-only") for _ in range(threads)]
        workers = [threading.Thread(target=timed, args=(r, s)) for r, s in zip(readers, sinks)]
        try:
            for w in workers:
                w.start()
            for w in workers:
                w.join()
        finally:
            for r in readers:
                r.close()
        latencies = [x for s in sinks for x in s]
        if len(latencies) != threads * iterations * len(queries):
            raise BenchmarkError("a reader thread failed")
    latencies.sort()
    return statistics.fmean(latencies), _percentile(latencies, 0.95)


def run_all(
    workdir: str | os.PathLike[str],
    spec: CorpusSpec | None = None,
    mutate_count: int = 0,
    threads: int = 1,
) -> BenchReport:
    """Generate a corpus in ``workdir`` and run the three experiments against it."""
    workdir = Path(workdir)
    spec = spec or CorpusSpec(entity_injections=default_injections())
    corpus_dir = workdir / "corpus"
    manifest = generate_corpus(spec, corpus_dir)
    raw_bytes = sum((corpus_dir / e.path).stat().st_size for e in manifest)

    with create_container(workdir / "bench.kfc") as handle:
        rq1 = run_rq1(handle, corpus_dir, mutate_count)
        recall = run_rq2(handle, manifest)
        recall_no_boost = run_rq2(handle, manifest, SearchOptions(beta=0.0))
        mean_ms, p95_ms = run_rq3(handle, default_query_set(handle, manifest), threads=threads)
        file_bytes = handle.stats().file_bytes

    return BenchReport(
        cold_seconds=rq1.cold_seconds,
        incremental_seconds=rq1.incremental_seconds,
        speedup=rq1.speedup,
        cold_docs_per_sec=rq1.cold_docs_per_sec,
        recall_at_1=recall,
        mean_query_ms=mean_ms,
        p95_query_ms=p95_ms,
        extras={
            "n_docs": spec.n_docs,
            "probes": sum(1 for e in manifest if e.entity),
            "recall_at_1_beta0": recall_no_boost,
            "container_bytes": file_bytes,
            "raw_text_bytes": raw_bytes,
            "container_overhead_ratio": file_bytes / raw_bytes if raw_bytes else None,
        },
    )
