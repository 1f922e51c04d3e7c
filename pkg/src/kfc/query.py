"""Hybrid retrieval: TF-IDF cosine plus an exact-substring boost.

    score = alpha * cosine(query, segment) + beta * [query occurs in segment]

Cosine is accumulated over posting lists with idf applied at query time.
The boost is evaluated over every stored segment, not only cosine
candidates, so an entity code made of tokens the index has never seen is
still found. With alpha = beta = 1 any boosted segment scores >= 1 >= any
non-boosted one, and the tie-break puts boosted segments first.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Any

from .container import Container
from .errors import DegenerateWeightsError, EmptyQueryError, QueryError
from .ingest.extract import normalize_text
from .textindex import SparseVector, fold_case, idf, sublinear_tf, tokenize, weighted_norm

SNIPPET_CHARS = 200
_BATCH = 500


@dataclass(frozen=True)
class SearchOptions:
    alpha: float = 1.0
    beta: float = 1.0
    k: int = 10
    collapse_docs: bool = False


@dataclass(frozen=True)
class QueryPlan:
    raw_query: str
    needle: str
    query_vector: SparseVector
    alpha: float
    beta: float
    k: int
    generation: int


@dataclass(frozen=True)
class SearchResult:
    segment_id: int
    doc_id: int
    source_path: str
    score: float
    cosine: float
    boosted: bool
    snippet: str

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _validate(options: SearchOptions) -> None:
    for name in ("alpha", "beta"):
        value = getattr(options, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
            raise QueryError(f"{name} must be a finite non-negative number, got {value!r}")
    if options.alpha == 0 and options.beta == 0:
        raise DegenerateWeightsError("degenerate weights: alpha and beta are both 0")
    if not isinstance(options.k, int) or options.k < 1:
        raise QueryError(f"k must be a positive integer, got {options.k!r}")


def _scoring_cache(handle: Container) -> dict[str, Any]:
    """Per-generation idf and segment-norm caches; must run inside a snapshot."""
    with handle.snapshot() as conn:
        generation = int(
            conn.execute("SELECT value FROM meta WHERE key = 'kf.generation'").fetchone()[0]
        )
        cache = handle.cache
        if cache.get("generation") != generation:
            n = int(conn.execute("SELECT value FROM meta WHERE key = 'kf.segment_count'").fetchone()[0])
            idfs = {tid: idf(n, df) for tid, df in conn.execute("SELECT term_id, df FROM terms")}
            cache.clear()
            cache.update(generation=generation, n=n, idf=idfs, norms={})
        return cache


def build_query_plan(handle: Container, raw_query: str, options: SearchOptions | None = None) -> QueryPlan:
    options = options or SearchOptions()
    _validate(options)
    normalized = normalize_text(raw_query)
    if not normalized:
        raise EmptyQueryError("empty query")
    counts = Counter(tokenize(normalized))

    with handle.snapshot() as conn:
        cache = _scoring_cache(handle)
        known: dict[int, int] = {}
        terms = sorted(counts)
        for start in range(0, len(terms), _BATCH):
            chunk = terms[start : start + _BATCH]
            marks = ",".join("?" * len(chunk))
            for term, tid in conn.execute(
                f"SELECT term, term_id FROM terms WHERE term IN ({marks})", chunk
            ):
                known[tid] = counts[term]

    weights = {tid: sublinear_tf(f) * cache["idf"][tid] for tid, f in known.items()}
    length = math.sqrt(math.fsum(w * w for w in weights.values()))
    entries = tuple((tid, weights[tid] / length) for tid in sorted(weights))
    return QueryPlan(
        raw_query=raw_query,
        needle=fold_case(normalized),
        query_vector=SparseVector(entries),
        alpha=float(options.alpha),
        beta=float(options.beta),
        k=options.k,
        generation=cache["generation"],
    )


def substring_indicator(needle: str, content: str) -> int:
    if not needle:
        raise ValueError("needle must be non-empty")
    return 1 if fold_case(needle) in fold_case(content) else 0


def cosine_accumulate(handle: Container, query_vector: SparseVector) -> dict[int, float]:
    """Cosine of the (unit-length) query against every segment sharing a term with it."""
    if not query_vector.entries:
        return {}
    with handle.snapshot() as conn:
        cache = _scoring_cache(handle)
        idfs = cache["idf"]
        dots: dict[int, float] = {}
        for tid, q_weight in query_vector.entries:
            term_idf = idfs.get(tid)
            if term_idf is None:
                continue
            for segment_id, count in conn.execute(
                "SELECT segment_id, count FROM postings WHERE term_id = ? ORDER BY segment_id",
                (tid,),
            ):
                dots[segment_id] = dots.get(segment_id, 0.0) + q_weight * sublinear_tf(count) * term_idf

        norms = cache["norms"]
        missing = [sid for sid in dots if sid not in norms]
        for start in range(0, len(missing), _BATCH):
            chunk = missing[start : start + _BATCH]
            marks = ",".join("?" * len(chunk))
            for segment_id, blob in conn.execute(
                f"SELECT segment_id, data FROM vectors WHERE segment_id IN ({marks})", chunk
            ):
                norms[segment_id] = weighted_norm(SparseVector.decode(blob), idfs)

    # rounding can push a self-match a hair above 1
    return {sid: min(1.0, dot / norms[sid]) for sid, dot in dots.items()}


def candidate_boost_scan(handle: Container, needle: str) -> set[int]:
    """Every segment in the container whose folded content contains ``needle``."""
    if not needle:
        raise ValueError("needle must be non-empty")
    with handle.snapshot() as conn:
        rows = conn.execute(
            "SELECT segment_id FROM segments WHERE kf_contains(content, ?)", (fold_case(needle),)
        ).fetchall()
    return {r[0] for r in rows}


def _snippet(content: str, needle: str, boosted: bool) -> str:
    if not boosted:
        return content[:SNIPPET_CHARS]
    pos = fold_case(content).find(needle)
    if pos < 0:
        return content[:SNIPPET_CHARS]
    start = max(0, pos + len(needle) // 2 - SNIPPET_CHARS // 2)
    end = min(len(content), start + SNIPPET_CHARS)
    start = max(0, end - SNIPPET_CHARS)
    return content[start:end]


def _fetch_rows(conn, segment_ids: list[int], columns: str) -> dict[int, tuple]:
    out: dict[int, tuple] = {}
    for start in range(0, len(segment_ids), _BATCH):
        chunk = segment_ids[start : start + _BATCH]
        marks = ",".join("?" * len(chunk))
        for row in conn.execute(
            f"SELECT s.segment_id, {columns} FROM segments s JOIN documents d USING (doc_id) "
            f"WHERE s.segment_id IN ({marks})",
            chunk,
        ):
            out[row[0]] = row[1:]
    return out


def search(
    handle: Container,
    raw_query: str,
    options: SearchOptions | None = None,
    **overrides: Any,
) -> list[SearchResult]:
    """Rank segments for ``raw_query``; keyword overrides patch ``options``.

    Ties on score go to boosted segments, then higher cosine, then lower
    segment_id, so the ranking is fully deterministic.
    """
    options = options or SearchOptions()
    if overrides:
        options = SearchOptions(**{**asdict(options), **overrides})

    with handle.snapshot() as conn:
        plan = build_query_plan(handle, raw_query, options)
        cosines = cosine_accumulate(handle, plan.query_vector)
        boosted = candidate_boost_scan(handle, plan.needle)

        ranked = []
        for sid in cosines.keys() | boosted:
            cos = cosines.get(sid, 0.0)
            hit = sid in boosted
            score = plan.alpha * cos + plan.beta * (1.0 if hit else 0.0)
            ranked.append((score, hit, cos, sid))
        ranked.sort(key=lambda r: (-r[0], not r[1], -r[2], r[3]))

        if options.collapse_docs:
            owners = _fetch_rows(conn, [r[3] for r in ranked], "s.doc_id")
            seen: set[int] = set()
            best = []
            for r in ranked:
                doc_id = owners[r[3]][0]
                if doc_id not in seen:
                    seen.add(doc_id)
                    best.append(r)
            ranked = best
        ranked = ranked[: plan.k]

        rows = _fetch_rows(conn, [r[3] for r in ranked], "s.doc_id, d.source_path, s.content")

    results = []
    for score, hit, cos, sid in ranked:
        doc_id, source_path, content = rows[sid]
        results.append(
            SearchResult(sid, doc_id, source_path, score, cos, hit, _snippet(content, plan.needle, hit))
        )
    return results
