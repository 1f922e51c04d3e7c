import hashlib

import pytest

from kfc import create_container
from kfc.bench import (
    BenchReport,
    CorpusSpec,
    default_injections,
    default_query_set,
    generate_corpus,
    run_rq1,
    run_rq2,
    run_rq3,
    scan_manifest,
)
from kfc.bench.corpus import ENTITY_RE, EXEMPLAR_ENTITY, SplitMix64
from kfc.bench.harness import mutate_files
from kfc.bench.words import BUSINESS, TECHNICAL
from kfc.errors import BenchmarkError
from kfc.ingest import sync_directory

from oracles import nearest_rank


def digests(root):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(root.iterdir())}


def test_splitmix_reference_values():
    # first outputs for seed 0, from the published SplitMix64 reference
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_splitmix_bounds():
    rng = SplitMix64(5)
    draws = [rng.below(7) for _ in range(2000)]
    assert set(draws) == set(range(7))
    assert all(0.0 <= rng.unit() < 1.0 for _ in range(1000))
    with pytest.raises(ValueError):
        rng.below(0)


def test_word_pools_are_distinct_lowercase_words():
    for pool in (BUSINESS, TECHNICAL):
        assert len(pool) == len(set(pool)) >= 400
        assert all(w.isalpha() and w.islower() for w in pool)


def test_corpus_is_deterministic(tmp_path):
    spec = CorpusSpec(n_docs=30, seed=123, entity_injections=default_injections(30, 5))
    generate_corpus(spec, tmp_path / "a")
    generate_corpus(spec, tmp_path / "b")
    assert digests(tmp_path / "a") == digests(tmp_path / "b")
    generate_corpus(CorpusSpec(n_docs=30, seed=124), tmp_path / "c")
    assert digests(tmp_path / "a") != digests(tmp_path / "c")


def test_entities_appear_only_in_target(tmp_path):
    injections = default_injections(1000, 20)
    assert injections[0] == EXEMPLAR_ENTITY and len(injections) == 20
    spec = CorpusSpec(n_docs=600, entity_injections=default_injections(600, 20))
    manifest = generate_corpus(spec, tmp_path / "c")
    assert len(manifest) == 600
    tagged = {e.path: e.entity for e in manifest if e.entity}
    assert tagged["doc_500.txt"] == "UNIQUE_INVOICE_CODE_XYZ_999"
    assert len(tagged) == 20
    for path in sorted((tmp_path / "c").iterdir()):
        text = path.read_text()
        found = ENTITY_RE.findall(text)
        assert found == ([tagged[path.name]] if path.name in tagged else [])
    assert scan_manifest(tmp_path / "c") == manifest


def test_entity_in_middle_of_document(tmp_path):
    spec = CorpusSpec(n_docs=3, entity_injections=((1, "UNIQUE_TEST_CODE_ABC_123"),))
    generate_corpus(spec, tmp_path / "c")
    text = (tmp_path / "c" / "doc_1.txt").read_text()
    pos = text.index("UNIQUE_TEST_CODE_ABC_123") / len(text)
    assert 0.2 < pos < 0.8


def test_corpus_edge_cases(tmp_path):
    assert generate_corpus(CorpusSpec(n_docs=0), tmp_path / "empty") == []
    (tmp_path / "busy").mkdir()
    (tmp_path / "busy" / "x").write_text("x")
    with pytest.raises(FileExistsError):
        generate_corpus(CorpusSpec(n_docs=1), tmp_path / "busy")
    with pytest.raises(ValueError):
        CorpusSpec(n_docs=2, entity_injections=((5, "UNIQUE_TEST_CODE_ABC_123"),))
    with pytest.raises(ValueError):
        CorpusSpec(n_docs=2, entity_injections=((0, "lowercase_code"),))


def test_mutate_files_is_deterministic(tmp_path):
    for name in ("a", "b"):
        generate_corpus(CorpusSpec(n_docs=20), tmp_path / name)
    first = mutate_files(tmp_path / "a", 5, seed=3)
    second = mutate_files(tmp_path / "b", 5, seed=3)
    assert first == second and len(set(first)) == 5
    assert digests(tmp_path / "a") == digests(tmp_path / "b")
    with pytest.raises(ValueError):
        mutate_files(tmp_path / "a", 21)


@pytest.fixture
def small(tmp_path):
    spec = CorpusSpec(n_docs=40, entity_injections=default_injections(40, 6))
    manifest = generate_corpus(spec, tmp_path / "corpus")
    handle = create_container(tmp_path / "kb.kfc")
    yield handle, tmp_path / "corpus", manifest
    handle.close()


def test_rq1_mutate_ten_commits_ten(small):
    handle, corpus, _ = small
    result = run_rq1(handle, corpus, mutate_count=10)
    assert result.incremental_commits == 10 and len(result.mutated) == 10
    assert result.incremental_report.updated == 10 and result.incremental_report.skipped == 30
    assert result.speedup > 0
    with pytest.raises(BenchmarkError, match="fresh container"):
        run_rq1(handle, corpus)


def test_rq1_single_document(tmp_path):
    generate_corpus(CorpusSpec(n_docs=1), tmp_path / "c")
    with create_container(tmp_path / "kb.kfc") as handle:
        result = run_rq1(handle, tmp_path / "c")
    assert result.speedup >= 1.0


def test_rq2_and_rq3(small):
    handle, corpus, manifest = small
    sync_directory(handle, corpus)
    assert run_rq2(handle, manifest) == 1.0
    with pytest.raises(BenchmarkError, match="nothing to measure"):
        run_rq2(handle, [e for e in manifest if not e.entity])

    queries = default_query_set(handle, manifest)
    assert len(queries) == 25 + 20 + 5
    mean, p95 = run_rq3(handle, queries, warmup=0, iterations=2)
    assert p95 >= mean >= 0
    mean_t, p95_t = run_rq3(handle, queries[:10], warmup=0, iterations=1, threads=3)
    assert p95_t >= mean_t >= 0
    with pytest.raises(BenchmarkError):
        run_rq3(handle, queries, iterations=0)
    with pytest.raises(BenchmarkError):
        run_rq3(handle, [])


def test_repeated_query_order_statistics(small):
    handle, corpus, _ = small
    sync_directory(handle, corpus)
    mean, p95 = run_rq3(handle, ["ledger"], warmup=1, iterations=30)
    assert p95 >= mean >= 0


def test_nearest_rank_percentile():
    from kfc.bench.harness import _percentile

    values = [5.0, 1.0, 3.0, 2.0, 4.0] * 7
    assert _percentile(sorted(values), 0.95) == nearest_rank(values, 0.95)
    assert _percentile([1.0], 0.95) == 1.0


def test_report_serialization():
    report = BenchReport(speedup=12.5, recall_at_1=1.0, extras={"n_docs": 3})
    d = report.to_dict()
    assert d["speedup"] == 12.5 and d["extras"] == {"n_docs": 3} and d["cold_seconds"] is None
    table = report.table()
    assert "speedup" in table and "12.5000" in table and "n_docs" in table
