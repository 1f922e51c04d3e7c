from .corpus import (
    EXEMPLAR_ENTITY,
    CorpusSpec,
    ManifestEntry,
    SplitMix64,
    default_injections,
    generate_corpus,
    scan_manifest,
)
from .harness import (
    BenchReport,
    RQ1Result,
    default_query_set,
    mutate_files,
    run_all,
    run_rq1,
    run_rq2,
    run_rq3,
)

__all__ = [
    "EXEMPLAR_ENTITY",
    "BenchReport",
    "CorpusSpec",
    "ManifestEntry",
    "RQ1Result",
    "SplitMix64",
    "default_injections",
    "default_query_set",
    "generate_corpus",
    "mutate_files",
    "run_all",
    "run_rq1",
    "run_rq2",
    "run_rq3",
    "scan_manifest",
]
