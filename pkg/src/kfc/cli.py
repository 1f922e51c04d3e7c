"""Command-line interface.

Exit codes: 0 success, 1 I/O or internal failure, 2 usage or contract error.
The container path comes from ``-c/--container`` or ``$KF_CONTAINER``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sqlite3
import sys
import tempfile
import threading
from contextlib import ExitStack
from pathlib import Path

from . import errors
from .bench import (
    BenchReport,
    CorpusSpec,
    default_injections,
    default_query_set,
    generate_corpus,
    run_all,
    run_rq1,
    run_rq2,
    run_rq3,
    scan_manifest,
)
from .container import create_container, open_container
from .ingest.sync import SyncConfig, sync_directory, watch_directory
from .query import SearchOptions, search

EXIT_OK, EXIT_IO, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args: argparse.Namespace, payload: object, table: str) -> None:
    if args.json:
        print(json.dumps(payload))
    else:
        print(table)


def _container_path(args: argparse.Namespace) -> Path:
    path = getattr(args, "path", None) or args.container
    if not path:
        raise UsageError("no container given: pass -c PATH or set KF_CONTAINER")
    return Path(path)


def _stats_table(stats) -> str:
    return "\n".join(f"{k:<10} {v}" for k, v in vars(stats).items())


def cmd_init(args: argparse.Namespace) -> int:
    with create_container(_container_path(args)) as handle:
        stats = handle.stats()
    _emit(args, vars(stats), _stats_table(stats))
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    with open_container(_container_path(args), "read-only") as handle:
        stats = handle.stats()
    _emit(args, vars(stats), _stats_table(stats))
    return EXIT_OK


def _sync_line(report) -> str:
    d = report.to_dict()
    line = " ".join(f"{k}={d[k]}" for k in ("scanned", "added", "updated", "skipped", "removed"))
    line += f" failed={len(report.failed)} elapsed={d['elapsed']:.3f}s"
    for path, reason in report.failed:
        line += f"\n  failed {path}: {reason}"
    return line


def cmd_sync(args: argparse.Namespace) -> int:
    config = SyncConfig(
        prune=args.prune,
        include_globs=tuple(args.include),
        exclude_globs=tuple(args.exclude),
        include_hidden=args.include_hidden,
    )
    with open_container(_container_path(args), "read-write") as handle:
        if not args.watch:
            report = sync_directory(handle, args.dir, config)
            _emit(args, report.to_dict(), _sync_line(report))
            return EXIT_OK

        stop = threading.Event()
        previous = signal.signal(signal.SIGTERM, lambda *_: stop.set())
        try:
            for report in watch_directory(
                handle, args.dir, config, args.interval, stop, max_passes=args.max_passes
            ):
                _emit(args, report.to_dict(), _sync_line(report))
                sys.stdout.flush()
        except KeyboardInterrupt:
            stop.set()
        finally:
            signal.signal(signal.SIGTERM, previous)
    return EXIT_OK


def _clip(text: str, width: int) -> str:
    text = " ".join(text.split())
    return text if len(text) <= width else text[: width - 3] + "..."


def cmd_query(args: argparse.Namespace) -> int:
    options = SearchOptions(
        alpha=args.alpha, beta=args.beta, k=args.top_k, collapse_docs=args.collapse_docs
    )
    with open_container(_container_path(args), "read-only") as handle:
        results = search(handle, args.text, options)
    if args.json:
        print(json.dumps([r.to_dict() for r in results]))
        return EXIT_OK
    if not results:
        print("no results")
        return EXIT_OK
    print(f"{'rank':>4}  {'score':>8}  {'cosine':>8}  {'boosted':<7}  {'source_path':<24}  snippet")
    for rank, r in enumerate(results, 1):
        print(
            f"{rank:>4}  {r.score:>8.4f}  {r.cosine:>8.4f}  {str(r.boosted).lower():<7}  "
            f"{_clip(r.source_path, 24):<24}  {_clip(r.snippet, 60)}"
        )
    return EXIT_OK


def _bench_spec(args: argparse.Namespace) -> CorpusSpec:
    return CorpusSpec(
        n_docs=args.n_docs,
        seed=args.seed,
        entity_injections=default_injections(args.n_docs, args.probes),
    )


def _emit_bench(args: argparse.Namespace, report: BenchReport) -> None:
    _emit(args, report.to_dict(), report.table())


def cmd_bench_corpus(args: argparse.Namespace) -> int:
    manifest = generate_corpus(_bench_spec(args), args.out)
    payload = {
        "out_dir": str(args.out),
        "documents": len(manifest),
        "entities": [{"path": e.path, "entity": e.entity} for e in manifest if e.entity],
    }
    table = f"wrote {len(manifest)} documents to {args.out}\n" + "\n".join(
        f"  {e['path']:<14} {e['entity']}" for e in payload["entities"]
    )
    _emit(args, payload, table)
    return EXIT_OK


def cmd_bench_rq(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        scratch = Path(stack.enter_context(tempfile.TemporaryDirectory(prefix="kfc-bench-")))
        corpus = Path(args.corpus) if args.corpus else scratch / "corpus"
        if not args.corpus:
            generate_corpus(_bench_spec(args), corpus)
        manifest = scan_manifest(corpus)
        container_path = Path(args.container) if args.container else scratch / "bench.kfc"
        if container_path.exists():
            handle = stack.enter_context(open_container(container_path, "read-write"))
        else:
            handle = stack.enter_context(create_container(container_path))

        report = BenchReport(extras={"n_docs": len(manifest)})
        if args.rq == "rq1":
            rq1 = run_rq1(handle, corpus, args.mutate)
            report.cold_seconds = rq1.cold_seconds
            report.incremental_seconds = rq1.incremental_seconds
            report.speedup = rq1.speedup
            report.cold_docs_per_sec = rq1.cold_docs_per_sec
            report.extras["mutated"] = len(rq1.mutated)
        else:
            if handle.stats().documents == 0:
                sync_directory(handle, corpus)
            if args.rq == "rq2":
                report.recall_at_1 = run_rq2(handle, manifest)
                report.extras["recall_at_1_beta0"] = run_rq2(handle, manifest, SearchOptions(beta=0.0))
                report.extras["probes"] = sum(1 for e in manifest if e.entity)
            else:
                queries = default_query_set(handle, manifest)
                report.mean_query_ms, report.p95_query_ms = run_rq3(
                    handle, queries, args.warmup, args.iterations, args.threads
                )
                report.extras["queries"] = len(queries)
    _emit_bench(args, report)
    return EXIT_OK


def cmd_bench_all(args: argparse.Namespace) -> int:
    with ExitStack() as stack:
        if args.workdir:
            workdir = Path(args.workdir)
        else:
            workdir = Path(stack.enter_context(tempfile.TemporaryDirectory(prefix="kfc-bench-")))
        report = run_all(workdir, _bench_spec(args), args.mutate, args.threads)
    _emit_bench(args, report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c", "--container", default=os.environ.get("KF_CONTAINER"),
        help="container file (default: $KF_CONTAINER)",
    )
    common.add_argument("--json", action="store_true", help="emit one JSON document")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="kfc", description="Single-file hybrid retrieval container.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", parents=[common], help="create an empty container")
    p.add_argument("path", nargs="?", help="container file (overrides -c)")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("sync", parents=[common], help="incrementally index a directory")
    p.add_argument("dir")
    p.add_argument("--watch", action="store_true", help="keep polling until interrupted")
    p.add_argument("--interval", type=float, default=2.0, help="seconds between passes")
    p.add_argument("--max-passes", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--prune", action="store_true", help="drop documents whose files are gone")
    p.add_argument("--include", action="append", default=[], metavar="GLOB")
    p.add_argument("--exclude", action="append", default=[], metavar="GLOB")
    p.add_argument("--include-hidden", action="store_true")
    p.set_defaults(func=cmd_sync)

    p = sub.add_parser("query", parents=[common], help="hybrid search")
    p.add_argument("text")
    p.add_argument("-k", "--top-k", type=int, default=10)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--collapse-docs", action="store_true", help="best segment per document only")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("stats", parents=[common], help="container counts and size")
    p.set_defaults(func=cmd_stats)

    bench = sub.add_parser("bench", help="synthetic-corpus benchmarks")
    bsub = bench.add_subparsers(dest="bench_command", required=True)
    corpus_opts = argparse.ArgumentParser(add_help=False)
    corpus_opts.add_argument("--n-docs", type=int, default=1000)
    corpus_opts.add_argument("--seed", type=int, default=CorpusSpec.seed)
    corpus_opts.add_argument("--probes", type=int, default=20, help="injected entity codes")

    p = bsub.add_parser("corpus", parents=[common, corpus_opts], help="write a synthetic corpus")
    p.add_argument("out")
    p.set_defaults(func=cmd_bench_corpus)

    for rq, desc in (
        ("rq1", "cold vs incremental ingestion"),
        ("rq2", "entity Recall@1"),
        ("rq3", "query latency"),
    ):
        p = bsub.add_parser(rq, parents=[common, corpus_opts], help=desc)
        p.add_argument("--corpus", help="existing corpus directory (default: generate one)")
        p.add_argument("--mutate", type=int, default=0, help="files to modify before re-sync")
        p.add_argument("--warmup", type=int, default=1)
        p.add_argument("--iterations", type=int, default=3)
        p.add_argument("--threads", type=int, default=1)
        p.set_defaults(func=cmd_bench_rq, rq=rq)

    p = bsub.add_parser("all", parents=[common, corpus_opts], help="run rq1-rq3 end to end")
    p.add_argument("--workdir", help="keep corpus and container here (must be empty)")
    p.add_argument("--mutate", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_bench_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, errors.QueryError, errors.ContainerExistsError, errors.ForeignFileError,
            errors.UnsupportedVersionError, errors.ReadOnlyError, ValueError) as exc:
        print(f"kfc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, errors.KfcError, sqlite3.Error) as exc:
        print(f"kfc: {exc}", file=sys.stderr)
        return EXIT_IO
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
