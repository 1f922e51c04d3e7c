"""Deterministic synthetic corpus with injected entity codes.

The generator uses its own SplitMix64 stream rather than :mod:`random` so a
seed yields the same bytes on every platform and Python release.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

from .words import BUSINESS, TECHNICAL

_MASK64 = (1 << 64) - 1
_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
EXEMPLAR_ENTITY = (500, "UNIQUE_INVOICE_CODE_XYZ_999")
ENTITY_RE = re.compile(r"UNIQUE_[A-Z]+_CODE_[A-Z]{3}_[0-9]{3}")


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection, so no modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def between(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)

    def unit(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def choice(self, seq):
        return seq[self.below(len(seq))]


@dataclass(frozen=True)
class CorpusSpec:
    n_docs: int = 1000
    seed: int = 20240101
    entity_injections: tuple[tuple[int, str], ...] = ()
    doc_length: int = 150
    business_share: float = 0.7

    def __post_init__(self) -> None:
        if self.n_docs < 0 or self.doc_length < 1:
            raise ValueError("n_docs must be >= 0 and doc_length >= 1")
        targets = [i for i, _ in self.entity_injections]
        codes = [c for _, c in self.entity_injections]
        if len(set(targets)) != len(targets) or len(set(codes)) != len(codes):
            raise ValueError("entity injections need distinct documents and distinct codes")
        for index, code in self.entity_injections:
            if not 0 <= index < self.n_docs:
                raise ValueError(f"injection target {index} outside 0..{self.n_docs - 1}")
            if not ENTITY_RE.fullmatch(code):
                raise ValueError(f"entity code {code!r} does not match {ENTITY_RE.pattern}")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    entity: str | None = None


def make_entity_code(rng: SplitMix64) -> str:
    word = rng.choice(BUSINESS).upper()
    letters = "".join(rng.choice(_LETTERS) for _ in range(3))
    return f"UNIQUE_{word}_CODE_{letters}_{rng.below(1000):03d}"


def default_injections(n_docs: int = 1000, count: int = 20, seed: int = 7) -> tuple[tuple[int, str], ...]:
    """``count`` distinct (doc, code) pairs, led by the doc_500 invoice exemplar when it fits."""
    count = min(count, n_docs)
    rng = SplitMix64(seed)
    picked: list[tuple[int, str]] = []
    if count and n_docs > EXEMPLAR_ENTITY[0]:
        picked.append(EXEMPLAR_ENTITY)
    targets = {i for i, _ in picked}
    codes = {c for _, c in picked}
    while len(picked) < count:
        index = rng.below(n_docs)
        code = make_entity_code(rng)
        if index in targets or code in codes:
            continue
        targets.add(index)
        codes.add(code)
        picked.append((index, code))
    return tuple(picked)


def _sentence(rng: SplitMix64, n_words: int, business_share: float) -> str:
    words = [
        rng.choice(BUSINESS) if rng.unit() < business_share else rng.choice(TECHNICAL)
        for _ in range(n_words)
    ]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def generate_document(spec: CorpusSpec, index: int, entity: str | None = None) -> str:
    rng = SplitMix64(spec.seed ^ ((index + 1) * 0xD1B54A32D192ED03 & _MASK64))
    target = rng.between(max(1, spec.doc_length // 2), max(1, spec.doc_length * 3 // 2))
    sentences = []
    total = 0
    while total < target:
        n = min(rng.between(8, 16), target - total)
        sentences.append(_sentence(rng, max(n, 1), spec.business_share))
        total += n
    if entity is not None:
        sentences.insert(len(sentences) // 2, f"Reference code {entity} is recorded for this file.")
    paragraphs = []
    i = 0
    while i < len(sentences):
        size = rng.between(3, 5)
        paragraphs.append(" ".join(sentences[i : i + size]))
        i += size
    return "\n\n".join(paragraphs) + "\n"


def generate_corpus(spec: CorpusSpec, out_dir: str | os.PathLike[str]) -> list[ManifestEntry]:
    """Write ``doc_0.txt`` ... into an empty directory and return the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if any(out.iterdir()):
        raise FileExistsError(f"{out}: corpus directory is not empty")
    injected = dict(spec.entity_injections)
    manifest = []
    for index in range(spec.n_docs):
        name = f"doc_{index}.txt"
        entity = injected.get(index)
        (out / name).write_text(generate_document(spec, index, entity), encoding="utf-8", newline="\n")
        manifest.append(ManifestEntry(name, entity))
    return manifest


def scan_manifest(corpus_dir: str | os.PathLike[str]) -> list[ManifestEntry]:
    """Rebuild a manifest from files on disk by locating entity codes."""
    root = Path(corpus_dir)
    entries = []
    def natural(path: Path) -> list:
        return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", path.relative_to(root).as_posix())]

    for path in sorted(root.rglob("*.txt"), key=natural):
        found = ENTITY_RE.findall(path.read_text(encoding="utf-8"))
        entries.append(ManifestEntry(path.relative_to(root).as_posix(), found[0] if found else None))
    return entries
