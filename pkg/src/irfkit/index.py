"""Inverted index with collection statistics and a forward store.

The forward store (doc -> term counts) sits alongside the postings because
the feedback estimators need full term vectors of judged documents.  The
index is immutable once built and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .corpus_io import TermSequence

FORMAT_VERSION = 1


class IndexDataError(ValueError):
    """Raised on malformed input to index construction or snapshot IO."""


@dataclass(frozen=True)
class CollectionStats:
    num_docs: int
    total_terms: int
    avg_doc_len: float
    vocab_size: int


@dataclass(frozen=True)
class TermStats:
    term: str
    df: int
    cf: int


class CollectionIndex:
    """Postings, lengths, forward vectors, and per-term statistics.

    ``analysis`` records how the collection text was normalized (stemmer
    name, stoplist) so queries can be normalized identically later.
    """

    def __init__(
        self,
        doc_ids: list[str],
        doc_lengths: list[int],
        postings: dict[str, list[tuple[int, int]]],
        forward: list[dict[str, int]],
        analysis: dict | None = None,
    ) -> None:
        self.doc_ids = doc_ids
        self.doc_lengths = doc_lengths
        self.postings = postings
        self.forward = forward
        self.analysis = analysis or {}
        self._internal = {doc_id: i for i, doc_id in enumerate(doc_ids)}
        self.term_stats = {
            term: TermStats(term, len(plist), sum(c for _, c in plist))
            for term, plist in postings.items()
        }

    @property
    def stats(self) -> CollectionStats:
        num_docs = len(self.doc_ids)
        total = sum(self.doc_lengths)
        avgdl = total / num_docs if num_docs else 0.0
        return CollectionStats(num_docs, total, avgdl, len(self.postings))

    @property
    def num_docs(self) -> int:
        return len(self.doc_ids)

    def internal_id(self, doc_id: str) -> int:
        try:
            return self._internal[doc_id]
        except KeyError:
            raise IndexDataError(f"unknown doc_id {doc_id!r}") from None

    def has_doc(self, doc_id: str) -> bool:
        return doc_id in self._internal

    def df(self, term: str) -> int:
        stats = self.term_stats.get(term)
        return stats.df if stats else 0

    def cf(self, term: str) -> int:
        stats = self.term_stats.get(term)
        return stats.cf if stats else 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CollectionIndex):
            return NotImplemented
        return (
            self.doc_ids == other.doc_ids
            and self.doc_lengths == other.doc_lengths
            and self.postings == other.postings
            and self.forward == other.forward
            and self.analysis == other.analysis
        )


def build_index(docs: Iterable[TermSequence], analysis: dict | None = None) -> CollectionIndex:
    """Build an index from term sequences; deterministic given input order."""
    doc_ids: list[str] = []
    doc_lengths: list[int] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    forward: list[dict[str, int]] = []
    seen: set[str] = set()
    for seq in docs:
        if seq.doc_id in seen:
            raise IndexDataError(f"duplicate doc_id {seq.doc_id!r}")
        seen.add(seq.doc_id)
        internal = len(doc_ids)
        doc_ids.append(seq.doc_id)
        doc_lengths.append(len(seq.terms))
        counts: dict[str, int] = {}
        for term in seq.terms:
            counts[term] = counts.get(term, 0) + 1
        forward.append(counts)
        for term, count in counts.items():
            postings.setdefault(term, []).append((internal, count))
    return CollectionIndex(doc_ids, doc_lengths, postings, forward, analysis)


def doc_vector(index: CollectionIndex, doc_id: str) -> dict[str, int]:
    """Exact term counts of one document."""
    return dict(index.forward[index.internal_id(doc_id)])


def save_index(index: CollectionIndex, directory: str | Path) -> None:
    """Write a snapshot: manifest, lexicon, postings, forward, doc table."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stats = index.stats
    manifest = {
        "format_version": FORMAT_VERSION,
        "num_docs": stats.num_docs,
        "total_terms": stats.total_terms,
        "vocab_size": stats.vocab_size,
        "analysis": index.analysis,
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8"
    )
    with open(directory / "docs.tsv", "w", encoding="utf-8") as handle:
        for doc_id, length in zip(index.doc_ids, index.doc_lengths):
            handle.write(f"{doc_id}\t{length}\n")
    terms = sorted(index.postings)
    with open(directory / "lexicon.tsv", "w", encoding="utf-8") as handle:
        for term in terms:
            stats_t = index.term_stats[term]
            handle.write(f"{term}\t{stats_t.df}\t{stats_t.cf}\n")
    with open(directory / "postings.tsv", "w", encoding="utf-8") as handle:
        for term in terms:
            pairs = " ".join(f"{doc}:{count}" for doc, count in index.postings[term])
            handle.write(f"{term}\t{pairs}\n")
    with open(directory / "forward.tsv", "w", encoding="utf-8") as handle:
        for counts in index.forward:
            pairs = " ".join(f"{term}:{count}" for term, count in sorted(counts.items()))
            handle.write(f"{pairs}\n")


def load_index(directory: str | Path) -> CollectionIndex:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise IndexDataError(f"no index snapshot at {directory} (missing manifest.json)")
    manifest = json.loads(manifest_path.read_text("utf-8"))
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise IndexDataError(
            f"snapshot format version {version} does not match supported version {FORMAT_VERSION}"
        )
    doc_ids: list[str] = []
    doc_lengths: list[int] = []
    for line in (directory / "docs.tsv").read_text("utf-8").splitlines():
        doc_id, length = line.split("\t")
        doc_ids.append(doc_id)
        doc_lengths.append(int(length))
    postings: dict[str, list[tuple[int, int]]] = {}
    for line in (directory / "postings.tsv").read_text("utf-8").splitlines():
        term, pairs = line.split("\t")
        postings[term] = [
            (int(doc), int(count))
            for doc, count in (pair.split(":") for pair in pairs.split())
        ]
    forward: list[dict[str, int]] = []
    for line in (directory / "forward.tsv").read_text("utf-8").splitlines():
        counts = {}
        for pair in line.split():
            term, count = pair.rsplit(":", 1)
            counts[term] = int(count)
        forward.append(counts)
    if len(forward) != len(doc_ids):
        raise IndexDataError(f"snapshot at {directory} is inconsistent: forward store size mismatch")
    return CollectionIndex(doc_ids, doc_lengths, postings, forward, manifest.get("analysis") or {})
