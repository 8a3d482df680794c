"""The retrieve, show, judge, re-estimate loop and freezing run lists.

A session splits a fixed judgment budget into ``iterations`` rounds of
``docs_per_iter`` documents.  Documents already shown stay frozen in display
order; after the last round one more retrieval with the fully updated model
fills the tail.  With a single iteration this is exactly one-shot top-k
relevance feedback.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, TextIO

from .corpus_io import QrelSet, Topic
from .feedback import (
    FeedbackPools,
    ModelParams,
    estimate_distillation,
    estimate_prob,
    estimate_rm3,
    estimate_rocchio,
)
from .index import CollectionIndex
from .ranking import (
    QueryModel,
    ScoredList,
    query_count_vector,
    query_language_model,
    retrieve_dot,
    retrieve_kl,
)

MODEL_KINDS = ("rm3", "distill", "rocchio", "prob")

JudgmentProvider = Callable[[str, str], bool]


class SessionAborted(Exception):
    """Raised by a judgment provider to end the session early."""


@dataclass(frozen=True)
class BudgetConfig:
    docs_per_iter: int
    iterations: int
    final_depth: int = 1000

    def __post_init__(self) -> None:
        if self.docs_per_iter < 1 or self.iterations < 1:
            raise ValueError("docs_per_iter and iterations must be >= 1")
        if self.final_depth < self.docs_per_iter * self.iterations:
            raise ValueError(
                "final_depth must cover the judgment budget "
                f"({self.docs_per_iter} x {self.iterations})"
            )

    @property
    def total_budget(self) -> int:
        return self.docs_per_iter * self.iterations


@dataclass
class IterationRecord:
    iteration: int
    shown: list[str]
    judgments: list[tuple[str, bool]]
    model_summary: dict


@dataclass
class FreezingRunList:
    query_id: str
    frozen: list[str]
    tail: list[str]
    records: list[IterationRecord] = field(default_factory=list)
    aborted: bool = False

    @property
    def doc_ids(self) -> list[str]:
        return self.frozen + self.tail


def simulate_judgment(qrels: QrelSet, query_id: str, doc_id: str) -> bool:
    """True labels: relevant iff the qrels grade is >= 1; unjudged pairs are
    non-relevant."""
    return qrels.is_relevant(query_id, doc_id)


def make_qrels_judge(qrels: QrelSet) -> JudgmentProvider:
    return lambda query_id, doc_id: simulate_judgment(qrels, query_id, doc_id)


def _retrieve(
    index: CollectionIndex,
    topic: Topic,
    model_kind: str,
    params: ModelParams,
    pools: FeedbackPools,
    exclude: set[str],
    depth: int,
) -> tuple[ScoredList, dict]:
    """One retrieval under the model re-estimated from the current pools.

    With empty pools every model degenerates to its initial ranker: QL for
    the language-model estimators, BM25 for the vector ones.
    """
    rank_params = params.ranking_params(depth)
    if model_kind == "rm3":
        model, fell_back = estimate_rm3(index, topic.terms, pools, params)
        scored = retrieve_kl(index, model, rank_params, exclude, topic.query_id)
    elif model_kind == "distill":
        model, fell_back = estimate_distillation(index, topic.terms, pools, params)
        scored = retrieve_kl(index, model, rank_params, exclude, topic.query_id)
    elif model_kind == "rocchio":
        model = estimate_rocchio(index, topic.terms, pools, params)
        fell_back = not pools.relevant and not pools.nonrelevant
        scored = retrieve_dot(index, model, "bm25", rank_params, exclude, topic.query_id)
    elif model_kind == "prob":
        if pools.relevant:
            model, _ = estimate_prob(index, topic.terms, pools, params)
            fell_back = False
            scored = retrieve_dot(index, model, "mle", rank_params, exclude, topic.query_id)
        else:
            model = query_count_vector(topic.terms)
            fell_back = True
            scored = retrieve_dot(index, model, "bm25", rank_params, exclude, topic.query_id)
    else:
        raise ValueError(f"unknown model {model_kind!r}; expected one of {MODEL_KINDS}")
    summary = {"model": model_kind, "fallback": fell_back, "terms": len(model.weights)}
    return scored, summary


def initial_ranking(
    index: CollectionIndex, topic: Topic, model_kind: str, params: ModelParams, depth: int = 1000
) -> ScoredList:
    """The ranking a session starts from, before any feedback."""
    scored, _ = _retrieve(index, topic, model_kind, params, FeedbackPools(), set(), depth)
    return scored


def run_irf(
    index: CollectionIndex,
    topic: Topic,
    model_kind: str,
    params: ModelParams,
    budget: BudgetConfig,
    judge: JudgmentProvider,
) -> FreezingRunList:
    """Run one feedback session for one topic.

    Each iteration shows the top unshown documents of the current model,
    collects judgments, and grows the pools; shown documents are excluded at
    retrieval time from every later ranking.  If the provider aborts, the
    partial result is still assembled.
    """
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"unknown model {model_kind!r}; expected one of {MODEL_KINDS}")
    pools = FeedbackPools()
    shown: list[str] = []
    shown_set: set[str] = set()
    records: list[IterationRecord] = []
    aborted = False

    for iteration in range(1, budget.iterations + 1):
        scored, summary = _retrieve(
            index, topic, model_kind, params, pools, shown_set, budget.docs_per_iter
        )
        page = scored.doc_ids[: budget.docs_per_iter]
        if not page:
            records.append(IterationRecord(iteration, [], [], summary))
            break
        judgments: list[tuple[str, bool]] = []
        try:
            for doc_id in page:
                judgments.append((doc_id, bool(judge(topic.query_id, doc_id))))
        except SessionAborted:
            aborted = True
        shown.extend(page)
        shown_set.update(page)
        for doc_id, is_relevant in judgments:
            pools.add(doc_id, is_relevant)
        records.append(IterationRecord(iteration, page, judgments, summary))
        if aborted:
            break

    tail: list[str] = []
    tail_depth = budget.final_depth - len(shown)
    if tail_depth > 0:
        scored, _ = _retrieve(index, topic, model_kind, params, pools, shown_set, tail_depth)
        tail = scored.doc_ids
    return FreezingRunList(topic.query_id, shown, tail, records, aborted)


def interactive_judge(
    in_stream: TextIO,
    out_stream: TextIO,
    snippet_fn: Callable[[str], str] | None = None,
) -> JudgmentProvider:
    """Ask a human for y/n judgments on a terminal; EOF aborts the session."""

    def judge(query_id: str, doc_id: str) -> bool:
        snippet = f"  {snippet_fn(doc_id)}" if snippet_fn else ""
        out_stream.write(f"[{query_id}] {doc_id}{snippet}\n")
        while True:
            out_stream.write("relevant? [y/n] ")
            out_stream.flush()
            line = in_stream.readline()
            if line == "":
                raise SessionAborted("end of input")
            answer = line.strip().lower()
            if answer in ("y", "yes"):
                return True
            if answer in ("n", "no"):
                return False
            out_stream.write("please answer y or n\n")

    return judge


def term_snippet(index: CollectionIndex, doc_id: str, max_terms: int = 12) -> str:
    """Most frequent terms of a document, the closest thing to a preview the
    index can reconstruct."""
    counts = index.forward[index.internal_id(doc_id)]
    top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:max_terms]
    return " ".join(term for term, _ in top)


def write_freezing_run(runs: Iterable[FreezingRunList], path, run_tag: str = "irfkit") -> None:
    """TREC run file: frozen prefix then tail, with synthetic strictly
    decreasing scores so score-sorting consumers preserve the list order."""
    with open(path, "w", encoding="utf-8") as handle:
        for run in runs:
            docs = run.doc_ids
            total = len(docs)
            for rank, doc_id in enumerate(docs, 1):
                score = float(total - rank + 1)
                handle.write(f"{run.query_id} Q0 {doc_id} {rank} {score:.6f} {run_tag}\n")


def write_session_log(runs: Iterable[FreezingRunList], path) -> None:
    """One JSON line per iteration: shown docs, judgments, model summary."""
    with open(path, "w", encoding="utf-8") as handle:
        for run in runs:
            for record in run.records:
                handle.write(
                    json.dumps(
                        {
                            "query_id": run.query_id,
                            "iteration": record.iteration,
                            "shown": record.shown,
                            "judgments": [[doc, rel] for doc, rel in record.judgments],
                            "model": record.model_summary,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def read_session_log(path) -> dict[tuple[str, str], bool]:
    """Map (query_id, doc_id) -> judgment from a session log."""
    judgments: dict[tuple[str, str], bool] = {}
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        for doc_id, is_relevant in record["judgments"]:
            judgments[(record["query_id"], doc_id)] = bool(is_relevant)
    return judgments


def make_replay_judge(judgments: dict[tuple[str, str], bool]) -> JudgmentProvider:
    """Replay recorded judgments; an unrecorded pair aborts, mirroring the
    point where the original session stopped."""

    def judge(query_id: str, doc_id: str) -> bool:
        try:
            return judgments[(query_id, doc_id)]
        except KeyError:
            raise SessionAborted(f"no recorded judgment for ({query_id}, {doc_id})") from None

    return judge
