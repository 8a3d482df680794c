"""Feedback estimators that re-build a query model from judged documents.

Four estimators, one per retrieval framework:

* ``estimate_rm3``         relevance-model expansion over the relevant pool,
                           interpolated with the original query model.
* ``estimate_distillation`` EM mixture of a relevance topic, the judged
                           non-relevant pool, and the corpus background.
* ``estimate_rocchio``     vector-space update against BM25 centroids of the
                           relevant and non-relevant pools.
* ``estimate_prob``        probabilistic term weighting from document
                           frequencies inside and outside the relevant pool.

Every estimator starts from the original query and the full pools; none of
them chains off the previous iteration's model, which is known to drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from .index import CollectionIndex
from .ranking import QueryModel, RankingParams


class FeedbackError(ValueError):
    """Raised on invalid estimator inputs or parameters."""


class PoolConflictError(ValueError):
    """Raised when a document would land in both judgment pools."""


class FeedbackPools:
    """Cumulative pools of judged relevant and non-relevant doc ids.

    Insertion order is preserved; the pools never overlap.
    """

    def __init__(
        self, relevant: Sequence[str] = (), nonrelevant: Sequence[str] = ()
    ) -> None:
        self.relevant: list[str] = []
        self.nonrelevant: list[str] = []
        self._seen: set[str] = set()
        for doc_id in relevant:
            self.add(doc_id, True)
        for doc_id in nonrelevant:
            self.add(doc_id, False)

    def add(self, doc_id: str, is_relevant: bool) -> None:
        if doc_id in self._seen:
            raise PoolConflictError(f"doc {doc_id!r} already judged")
        self._seen.add(doc_id)
        (self.relevant if is_relevant else self.nonrelevant).append(doc_id)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._seen

    def __len__(self) -> int:
        return len(self._seen)


@dataclass(frozen=True)
class ModelParams:
    """Every tunable knob of the pipeline, loadable from a key=value file."""

    mu: float = 1000.0
    k1: float = 1.2
    b: float = 0.75
    interp_lambda: float = 0.5
    num_expansion_terms: int = 20
    lambda1: float = 0.2
    lambda2: float = 0.2
    beta: float = 1.0
    gamma: float = 0.5
    subtract_nonrelevant: bool = True
    em_max_iters: int = 50
    em_tol: float = 1e-6

    def __post_init__(self) -> None:
        if not 0.0 <= self.interp_lambda <= 1.0:
            raise FeedbackError(f"interp_lambda must be in [0, 1], got {self.interp_lambda}")
        if self.num_expansion_terms < 1:
            raise FeedbackError(f"num_expansion_terms must be >= 1, got {self.num_expansion_terms}")
        if self.lambda1 < 0 or self.lambda2 < 0 or self.lambda1 + self.lambda2 >= 1.0:
            raise FeedbackError(
                f"lambda1 + lambda2 must be in [0, 1), got {self.lambda1} + {self.lambda2}"
            )
        if self.beta < 0 or self.gamma < 0:
            raise FeedbackError("beta and gamma must be non-negative")
        if self.em_max_iters < 1:
            raise FeedbackError(f"em_max_iters must be >= 1, got {self.em_max_iters}")

    def ranking_params(self, depth: int = 1000) -> RankingParams:
        return RankingParams(mu=self.mu, k1=self.k1, b=self.b, depth=depth)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_PARAM_PARSERS = {
    "mu": float,
    "k1": float,
    "b": float,
    "interp_lambda": float,
    "num_expansion_terms": int,
    "lambda1": float,
    "lambda2": float,
    "beta": float,
    "gamma": float,
    "subtract_nonrelevant": lambda v: {"true": True, "false": False, "1": True, "0": False}[v.lower()],
    "em_max_iters": int,
    "em_tol": float,
}


def parse_param_items(items: dict[str, str]) -> dict:
    """Coerce string key=value pairs to typed fields; unknown keys rejected."""
    parsed = {}
    for key, value in items.items():
        if key not in _PARAM_PARSERS:
            raise FeedbackError(f"unknown parameter {key!r}")
        try:
            parsed[key] = _PARAM_PARSERS[key](value)
        except (ValueError, KeyError):
            raise FeedbackError(f"bad value {value!r} for parameter {key!r}") from None
    return parsed


def load_params(path: str | Path, overrides: dict[str, str] | None = None) -> ModelParams:
    """Read a flat key=value parameter file, then apply overrides."""
    items: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FeedbackError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        items[key.strip()] = value.strip()
    if overrides:
        items.update(overrides)
    return ModelParams(**parse_param_items(items))


def write_params(params: ModelParams, path: str | Path) -> None:
    lines = [f"{key}={value}" for key, value in sorted(params.to_dict().items())]
    Path(path).write_text("\n".join(lines) + "\n", "utf-8")


def _doc_mle(index: CollectionIndex, doc_id: str) -> dict[str, float]:
    internal = index.internal_id(doc_id)
    length = index.doc_lengths[internal]
    if length == 0:
        return {}
    return {t: c / length for t, c in index.forward[internal].items()}


def _pool_counts(index: CollectionIndex, doc_ids: Sequence[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for doc_id in doc_ids:
        for term, count in index.forward[index.internal_id(doc_id)].items():
            counts[term] = counts.get(term, 0) + count
    return counts


def mle(index: CollectionIndex, doc_set: Sequence[str], mode: str = "concatenated") -> dict[str, float]:
    """Maximum-likelihood term distribution of a document set.

    ``averaged`` is the mean of per-document distributions; ``concatenated``
    treats the set as one long document.  Either way the output sums to 1.
    """
    if not doc_set:
        raise FeedbackError("mle requires a non-empty document set")
    if mode == "averaged":
        out: dict[str, float] = {}
        for doc_id in doc_set:
            for term, p in _doc_mle(index, doc_id).items():
                out[term] = out.get(term, 0.0) + p
        n = len(doc_set)
        return {t: p / n for t, p in sorted(out.items())}
    if mode == "concatenated":
        counts = _pool_counts(index, doc_set)
        total = sum(counts.values())
        if total == 0:
            return {}
        return {t: c / total for t, c in sorted(counts.items())}
    raise FeedbackError(f"unknown mle mode {mode!r}")


def _truncate_distribution(dist: dict[str, float], m: int) -> dict[str, float]:
    """Keep the top-m terms by weight; renormalize only if terms dropped."""
    if len(dist) <= m:
        return dist
    top = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))[:m]
    total = sum(w for _, w in top)
    return {t: w / total for t, w in top}


def _interpolate(
    original: dict[str, float], expansion: dict[str, float], interp_lambda: float
) -> dict[str, float]:
    out: dict[str, float] = {}
    for term in sorted(set(original) | set(expansion)):
        weight = interp_lambda * original.get(term, 0.0) + (1.0 - interp_lambda) * expansion.get(term, 0.0)
        if weight != 0.0:
            out[term] = weight
    return out


def estimate_rm3(
    index: CollectionIndex,
    query_terms: Sequence[str],
    pools: FeedbackPools,
    params: ModelParams,
) -> tuple[QueryModel, bool]:
    """Relevance-model update: average the MLE models of the relevant pool,
    truncate, and interpolate with the original query model.

    Returns (model, fell_back); with an empty relevant pool the original
    query model comes back with fell_back=True.
    """
    original = mle_of_terms(query_terms)
    if not pools.relevant:
        return QueryModel.lm(original), True
    relevance = mle(index, pools.relevant, mode="averaged")
    relevance = _truncate_distribution(relevance, params.num_expansion_terms)
    return QueryModel.lm(_interpolate(original, relevance, params.interp_lambda)), False


def mle_of_terms(terms: Sequence[str]) -> dict[str, float]:
    counts: dict[str, int] = {}
    for term in terms:
        counts[term] = counts.get(term, 0) + 1
    n = len(terms)
    return {t: c / n for t, c in sorted(counts.items())}


def distill_relevance_model(
    pool_counts: dict[str, int],
    p_nonrel: dict[str, float],
    p_corpus: dict[str, float],
    lambda1: float,
    lambda2: float,
    max_iters: int = 50,
    tol: float = 1e-6,
) -> tuple[dict[str, float], list[float]]:
    """EM fit of the relevance topic in the three-way mixture
    (1-l1-l2)*p_rel + l1*p_nonrel + l2*p_corpus against pooled term counts.

    Returns the fitted distribution and the log-likelihood trace, which is
    non-decreasing.
    """
    if lambda1 + lambda2 >= 1.0:
        raise FeedbackError(f"lambda1 + lambda2 must be < 1, got {lambda1} + {lambda2}")
    terms = sorted(t for t, c in pool_counts.items() if c > 0)
    if not terms:
        raise FeedbackError("distillation requires a non-empty relevant pool")
    counts = [pool_counts[t] for t in terms]
    total = sum(counts)
    rel_weight = 1.0 - lambda1 - lambda2
    fixed = [lambda1 * p_nonrel.get(t, 0.0) + lambda2 * p_corpus.get(t, 0.0) for t in terms]
    p_rel = [c / total for c in counts]

    def log_likelihood(p: list[float]) -> float:
        return sum(c * math.log(rel_weight * pw + fw) for c, pw, fw in zip(counts, p, fixed))

    trace = [log_likelihood(p_rel)]
    for _ in range(max_iters):
        expected = [
            c * (rel_weight * pw) / (rel_weight * pw + fw)
            for c, pw, fw in zip(counts, p_rel, fixed)
        ]
        mass = sum(expected)
        if mass == 0.0:
            break
        p_rel = [e / mass for e in expected]
        trace.append(log_likelihood(p_rel))
        if trace[-1] - trace[-2] < tol:
            break
    return dict(zip(terms, p_rel)), trace


def estimate_distillation(
    index: CollectionIndex,
    query_terms: Sequence[str],
    pools: FeedbackPools,
    params: ModelParams,
) -> tuple[QueryModel, bool]:
    """Mixture-model update: distill the relevance topic out of the relevant
    pool via EM, truncate, and interpolate with the original query model.

    With an empty non-relevant pool, that mixture component is dropped and
    the remaining weights renormalized.
    """
    original = mle_of_terms(query_terms)
    if not pools.relevant:
        return QueryModel.lm(original), True
    lambda1, lambda2 = params.lambda1, params.lambda2
    if pools.nonrelevant:
        p_nonrel = mle(index, pools.nonrelevant, mode="concatenated")
    else:
        p_nonrel = {}
        remaining = 1.0 - lambda1
        lambda1, lambda2 = 0.0, lambda2 / remaining
    total_terms = index.stats.total_terms
    pool_counts = _pool_counts(index, pools.relevant)
    p_corpus = {t: index.cf(t) / total_terms for t in pool_counts}
    relevance, _ = distill_relevance_model(
        pool_counts, p_nonrel, p_corpus, lambda1, lambda2, params.em_max_iters, params.em_tol
    )
    relevance = {t: p for t, p in relevance.items() if p > 0.0}
    relevance = _truncate_distribution(relevance, params.num_expansion_terms)
    return QueryModel.lm(_interpolate(original, relevance, params.interp_lambda)), False


def _bm25_centroid(
    index: CollectionIndex, doc_ids: Sequence[str], params: RankingParams
) -> dict[str, float]:
    from .ranking import bm25_weight

    out: dict[str, float] = {}
    for doc_id in doc_ids:
        internal = index.internal_id(doc_id)
        for term in index.forward[internal]:
            out[term] = out.get(term, 0.0) + bm25_weight(index, term, doc_id, params)
    n = len(doc_ids)
    return {t: w / n for t, w in out.items()}


def estimate_rocchio(
    index: CollectionIndex,
    query_terms: Sequence[str],
    pools: FeedbackPools,
    params: ModelParams,
) -> QueryModel:
    """Vector-space update: original query counts plus beta times the BM25
    centroid of the relevant pool and gamma times the non-relevant centroid
    (subtracted by default; the sign is configurable).  Empty pools simply
    drop their term.

    Expansion terms outside the original query are truncated to the top
    num_expansion_terms by absolute weight; query terms are always kept.
    """
    rank_params = params.ranking_params()
    vector: dict[str, float] = {}
    for term in query_terms:
        vector[term] = vector.get(term, 0.0) + 1.0
    query_term_set = set(vector)
    if pools.relevant and params.beta != 0.0:
        for term, weight in _bm25_centroid(index, pools.relevant, rank_params).items():
            vector[term] = vector.get(term, 0.0) + params.beta * weight
    if pools.nonrelevant and params.gamma != 0.0:
        sign = -1.0 if params.subtract_nonrelevant else 1.0
        for term, weight in _bm25_centroid(index, pools.nonrelevant, rank_params).items():
            vector[term] = vector.get(term, 0.0) + sign * params.gamma * weight
    expansion = {t: w for t, w in vector.items() if t not in query_term_set}
    if len(expansion) > params.num_expansion_terms:
        kept = sorted(expansion.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
        keep = query_term_set | {t for t, _ in kept[: params.num_expansion_terms]}
        vector = {t: w for t, w in vector.items() if t in keep}
    return QueryModel.vector(vector)


def estimate_prob(
    index: CollectionIndex,
    query_terms: Sequence[str],
    pools: FeedbackPools,
    params: ModelParams,
) -> tuple[QueryModel, int]:
    """Probabilistic update: feedback terms from the relevant pool weighted
    by log-odds of occurrence in relevant versus non-relevant documents,
    combined with idf-like original-query weights.

    Returns (model, excluded) where excluded counts terms dropped because
    their document frequency makes the log-odds undefined (absent from the
    collection, in every document, or so frequent the non-relevant occurrence
    estimate reaches 1).
    """
    num_docs = index.num_docs
    num_rel = len(pools.relevant)
    if num_rel == 0:
        raise FeedbackError("probabilistic feedback requires a non-empty relevant pool")
    if num_docs <= num_rel:
        raise FeedbackError("relevant pool covers the whole collection")
    excluded = 0

    df_pool: dict[str, int] = {}
    for doc_id in pools.relevant:
        for term in index.forward[index.internal_id(doc_id)]:
            df_pool[term] = df_pool.get(term, 0) + 1

    feedback: dict[str, float] = {}
    for term in sorted(df_pool):
        df_all = index.df(term)
        if df_all >= num_docs:
            excluded += 1
            continue
        p_rel = (df_pool[term] + df_all / num_docs) / (num_rel + 1)
        p_nonrel = (df_all - df_pool[term] + df_all / num_docs) / (num_docs - num_rel + 1)
        if p_nonrel >= 1.0:
            excluded += 1
            continue
        feedback[term] = math.log(p_rel * (1.0 - p_nonrel) / (p_nonrel * (1.0 - p_rel)))

    if len(feedback) > params.num_expansion_terms:
        kept = sorted(feedback.items(), key=lambda kv: (-kv[1], kv[0]))
        feedback = dict(kept[: params.num_expansion_terms])

    original: dict[str, float] = {}
    for term in sorted(set(query_terms)):
        df_all = index.df(term)
        if df_all == 0 or df_all >= num_docs:
            excluded += 1
            continue
        original[term] = math.log((num_docs - df_all) / df_all)

    lam = params.interp_lambda
    combined: dict[str, float] = {}
    for term in sorted(set(original) | set(feedback)):
        weight = lam * original.get(term, 0.0) + (1.0 - lam) * feedback.get(term, 0.0)
        if weight != 0.0:
            combined[term] = weight
    return QueryModel.vector(combined), excluded
