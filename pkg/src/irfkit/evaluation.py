"""Run-list scoring (AP@1000, NDCG@20), paired sign-flip randomization
significance testing, and cross-validated grid search.

Queries without any relevant document in the qrels are dropped from every
mean, matching trec_eval behaviour.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, fields
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus_io import QrelSet
from .feedback import ModelParams


@dataclass(frozen=True)
class MetricResult:
    metric: str
    per_query: dict[str, float]
    mean: float


def average_precision(
    run: Sequence[str], qrels: QrelSet, query_id: str, cutoff: int = 1000
) -> float:
    """AP = (1/R) * sum over relevant ranks r <= cutoff of (hits(r) / r)."""
    grades = qrels.grades_for(query_id)
    num_relevant = sum(1 for g in grades.values() if g >= 1)
    if num_relevant == 0:
        return 0.0
    hits = 0
    total = 0.0
    for rank, doc_id in enumerate(run[:cutoff], 1):
        if grades.get(doc_id, 0) >= 1:
            hits += 1
            total += hits / rank
    return total / num_relevant


def ndcg_at_20(run: Sequence[str], qrels: QrelSet, query_id: str) -> float:
    """Linear-gain NDCG over the top 20 ranks with a log2(rank+1) discount."""
    grades = qrels.grades_for(query_id)
    dcg = 0.0
    for rank, doc_id in enumerate(run[:20], 1):
        gain = grades.get(doc_id, 0)
        if gain > 0:
            dcg += gain / math.log2(rank + 1)
    ideal = 0.0
    for rank, gain in enumerate(sorted(grades.values(), reverse=True)[:20], 1):
        if gain > 0:
            ideal += gain / math.log2(rank + 1)
    return dcg / ideal if ideal > 0 else 0.0


METRICS: dict[str, Callable[[Sequence[str], QrelSet, str], float]] = {
    "map": average_precision,
    "ndcg20": ndcg_at_20,
}


def evaluate_run(
    run: Mapping[str, Sequence[str]], qrels: QrelSet, metric: str = "map"
) -> MetricResult:
    """Score every query of a run that has at least one relevant document."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {sorted(METRICS)}")
    score = METRICS[metric]
    per_query = {
        query_id: score(doc_ids, qrels, query_id)
        for query_id, doc_ids in sorted(run.items())
        if qrels.num_relevant(query_id) > 0
    }
    mean = sum(per_query.values()) / len(per_query) if per_query else 0.0
    return MetricResult(metric, per_query, mean)


@dataclass(frozen=True)
class SigTestResult:
    p_value: float
    observed_mean_diff: float
    samples: int
    seed: int

    @property
    def significant(self) -> bool:
        return self.p_value < 0.05


def fisher_randomization(
    per_query_a: Mapping[str, float],
    per_query_b: Mapping[str, float],
    samples: int = 100_000,
    seed: int = 0,
    exact_limit: int = 20,
) -> SigTestResult:
    """Two-sided paired sign-flip randomization test on per-query differences.

    Up to ``exact_limit`` queries all 2^n sign patterns are enumerated;
    beyond that, Monte Carlo sampling with add-one smoothing of the p-value.
    """
    if set(per_query_a) != set(per_query_b):
        raise ValueError("the two systems must be evaluated on identical query sets")
    if not per_query_a:
        raise ValueError("empty query set")
    query_ids = sorted(per_query_a)
    diffs = np.array([per_query_a[q] - per_query_b[q] for q in query_ids])
    n = len(diffs)
    observed = float(diffs.mean())
    threshold = abs(observed) - 1e-12
    if n <= exact_limit:
        patterns = np.arange(2**n, dtype=np.uint32)
        signs = ((patterns[:, None] >> np.arange(n)) & 1).astype(np.float64) * 2.0 - 1.0
        means = signs @ diffs / n
        count = int((np.abs(means) >= threshold).sum())
        return SigTestResult(count / 2**n, observed, 2**n, seed)
    rng = np.random.default_rng(seed)
    count = 0
    remaining = samples
    while remaining > 0:
        chunk = min(remaining, 100_000)
        signs = rng.integers(0, 2, size=(chunk, n)).astype(np.float64) * 2.0 - 1.0
        means = signs @ diffs / n
        count += int((np.abs(means) >= threshold).sum())
        remaining -= chunk
    return SigTestResult((count + 1) / (samples + 1), observed, samples, seed)


# Default hyper-parameter search grids for cross-validation.
_DEFAULT_GRID = {
    "mu": (30.0, 50.0, 300.0, 500.0, 1000.0, 1500.0),
    "k1": (1.2, 1.4, 1.6, 1.8, 2.0),
    "b": (0.75,),
    "interp_lambda": (0.0, 0.2, 0.4, 0.6, 0.8, 1.0),
    "lambda1": (0.0, 0.2, 0.4, 0.6, 0.8, 1.0),
    "lambda2": (0.0, 0.2, 0.4, 0.6, 0.8, 1.0),
    "num_expansion_terms": (10, 20, 30, 40, 50),
    "beta": (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
    "gamma": (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
}

# Axes that actually matter per feedback model; everything else stays at the
# ModelParams default.
_MODEL_AXES = {
    "rm3": ("mu", "interp_lambda", "num_expansion_terms"),
    "distill": ("mu", "lambda1", "lambda2", "interp_lambda", "num_expansion_terms"),
    "rocchio": ("k1", "b", "beta", "gamma", "num_expansion_terms"),
    "prob": ("k1", "b", "interp_lambda", "num_expansion_terms"),
}


@dataclass(frozen=True)
class GridSpec:
    """Per-parameter candidate values for grid search."""

    mu: tuple[float, ...] = _DEFAULT_GRID["mu"]
    k1: tuple[float, ...] = _DEFAULT_GRID["k1"]
    b: tuple[float, ...] = _DEFAULT_GRID["b"]
    interp_lambda: tuple[float, ...] = _DEFAULT_GRID["interp_lambda"]
    lambda1: tuple[float, ...] = _DEFAULT_GRID["lambda1"]
    lambda2: tuple[float, ...] = _DEFAULT_GRID["lambda2"]
    num_expansion_terms: tuple[int, ...] = _DEFAULT_GRID["num_expansion_terms"]
    beta: tuple[float, ...] = _DEFAULT_GRID["beta"]
    gamma: tuple[float, ...] = _DEFAULT_GRID["gamma"]

    def __post_init__(self) -> None:
        for f in fields(self):
            if not getattr(self, f.name):
                raise ValueError(f"empty grid for {f.name}")

    def expand(self, model_kind: str) -> list[ModelParams]:
        """All parameter combinations over the axes the model uses, in
        deterministic order; combinations violating lambda1 + lambda2 < 1
        are skipped."""
        if model_kind not in _MODEL_AXES:
            raise ValueError(f"unknown model {model_kind!r}")
        axes = _MODEL_AXES[model_kind]
        points = []
        for values in itertools.product(*(getattr(self, axis) for axis in axes)):
            override = dict(zip(axes, values))
            if override.get("lambda1", 0.0) + override.get("lambda2", 0.0) >= 1.0:
                continue
            points.append(ModelParams(**override))
        if not points:
            raise ValueError("grid expansion produced no valid parameter points")
        return points


@dataclass
class FoldResult:
    fold: int
    query_ids: list[str]
    best_params: ModelParams
    train_mean: float
    heldout_per_query: dict[str, float] = field(default_factory=dict)


@dataclass
class CVResult:
    folds: list[FoldResult]
    pooled_per_query: dict[str, float]
    pooled_mean: float


def assign_folds(query_ids: Sequence[str], folds: int = 5) -> list[list[str]]:
    """Deterministic round-robin assignment over query ids sorted ascending."""
    ordered = sorted(query_ids)
    return [ordered[i::folds] for i in range(folds)]


def cross_validate(
    score_fn: Callable[[ModelParams], Mapping[str, float]],
    query_ids: Sequence[str],
    grid_points: Sequence[ModelParams],
    folds: int = 5,
) -> CVResult:
    """Pick, per fold, the grid point maximizing the mean metric on the other
    folds, then pool the held-out per-query scores.

    ``score_fn`` maps a parameter point to per-query metric values; it is
    called once per point.
    """
    if not grid_points:
        raise ValueError("empty parameter grid")
    if len(query_ids) < folds:
        raise ValueError(f"need at least {folds} queries for {folds}-fold cross-validation")
    fold_members = assign_folds(query_ids, folds)
    table = [(params, dict(score_fn(params))) for params in grid_points]

    fold_results = []
    pooled: dict[str, float] = {}
    for fold_idx, heldout in enumerate(fold_members):
        heldout_set = set(heldout)
        train = [q for q in sorted(query_ids) if q not in heldout_set]
        best = None
        for params, scores in table:
            mean = sum(scores[q] for q in train) / len(train) if train else 0.0
            if best is None or mean > best[0]:
                best = (mean, params, scores)
        train_mean, best_params, best_scores = best
        heldout_scores = {q: best_scores[q] for q in heldout}
        pooled.update(heldout_scores)
        fold_results.append(FoldResult(fold_idx, heldout, best_params, train_mean, heldout_scores))
    pooled_mean = sum(pooled.values()) / len(pooled) if pooled else 0.0
    return CVResult(fold_results, pooled, pooled_mean)
