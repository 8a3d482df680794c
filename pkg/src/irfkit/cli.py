"""Command-line pipeline: index, run, eval, compare, sweep.

Exit codes: 0 on success, 1 on data errors, 2 on usage errors.  Every run
writes a resolved-config echo file next to its output so experiments can be
reproduced byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import corpus_io, evaluation, feedback, session
from .index import build_index, load_index, save_index
from .ranking import write_run

USAGE_ERROR = 2
DATA_ERROR = 1


@dataclass
class RunConfig:
    index_dir: str
    topics_path: str
    qrels_path: str | None
    model_kind: str
    docs_per_iter: int
    iterations: int
    final_depth: int
    params_path: str | None
    output_path: str
    seed: int
    threads: int
    interactive: bool
    topics_format: str
    run_tag: str

    def resolved(self, params: feedback.ModelParams) -> dict:
        echo = {
            "index": self.index_dir,
            "topics": self.topics_path,
            "topics_format": self.topics_format,
            "qrels": self.qrels_path or "",
            "model": self.model_kind,
            "docs_per_iter": self.docs_per_iter,
            "iterations": self.iterations,
            "final_depth": self.final_depth,
            "output": self.output_path,
            "seed": self.seed,
            "threads": self.threads,
            "interactive": self.interactive,
            "run_tag": self.run_tag,
        }
        echo.update(params.to_dict())
        return echo


def _write_echo(path: Path, resolved: dict) -> None:
    lines = [f"{key}={value}" for key, value in sorted(resolved.items())]
    path.write_text("\n".join(lines) + "\n", "utf-8")


def read_run(path: str | Path) -> dict[str, list[str]]:
    """Read a TREC run file into query_id -> doc ids ordered by rank."""
    entries: dict[str, list[tuple[int, str]]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise corpus_io.CorpusFormatError(
                    f"{path}:{lineno}: expected 6 fields, got {len(parts)}"
                )
            query_id, _, doc_id, rank, _, _ = parts
            try:
                rank_num = int(rank)
            except ValueError:
                raise corpus_io.CorpusFormatError(
                    f"{path}:{lineno}: non-integer rank {rank!r}"
                ) from None
            entries.setdefault(query_id, []).append((rank_num, doc_id))
    return {
        query_id: [doc for _, doc in sorted(ranked)]
        for query_id, ranked in sorted(entries.items())
    }


def _load_analyzed_topics(args, analysis: dict) -> list[corpus_io.Topic]:
    stoplist = frozenset(analysis.get("stoplist", ()))
    stemmer = analysis.get("stemmer", "krovetz")
    return corpus_io.parse_topics(
        args.topics, args.topics_format, stoplist, stemmer
    )


def cmd_index(args) -> int:
    stoplist = corpus_io.load_stoplist(args.stoplist)
    raw = corpus_io.parse_trec_collection(args.corpus, args.format)
    sequences = corpus_io.normalize_collection(raw, stoplist, args.stemmer)
    analysis = {"stemmer": args.stemmer, "stoplist": sorted(stoplist)}
    index = build_index(sequences, analysis)
    save_index(index, args.output)
    stats = index.stats
    print(f"documents      {stats.num_docs}")
    print(f"avg doc length {stats.avg_doc_len:.2f}")
    print(f"vocabulary     {stats.vocab_size}")
    print(f"total terms    {stats.total_terms}")
    print(f"index saved to {args.output}")
    return 0


def _resolve_params(args) -> feedback.ModelParams:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise feedback.FeedbackError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.params:
        return feedback.load_params(args.params, overrides)
    return feedback.ModelParams(**feedback.parse_param_items(overrides))


def cmd_run(args) -> int:
    config = RunConfig(
        index_dir=args.index,
        topics_path=args.topics,
        qrels_path=args.qrels,
        model_kind=args.model,
        docs_per_iter=args.docs_per_iter,
        iterations=args.iterations,
        final_depth=args.final_depth,
        params_path=args.params,
        output_path=args.output,
        seed=args.seed,
        threads=1 if args.interactive else args.threads,
        interactive=args.interactive,
        topics_format=args.topics_format,
        run_tag=args.run_tag,
    )
    if not config.interactive and config.qrels_path is None:
        print("error: --qrels is required unless --interactive", file=sys.stderr)
        return USAGE_ERROR
    params = _resolve_params(args)
    index = load_index(config.index_dir)
    topics = _load_analyzed_topics(args, index.analysis)
    budget = session.BudgetConfig(config.docs_per_iter, config.iterations, config.final_depth)

    if config.interactive:
        judge = session.interactive_judge(
            sys.stdin, sys.stdout, lambda doc_id: session.term_snippet(index, doc_id)
        )
    else:
        judge = session.make_qrels_judge(corpus_io.parse_qrels(config.qrels_path))

    def run_topic(topic: corpus_io.Topic) -> session.FreezingRunList:
        return session.run_irf(index, topic, config.model_kind, params, budget, judge)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            runs = list(pool.map(run_topic, topics))
    else:
        runs = [run_topic(topic) for topic in topics]

    output = Path(config.output_path)
    if output.parent != Path(""):
        output.parent.mkdir(parents=True, exist_ok=True)
    session.write_freezing_run(runs, output, config.run_tag)
    session.write_session_log(runs, output.with_name(output.name + ".sessions.jsonl"))
    _write_echo(output.with_name(output.name + ".config"), config.resolved(params))
    judged = sum(len(r.judgments) for run in runs for r in run.records)
    print(f"wrote {output} ({len(runs)} topics, {judged} judgments)")
    return 0


def cmd_eval(args) -> int:
    run = read_run(args.run)
    qrels = corpus_io.parse_qrels(args.qrels)
    metrics = [args.metric] if args.metric != "all" else ["map", "ndcg20"]
    lines = []
    for metric in metrics:
        result = evaluation.evaluate_run(run, qrels, metric)
        for query_id, value in sorted(result.per_query.items()):
            lines.append(f"{query_id}\t{metric}\t{value:.4f}")
        lines.append(f"all\t{metric}\t{result.mean:.4f}")
    report = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(report, "utf-8")
    print(report, end="")
    return 0


def cmd_compare(args) -> int:
    run_a = read_run(args.run_a)
    run_b = read_run(args.run_b)
    qrels = corpus_io.parse_qrels(args.qrels)
    result_a = evaluation.evaluate_run(run_a, qrels, args.metric)
    result_b = evaluation.evaluate_run(run_b, qrels, args.metric)
    if set(result_a.per_query) != set(result_b.per_query):
        only_a = sorted(set(result_a.per_query) - set(result_b.per_query))
        only_b = sorted(set(result_b.per_query) - set(result_a.per_query))
        print(
            "error: run query sets differ after dropping queries without "
            f"relevant documents (only in A: {only_a}, only in B: {only_b})",
            file=sys.stderr,
        )
        return DATA_ERROR
    sig = evaluation.fisher_randomization(
        result_a.per_query, result_b.per_query, samples=args.samples, seed=args.seed
    )
    verdict = "significant" if sig.significant else "not significant"
    header = "metric\tmean_a\tmean_b\tdiff\tp_value\tsamples\tseed\tverdict"
    row = (
        f"{args.metric}\t{result_a.mean:.4f}\t{result_b.mean:.4f}\t"
        f"{sig.observed_mean_diff:+.4f}\t{sig.p_value:.4f}\t{sig.samples}\t{sig.seed}\t{verdict}"
    )
    report = header + "\n" + row + "\n"
    if args.output:
        Path(args.output).write_text(report, "utf-8")
    print(report, end="")
    print(f"p={sig.p_value:.4f}: {verdict} at 0.05")
    return 0


def _load_grid(path: str | None) -> evaluation.GridSpec:
    if path is None:
        return evaluation.GridSpec()
    values: dict[str, tuple] = {}
    casts = {"num_expansion_terms": int}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise corpus_io.CorpusFormatError(f"{path}:{lineno}: expected key=v1,v2,...")
        key, raw = line.split("=", 1)
        key = key.strip()
        if key not in evaluation.GridSpec.__dataclass_fields__:
            raise corpus_io.CorpusFormatError(f"{path}:{lineno}: unknown grid key {key!r}")
        cast = casts.get(key, float)
        values[key] = tuple(cast(v) for v in raw.split(",") if v.strip())
    return evaluation.GridSpec(**values)


def cmd_sweep(args) -> int:
    index = load_index(args.index)
    topics = _load_analyzed_topics(args, index.analysis)
    qrels = corpus_io.parse_qrels(args.qrels)
    budget = session.BudgetConfig(args.docs_per_iter, args.iterations, args.final_depth)
    judge = session.make_qrels_judge(qrels)
    grid = _load_grid(args.grid)
    points = grid.expand(args.model)
    scorer = evaluation.METRICS[args.metric]
    eligible = [t for t in topics if qrels.num_relevant(t.query_id) > 0]
    if len(eligible) < args.folds:
        print(
            f"error: {len(eligible)} topics with relevant documents, "
            f"need at least {args.folds} for cross-validation",
            file=sys.stderr,
        )
        return DATA_ERROR

    def score_point(params: feedback.ModelParams) -> dict[str, float]:
        scores = {}
        for topic in eligible:
            run = session.run_irf(index, topic, args.model, params, budget, judge)
            scores[topic.query_id] = scorer(run.doc_ids, qrels, topic.query_id)
        return scores

    result = evaluation.cross_validate(
        score_point, [t.query_id for t in eligible], points, folds=args.folds
    )
    lines = ["fold\tqueries\tbest_params\ttrain_mean\theldout_mean"]
    for fold in result.folds:
        flat = " ".join(f"{k}={v}" for k, v in sorted(fold.best_params.to_dict().items()))
        heldout_mean = (
            sum(fold.heldout_per_query.values()) / len(fold.heldout_per_query)
            if fold.heldout_per_query
            else 0.0
        )
        lines.append(
            f"{fold.fold}\t{','.join(fold.query_ids)}\t{flat}\t"
            f"{fold.train_mean:.4f}\t{heldout_mean:.4f}"
        )
    lines.append(f"pooled\tall\t-\t-\t{result.pooled_mean:.4f}")
    report = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(report, "utf-8")
    print(report, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irfkit",
        description="Iterative relevance feedback retrieval toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build and save a collection index")
    p_index.add_argument("--corpus", required=True)
    p_index.add_argument("--format", choices=corpus_io.COLLECTION_FORMATS, default="trectext")
    p_index.add_argument("--output", required=True)
    p_index.add_argument("--stoplist", default=None, help="one word per line; default: built-in INQUERY list")
    p_index.add_argument("--stemmer", choices=corpus_io.STEMMERS, default="krovetz")
    p_index.set_defaults(func=cmd_index)

    p_run = sub.add_parser("run", help="run feedback sessions and write a freezing run file")
    p_run.add_argument("--index", required=True)
    p_run.add_argument("--topics", required=True)
    p_run.add_argument("--topics-format", choices=corpus_io.TOPIC_FORMATS, default="tsv")
    p_run.add_argument("--qrels", default=None)
    p_run.add_argument("--model", required=True, choices=session.MODEL_KINDS)
    p_run.add_argument("--docs-per-iter", type=int, required=True)
    p_run.add_argument("--iterations", type=int, required=True)
    p_run.add_argument("--final-depth", type=int, default=1000)
    p_run.add_argument("--params", default=None, help="flat key=value parameter file")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one parameter")
    p_run.add_argument("--output", required=True)
    p_run.add_argument("--interactive", action="store_true")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--run-tag", default="irfkit")
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval", help="score a run file against qrels")
    p_eval.add_argument("--run", required=True)
    p_eval.add_argument("--qrels", required=True)
    p_eval.add_argument("--metric", choices=("map", "ndcg20", "all"), default="all")
    p_eval.add_argument("--output", default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_cmp = sub.add_parser("compare", help="randomization significance test between two runs")
    p_cmp.add_argument("--run-a", required=True)
    p_cmp.add_argument("--run-b", required=True)
    p_cmp.add_argument("--qrels", required=True)
    p_cmp.add_argument("--metric", choices=("map", "ndcg20"), default="map")
    p_cmp.add_argument("--samples", type=int, default=100_000)
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--output", default=None)
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="cross-validated grid search")
    p_sweep.add_argument("--index", required=True)
    p_sweep.add_argument("--topics", required=True)
    p_sweep.add_argument("--topics-format", choices=corpus_io.TOPIC_FORMATS, default="tsv")
    p_sweep.add_argument("--qrels", required=True)
    p_sweep.add_argument("--model", required=True, choices=session.MODEL_KINDS)
    p_sweep.add_argument("--docs-per-iter", type=int, required=True)
    p_sweep.add_argument("--iterations", type=int, required=True)
    p_sweep.add_argument("--final-depth", type=int, default=1000)
    p_sweep.add_argument("--grid", default=None, help="key=v1,v2,... file; default: built-in grids")
    p_sweep.add_argument("--metric", choices=("map", "ndcg20"), default="map")
    p_sweep.add_argument("--folds", type=int, default=5)
    p_sweep.add_argument("--output", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        corpus_io.CorpusFormatError,
        feedback.FeedbackError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
