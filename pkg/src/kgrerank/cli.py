"""Command-line interface: ingest, mine, score, rerank, evaluate, analyze.

Every command is deterministic given (config, seed): rerunning overwrites
output files with identical bytes (figures excepted; they are renderings of
the delimited outputs).  Errors exit nonzero after printing a final JSON
record with a machine-readable code.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import RunConfig, ScorerSpec, load_config
from .errors import ToolkitError
from .evaluate import (
    AnalysisTable,
    EvalReport,
    build_queries,
    evaluate_strategies,
    export_prediction_subgraph,
    fit_fixed_threshold,
    intersection_ratio_table,
    reachability_table,
    set_difference_table,
)
from .fuzzy import format_score_lines
from .kg import InductiveSplit, load_graph, load_split
from .rerank import (
    CombineStrategy,
    CutoffStrategy,
    FixedThreshold,
    IdealOracle,
    KMeansCutoff,
    MaxCombine,
    MeanCombine,
    MinCombine,
    NoCutoff,
    RerankPipeline,
    ReplaceScores,
    Scorer,
    TopK,
    rerank_query,
)
from .reference import (
    DATASETS,
    REFERENCE_NOTE,
    intersection_reference,
    reachability_reference,
    set_difference_reference,
    strategy_reference,
)
from .rng import SplitMix64, derive_seed
from .rules import RuleScorer, load_external_scores, mine_rules, save_rules

_REF_COLUMNS = tuple(f"ref_{d}" for d in DATASETS)


# -- scorer construction ----------------------------------------------------


class _ScorerCache:
    """Builds scorers from specs, mining each hop count at most once."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._train_graph = None
        self._rule_bases: dict[int, object] = {}

    def train_graph(self):
        if self._train_graph is None:
            self.config.require("train")
            self._train_graph = load_graph(self.config.train)
        return self._train_graph

    def rule_base(self, hops: int):
        if hops not in self._rule_bases:
            self._rule_bases[hops] = mine_rules(
                self.train_graph(),
                hops,
                min_support=self.config.min_support,
                default_score=self.config.default_score,
            )
        return self._rule_bases[hops]

    def scorer(self, spec: ScorerSpec, label: str | None = None) -> Scorer:
        if spec.kind == "native":
            return RuleScorer(
                self.rule_base(spec.hops),
                max_paths=self.config.max_paths,
                label=label or f"{spec.hops}-hop",
            )
        return load_external_scores(
            spec.path,
            default_score=self.config.default_score,
            label=label or f"external:{Path(spec.path).name}",
        )


def _cutoff_from_config(config: RunConfig, theta: float) -> CutoffStrategy:
    if config.cutoff == "none":
        return NoCutoff()
    if config.cutoff == "threshold":
        return FixedThreshold(theta)
    if config.cutoff == "topk":
        return TopK(config.cutoff_k)
    if config.cutoff == "kmeans":
        return KMeansCutoff(config.kmeans_k, config.kmeans_m)
    if config.cutoff == "ideal":
        return IdealOracle()
    raise ToolkitError(f"unknown cutoff {config.cutoff!r}")


def _combine_from_config(config: RunConfig) -> CombineStrategy:
    if config.combine == "replace":
        return ReplaceScores()
    if config.combine == "min":
        return MinCombine()
    if config.combine == "max":
        return MaxCombine()
    if config.combine == "mean":
        return MeanCombine(config.combine_weight)
    raise ToolkitError(f"unknown combine {config.combine!r}")


def _resolve_theta(
    config: RunConfig, cache: _ScorerCache, split: InductiveSplit
) -> float:
    """Config theta, else dev-set grid fit, else 0.5."""
    if config.cutoff_theta is not None:
        return config.cutoff_theta
    if config.dev is not None:
        from .kg import load_triple_file, Triple

        dev_raw = load_triple_file(config.dev)
        graph = split.inference_graph
        dev_triples = [
            Triple(graph.entity_id(h), graph.relation_id(r), graph.entity_id(t))
            for h, r, t in dev_raw
        ]
        return fit_fixed_threshold(
            cache.scorer(config.retriever),
            cache.scorer(config.reranker),
            split,
            dev_triples,
            n_negatives=config.negatives,
            seed=config.seed,
            workers=config.workers,
            filtered=config.filtered,
        )
    return 0.5


def _out_dir(config: RunConfig, subdir: str) -> Path:
    path = Path(config.out) / subdir
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_json(path: Path, payload) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _run_metadata(config: RunConfig) -> dict:
    return {
        "version": __version__,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "n_negatives": config.negatives,
        "workers": config.workers,
        "dataset": Path(config.test).stem if config.test else "",
        "retriever": config.retriever.describe(),
        "reranker": config.reranker.describe(),
    }


def _with_reference(table: AnalysisTable, reference_for_row) -> AnalysisTable:
    """Append per-dataset reference columns and the non-reproducibility note."""
    columns = table.columns + _REF_COLUMNS + ("reference_note",)
    rows = []
    for row in table.rows:
        refs = reference_for_row(row)
        rows.append(row + tuple(refs) + (REFERENCE_NOTE,))
    return AnalysisTable(table.name, columns, tuple(rows))


# -- commands ---------------------------------------------------------------


def cmd_ingest(config: RunConfig) -> dict:
    """Load and validate the split; write graph summaries."""
    config.require("train", "inference", "test")
    split = load_split(config.train, config.inference, config.test)
    summary = {
        "train": split.train_graph.summary(),
        "inference": split.inference_graph.summary(),
        "test_triples": len(split.test_triples),
    }
    out = _out_dir(config, "reports") / "graph_summary.json"
    _write_json(out, summary)
    return {"command": "ingest", "summary": summary, "written": [str(out)]}


def cmd_mine(config: RunConfig, hops: int | None = None) -> dict:
    """Mine path rules from the training graph and export them."""
    config.require("train")
    hops = hops if hops is not None else config.mine_hops
    cache = _ScorerCache(config)
    rules = cache.rule_base(hops)
    out = _out_dir(config, "rules") / f"rules_{hops}hop.tsv"
    save_rules(rules, out)
    if rules.rule_count() == 0:
        print("warning: no rules mined (graph too sparse for min_support?)", file=sys.stderr)
    return {
        "command": "mine",
        "hops": hops,
        "rules": rules.rule_count(),
        "written": [str(out)],
    }


def cmd_score(config: RunConfig) -> dict:
    """Dump candidate scores for the configured retriever and re-ranker."""
    config.require("train", "inference", "test")
    split = load_split(config.train, config.inference, config.test)
    cache = _ScorerCache(config)
    queries = build_queries(
        split, split.test_triples, config.negatives, config.seed, config.filtered
    )
    out_dir = _out_dir(config, "scores")
    written = []
    for role, spec in (("retriever", config.retriever), ("reranker", config.reranker)):
        scorer = cache.scorer(spec)
        lines = []
        for query in queries:
            triple = query.triple
            score_set = scorer.score_candidates(
                split.inference_graph, triple.head, triple.relation, query.candidates
            )
            lines.extend(format_score_lines(score_set, split.inference_graph))
        path = out_dir / f"scores_{role}.tsv"
        _write_text(path, "".join(line + "\n" for line in lines))
        written.append(str(path))
    return {"command": "score", "queries": len(queries), "written": written}


def cmd_rerank(config: RunConfig) -> dict:
    """Run the configured pipeline and dump the final prediction sets."""
    config.require("train", "inference", "test")
    split = load_split(config.train, config.inference, config.test)
    cache = _ScorerCache(config)
    theta = _resolve_theta(config, cache, split)
    pipeline = RerankPipeline(
        retriever=cache.scorer(config.retriever),
        reranker=cache.scorer(config.reranker),
        cutoff=_cutoff_from_config(config, theta),
        combine=_combine_from_config(config),
    )
    queries = build_queries(
        split, split.test_triples, config.negatives, config.seed, config.filtered
    )
    graph = split.inference_graph
    set_lines = []
    rank_rows = []
    from .evaluate import rank_of_answer

    for index, query in enumerate(queries):
        triple = query.triple
        final = rerank_query(
            pipeline, graph, triple.head, triple.relation, query.candidates, triple.tail
        )
        set_lines.extend(format_score_lines(final, graph))
        rank_rows.append(
            (
                index,
                graph.entity_name(triple.head),
                graph.relation_surface(triple.relation),
                graph.entity_name(triple.tail),
                rank_of_answer(final, triple.tail),
            )
        )
    scores_path = _out_dir(config, "scores") / "reranked.tsv"
    _write_text(scores_path, "".join(line + "\n" for line in set_lines))
    ranks_table = AnalysisTable(
        "rerank_ranks",
        ("query", "head", "relation", "answer", "rank"),
        tuple(rank_rows),
    )
    ranks_path = _out_dir(config, "reports") / "rerank_ranks.csv"
    _write_text(ranks_path, ranks_table.to_csv_text())
    return {
        "command": "rerank",
        "queries": len(queries),
        "theta": theta,
        "written": [str(scores_path), str(ranks_path)],
    }


def _strategy_rows(
    config: RunConfig, theta: float
) -> list[tuple[str, str, CutoffStrategy, CombineStrategy]]:
    """(label, parameters, cutoff, combine) rows mirroring the published
    strategy ablation."""
    return [
        ("threshold", f"theta={theta}", FixedThreshold(theta), ReplaceScores()),
        ("topk", f"k={config.cutoff_k}", TopK(config.cutoff_k), ReplaceScores()),
        (
            "kmeans",
            f"k={config.kmeans_k},m={config.kmeans_m}",
            KMeansCutoff(config.kmeans_k, config.kmeans_m),
            ReplaceScores(),
        ),
        ("intersection", "", NoCutoff(), MinCombine()),
        ("union", "", NoCutoff(), MaxCombine()),
        ("mean", "weight=0.5", NoCutoff(), MeanCombine(0.5)),
    ]


def cmd_evaluate(config: RunConfig) -> dict:
    """Evaluate the configured pipeline plus the strategy ablation rows."""
    config.require("train", "inference", "test")
    split = load_split(config.train, config.inference, config.test)
    cache = _ScorerCache(config)
    theta = _resolve_theta(config, cache, split)
    retriever = cache.scorer(config.retriever)
    reranker = cache.scorer(config.reranker)

    configured_label = f"configured({config.cutoff}/{config.combine})"
    rows = [
        (
            configured_label,
            "",
            _cutoff_from_config(config, theta),
            _combine_from_config(config),
        )
    ] + _strategy_rows(config, theta)

    report = evaluate_strategies(
        retriever,
        reranker,
        [(label, cutoff, combine) for label, _, cutoff, combine in rows],
        split,
        n_negatives=config.negatives,
        seed=config.seed,
        workers=config.workers,
        filtered=config.filtered,
    )
    metadata = _run_metadata(config)
    metadata["theta"] = theta
    report = EvalReport(report.rows, {**report.metadata, **metadata})

    parameters = {label: params for label, params, _, _ in rows}
    csv_rows = []
    for row in report.rows:
        refs: list[str | None] = []
        for hits_mrr in strategy_reference(row.label):
            refs.extend(hits_mrr)
        csv_rows.append(
            (
                row.label,
                parameters.get(row.label, ""),
                f"{row.hits_at_1:.6f}",
                f"{row.mrr:.6f}",
                len(row.ranks),
            )
            + tuple(refs)
            + (REFERENCE_NOTE,)
        )
    ref_columns = []
    for dataset in DATASETS:
        ref_columns.extend((f"ref_{dataset}_hits1", f"ref_{dataset}_mrr"))
    table = AnalysisTable(
        "strategy_metrics",
        ("strategy", "parameters", "hits_at_1", "mrr", "queries")
        + tuple(ref_columns)
        + ("reference_note",),
        tuple(csv_rows),
    )

    reports_dir = _out_dir(config, "reports")
    csv_path = reports_dir / "strategy_metrics.csv"
    json_path = reports_dir / "eval_report.json"
    _write_text(csv_path, table.to_csv_text())
    payload = report.to_json_dict()
    payload["parameters"] = parameters
    _write_json(json_path, payload)
    written = [str(csv_path), str(json_path)]

    if config.figures:
        from .figures import save_metrics_figure

        figure_path = reports_dir / "strategy_metrics.png"
        save_metrics_figure(report, figure_path)
        written.append(str(figure_path))

    return {
        "command": "evaluate",
        "rows": {row.label: {"hits_at_1": row.hits_at_1, "mrr": row.mrr} for row in report.rows},
        "theta": theta,
        "written": written,
    }


def cmd_analyze(config: RunConfig) -> dict:
    """Prediction-set analysis tables and per-query subgraph exports."""
    config.require("train", "inference", "test")
    split = load_split(config.train, config.inference, config.test)
    cache = _ScorerCache(config)
    scorers = [cache.scorer(ScorerSpec("native", hops=h), label=f"{h}-hop") for h in (1, 2, 3)]
    common = dict(
        n_negatives=config.negatives,
        seed=config.seed,
        workers=config.workers,
        filtered=config.filtered,
    )

    intersection = _with_reference(
        intersection_ratio_table(scorers, split, config.analysis_n_values, **common),
        lambda row: intersection_reference(row[0], row[1], row[2]),
    )
    reachability = _with_reference(
        reachability_table(
            scorers, split, config.analysis_top_n, config.analysis_k_values, **common
        ),
        lambda row: reachability_reference(row[0], row[1]),
    )
    set_difference = _with_reference(
        set_difference_table(scorers, split, config.analysis_top_n, **common),
        lambda row: set_difference_reference(row[0], row[1]),
    )

    analysis_dir = _out_dir(config, "analysis")
    written = []
    figure_jobs = []
    for table, value_column, group_columns in (
        (intersection, "mean_intersection_ratio", ("n", "scorer_a", "scorer_b")),
        (reachability, "mean_pairwise_reachability", ("k", "scorer")),
        (set_difference, "mean_set_difference_ratio", ("retriever", "reranker")),
    ):
        path = analysis_dir / f"{table.name}.csv"
        _write_text(path, table.to_csv_text())
        written.append(str(path))
        figure_jobs.append((table, value_column, group_columns, path.with_suffix(".png")))

    # Per-query neighborhood exports for a seeded sample of test queries,
    # one per hop variant.
    queries = build_queries(
        split, split.test_triples, config.negatives, config.seed, config.filtered
    )
    n_export = min(config.export_queries, len(queries))
    rng = SplitMix64(derive_seed(config.seed, 3))
    indices = sorted(rng.sample(range(len(queries)), n_export)) if n_export else []
    subgraph_dir = analysis_dir / "subgraphs"
    subgraph_dir.mkdir(parents=True, exist_ok=True)
    subgraph_figures = []
    for index in indices:
        query = queries[index]
        for scorer in scorers:
            subgraph = export_prediction_subgraph(
                scorer,
                split.inference_graph,
                query.triple.head,
                query.triple.relation,
                query.candidates,
                top_n=config.analysis_top_n,
            )
            stem = f"query{index}_{scorer.label}"
            dot_path = subgraph_dir / f"{stem}.dot"
            _write_text(dot_path, subgraph.to_dot(split.inference_graph))
            written.append(str(dot_path))
            subgraph_figures.append((subgraph, subgraph_dir / f"{stem}.png"))

    if config.figures:
        from .figures import save_subgraph_figure, save_table_figure

        for table, value_column, group_columns, path in figure_jobs:
            save_table_figure(table, path, value_column, group_columns)
            written.append(str(path))
        for subgraph, path in subgraph_figures:
            save_subgraph_figure(subgraph, split.inference_graph, path)
            written.append(str(path))

    return {"command": "analyze", "exported_queries": indices, "written": written}


# -- entry point ------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgrerank",
        description="Inductive KG link prediction with rule scorers and re-ranking",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ingest", "load and validate the split, write graph summaries"),
        ("mine", "mine path rules from the training graph"),
        ("score", "dump candidate scores for the configured scorers"),
        ("rerank", "run the pipeline and dump final prediction sets"),
        ("evaluate", "rank test triples and write the strategy metrics report"),
        ("analyze", "prediction-set analysis tables and subgraph exports"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, help="key-value config file")
        cmd.add_argument("--seed", type=int, help="override the run seed")
        cmd.add_argument("--workers", type=int, help="parallel workers for query scoring")
        cmd.add_argument("--hops", type=int, choices=(1, 2, 3), help="hop bound for `mine`")
        cmd.add_argument(
            "--cutoff", choices=("threshold", "topk", "kmeans", "ideal", "none")
        )
        cmd.add_argument("--combine", choices=("replace", "min", "max", "mean"))
        cmd.add_argument("--out", type=Path, help="output directory")
    return parser


def _apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.hops is not None:
        updates["mine_hops"] = args.hops
    if args.cutoff is not None:
        updates["cutoff"] = args.cutoff
    if args.combine is not None:
        updates["combine"] = args.combine
    if args.out is not None:
        updates["out"] = args.out
    return replace(config, **updates) if updates else config


_COMMANDS = {
    "ingest": cmd_ingest,
    "mine": cmd_mine,
    "score": cmd_score,
    "rerank": cmd_rerank,
    "evaluate": cmd_evaluate,
    "analyze": cmd_analyze,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        config = _apply_overrides(config, args)
        config.validate()
        if args.command == "mine":
            result = cmd_mine(config, hops=args.hops)
        else:
            result = _COMMANDS[args.command](config)
    except Exception as exc:  # final JSON error record, machine-readable code
        if isinstance(exc, ToolkitError):
            code = exc.code
        elif isinstance(exc, OSError):
            code = "IoError"
        else:
            code = type(exc).__name__
        record = {"error": {"code": code, "message": str(exc)}}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1
    print(json.dumps(result, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
