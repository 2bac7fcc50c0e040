"""Candidate-set construction, ranking metrics, and analysis operations.

The evaluation protocol ranks the correct tail among itself plus sampled
negatives (49 by default), using pessimistic ranking so a query's rank equals
the cardinality of the answer-level cut of its score set.  All sampling runs
on the pinned SplitMix64 stream from :mod:`kgrerank.rng`, so reports are
byte-identical across runs, platforms, and worker counts.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterable, Sequence

from .errors import AnswerNotInSetError, NotEnoughEntitiesError
from .fuzzy import FuzzyScoreSet
from .kg import InductiveSplit, KnowledgeGraph, Triple
from .paths import enumerate_paths, pairwise_reachability_fraction
from .rerank import (
    CombineStrategy,
    CutoffStrategy,
    FixedThreshold,
    RerankPipeline,
    ReplaceScores,
    Scorer,
    apply_rerank,
    select_pool,
    top_n_intersection_ratio,
    set_difference_ratio,
)
from .rng import SplitMix64, derive_seed

TEST_STREAM = 0
DEV_STREAM = 1

THRESHOLD_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass(frozen=True)
class EvalQuery:
    """One ranking task: a test triple plus its candidate tails."""

    triple: Triple
    candidates: tuple[int, ...]
    seed: int


@dataclass(frozen=True)
class EvalRow:
    """Per-strategy result: ranks in test order plus the aggregates."""

    label: str
    ranks: tuple[int, ...]
    hits_at_1: float
    mrr: float


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]
    metadata: dict

    def row(self, label: str) -> EvalRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)

    def to_json_dict(self) -> dict:
        return {
            "metadata": dict(sorted(self.metadata.items())),
            "rows": [
                {
                    "label": row.label,
                    "hits_at_1": round(row.hits_at_1, 12),
                    "mrr": round(row.mrr, 12),
                    "queries": len(row.ranks),
                    "ranks": list(row.ranks),
                }
                for row in self.rows
            ],
        }


def _aggregate(label: str, ranks: Sequence[int]) -> EvalRow:
    n = len(ranks)
    hits = sum(1 for r in ranks if r == 1) / n if n else 0.0
    mrr = math.fsum(1.0 / r for r in ranks) / n if n else 0.0
    return EvalRow(label, tuple(ranks), hits, mrr)


# -- candidate sampling -----------------------------------------------------


def sample_negatives(
    split: InductiveSplit,
    test_triple: Triple,
    n: int,
    seed: int,
    filtered: bool = True,
) -> EvalQuery:
    """Draw n negative tails uniformly without replacement.

    Negatives come from the inference-graph entities, excluding the answer
    and (when ``filtered``) any tail already linked to the head by the query
    relation in the inference graph.
    """
    graph = split.inference_graph
    known = (
        set(graph.neighbors(test_triple.head, test_triple.relation)) if filtered else set()
    )
    eligible = [
        e
        for e in graph.entity_ids()
        if e != test_triple.tail and e not in known
    ]
    if len(eligible) < n:
        raise NotEnoughEntitiesError(
            f"need {n} negatives but only {len(eligible)} eligible entities"
        )
    chosen = SplitMix64(seed).sample(eligible, n)
    return EvalQuery(test_triple, (test_triple.tail, *chosen), seed)


def build_queries(
    split: InductiveSplit,
    triples: Sequence[Triple],
    n_negatives: int,
    seed: int,
    filtered: bool = True,
    stream: int = TEST_STREAM,
) -> list[EvalQuery]:
    """Per-triple candidate sets with per-query seeds derived from the run seed."""
    return [
        sample_negatives(
            split, triple, n_negatives, derive_seed(seed, stream, index), filtered
        )
        for index, triple in enumerate(triples)
    ]


# -- ranking ----------------------------------------------------------------


def rank_of_answer(score_set: FuzzyScoreSet, answer: int) -> int:
    """Pessimistic rank: entities scoring >= the answer, ties included."""
    try:
        answer_level = score_set.memberships[answer]
    except KeyError:
        raise AnswerNotInSetError(f"answer entity {answer} not scored") from None
    return sum(1 for v in score_set.memberships.values() if v >= answer_level)


# -- scoring fan-out --------------------------------------------------------


def _score_query_with_model(
    model, graph: KnowledgeGraph, query: EvalQuery
) -> FuzzyScoreSet:
    triple = query.triple
    if isinstance(model, RerankPipeline):
        from .rerank import rerank_query

        return rerank_query(
            model, graph, triple.head, triple.relation, query.candidates, answer=triple.tail
        )
    return model.score_candidates(graph, triple.head, triple.relation, query.candidates)


def _parallel_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items, chunksize=chunksize))


def _pair_score_sets(
    scorers: Sequence[Scorer], graph: KnowledgeGraph, query: EvalQuery
) -> tuple[FuzzyScoreSet, ...]:
    triple = query.triple
    return tuple(
        scorer.score_candidates(graph, triple.head, triple.relation, query.candidates)
        for scorer in scorers
    )


def score_sets_per_query(
    scorers: Sequence[Scorer],
    graph: KnowledgeGraph,
    queries: Sequence[EvalQuery],
    workers: int = 1,
) -> list[tuple[FuzzyScoreSet, ...]]:
    """For each query, every scorer's score set over the same candidates."""
    fn = partial(_pair_score_sets, tuple(scorers), graph)
    return _parallel_map(fn, list(queries), workers)


# -- evaluation -------------------------------------------------------------


def evaluate(
    model,
    split: InductiveSplit,
    n_negatives: int = 49,
    seed: int = 0,
    workers: int = 1,
    filtered: bool = True,
    label: str | None = None,
) -> EvalReport:
    """Rank every test triple with a scorer or a full rerank pipeline."""
    queries = build_queries(split, split.test_triples, n_negatives, seed, filtered)
    fn = partial(_score_query_with_model, model, split.inference_graph)
    score_sets = _parallel_map(fn, queries, workers)
    ranks = [
        rank_of_answer(s, q.triple.tail) for s, q in zip(score_sets, queries)
    ]
    if label is None:
        label = getattr(model, "label", None) or type(model).__name__
    row = _aggregate(label, ranks)
    metadata = {"n_negatives": n_negatives, "seed": seed, "queries": len(queries)}
    return EvalReport((row,), metadata)


def evaluate_strategies(
    retriever: Scorer,
    reranker: Scorer,
    strategies: Sequence[tuple[str, CutoffStrategy, CombineStrategy]],
    split: InductiveSplit,
    n_negatives: int = 49,
    seed: int = 0,
    workers: int = 1,
    filtered: bool = True,
) -> EvalReport:
    """Evaluate many cutoff/combine variants sharing one scoring pass.

    Both scorers are deterministic per candidate, so their score sets are
    computed once per query and every strategy row is derived from the same
    two sets; this is what keeps a full ablation sweep cheap.
    """
    queries = build_queries(split, split.test_triples, n_negatives, seed, filtered)
    pairs = score_sets_per_query((retriever, reranker), split.inference_graph, queries, workers)
    ranks_by_label: dict[str, list[int]] = {label: [] for label, _, _ in strategies}
    for query, (initial, rescored) in zip(queries, pairs):
        answer = query.triple.tail
        for label, cutoff, combine in strategies:
            pool = select_pool(initial, cutoff, answer)
            final = apply_rerank(initial, rescored, pool, combine)
            ranks_by_label[label].append(rank_of_answer(final, answer))
    rows = tuple(_aggregate(label, ranks_by_label[label]) for label, _, _ in strategies)
    metadata = {
        "n_negatives": n_negatives,
        "seed": seed,
        "queries": len(queries),
        "retriever": getattr(retriever, "label", "retriever"),
        "reranker": getattr(reranker, "label", "reranker"),
    }
    return EvalReport(rows, metadata)


def fit_fixed_threshold(
    retriever: Scorer,
    reranker: Scorer,
    split: InductiveSplit,
    dev_triples: Sequence[Triple],
    combine: CombineStrategy = ReplaceScores(),
    n_negatives: int = 49,
    seed: int = 0,
    workers: int = 1,
    filtered: bool = True,
    grid: Sequence[float] = THRESHOLD_GRID,
) -> float:
    """Grid-search the fixed cutoff threshold maximizing Hits@1 on dev data.

    Ties pick the smallest threshold, scanning the grid in ascending order.
    """
    queries = build_queries(
        split, dev_triples, n_negatives, seed, filtered, stream=DEV_STREAM
    )
    pairs = score_sets_per_query((retriever, reranker), split.inference_graph, queries, workers)
    best_theta = grid[0]
    best_hits = -1.0
    for theta in grid:
        hits = 0
        for query, (initial, rescored) in zip(queries, pairs):
            pool = select_pool(initial, FixedThreshold(theta), query.triple.tail)
            final = apply_rerank(initial, rescored, pool, combine)
            if rank_of_answer(final, query.triple.tail) == 1:
                hits += 1
        if hits > best_hits:
            best_hits = hits
            best_theta = theta
    return best_theta


# -- analysis tables --------------------------------------------------------


@dataclass(frozen=True)
class AnalysisTable:
    """A small rectangular result table with CSV rendering."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def to_csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow(["" if v is None else v for v in row])
        return buffer.getvalue()


def _fmt(value: float | None) -> str | None:
    return None if value is None else f"{value:.6f}"


def intersection_ratio_table(
    scorers: Sequence[Scorer],
    split: InductiveSplit,
    n_values: Sequence[int],
    n_negatives: int = 49,
    seed: int = 0,
    workers: int = 1,
    filtered: bool = True,
) -> AnalysisTable:
    """Mean top-n overlap between every scorer pair, per n.

    Entries where n exceeds the candidate-set size stay empty (the protocol
    caps supports at 1 + n_negatives).
    """
    if len(scorers) < 2:
        raise ValueError("need at least two scorers")
    queries = build_queries(split, split.test_triples, n_negatives, seed, filtered)
    per_query = score_sets_per_query(scorers, split.inference_graph, queries, workers)
    labels = [getattr(s, "label", f"scorer{i}") for i, s in enumerate(scorers)]
    rows = []
    for n in n_values:
        for i in range(len(scorers)):
            for j in range(i + 1, len(scorers)):
                feasible = all(
                    n <= min(len(sets[i]), len(sets[j])) for sets in per_query
                )
                value = None
                if per_query and feasible:
                    value = math.fsum(
                        top_n_intersection_ratio(sets[i], sets[j], n)
                        for sets in per_query
                    ) / len(per_query)
                rows.append((n, labels[i], labels[j], _fmt(value)))
    return AnalysisTable(
        "intersection_ratio",
        ("n", "scorer_a", "scorer_b", "mean_intersection_ratio"),
        tuple(rows),
    )


def reachability_table(
    scorers: Sequence[Scorer],
    split: InductiveSplit,
    top_n: int = 10,
    k_values: Sequence[int] = (2, 3, 5),
    n_negatives: int = 49,
    seed: int = 0,
    workers: int = 1,
    filtered: bool = True,
) -> AnalysisTable:
    """Mean pairwise k-hop reachability among each scorer's top predictions."""
    if top_n < 2:
        raise ValueError("top_n must be >= 2")
    graph = split.inference_graph
    queries = build_queries(split, split.test_triples, n_negatives, seed, filtered)
    per_query = score_sets_per_query(scorers, graph, queries, workers)
    labels = [getattr(s, "label", f"scorer{i}") for i, s in enumerate(scorers)]
    rows = []
    for k in k_values:
        for index, label in enumerate(labels):
            value = None
            if per_query:
                value = math.fsum(
                    pairwise_reachability_fraction(graph, sets[index].top(top_n), k)
                    for sets in per_query
                ) / len(per_query)
            rows.append((k, label, _fmt(value)))
    return AnalysisTable(
        "reachability", ("k", "scorer", "mean_pairwise_reachability"), tuple(rows)
    )


def set_difference_table(
    scorers: Sequence[Scorer],
    split: InductiveSplit,
    top_n: int = 10,
    n_negatives: int = 49,
    seed: int = 0,
    workers: int = 1,
    filtered: bool = True,
) -> AnalysisTable:
    """Mean top-n set-difference ratio |A \\ B| / |A| per ordered scorer pair.

    The first scorer of a pair plays the initial retriever, the second the
    re-ranker, matching how the ratio predicts re-ranking gain.
    """
    queries = build_queries(split, split.test_triples, n_negatives, seed, filtered)
    per_query = score_sets_per_query(scorers, split.inference_graph, queries, workers)
    labels = [getattr(s, "label", f"scorer{i}") for i, s in enumerate(scorers)]
    rows = []
    for i in range(len(scorers)):
        for j in range(i + 1, len(scorers)):
            value = None
            if per_query:
                value = math.fsum(
                    set_difference_ratio(sets[i], sets[j], top_n) for sets in per_query
                ) / len(per_query)
            rows.append((labels[i], labels[j], _fmt(value)))
    return AnalysisTable(
        "set_difference_ratio",
        ("retriever", "reranker", "mean_set_difference_ratio"),
        tuple(rows),
    )


# -- prediction subgraph export ---------------------------------------------


@dataclass(frozen=True)
class SubgraphExport:
    """Nodes and edges connecting a query's top predictions on the graph."""

    query_head: int
    relation: int
    nodes: tuple[tuple[int, str], ...]  # (entity id, role)
    edges: tuple[Triple, ...]  # forward orientation

    def to_dot(self, graph: KnowledgeGraph) -> str:
        colors = {"query": "red", "predicted": "green", "path": "lightblue"}

        def quoted(name: str) -> str:
            return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'

        lines = ["digraph prediction_neighborhood {", "  node [style=filled];"]
        for entity, role in self.nodes:
            lines.append(
                f"  {quoted(graph.entity_name(entity))} "
                f'[role="{role}", fillcolor={colors[role]}];'
            )
        for edge in self.edges:
            lines.append(
                f"  {quoted(graph.entity_name(edge.head))} -> "
                f"{quoted(graph.entity_name(edge.tail))} "
                f"[label={quoted(graph.relation_surface(edge.relation))}];"
            )
        lines.append("}")
        return "\n".join(lines) + "\n"


def export_prediction_subgraph(
    scorer: Scorer,
    graph: KnowledgeGraph,
    head: int,
    relation: int,
    candidates: Sequence[int],
    top_n: int = 10,
    max_hops: int = 3,
    max_paths_per_pair: int | None = 100,
) -> SubgraphExport:
    """Top predictions plus the paths connecting them within ``max_hops``.

    Roles: the query head is ``query``, top predictions are ``predicted``,
    and entities appearing only on connecting paths are ``path``.
    """
    score_set = scorer.score_candidates(graph, head, relation, candidates)
    predicted = score_set.top(top_n)
    anchors = [head] + [p for p in predicted if p != head]
    edges: set[Triple] = set()
    for i in range(len(anchors)):
        for j in range(i + 1, len(anchors)):
            for path in enumerate_paths(
                graph, anchors[i], anchors[j], max_hops, max_paths=max_paths_per_pair
            ):
                edges.update(path.forward_steps())

    node_ids = set(anchors)
    for edge in edges:
        node_ids.add(edge.head)
        node_ids.add(edge.tail)
    predicted_set = set(predicted)
    nodes = []
    for entity in sorted(node_ids):
        if entity == head:
            role = "query"
        elif entity in predicted_set:
            role = "predicted"
        else:
            role = "path"
        nodes.append((entity, role))
    ordered_edges = tuple(
        sorted(edges, key=lambda t: (t.head, t.relation, t.tail))
    )
    return SubgraphExport(head, relation, tuple(nodes), ordered_edges)
