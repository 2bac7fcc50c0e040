"""Cascaded re-ranking: pool cutoffs, re-scoring, fusion, and diagnostics.

The pipeline scores all candidates with an initial retriever, truncates the
ranking into a pool with a cutoff strategy, re-scores the pool with the
re-ranker, and combines the two score sets.  Candidates outside the pool are
never discarded: they are demoted strictly below every pool member while
keeping their relative retriever order, so the full candidate set stays
rankable.

Because memberships live in [0, 1], the demoted output cannot in general keep
raw scores (a pool member may already score 0.0).  When demotion is needed
the returned memberships therefore encode the final ranking ordinally (ties
preserved, equally spaced levels); when no demotion is needed (the pool
covers all candidates, or is empty so re-ranking is a no-op) raw combined or
retriever scores are returned unchanged.  Rank-based evaluation reads
identically off either encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .errors import AnswerMissingError, AnswerNotInSetError, QueryMismatchError
from .fuzzy import (
    CrispEntitySet,
    FuzzyScoreSet,
    alpha_cut,
    answer_cut,
    combine_convex,
    combine_max,
    combine_min,
)
from .kg import KnowledgeGraph


class Scorer(Protocol):
    label: str

    def score(self, graph: KnowledgeGraph, head: int, relation: int, tail: int) -> float: ...

    def score_candidates(
        self, graph: KnowledgeGraph, head: int, relation: int, candidates: Sequence[int]
    ) -> FuzzyScoreSet: ...


# -- cutoff strategies ------------------------------------------------------


@dataclass(frozen=True)
class FixedThreshold:
    """Keep entities scoring at least theta."""

    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta {self.theta} outside [0, 1]")


@dataclass(frozen=True)
class TopK:
    """Keep the k best-scoring entities (ties broken by ascending id)."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class KMeansCutoff:
    """Cluster the scores into k groups, keep the m highest-centroid groups."""

    k: int = 5
    m: int = 3

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if not 1 <= self.m <= self.k:
            raise ValueError("m must satisfy 1 <= m <= k")


@dataclass(frozen=True)
class IdealOracle:
    """Cut exactly at the answer's position (requires the answer)."""


@dataclass(frozen=True)
class NoCutoff:
    """Keep the full candidate set."""


CutoffStrategy = FixedThreshold | TopK | KMeansCutoff | IdealOracle | NoCutoff


# -- combine strategies -----------------------------------------------------


@dataclass(frozen=True)
class ReplaceScores:
    """Re-ranker scores replace retriever scores inside the pool."""


@dataclass(frozen=True)
class MinCombine:
    """Pointwise minimum of retriever and re-ranker scores (intersection)."""


@dataclass(frozen=True)
class MaxCombine:
    """Pointwise maximum of retriever and re-ranker scores (union)."""


@dataclass(frozen=True)
class MeanCombine:
    """Convex combination weight*retriever + (1-weight)*re-ranker."""

    weight: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight {self.weight} outside [0, 1]")


CombineStrategy = ReplaceScores | MinCombine | MaxCombine | MeanCombine


@dataclass(frozen=True)
class RerankPipeline:
    retriever: Scorer
    reranker: Scorer
    cutoff: CutoffStrategy = NoCutoff()
    combine: CombineStrategy = MeanCombine(0.5)


# -- 1-D k-means ------------------------------------------------------------


def _quantile(sorted_values: Sequence[float], q: float) -> float:
    # Linear interpolation between closest ranks (numpy's default rule).
    if len(sorted_values) == 1:
        return sorted_values[0]
    position = q * (len(sorted_values) - 1)
    low = int(math.floor(position))
    high = min(low + 1, len(sorted_values) - 1)
    frac = position - low
    return sorted_values[low] + frac * (sorted_values[high] - sorted_values[low])


def kmeans_1d(
    values: Sequence[float], k: int, max_iter: int = 100
) -> list[tuple[float, list[int]]]:
    """Lloyd's algorithm on scalars with deterministic quantile seeding.

    Seeds sit at the (i + 0.5)/k quantiles; assignment ties go to the
    lower-index centroid; empty clusters keep their previous centroid.
    Returns (centroid, member indices) per cluster, in seed order.  Converges
    exactly (assignments unchanged) or stops at ``max_iter``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not values:
        raise ValueError("values must not be empty")
    ordered = sorted(values)
    centroids = [_quantile(ordered, (i + 0.5) / k) for i in range(k)]
    assignment = [-1] * len(values)
    for _ in range(max_iter):
        new_assignment = []
        for v in values:
            best = min(range(k), key=lambda j: (abs(v - centroids[j]), j))
            new_assignment.append(best)
        if new_assignment == assignment:
            break
        assignment = new_assignment
        for j in range(k):
            members = [values[i] for i in range(len(values)) if assignment[i] == j]
            if members:
                centroids[j] = math.fsum(members) / len(members)
    return [
        (centroids[j], [i for i in range(len(values)) if assignment[i] == j])
        for j in range(k)
    ]


# -- pool selection ---------------------------------------------------------


def select_pool(
    initial: FuzzyScoreSet,
    cutoff: CutoffStrategy,
    answer: int | None = None,
) -> CrispEntitySet:
    """Truncate the retriever's ranking into the candidate pool."""
    if isinstance(cutoff, NoCutoff):
        return initial.support()
    if isinstance(cutoff, FixedThreshold):
        return alpha_cut(initial, cutoff.theta)
    if isinstance(cutoff, TopK):
        return frozenset(initial.top(cutoff.k))
    if isinstance(cutoff, IdealOracle):
        if answer is None:
            raise AnswerMissingError("ideal cutoff requires the answer entity")
        if answer not in initial.memberships:
            raise AnswerMissingError("answer entity is not among the scored candidates")
        return answer_cut(initial, answer)
    if isinstance(cutoff, KMeansCutoff):
        entities = sorted(initial.memberships)
        values = [initial.memberships[e] for e in entities]
        clusters = kmeans_1d(values, cutoff.k)
        occupied = [
            (centroid, j, members)
            for j, (centroid, members) in enumerate(clusters)
            if members
        ]
        occupied.sort(key=lambda item: (-item[0], item[1]))
        pool: set[int] = set()
        for _, _, members in occupied[: cutoff.m]:
            pool.update(entities[i] for i in members)
        return frozenset(pool)
    raise TypeError(f"unknown cutoff strategy: {cutoff!r}")


# -- pipeline ---------------------------------------------------------------


def _ordinal_encoding(
    query: tuple[int, int],
    pool_scores: dict[int, float],
    outside_scores: dict[int, float],
) -> FuzzyScoreSet:
    """Encode (pool ranked by pool_scores) above (outside ranked by
    outside_scores) as equally spaced membership levels; ties share a level."""
    levels: list[list[int]] = []
    for scores in (pool_scores, outside_scores):
        by_value: dict[float, list[int]] = {}
        for entity, value in scores.items():
            by_value.setdefault(value, []).append(entity)
        for value in sorted(by_value, reverse=True):
            levels.append(by_value[value])
    total = len(levels)
    memberships: dict[int, float] = {}
    for depth, members in enumerate(levels):
        value = (total - depth) / total
        for entity in members:
            memberships[entity] = value
    return FuzzyScoreSet(query, memberships)


def apply_rerank(
    initial: FuzzyScoreSet,
    rescored: FuzzyScoreSet,
    pool: CrispEntitySet,
    combine: CombineStrategy,
) -> FuzzyScoreSet:
    """Combine retriever and re-ranker scores over a selected pool.

    ``rescored`` must cover at least the pool; scores it may carry for
    entities outside the pool are ignored.  An empty pool returns the
    retriever set unchanged (re-ranking is a no-op).
    """
    if initial.query != rescored.query:
        raise QueryMismatchError(initial.query, rescored.query)
    if not pool:
        return initial
    pool_order = sorted(pool)
    rescored_in_pool = FuzzyScoreSet(
        rescored.query, {e: rescored.memberships[e] for e in pool_order}
    )

    if isinstance(combine, ReplaceScores):
        pool_scores = dict(rescored_in_pool.memberships)
    else:
        initial_in_pool = FuzzyScoreSet(
            initial.query, {e: initial.memberships[e] for e in pool_order}
        )
        if isinstance(combine, MinCombine):
            fused = combine_min(initial_in_pool, rescored_in_pool)
        elif isinstance(combine, MaxCombine):
            fused = combine_max(initial_in_pool, rescored_in_pool)
        elif isinstance(combine, MeanCombine):
            fused = combine_convex(initial_in_pool, rescored_in_pool, combine.weight)
        else:
            raise TypeError(f"unknown combine strategy: {combine!r}")
        pool_scores = dict(fused.memberships)

    outside = {e: v for e, v in initial.memberships.items() if e not in pool}
    if not outside:
        return FuzzyScoreSet(initial.query, pool_scores)
    return _ordinal_encoding(initial.query, pool_scores, outside)


def rerank_query(
    pipeline: RerankPipeline,
    graph: KnowledgeGraph,
    head: int,
    relation: int,
    candidates: Sequence[int],
    answer: int | None = None,
) -> FuzzyScoreSet:
    """Run one query through retrieve -> cutoff -> re-score -> combine.

    The result covers every candidate.  Inside the pool, memberships follow
    the combine strategy (re-ranker scores for ReplaceScores, fuzzy fusion of
    the two scorers otherwise).  Outside the pool, candidates keep their
    retriever order but are demoted strictly below all pool members (see the
    module docstring for the membership encoding).
    """
    initial = pipeline.retriever.score_candidates(graph, head, relation, candidates)
    pool = select_pool(initial, pipeline.cutoff, answer)
    if not pool:
        return initial
    rescored = pipeline.reranker.score_candidates(graph, head, relation, sorted(pool))
    return apply_rerank(initial, rescored, pool, pipeline.combine)


# -- diagnostics ------------------------------------------------------------


def top_n_intersection_ratio(a: FuzzyScoreSet, b: FuzzyScoreSet, n: int) -> float:
    """|top-n(a) intersect top-n(b)| / n, ties broken by entity id."""
    if a.query != b.query:
        raise QueryMismatchError(a.query, b.query)
    if n < 1 or n > len(a) or n > len(b):
        raise ValueError(f"n={n} must satisfy 1 <= n <= both supports")
    return len(set(a.top(n)) & set(b.top(n))) / n


def set_difference_ratio(initial: FuzzyScoreSet, rescored: FuzzyScoreSet, n: int) -> float:
    """|top-n(initial) \\ top-n(rescored)| / |top-n(initial)|.

    High values mean the two scorers promote different entities, which is
    the regime where re-ranking has room to help.  Invariant under any
    strictly increasing rescaling of either side's memberships.
    """
    if initial.query != rescored.query:
        raise QueryMismatchError(initial.query, rescored.query)
    if n < 1 or n > len(initial) or n > len(rescored):
        raise ValueError(f"n={n} must satisfy 1 <= n <= both supports")
    top_initial = set(initial.top(n))
    top_rescored = set(rescored.top(n))
    return len(top_initial - top_rescored) / len(top_initial)


@dataclass(frozen=True)
class RerankBoundReport:
    """Set relations between the two answer cuts and the surviving pool.

    ``surviving`` is the subset of the retriever's answer cut that the
    re-ranker still places at or above the answer; its cardinality is the
    final pessimistic rank under an ideal cutoff with replaced scores.  The
    checked relations:

    - the surviving set is never larger than the re-ranker's answer cut;
    - when the re-ranker's cut is contained in the retriever's, the two
      cardinalities are equal (re-ranking cannot beat the re-ranker alone);
    - when it is not contained, the surviving set is strictly smaller
      (re-ranking beats the re-ranker alone).
    """

    retriever_cut: CrispEntitySet
    reranker_cut: CrispEntitySet
    surviving: CrispEntitySet
    upper_bound_holds: bool
    equality_case: bool | None
    strict_case: bool | None
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_rerank_bounds(
    initial: FuzzyScoreSet, rescored: FuzzyScoreSet, answer: int
) -> RerankBoundReport:
    """Check the re-ranking cardinality bounds on one fixture."""
    if initial.query != rescored.query:
        raise QueryMismatchError(initial.query, rescored.query)
    if answer not in initial.memberships or answer not in rescored.memberships:
        raise AnswerNotInSetError(f"answer entity {answer} not scored by both sets")

    retriever_cut = answer_cut(initial, answer)
    reranker_cut = answer_cut(rescored, answer)
    answer_level = rescored.memberships[answer]
    surviving = frozenset(
        t for t in retriever_cut if rescored.memberships.get(t, 0.0) >= answer_level
    )

    violations: list[str] = []
    upper = len(surviving) <= len(reranker_cut)
    if not upper:
        violations.append("surviving set larger than the re-ranker's answer cut")

    contained = reranker_cut <= retriever_cut
    equality_case: bool | None = None
    strict_case: bool | None = None
    if contained:
        equality_case = len(surviving) == len(reranker_cut)
        if not equality_case:
            violations.append("containment case did not give equal cardinalities")
    else:
        strict_case = len(surviving) < len(reranker_cut)
        if not strict_case:
            violations.append("non-containment case did not give a strict decrease")

    return RerankBoundReport(
        retriever_cut=retriever_cut,
        reranker_cut=reranker_cut,
        surviving=surviving,
        upper_bound_holds=upper,
        equality_case=equality_case,
        strict_case=strict_case,
        violations=tuple(violations),
    )
