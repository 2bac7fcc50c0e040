"""Fuzzy prediction sets over candidate entities: cuts and fusion operators.

A score set maps each candidate entity to a membership degree in [0, 1]; the
cut at the answer's membership has cardinality equal to the answer's
pessimistic rank, which is what ties the set view to reciprocal rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import AnswerNotInSetError, QueryMismatchError
from .kg import KnowledgeGraph

Query = tuple[int, int]  # (head entity id, relation id)

CrispEntitySet = frozenset[int]


@dataclass(frozen=True)
class FuzzyScoreSet:
    """Per-query entity memberships in [0, 1]."""

    query: Query
    memberships: Mapping[int, float]

    def __post_init__(self):
        if not self.memberships:
            raise ValueError("score set must not be empty")
        for entity, value in self.memberships.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"membership {value!r} for entity {entity} outside [0, 1]")

    def support(self) -> CrispEntitySet:
        return frozenset(self.memberships)

    def membership(self, entity: int) -> float:
        """Membership of ``entity``; absent entities have degree 0."""
        return self.memberships.get(entity, 0.0)

    def top(self, n: int) -> list[int]:
        """The n highest-membership entities, ties broken by ascending id."""
        ranked = sorted(self.memberships.items(), key=lambda kv: (-kv[1], kv[0]))
        return [entity for entity, _ in ranked[:n]]

    def __len__(self) -> int:
        return len(self.memberships)


def alpha_cut(score_set: FuzzyScoreSet, alpha: float) -> CrispEntitySet:
    """Entities with membership >= alpha."""
    return frozenset(e for e, v in score_set.memberships.items() if v >= alpha)


def answer_cut(score_set: FuzzyScoreSet, answer: int) -> CrispEntitySet:
    """The cut at the answer's own membership.

    Its cardinality is the answer's pessimistic rank (ties counted in), so
    the reciprocal of the cardinality is the answer's reciprocal rank.
    """
    if answer not in score_set.memberships:
        raise AnswerNotInSetError(f"answer entity {answer} not scored")
    return alpha_cut(score_set, score_set.memberships[answer])


def _check_same_query(a: FuzzyScoreSet, b: FuzzyScoreSet) -> None:
    if a.query != b.query:
        raise QueryMismatchError(a.query, b.query)


def _union_support(a: FuzzyScoreSet, b: FuzzyScoreSet) -> Iterable[int]:
    return sorted(set(a.memberships) | set(b.memberships))


def combine_min(a: FuzzyScoreSet, b: FuzzyScoreSet) -> FuzzyScoreSet:
    """Pointwise minimum (fuzzy intersection); absent entities count as 0."""
    _check_same_query(a, b)
    merged = {e: min(a.membership(e), b.membership(e)) for e in _union_support(a, b)}
    return FuzzyScoreSet(a.query, merged)


def combine_max(a: FuzzyScoreSet, b: FuzzyScoreSet) -> FuzzyScoreSet:
    """Pointwise maximum (fuzzy union); absent entities count as 0."""
    _check_same_query(a, b)
    merged = {e: max(a.membership(e), b.membership(e)) for e in _union_support(a, b)}
    return FuzzyScoreSet(a.query, merged)


def combine_convex(
    a: FuzzyScoreSet,
    b: FuzzyScoreSet,
    weight: float | FuzzyScoreSet = 0.5,
) -> FuzzyScoreSet:
    """Convex combination w*a + (1-w)*b, pointwise.

    ``weight`` is a constant in [0, 1] or a per-entity weight set (absent
    entities weigh 0).  The result always lies between the min and max
    combinations, whatever the weights.
    """
    _check_same_query(a, b)
    if isinstance(weight, FuzzyScoreSet):
        weight_of = weight.membership
    else:
        if not 0.0 <= weight <= 1.0:
            raise ValueError(f"weight {weight!r} outside [0, 1]")
        weight_of = lambda _e: weight  # noqa: E731
    merged = {}
    for e in _union_support(a, b):
        w = weight_of(e)
        merged[e] = w * a.membership(e) + (1.0 - w) * b.membership(e)
    return FuzzyScoreSet(a.query, merged)


def format_score_lines(score_set: FuzzyScoreSet, graph: KnowledgeGraph) -> list[str]:
    """Serialize as ``head<TAB>relation<TAB>entity<TAB>membership`` lines.

    Memberships carry 6 decimal digits; entity order is ascending id.
    """
    head, relation = score_set.query
    head_name = graph.entity_name(head)
    rel_name = graph.relation_surface(relation)
    return [
        f"{head_name}\t{rel_name}\t{graph.entity_name(e)}\t{score_set.memberships[e]:.6f}"
        for e in sorted(score_set.memberships)
    ]
