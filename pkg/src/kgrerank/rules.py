"""Relation-path rule mining and the scorers built on top of it.

Rules are Horn-style: a body (sequence of relation surfaces, possibly
inverse) implies a head relation, with standard confidence
``support / body_count`` counted over distinct entity pairs.  Rule bodies and
heads are stored as surface strings so a rule base mined on the training
graph transfers to an inference graph with its own id assignment — the whole
point of the inductive setting.

A triple is scored by the best-confidence rule instantiated along any simple
path between its entities (the edge being predicted never serves as its own
evidence).  Candidates with no connecting path get the configured default
score instead of being skipped, so every candidate is rankable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import MalformedRecordError, ScoreOutOfRangeError
from .fuzzy import FuzzyScoreSet
from .kg import KnowledgeGraph
from .paths import collect_paths, enumerate_paths, relation_sequence_endpoints


@dataclass(frozen=True)
class Rule:
    body: tuple[str, ...]
    head: str
    confidence: float
    support: int

    def __post_init__(self):
        if not 0.0 < self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside (0, 1]")
        if self.support < 1:
            raise ValueError("support must be >= 1")


@dataclass
class RuleBase:
    """Mined rules grouped by head relation, best-confidence first."""

    rules_by_head: dict[str, tuple[Rule, ...]]
    max_hops: int
    default_score: float = 0.0
    _lookup: dict[str, dict[tuple[str, ...], float]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def rule_count(self) -> int:
        return sum(len(rules) for rules in self.rules_by_head.values())

    def all_rules(self) -> list[Rule]:
        out: list[Rule] = []
        for head in sorted(self.rules_by_head):
            out.extend(self.rules_by_head[head])
        return out

    def confidence_by_body(self, head: str) -> Mapping[tuple[str, ...], float]:
        cached = self._lookup.get(head)
        if cached is None:
            cached = {r.body: r.confidence for r in self.rules_by_head.get(head, ())}
            self._lookup[head] = cached
        return cached


def _canonical_rule_order(rule: Rule) -> tuple:
    return (-rule.confidence, -rule.support, rule.body)


def mine_rules(
    train: KnowledgeGraph,
    max_hops: int,
    min_support: int = 2,
    default_score: float = 0.0,
    max_paths: int | None = None,
) -> RuleBase:
    """Mine path rules from every training triple.

    For each triple (h, r, t), every simple path h->t of length <= max_hops
    other than the edge itself contributes its relation sequence as a
    candidate body for head r.  Support counts distinct (h, t) pairs where
    body and head co-occur; body_count counts distinct pairs connected by the
    body anywhere in the graph.  Rules below ``min_support`` are dropped.
    """
    if max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    if min_support < 1:
        raise ValueError("min_support must be >= 1")

    support_pairs: dict[tuple[str, tuple[str, ...]], set[tuple[int, int]]] = {}
    for triple in train.triples:
        paths = enumerate_paths(
            train,
            triple.head,
            triple.tail,
            max_hops,
            max_paths=max_paths,
            exclude_relation=triple.relation,
        )
        head_surface = train.relation_surface(triple.relation)
        bodies = {
            tuple(train.relation_surface(rid) for rid in p.relations) for p in paths
        }
        for body in bodies:
            support_pairs.setdefault((head_surface, body), set()).add(
                (triple.head, triple.tail)
            )

    body_counts: dict[tuple[str, ...], int] = {}

    def body_count(body: tuple[str, ...]) -> int:
        cached = body_counts.get(body)
        if cached is None:
            rel_ids = tuple(train.relation_id(s) for s in body)
            cached = sum(
                len(relation_sequence_endpoints(train, start, rel_ids))
                for start in train.entity_ids()
            )
            body_counts[body] = cached
        return cached

    grouped: dict[str, list[Rule]] = {}
    for (head, body), pairs in support_pairs.items():
        support = len(pairs)
        if support < min_support:
            continue
        rule = Rule(body, head, support / body_count(body), support)
        grouped.setdefault(head, []).append(rule)

    rules_by_head = {
        head: tuple(sorted(rules, key=_canonical_rule_order))
        for head, rules in grouped.items()
    }
    return RuleBase(rules_by_head, max_hops=max_hops, default_score=default_score)


def score_triple(
    rules: RuleBase,
    graph: KnowledgeGraph,
    head: int,
    relation: int,
    tail: int,
    max_paths: int | None = 100,
) -> float:
    """Best rule confidence over connecting paths, or the default score.

    The maximum runs over all enumerated simple paths head->tail of length
    <= ``rules.max_hops`` (capped at ``max_paths``), excluding the query edge
    itself.  Unknown query relations and path-less candidates score
    ``rules.default_score``.
    """
    head_surface = graph.relation_surface(relation)
    by_body = rules.confidence_by_body(head_surface)
    paths = enumerate_paths(
        graph, head, tail, rules.max_hops, max_paths=max_paths, exclude_relation=relation
    )
    best = None
    for path in paths:
        body = tuple(graph.relation_surface(rid) for rid in path.relations)
        confidence = by_body.get(body)
        if confidence is not None and (best is None or confidence > best):
            best = confidence
    return rules.default_score if best is None else best


class RuleScorer:
    """Scorer backed by a mined (or loaded) rule base.

    Deterministic and total: every candidate gets a score, path or no path.
    """

    def __init__(self, rules: RuleBase, max_paths: int | None = 100, label: str = ""):
        self.rules = rules
        self.max_paths = max_paths
        self.label = label or f"native-{rules.max_hops}hop"

    def score(self, graph: KnowledgeGraph, head: int, relation: int, tail: int) -> float:
        return score_triple(self.rules, graph, head, relation, tail, self.max_paths)

    def score_candidates(
        self,
        graph: KnowledgeGraph,
        head: int,
        relation: int,
        candidates: Sequence[int],
    ) -> FuzzyScoreSet:
        """Score every candidate tail for the query (head, relation, ?).

        One traversal from the head feeds all candidates, which is equivalent
        to scoring each pair separately but avoids re-walking the ball.
        """
        targets = frozenset(candidates)
        by_body = self.rules.confidence_by_body(graph.relation_surface(relation))
        buckets = collect_paths(graph, head, self.rules.max_hops, targets=targets)
        memberships: dict[int, float] = {}
        for tail in targets:
            paths = [
                p
                for p in buckets.get(tail, ())
                if p.relations != (relation,) or p.entities != (head, tail)
            ]
            if self.max_paths is not None:
                paths = paths[: self.max_paths]
            best = None
            for path in paths:
                body = tuple(graph.relation_surface(rid) for rid in path.relations)
                confidence = by_body.get(body)
                if confidence is not None and (best is None or confidence > best):
                    best = confidence
            memberships[tail] = self.rules.default_score if best is None else best
        return FuzzyScoreSet((head, relation), memberships)


class TableScorer:
    """Scorer looking up externally produced scores by surface strings.

    Missing (query, candidate) pairs score ``default_score``; later records
    for the same key override earlier ones.
    """

    def __init__(
        self,
        table: Mapping[tuple[str, str, str], float],
        default_score: float = 0.0,
        label: str = "external",
    ):
        self.table = dict(table)
        self.default_score = default_score
        self.label = label

    def score(self, graph: KnowledgeGraph, head: int, relation: int, tail: int) -> float:
        key = (
            graph.entity_name(head),
            graph.relation_surface(relation),
            graph.entity_name(tail),
        )
        return self.table.get(key, self.default_score)

    def score_candidates(
        self,
        graph: KnowledgeGraph,
        head: int,
        relation: int,
        candidates: Sequence[int],
    ) -> FuzzyScoreSet:
        memberships = {t: self.score(graph, head, relation, t) for t in set(candidates)}
        return FuzzyScoreSet((head, relation), memberships)


def load_external_scores(
    path: str | Path, default_score: float = 0.0, label: str = "external"
) -> TableScorer:
    """Load a 4-column score dump: head, relation, tail, score in [0, 1]."""
    table: dict[tuple[str, str, str], float] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise MalformedRecordError(line_no)
            head, relation, tail, score_text = (f.strip() for f in fields)
            try:
                score = float(score_text)
            except ValueError:
                raise MalformedRecordError(line_no, f"bad score {score_text!r}") from None
            if not 0.0 <= score <= 1.0:
                raise ScoreOutOfRangeError(line_no, score)
            table[(head, relation, tail)] = score
    return TableScorer(table, default_score=default_score, label=label)


def save_rules(rules: RuleBase, path: str | Path) -> None:
    """Write ``confidence<TAB>support<TAB>head<TAB>body_1,body_2,...`` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for rule in rules.all_rules():
            body = ",".join(rule.body)
            fh.write(f"{rule.confidence:.6f}\t{rule.support}\t{rule.head}\t{body}\n")


def load_rules(
    path: str | Path, default_score: float = 0.0, max_hops: int | None = None
) -> RuleBase:
    """Read a rule export back; confidences carry the file's 6-digit rounding."""
    grouped: dict[str, list[Rule]] = {}
    longest = 1
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise MalformedRecordError(line_no)
            confidence_text, support_text, head, body_text = fields
            try:
                confidence = float(confidence_text)
                support = int(support_text)
            except ValueError:
                raise MalformedRecordError(line_no, "bad confidence/support") from None
            body = tuple(body_text.split(","))
            longest = max(longest, len(body))
            grouped.setdefault(head, []).append(Rule(body, head, confidence, support))
    rules_by_head = {
        head: tuple(sorted(rules, key=_canonical_rule_order))
        for head, rules in grouped.items()
    }
    return RuleBase(
        rules_by_head,
        max_hops=max_hops if max_hops is not None else longest,
        default_score=default_score,
    )
