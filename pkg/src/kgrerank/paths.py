"""Bounded-length relation paths between entities and k-hop reachability.

Paths traverse forward and inverse edges and are simple: no entity repeats,
except that the start entity may reappear as the final endpoint (a cycle,
which is how self-queries can be supported by evidence).  All functions are
pure over the immutable graph and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import TooFewEntitiesError, UnknownEntityError
from .kg import KnowledgeGraph, Triple, is_inverse, inverse_relation


@dataclass(frozen=True)
class RelationPath:
    """Entity-free relation sequence of a path (rule-body shape)."""

    relations: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.relations)


@dataclass(frozen=True)
class PathInstance:
    """A concrete traversal: relation sequence plus the visited entities.

    ``entities`` includes the start, so ``len(entities) == len(relations)+1``.
    """

    relations: tuple[int, ...]
    entities: tuple[int, ...]

    @property
    def start(self) -> int:
        return self.entities[0]

    @property
    def end(self) -> int:
        return self.entities[-1]

    def __len__(self) -> int:
        return len(self.relations)

    def steps(self) -> tuple[Triple, ...]:
        """The traversed edges in traversal orientation."""
        return tuple(
            Triple(self.entities[i], rid, self.entities[i + 1])
            for i, rid in enumerate(self.relations)
        )

    def forward_steps(self) -> tuple[Triple, ...]:
        """The traversed edges re-oriented to their stored forward form."""
        out = []
        for step in self.steps():
            if is_inverse(step.relation):
                out.append(Triple(step.tail, inverse_relation(step.relation), step.head))
            else:
                out.append(step)
        return tuple(out)


def _check_entity(graph: KnowledgeGraph, entity_id: int) -> None:
    if not 0 <= entity_id < graph.entity_count:
        raise UnknownEntityError(entity_id)


_SORT_KEY = lambda p: (len(p.relations), p.relations, p.entities)  # noqa: E731


def collect_paths(
    graph: KnowledgeGraph,
    source: int,
    max_hops: int,
    targets: frozenset[int] | None = None,
) -> dict[int, list[PathInstance]]:
    """All simple paths from ``source`` up to ``max_hops``, bucketed by endpoint.

    When ``targets`` is given only those endpoints are recorded (the search
    still explores the whole ball; reaching a target does not stop deeper
    exploration through it toward other endpoints).  Bucket lists come back
    sorted shortest-first, then lexicographically by relation ids and entity
    ids, so truncation is deterministic.
    """
    _check_entity(graph, source)
    results: dict[int, list[PathInstance]] = {}

    def record(relations: tuple[int, ...], entities: tuple[int, ...]) -> None:
        end = entities[-1]
        if targets is None or end in targets:
            results.setdefault(end, []).append(PathInstance(relations, entities))

    def walk(node: int, relations: tuple[int, ...], entities: tuple[int, ...], visited: set[int]) -> None:
        for rid, neighbor in graph.out_edges(node):
            if neighbor == source:
                # Closing the cycle ends the path; the start never recurs
                # mid-path.
                record(relations + (rid,), entities + (neighbor,))
                continue
            if neighbor in visited:
                continue
            record(relations + (rid,), entities + (neighbor,))
            if len(relations) + 1 < max_hops:
                visited.add(neighbor)
                walk(neighbor, relations + (rid,), entities + (neighbor,), visited)
                visited.remove(neighbor)

    walk(source, (), (source,), {source})
    for bucket in results.values():
        bucket.sort(key=_SORT_KEY)
    return results


def enumerate_paths(
    graph: KnowledgeGraph,
    source: int,
    target: int,
    max_hops: int,
    max_paths: int | None = 100,
    exclude_relation: int | None = None,
) -> list[PathInstance]:
    """Simple paths from ``source`` to ``target`` of length <= ``max_hops``.

    Ordered shortest-first then lexicographically, truncated to ``max_paths``
    (``None`` disables the cap).  ``exclude_relation`` drops the single-edge
    path that traverses the edge ``(source, exclude_relation, target)``
    itself, so a query triple never serves as its own evidence.
    """
    _check_entity(graph, target)
    buckets = collect_paths(graph, source, max_hops, targets=frozenset((target,)))
    paths = buckets.get(target, [])
    if exclude_relation is not None:
        paths = [p for p in paths if p.relations != (exclude_relation,)]
    if max_paths is not None:
        paths = paths[:max_paths]
    return list(paths)


def relation_sequence_endpoints(
    graph: KnowledgeGraph, start: int, relation_ids: tuple[int, ...]
) -> set[int]:
    """Entities reachable from ``start`` by a simple path with this exact
    relation sequence."""
    _check_entity(graph, start)
    if not relation_ids:
        return {start}
    endpoints: set[int] = set()
    last = len(relation_ids) - 1

    def walk(node: int, index: int, visited: set[int]) -> None:
        for neighbor in graph.neighbors(node, relation_ids[index]):
            if index == last:
                if neighbor == start or neighbor not in visited:
                    endpoints.add(neighbor)
            elif neighbor not in visited:
                visited.add(neighbor)
                walk(neighbor, index + 1, visited)
                visited.remove(neighbor)

    walk(start, 0, {start})
    return endpoints


def k_hop_ball(graph: KnowledgeGraph, entity: int, k: int) -> set[int]:
    """Entities within k hops of ``entity`` (both edge directions)."""
    _check_entity(graph, entity)
    ball = {entity}
    frontier = [entity]
    for _ in range(k):
        next_frontier = []
        for node in frontier:
            for _, neighbor in graph.out_edges(node):
                if neighbor not in ball:
                    ball.add(neighbor)
                    next_frontier.append(neighbor)
        if not next_frontier:
            break
        frontier = next_frontier
    return ball


def k_hop_reachable(graph: KnowledgeGraph, a: int, b: int, k: int) -> bool:
    """True iff some path of length <= k connects a and b (k=0: identity).

    Symmetric because inverse edges are materialized, and monotone in k.
    """
    _check_entity(graph, a)
    _check_entity(graph, b)
    if a == b:
        return True
    if k <= 0:
        return False
    ball = {a}
    frontier = [a]
    for _ in range(k):
        next_frontier = []
        for node in frontier:
            for _, neighbor in graph.out_edges(node):
                if neighbor == b:
                    return True
                if neighbor not in ball:
                    ball.add(neighbor)
                    next_frontier.append(neighbor)
        if not next_frontier:
            return False
        frontier = next_frontier
    return False


def pairwise_reachability_fraction(
    graph: KnowledgeGraph, entities: Iterable[int], k: int
) -> float:
    """Fraction of unordered entity pairs connected within k hops."""
    members = sorted(set(entities))
    if len(members) < 2:
        raise TooFewEntitiesError("need at least 2 entities for pairwise reachability")
    balls = {e: k_hop_ball(graph, e, k) for e in members}
    reachable = 0
    total = 0
    for i, a in enumerate(members):
        for b in members[i + 1 :]:
            total += 1
            if b in balls[a]:
                reachable += 1
    return reachable / total
