"""Triple files, indexed immutable knowledge graphs, and inductive splits.

Entity and relation ids are dense integers assigned in first-appearance
order, so two loads of the same file produce identical graphs.  Every forward
relation ``r`` (even id) is paired with a materialized inverse ``r^-1`` (odd
id, ``inverse_relation(r) == r ^ 1``); adjacency indices contain both
directions while ``triple_count`` counts forward triples only.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import (
    DanglingTestEntityError,
    EntityOverlapError,
    MalformedLineError,
    ReservedRelationError,
    UnknownRelationError,
)

INVERSE_SUFFIX = "^-1"

StrTriple = tuple[str, str, str]


@dataclass(frozen=True)
class Triple:
    head: int
    relation: int
    tail: int


def inverse_relation(relation_id: int) -> int:
    return relation_id ^ 1


def is_inverse(relation_id: int) -> bool:
    return bool(relation_id & 1)


class KnowledgeGraph:
    """Immutable triple store with vocabularies and adjacency indices.

    Safe for concurrent reads; construct via :func:`build_graph`.
    """

    def __init__(
        self,
        entity_names: tuple[str, ...],
        relation_surfaces: tuple[str, ...],
        triples: tuple[Triple, ...],
        neighbors_by_relation: Mapping[tuple[int, int], tuple[int, ...]],
        out_edges: Mapping[int, tuple[tuple[int, int], ...]],
    ):
        self._entity_names = entity_names
        self._entity_ids = {name: i for i, name in enumerate(entity_names)}
        self._relation_surfaces = relation_surfaces
        self._relation_ids = {name: i for i, name in enumerate(relation_surfaces)}
        self._triples = triples
        self._neighbors_by_relation = neighbors_by_relation
        self._out_edges = out_edges

    # -- vocabulary ---------------------------------------------------------

    @property
    def entity_count(self) -> int:
        return len(self._entity_names)

    @property
    def relation_count(self) -> int:
        """Number of forward relations (inverses not counted)."""
        return len(self._relation_surfaces) // 2

    @property
    def triple_count(self) -> int:
        """Number of distinct forward triples."""
        return len(self._triples)

    @property
    def triples(self) -> tuple[Triple, ...]:
        return self._triples

    def entity_names(self) -> tuple[str, ...]:
        return self._entity_names

    def has_entity(self, name: str) -> bool:
        return name in self._entity_ids

    def entity_id(self, name: str) -> int:
        return self._entity_ids[name]

    def entity_name(self, entity_id: int) -> str:
        return self._entity_names[entity_id]

    def entity_ids(self) -> range:
        return range(len(self._entity_names))

    def has_relation(self, surface: str) -> bool:
        return surface in self._relation_ids

    def relation_id(self, surface: str) -> int:
        return self._relation_ids[surface]

    def relation_surface(self, relation_id: int) -> str:
        return self._relation_surfaces[relation_id]

    def forward_relation_surfaces(self) -> tuple[str, ...]:
        return self._relation_surfaces[::2]

    # -- adjacency ----------------------------------------------------------

    def neighbors(self, entity_id: int, relation_id: int) -> tuple[int, ...]:
        """Entities reachable from ``entity_id`` via one ``relation_id`` edge."""
        return self._neighbors_by_relation.get((entity_id, relation_id), ())

    def out_edges(self, entity_id: int) -> tuple[tuple[int, int], ...]:
        """All (relation, neighbor) pairs leaving ``entity_id``, inverses included."""
        return self._out_edges.get(entity_id, ())

    def degree(self, entity_id: int) -> int:
        """Edge count touching the entity, both directions."""
        return len(self.out_edges(entity_id))

    def has_triple(self, head: int, relation: int, tail: int) -> bool:
        return tail in self.neighbors(head, relation)

    def index_entry_count(self) -> int:
        return sum(len(v) for v in self._out_edges.values())

    def summary(self) -> dict[str, int]:
        return {
            "entities": self.entity_count,
            "relations": self.relation_count,
            "triples": self.triple_count,
        }


def parse_triple_lines(lines: Iterable[str]) -> list[StrTriple]:
    """Parse tab-separated triple lines; empty lines are skipped."""
    triples: list[StrTriple] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedLineError(line_no)
        head, relation, tail = (f.strip() for f in fields)
        if not head or not relation or not tail:
            raise MalformedLineError(line_no, "empty field")
        triples.append((head, relation, tail))
    return triples


def load_triple_file(path: str | Path) -> list[StrTriple]:
    with open(path, encoding="utf-8") as fh:
        return parse_triple_lines(fh)


def build_graph(
    raw_triples: Iterable[StrTriple], extra_relations: Iterable[str] = ()
) -> KnowledgeGraph:
    """Build an indexed graph; duplicates are dropped, inverses materialized.

    ``extra_relations`` registers relation surfaces that carry no edges (used
    for test-only relations so their queries stay expressible).
    """
    entity_names: list[str] = []
    entity_ids: dict[str, int] = {}
    relation_surfaces: list[str] = []
    relation_ids: dict[str, int] = {}

    def entity(name: str) -> int:
        eid = entity_ids.get(name)
        if eid is None:
            eid = len(entity_names)
            entity_ids[name] = eid
            entity_names.append(name)
        return eid

    def relation(surface: str) -> int:
        rid = relation_ids.get(surface)
        if rid is None:
            if surface.endswith(INVERSE_SUFFIX):
                raise ReservedRelationError(
                    f"relation {surface!r} uses the reserved inverse suffix {INVERSE_SUFFIX!r}"
                )
            rid = len(relation_surfaces)
            relation_ids[surface] = rid
            relation_surfaces.append(surface)
            relation_ids[surface + INVERSE_SUFFIX] = rid + 1
            relation_surfaces.append(surface + INVERSE_SUFFIX)
        return rid

    triples: list[Triple] = []
    seen: set[Triple] = set()
    for head, rel, tail in raw_triples:
        triple = Triple(entity(head), relation(rel), entity(tail))
        if triple not in seen:
            seen.add(triple)
            triples.append(triple)
    for rel in extra_relations:
        relation(rel)

    adjacency: dict[tuple[int, int], list[int]] = {}
    for t in triples:
        adjacency.setdefault((t.head, t.relation), []).append(t.tail)
        adjacency.setdefault((t.tail, inverse_relation(t.relation)), []).append(t.head)

    neighbors_by_relation = {
        key: tuple(sorted(vals)) for key, vals in adjacency.items()
    }
    out_lists: dict[int, list[tuple[int, int]]] = {}
    for (eid, rid), vals in neighbors_by_relation.items():
        out_lists.setdefault(eid, []).extend((rid, n) for n in vals)
    out_edges = {eid: tuple(sorted(pairs)) for eid, pairs in out_lists.items()}

    return KnowledgeGraph(
        tuple(entity_names),
        tuple(relation_surfaces),
        tuple(triples),
        neighbors_by_relation,
        out_edges,
    )


def load_graph(path: str | Path, extra_relations: Iterable[str] = ()) -> KnowledgeGraph:
    return build_graph(load_triple_file(path), extra_relations)


def serialize_triples(graph: KnowledgeGraph) -> str:
    """Forward triples as tab-separated lines, in stored (first-seen) order."""
    lines = [
        f"{graph.entity_name(t.head)}\t{graph.relation_surface(t.relation)}\t{graph.entity_name(t.tail)}"
        for t in graph.triples
    ]
    return "".join(line + "\n" for line in lines)


@dataclass(frozen=True)
class InductiveSplit:
    """A validated (train graph, inference graph, test triples) bundle.

    Test triples are expressed in the inference graph's vocabulary.
    """

    train_graph: KnowledgeGraph
    inference_graph: KnowledgeGraph
    test_triples: tuple[Triple, ...]

    def iter_test(self) -> Iterator[Triple]:
        return iter(self.test_triples)


def validate_split(
    train: KnowledgeGraph,
    inference: KnowledgeGraph,
    test: Iterable[Triple],
) -> InductiveSplit:
    """Check the inductive-split invariants and return the split.

    Inputs are never mutated.  Raises ``EntityOverlapError`` when the two
    graphs share entities, ``UnknownRelationError`` when the inference graph
    uses a relation the training graph lacks, and
    ``DanglingTestEntityError`` when a test triple references an entity
    outside the inference vocabulary.
    """
    shared = sorted(set(train.entity_names()) & set(inference.entity_names()))
    if shared:
        raise EntityOverlapError(shared)
    train_relations = set(train.forward_relation_surfaces())
    for surface in inference.forward_relation_surfaces():
        if surface not in train_relations:
            raise UnknownRelationError(surface)
    test_triples = tuple(test)
    n_entities = inference.entity_count
    for triple in test_triples:
        for eid in (triple.head, triple.tail):
            if not 0 <= eid < n_entities:
                raise DanglingTestEntityError(str(eid))
    return InductiveSplit(train, inference, test_triples)


def load_split(
    train_path: str | Path,
    inference_path: str | Path,
    test_path: str | Path,
) -> InductiveSplit:
    """Load and validate an inductive split from three triple files."""
    train = load_graph(train_path)
    inference_raw = load_triple_file(inference_path)
    test_raw = load_triple_file(test_path)

    # Test-only relations are registered in the inference vocabulary so the
    # corresponding queries stay expressible as ids.
    inference_rels = {r for _, r, _ in inference_raw}
    extra = []
    for _, rel, _ in test_raw:
        if rel not in inference_rels:
            inference_rels.add(rel)
            extra.append(rel)
    inference = build_graph(inference_raw, extra_relations=extra)

    test_triples = []
    for head, rel, tail in test_raw:
        for name in (head, tail):
            if not inference.has_entity(name):
                raise DanglingTestEntityError(name)
        test_triples.append(
            Triple(
                inference.entity_id(head),
                inference.relation_id(rel),
                inference.entity_id(tail),
            )
        )
    return validate_split(train, inference, test_triples)
