"""Synthetic inductive benchmark with planted path rules.

Entities live in clusters, each wired as a small layered DAG:
layer0 -step1-> layer1 -step2-> layer2 -step3-> layer3.  A bridge relation
jumps across clusters.  Target facts are planted per connected pair, with a
different reliability per pattern:

- pairs connected by step1,step2,step3 get a target fact with high
  probability (the 3-hop rule is the most reliable),
- pairs connected by step1,step2 with medium probability,
- bridge pairs with low probability.

Because targets are decided per pair, the mined standard confidences land
close to the planted probabilities.  Longer-hop scorers are therefore both
more accurate and more locally concentrated (their supported candidates sit
inside one cluster), while bridge-supported predictions spread across
clusters — the regime the re-ranking pipeline targets.  A fraction of the
2-hop pairs also gets a direct bridge edge, so the 1-hop and 2-hop scorers
partially agree on their top predictions.

Train and inference sides use the same generative process over disjoint
entity sets; a slice of the inference-side target facts is held out as test
triples (removed from the inference graph).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .kg import StrTriple
from .rng import SplitMix64, derive_seed

STEP1, STEP2, STEP3 = "step1", "step2", "step3"
BRIDGE = "bridge"
TARGET = "target"


@dataclass(frozen=True)
class SyntheticSpec:
    clusters: int = 5
    cluster_size: int = 40
    fan: int = 3  # out-degree per node and step relation
    bridges_per_cluster: int = 12
    seed: int = 0
    # Probability that a connected pair yields a target fact, per pattern.
    p_target_3hop: float = 0.92
    p_target_2hop: float = 0.5
    p_target_1hop: float = 0.3
    # Fraction of 2-hop pairs that also get a direct bridge edge.
    dual_support: float = 0.25
    test_fraction: float = 0.4

    @property
    def entity_count(self) -> int:
        return self.clusters * self.cluster_size


def _layers(members: list[str]) -> tuple[list[str], list[str], list[str], list[str]]:
    n = len(members)
    c0 = max(1, round(0.3 * n))
    c1 = max(1, round(0.25 * n))
    c2 = max(1, round(0.25 * n))
    return (
        members[:c0],
        members[c0 : c0 + c1],
        members[c0 + c1 : c0 + c1 + c2],
        members[c0 + c1 + c2 :] or members[-1:],
    )


def _generate_side(
    spec: SyntheticSpec, prefix: str, stream: int
) -> tuple[list[StrTriple], list[StrTriple]]:
    """One graph side; returns (graph triples, held-out target triples)."""
    rng = SplitMix64(derive_seed(spec.seed, stream))
    names = [f"{prefix}{i}" for i in range(spec.entity_count)]
    clusters = [
        names[c * spec.cluster_size : (c + 1) * spec.cluster_size]
        for c in range(spec.clusters)
    ]

    triples: list[StrTriple] = []
    seen: set[StrTriple] = set()

    def add(head: str, rel: str, tail: str) -> None:
        triple = (head, rel, tail)
        if head != tail and triple not in seen:
            seen.add(triple)
            triples.append(triple)

    target_facts: list[StrTriple] = []
    targeted: set[tuple[str, str]] = set()

    def add_target(head: str, tail: str) -> None:
        if head != tail and (head, tail) not in targeted:
            targeted.add((head, tail))
            target_facts.append((head, TARGET, tail))

    two_hop_pairs: list[tuple[str, str]] = []
    three_hop_pairs: list[tuple[str, str]] = []

    for members in clusters:
        layer0, layer1, layer2, layer3 = _layers(members)
        step1: dict[str, list[str]] = {}
        step2: dict[str, list[str]] = {}
        step3: dict[str, list[str]] = {}
        for adjacency, sources, sinks, rel in (
            (step1, layer0, layer1, STEP1),
            (step2, layer1, layer2, STEP2),
            (step3, layer2, layer3, STEP3),
        ):
            for node in sources:
                outs = rng.sample(sinks, min(spec.fan, len(sinks)))
                adjacency[node] = outs
                for neighbor in outs:
                    add(node, rel, neighbor)
        for source in layer0:
            mid = {b for a in step1[source] for b in step2[a]}
            far = {c for b in mid for c in step3[b]}
            two_hop_pairs.extend((source, b) for b in sorted(mid))
            three_hop_pairs.extend((source, c) for c in sorted(far))

    for head, tail in three_hop_pairs:
        if rng.uniform() < spec.p_target_3hop:
            add_target(head, tail)
    for head, tail in two_hop_pairs:
        if rng.uniform() < spec.dual_support:
            add(head, BRIDGE, tail)
        if rng.uniform() < spec.p_target_2hop:
            add_target(head, tail)

    for c_index, members in enumerate(clusters):
        layer0 = _layers(members)[0]
        for _ in range(spec.bridges_per_cluster):
            other = rng.randrange(spec.clusters - 1)
            if other >= c_index:
                other += 1
            head = layer0[rng.randrange(len(layer0))]
            tail = clusters[other][rng.randrange(spec.cluster_size)]
            add(head, BRIDGE, tail)
            if rng.uniform() < spec.p_target_1hop:
                add_target(head, tail)

    # Hold out a deterministic slice of target facts; the rest stay as edges.
    rng.shuffle(target_facts)
    n_test = int(len(target_facts) * spec.test_fraction)
    held_out = sorted(target_facts[:n_test])
    for fact in target_facts[n_test:]:
        triples.append(fact)
    # Shuffle the listing so first-appearance entity ids are uncorrelated
    # with cluster membership (id-based tie-breaks must not leak locality).
    rng.shuffle(triples)
    return triples, held_out


def generate_split_triples(
    spec: SyntheticSpec,
) -> tuple[list[StrTriple], list[StrTriple], list[StrTriple]]:
    """(train triples, inference triples, test triples) as string triples.

    Train keeps all its target facts (they are what rule mining learns from);
    only the inference side holds targets out.
    """
    train_triples, train_held = _generate_side(spec, "tr", stream=1)
    train_triples.extend(train_held)
    inference_triples, test_triples = _generate_side(spec, "inf", stream=2)
    return train_triples, inference_triples, test_triples


def write_dataset(directory: str | Path, spec: SyntheticSpec) -> dict[str, Path]:
    """Write train/inference/test triple files; returns their paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train, inference, test = generate_split_triples(spec)
    paths = {
        "train": directory / "train.tsv",
        "inference": directory / "inference.tsv",
        "test": directory / "test.tsv",
    }
    for key, triples in (("train", train), ("inference", inference), ("test", test)):
        with open(paths[key], "w", encoding="utf-8") as fh:
            for head, rel, tail in triples:
                fh.write(f"{head}\t{rel}\t{tail}\n")
    return paths
