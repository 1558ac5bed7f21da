"""Structural decisions about network models: α-relations, β-classes, solvability, α-diameter."""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

import networkx as nx
import numpy as np

from .errors import ConsistencyError, ResourceLimitError, ValidationError
from .graphs import CommGraph, NetworkModel, is_nonsplit, is_rooted, roots

logger = logging.getLogger(__name__)

ORACLE_MAX_GRAPHS = 8
DEFAULT_SUBSET_CAP = 12

Fingerprint = tuple[frozenset[int], ...]


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks of model graph indices, sorted by smallest member."""

    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        blocks = tuple(sorted((frozenset(b) for b in self.blocks), key=min))
        seen: set[int] = set()
        for block in blocks:
            if not block:
                raise ValidationError("Partition blocks must be nonempty")
            if seen & block:
                raise ValidationError("Partition blocks must be disjoint")
            seen |= block
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_components(cls, components: Iterable[Iterable[int]]) -> "Partition":
        return cls(tuple(frozenset(c) for c in components))

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, index: int) -> frozenset[int]:
        for block in self.blocks:
            if index in block:
                return block
        raise ValidationError(f"Graph index {index} is not covered by the partition")

    def refines(self, other: "Partition") -> bool:
        return all(any(block <= coarse for coarse in other.blocks) for block in self.blocks)

    def as_lists(self, one_based: bool = True) -> list[list[int]]:
        offset = 1 if one_based else 0
        return [sorted(i + offset for i in block) for block in self.blocks]


@dataclass(frozen=True)
class AlphaWitness:
    g: int
    h: int
    witnesses: frozenset[int]

    @property
    def related(self) -> bool:
        return bool(self.witnesses)


@lru_cache(maxsize=256)
def root_sets(model: NetworkModel) -> tuple[frozenset[int], ...]:
    return tuple(roots(g) for g in model)


def fingerprint(graph: CommGraph, agents: Iterable[int]) -> Fingerprint:
    """The indexed family (In_j)_{j ∈ agents}, compared per agent, not as a union."""
    return tuple(graph.in_neighbors[j] for j in sorted(agents))


def alpha_related(model: NetworkModel, g: int, h: int) -> AlphaWitness:
    """All K in the model with In_{R(K)}(g) = In_{R(K)}(h)."""
    root_of = root_sets(model)
    witnesses = frozenset(
        k
        for k in range(len(model))
        if fingerprint(model[g], root_of[k]) == fingerprint(model[h], root_of[k])
    )
    return AlphaWitness(g, h, witnesses)


def _hyperedges(
    model: NetworkModel, members: Sequence[int], witnesses: Sequence[int]
) -> list[list[int]]:
    """Buckets of mutually α-related members, one bucketing per distinct witness root set."""
    root_of = root_sets(model)
    buckets: list[list[int]] = []
    for root_set in sorted({root_of[k] for k in witnesses}, key=sorted):
        grouped: dict[Fingerprint, list[int]] = defaultdict(list)
        for index in members:
            grouped[fingerprint(model[index], root_set)].append(index)
        buckets.extend(bucket for bucket in grouped.values() if len(bucket) > 1)
    return buckets


def _components(members: Sequence[int], buckets: Iterable[list[int]]) -> list[set[int]]:
    union = nx.Graph()
    union.add_nodes_from(members)
    for bucket in buckets:
        union.add_edges_from((bucket[0], other) for other in bucket[1:])
    return [set(c) for c in nx.connected_components(union)]


def alpha_star(model: NetworkModel) -> Partition:
    members = list(range(len(model)))
    return Partition.from_components(_components(members, _hyperedges(model, members, members)))


def beta_classes(model: NetworkModel) -> Partition:
    """Greatest fixed point of splitting α*-blocks by in-block witnesses."""
    partition = alpha_star(model)
    while True:
        components: list[set[int]] = []
        for block in partition.blocks:
            members = sorted(block)
            components.extend(_components(members, _hyperedges(model, members, members)))
        refined = Partition.from_components(components)
        if refined == partition:
            return partition
        logger.debug("β refinement: %d -> %d blocks", len(partition), len(refined))
        partition = refined


def closure_holds(model: NetworkModel, partition: Partition) -> bool:
    """Chain search: every block is connected by α-steps whose witness lies in the block."""
    for block in partition.blocks:
        members = sorted(block)
        chain = nx.Graph()
        chain.add_nodes_from(members)
        for g, h in itertools.combinations(members, 2):
            if alpha_related(model, g, h).witnesses & block:
                chain.add_edge(g, h)
        if not nx.is_connected(chain):
            return False
    return True


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in _set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first, *smaller[i]]] + smaller[i + 1 :]
        yield [[first], *smaller]


def beta_oracle(model: NetworkModel) -> Partition:
    """Brute force over all partitions; independent cross-check for beta_classes."""
    if len(model) > ORACLE_MAX_GRAPHS:
        raise ResourceLimitError(
            f"beta_oracle enumerates set partitions; model has {len(model)} graphs "
            f"(limit {ORACLE_MAX_GRAPHS})",
            count=len(model),
        )
    indices = list(range(len(model)))
    pairwise = nx.Graph()
    pairwise.add_nodes_from(indices)
    pairwise.add_edges_from(
        (g, h)
        for g, h in itertools.combinations(indices, 2)
        if alpha_related(model, g, h).related
    )
    star = Partition.from_components(nx.connected_components(pairwise))

    valid = [
        candidate
        for candidate in (Partition.from_components(p) for p in _set_partitions(indices))
        if candidate.refines(star) and closure_holds(model, candidate)
    ]
    fewest = min(len(p) for p in valid)
    coarsest = [p for p in valid if len(p) == fewest]
    if len(coarsest) != 1 or not all(p.refines(coarsest[0]) for p in valid):
        raise ConsistencyError(
            f"No unique coarsest closure-respecting partition among {len(valid)} candidates"
        )
    return coarsest[0]


def is_source_incompatible(graphs: Iterable[CommGraph]) -> bool:
    """True iff the root sets of the graphs have an empty intersection."""
    graphs = list(graphs)
    if not graphs:
        raise ValidationError("Source compatibility needs at least one graph")
    return not frozenset.intersection(*(roots(g) for g in graphs))


def consensus_solvable(model: NetworkModel) -> bool:
    return not any(
        is_source_incompatible(model[i] for i in block) for block in beta_classes(model).blocks
    )


def asymptotic_solvable(model: NetworkModel) -> bool:
    return all(is_rooted(g) for g in model)


def every_agent_deaf(model: NetworkModel) -> bool:
    return all(
        any(g.in_neighbors[agent] == frozenset({agent}) for g in model)
        for agent in range(model.n)
    )


def alpha_diameter(model: NetworkModel) -> float:
    """Largest shortest α-chain between two model graphs; ``math.inf`` if disconnected.

    Level-synchronous BFS from every graph at once over the hyperedge adjacency.
    A single-graph model has diameter 1 by convention.
    """
    size = len(model)
    if size == 1:
        return 1
    members = list(range(size))
    adjacency = np.eye(size, dtype=np.float32)
    for bucket in _hyperedges(model, members, members):
        adjacency[np.ix_(bucket, bucket)] = 1.0

    reach = adjacency > 0
    distance = 1
    while not reach.all():
        grown = (reach.astype(np.float32) @ adjacency) > 0
        if np.array_equal(grown, reach):
            return math.inf
        reach = grown
        distance += 1
    return distance


def min_alpha_diameter_unsolvable(
    model: NetworkModel, subset_size_cap: int = DEFAULT_SUBSET_CAP
) -> float:
    """Minimum α-diameter over submodels where exact consensus is unsolvable."""
    if len(model) > subset_size_cap:
        raise ResourceLimitError(
            f"Submodel enumeration over {len(model)} graphs exceeds the cap of "
            f"{subset_size_cap} ({2 ** len(model) - 1} subsets)",
            count=2 ** len(model) - 1,
        )
    best = math.inf
    for size in range(1, len(model) + 1):
        for chosen in itertools.combinations(range(len(model)), size):
            submodel = model.subset(chosen)
            if consensus_solvable(submodel):
                continue
            best = min(best, alpha_diameter(submodel))
            if best == 1:
                return best
    return best


def contraction_lower_bound(
    model: NetworkModel, subset_size_cap: int = DEFAULT_SUBSET_CAP
) -> tuple[float, float]:
    """(D, 1/(D+1)) for the smallest unsolvable-submodel α-diameter D; rate 0 if none."""
    diameter = min_alpha_diameter_unsolvable(model, subset_size_cap)
    if math.isinf(diameter):
        return diameter, 0.0
    return diameter, 1.0 / (diameter + 1)


def async_contraction_lower_bound(n: int, f: int) -> float:
    if not 1 <= f < n:
        raise ValidationError(f"Need 1 <= f < n, got n={n}, f={f}")
    return 1.0 / (math.ceil(n / f) + 1)


def _jsonable_diameter(value: float) -> Optional[int]:
    return None if math.isinf(value) else int(value)


def analyze_model(model: NetworkModel, subset_size_cap: int = DEFAULT_SUBSET_CAP) -> dict:
    """Report dictionary for the ``analyze`` command; graph and agent ids are 1-based."""
    star = alpha_star(model)
    beta = beta_classes(model)
    diameter = alpha_diameter(model)
    report = {
        "n": model.n,
        "graphs": len(model),
        "rooted": [is_rooted(g) for g in model],
        "nonsplit": [is_nonsplit(g) for g in model],
        "root_sets": [sorted(a + 1 for a in r) for r in root_sets(model)],
        "asymptotic_solvable": asymptotic_solvable(model),
        "alpha_star_blocks": star.as_lists(),
        "beta_blocks": beta.as_lists(),
        "source_incompatible_blocks": [
            sorted(i + 1 for i in block)
            for block in beta.blocks
            if is_source_incompatible(model[i] for i in block)
        ],
        "consensus_solvable": consensus_solvable(model),
        "alpha_diameter": _jsonable_diameter(diameter),
        "min_unsolvable_alpha_diameter": None,
        "contraction_rate_lower_bound": None,
    }
    if len(model) <= subset_size_cap:
        bound_diameter, rate = contraction_lower_bound(model, subset_size_cap)
        report["min_unsolvable_alpha_diameter"] = _jsonable_diameter(bound_diameter)
        report["contraction_rate_lower_bound"] = rate
    else:
        logger.warning(
            "Skipping submodel enumeration: %d graphs above the cap of %d",
            len(model),
            subset_size_cap,
        )
    return report
