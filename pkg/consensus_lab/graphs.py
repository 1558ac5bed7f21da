"""Communication graphs, network models and the graph families used by the lab.

Agents are 0-based inside the library. File formats, reports and CLI output use
1-based agent numbers.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

import networkx as nx

from .errors import GraphValidationError, ResourceLimitError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_MODEL_CAP = 10**6
GRAPH_KINDS = ("any", "rooted", "nonsplit")


@dataclass(frozen=True)
class CommGraph:
    """Directed graph with a self-loop at every agent, stored as in-neighbor sets."""

    in_neighbors: tuple[frozenset[int], ...]

    def __post_init__(self):
        n = len(self.in_neighbors)
        if n < 1:
            raise GraphValidationError("A communication graph needs at least one agent")
        for agent, senders in enumerate(self.in_neighbors):
            for sender in senders:
                if not 0 <= sender < n:
                    raise GraphValidationError(
                        f"Agent {agent + 1}: in-neighbor {sender + 1} outside 1..{n}",
                        agent=agent + 1,
                    )
            if agent not in senders:
                raise GraphValidationError(
                    f"Agent {agent + 1} is missing its self-loop", agent=agent + 1
                )

    @classmethod
    def from_in_sets(cls, in_sets: Sequence[Iterable[int]]) -> "CommGraph":
        return cls(tuple(frozenset(senders) for senders in in_sets))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "CommGraph":
        """Build a graph from (sender, receiver) pairs; self-loops are added."""
        in_sets: list[set[int]] = [{agent} for agent in range(n)]
        for sender, receiver in edges:
            if not 0 <= receiver < n:
                raise GraphValidationError(
                    f"Edge target {receiver + 1} outside 1..{n}", agent=receiver + 1
                )
            in_sets[receiver].add(sender)
        return cls.from_in_sets(in_sets)

    @property
    def n(self) -> int:
        return len(self.in_neighbors)

    @cached_property
    def sorted_in(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(senders)) for senders in self.in_neighbors)

    def key(self) -> tuple[tuple[int, ...], ...]:
        """Canonical sort key used for model ordering and tie-breaking."""
        return self.sorted_in

    def out_neighbors(self, agent: int) -> frozenset[int]:
        return frozenset(i for i, senders in enumerate(self.in_neighbors) if agent in senders)

    def edges(self) -> list[tuple[int, int]]:
        """Non-self edges as (sender, receiver) pairs."""
        return sorted(
            (sender, receiver)
            for receiver, senders in enumerate(self.in_neighbors)
            for sender in senders
            if sender != receiver
        )

    def to_networkx(self) -> nx.DiGraph:
        digraph = nx.DiGraph()
        digraph.add_nodes_from(range(self.n))
        digraph.add_edges_from(
            (sender, receiver)
            for receiver, senders in enumerate(self.in_neighbors)
            for sender in senders
        )
        return digraph

    def label(self) -> str:
        """Compact 1-based rendering, e.g. ``1:1|2:1,2``."""
        return "|".join(
            f"{agent + 1}:" + ",".join(str(s + 1) for s in senders)
            for agent, senders in enumerate(self.sorted_in)
        )


@dataclass(frozen=True)
class NetworkModel:
    """Finite nonempty set of graphs over a common agent count, in canonical order."""

    graphs: tuple[CommGraph, ...]

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise ValidationError("A network model needs at least one graph")
        sizes = {g.n for g in graphs}
        if len(sizes) != 1:
            raise ValidationError(f"Model graphs disagree on agent count: {sorted(sizes)}")
        unique = {g.key(): g for g in graphs}
        object.__setattr__(self, "graphs", tuple(unique[k] for k in sorted(unique)))

    @property
    def n(self) -> int:
        return self.graphs[0].n

    def __len__(self) -> int:
        return len(self.graphs)

    def __iter__(self) -> Iterator[CommGraph]:
        return iter(self.graphs)

    def __getitem__(self, index: int) -> CommGraph:
        return self.graphs[index]

    def __contains__(self, graph: object) -> bool:
        return graph in self._positions

    @cached_property
    def _positions(self) -> dict[CommGraph, int]:
        return {g: i for i, g in enumerate(self.graphs)}

    def index(self, graph: CommGraph) -> int:
        try:
            return self._positions[graph]
        except KeyError:
            raise ValidationError(f"Graph {graph.label()} is not in the model") from None

    def subset(self, indices: Iterable[int]) -> "NetworkModel":
        return NetworkModel(tuple(self.graphs[i] for i in indices))


def _check_same_size(g: CommGraph, h: CommGraph) -> None:
    if g.n != h.n:
        raise ValidationError(f"Graph dimension mismatch: {g.n} vs {h.n} agents")


def product(g: CommGraph, h: CommGraph) -> CommGraph:
    """Graph product g∘h: edge i→j iff i→k in g and k→j in h for some k."""
    _check_same_size(g, h)
    return CommGraph(
        tuple(
            frozenset().union(*(g.in_neighbors[k] for k in h.in_neighbors[j]))
            for j in range(h.n)
        )
    )


@lru_cache(maxsize=65536)
def roots(g: CommGraph) -> frozenset[int]:
    """Agents with a directed path to every agent; empty iff g is not rooted."""
    condensed = nx.condensation(g.to_networkx())
    sources = [c for c in condensed.nodes if condensed.in_degree(c) == 0]
    if len(sources) != 1:
        return frozenset()
    return frozenset(condensed.nodes[sources[0]]["members"])


def is_rooted(g: CommGraph) -> bool:
    return bool(roots(g))


def is_nonsplit(g: CommGraph) -> bool:
    return all(
        g.in_neighbors[i] & g.in_neighbors[j]
        for i, j in itertools.combinations(range(g.n), 2)
    )


def complete_graph(n: int) -> CommGraph:
    _check_agent_count(n)
    everyone = frozenset(range(n))
    return CommGraph((everyone,) * n)


def identity_graph(n: int) -> CommGraph:
    _check_agent_count(n)
    return CommGraph(tuple(frozenset({i}) for i in range(n)))


def deaf_graph(g: CommGraph, agent: int) -> CommGraph:
    """Copy of g in which ``agent`` hears only itself."""
    in_sets = list(g.in_neighbors)
    in_sets[agent] = frozenset({agent})
    return CommGraph(tuple(in_sets))


def deaf_family(g: CommGraph) -> NetworkModel:
    return NetworkModel(tuple(deaf_graph(g, agent) for agent in range(g.n)))


def psi_graph(n: int, i: int) -> CommGraph:
    """Rooted path-shaped graph Ψ_i; ``i`` names the deaf agent among agents 1, 2, 3."""
    if n < 4:
        raise ValidationError(f"Ψ graphs need n >= 4, got {n}")
    if i not in (1, 2, 3):
        raise ValidationError(f"Ψ index must be 1, 2 or 3, got {i}")
    # 1-based edge list, converted at the end
    edges = [(j, j + 1) for j in range(4, n)]
    for other in {1, 2, 3} - {i}:
        edges.append((n, other))
        edges.append((other, 4))
    edges.append((i, 4))
    return CommGraph.from_edges(n, [(s - 1, r - 1) for s, r in edges])


def sigma_block(n: int, i: int) -> list[CommGraph]:
    """The sequence σ_i: Ψ_i repeated for n-2 rounds."""
    return [psi_graph(n, i)] * (n - 2)


def psi_model(n: int) -> NetworkModel:
    return NetworkModel(tuple(psi_graph(n, i) for i in (1, 2, 3)))


def two_agent_graph(k: int) -> CommGraph:
    """H_0 (both directions), H_1 (1→2 only) or H_2 (2→1 only)."""
    both = frozenset({0, 1})
    shapes = {
        0: (both, both),
        1: (frozenset({0}), both),
        2: (both, frozenset({1})),
    }
    if k not in shapes:
        raise ValidationError(f"Two-agent graph index must be 0, 1 or 2, got {k}")
    return CommGraph(shapes[k])


def two_agent_graphs() -> NetworkModel:
    return NetworkModel(tuple(two_agent_graph(k) for k in range(3)))


def _check_agent_count(n: int) -> None:
    if n < 1:
        raise ValidationError(f"Agent count must be >= 1, got {n}")


def _check_crash_budget(n: int, f: int) -> None:
    _check_agent_count(n)
    if not 0 <= f < n:
        raise ValidationError(f"Crash budget f must satisfy 0 <= f < n, got n={n}, f={f}")


def _async_options(n: int, f: int, agent: int) -> list[frozenset[int]]:
    others = [j for j in range(n) if j != agent]
    return [
        frozenset((agent, *chosen))
        for size in range(n - f - 1, n)
        for chosen in itertools.combinations(others, size)
    ]


def async_model_size(n: int, f: int) -> int:
    _check_crash_budget(n, f)
    per_agent = sum(math.comb(n - 1, size) for size in range(n - f - 1, n))
    return per_agent**n


def async_model(n: int, f: int, cap: int = DEFAULT_MODEL_CAP) -> NetworkModel:
    """All graphs on n agents where every in-degree is at least n-f."""
    count = async_model_size(n, f)
    if count > cap:
        raise ResourceLimitError(
            f"async_model({n}, {f}) has {count} graphs, above the cap of {cap}", count=count
        )
    options = [_async_options(n, f, agent) for agent in range(n)]
    logger.debug("Enumerating %d graphs of async_model(%d, %d)", count, n, f)
    return NetworkModel(tuple(CommGraph(combo) for combo in itertools.product(*options)))


def random_async_graph(n: int, f: int, rng: random.Random) -> CommGraph:
    """Uniform member of async_model(n, f), drawn without enumerating the model."""
    _check_crash_budget(n, f)
    sizes = list(range(n - f - 1, n))
    weights = [math.comb(n - 1, size) for size in sizes]
    in_sets = []
    for agent in range(n):
        size = rng.choices(sizes, weights=weights)[0]
        others = [j for j in range(n) if j != agent]
        in_sets.append(frozenset((agent, *rng.sample(others, size))))
    return CommGraph(tuple(in_sets))


def random_graph(
    n: int,
    rng: random.Random,
    kind: str = "any",
    density: float = 0.5,
    max_attempts: int = 10_000,
) -> CommGraph:
    """Random graph with independent non-self edges, rejected until it is of ``kind``."""
    if kind not in GRAPH_KINDS:
        raise ValidationError(f"Unknown graph kind '{kind}'. Available kinds: {', '.join(GRAPH_KINDS)}")
    accept = {"any": lambda g: True, "rooted": is_rooted, "nonsplit": is_nonsplit}[kind]
    for _ in range(max_attempts):
        graph = CommGraph(
            tuple(
                frozenset(
                    j for j in range(n) if j == agent or rng.random() < density
                )
                for agent in range(n)
            )
        )
        if accept(graph):
            return graph
    raise ResourceLimitError(
        f"No {kind} graph on {n} agents after {max_attempts} attempts (density {density})"
    )
