"""Pattern sources: where the next round's communication graph comes from.

A source is replayable. The graph for round t depends only on t, the seed and
(for adaptive sources) the history passed in, never on hidden iteration state.
"""

from __future__ import annotations

import logging
import random
from abc import ABC, abstractmethod
from typing import Any, Optional, Sequence

from .errors import ContractError, ValidationError
from .graphs import (
    GRAPH_KINDS,
    CommGraph,
    NetworkModel,
    is_nonsplit,
    is_rooted,
    psi_graph,
    psi_model,
    random_graph,
)

logger = logging.getLogger(__name__)

PATTERN_KINDS = ("constant", "cyclic", "iid", "sigma", "random-rooted", "random-nonsplit")


def _round_rng(seed: Any, *parts: Any) -> random.Random:
    # string seeds hash deterministically across interpreter runs
    return random.Random("/".join(str(p) for p in (seed, *parts)))


class PatternSource(ABC):
    """Yields the graph of round t >= 1, given the execution so far."""

    def __init__(self, model: Optional[NetworkModel], seed: Any = None):
        self.model = model
        self.seed = seed

    @property
    def n(self) -> int:
        if self.model is None:
            raise ValidationError("Source has no declared model")
        return self.model.n

    @abstractmethod
    def graph_at(self, t: int, history: Any = None) -> CommGraph: ...

    def admits(self, graph: CommGraph) -> bool:
        return self.model is not None and graph in self.model

    def next_graph(self, t: int, history: Any = None) -> CommGraph:
        if t < 1:
            raise ValidationError(f"Rounds are numbered from 1, got {t}")
        graph = self.graph_at(t, history)
        if not self.admits(graph):
            raise ContractError(f"Round {t}: graph {graph.label()} is outside the declared model")
        return graph


class ConstantSource(PatternSource):
    def __init__(self, graph: CommGraph):
        super().__init__(NetworkModel((graph,)))
        self.graph = graph

    def graph_at(self, t: int, history: Any = None) -> CommGraph:
        return self.graph


class CyclicSource(PatternSource):
    def __init__(self, graphs: Sequence[CommGraph], model: Optional[NetworkModel] = None):
        if not graphs:
            raise ValidationError("A cyclic pattern needs at least one graph")
        super().__init__(model or NetworkModel(tuple(graphs)))
        self.graphs = list(graphs)

    def graph_at(self, t: int, history: Any = None) -> CommGraph:
        return self.graphs[(t - 1) % len(self.graphs)]


class RecordedSource(PatternSource):
    """Replays a finite recorded pattern; asking past its end is a contract error."""

    def __init__(self, graphs: Sequence[CommGraph], model: Optional[NetworkModel] = None):
        if model is None and not graphs:
            raise ValidationError("An empty recording needs an explicit model")
        super().__init__(model or NetworkModel(tuple(graphs)))
        self.graphs = list(graphs)

    def graph_at(self, t: int, history: Any = None) -> CommGraph:
        if t > len(self.graphs):
            raise ContractError(f"Recorded pattern exhausted after {len(self.graphs)} rounds")
        return self.graphs[t - 1]


class IidRandomSource(PatternSource):
    def __init__(self, model: NetworkModel, seed: Any):
        super().__init__(model, seed)

    def graph_at(self, t: int, history: Any = None) -> CommGraph:
        assert self.model is not None
        return _round_rng(self.seed, t).choice(self.model.graphs)


class SigmaConcatSource(PatternSource):
    """Concatenation of σ blocks: Ψ_i repeated n-2 times, with i drawn per block."""

    def __init__(self, n: int, seed: Any):
        super().__init__(psi_model(n), seed)
        self.block_length = n - 2

    def block_choice(self, block: int) -> int:
        return _round_rng(self.seed, "block", block).choice((1, 2, 3))

    def graph_at(self, t: int, history: Any = None) -> CommGraph:
        return psi_graph(self.n, self.block_choice((t - 1) // self.block_length))


class RandomClassSource(PatternSource):
    """Independent random graphs from a whole class (rooted, non-split, any), not a finite model."""

    def __init__(self, n: int, kind: str, seed: Any, density: float = 0.5):
        if kind not in GRAPH_KINDS:
            raise ValidationError(
                f"Unknown graph kind '{kind}'. Available kinds: {', '.join(GRAPH_KINDS)}"
            )
        super().__init__(None, seed)
        self._n = n
        self.kind = kind
        self.density = density

    @property
    def n(self) -> int:
        return self._n

    def graph_at(self, t: int, history: Any = None) -> CommGraph:
        return random_graph(self._n, _round_rng(self.seed, t), self.kind, self.density)

    def admits(self, graph: CommGraph) -> bool:
        if graph.n != self._n:
            return False
        if self.kind == "rooted":
            return is_rooted(graph)
        if self.kind == "nonsplit":
            return is_nonsplit(graph)
        return True


def constant(graph: CommGraph) -> ConstantSource:
    return ConstantSource(graph)


def cyclic(graphs: Sequence[CommGraph], model: Optional[NetworkModel] = None) -> CyclicSource:
    return CyclicSource(graphs, model)


def iid_random(model: NetworkModel, seed: Any) -> IidRandomSource:
    return IidRandomSource(model, seed)


def sigma_concat(n: int, seed: Any) -> SigmaConcatSource:
    return SigmaConcatSource(n, seed)


def recorded(graphs: Sequence[CommGraph], model: Optional[NetworkModel] = None) -> RecordedSource:
    return RecordedSource(graphs, model)


def random_class(n: int, kind: str, seed: Any, density: float = 0.5) -> RandomClassSource:
    return RandomClassSource(n, kind, seed, density)


def build_source(
    kind: str, model: Optional[NetworkModel], seed: Any = None, n: Optional[int] = None
) -> PatternSource:
    """Source by CLI name. ``constant`` and ``cyclic`` use the model graphs in canonical order."""
    if kind not in PATTERN_KINDS:
        raise ValidationError(
            f"Unknown pattern '{kind}'. Available patterns: {', '.join(PATTERN_KINDS)}"
        )
    if kind in ("iid", "sigma", "random-rooted", "random-nonsplit") and seed is None:
        raise ValidationError(f"Pattern '{kind}' samples graphs and needs a seed")
    if kind == "sigma":
        size = n if n is not None else (model.n if model else None)
        if size is None:
            raise ValidationError("Pattern 'sigma' needs the agent count")
        return sigma_concat(size, seed)
    if kind.startswith("random-"):
        size = n if n is not None else (model.n if model else None)
        if size is None:
            raise ValidationError(f"Pattern '{kind}' needs the agent count")
        return random_class(size, kind.removeprefix("random-"), seed)
    if model is None:
        raise ValidationError(f"Pattern '{kind}' needs a model")
    if kind == "constant":
        if len(model) != 1:
            logger.warning("constant pattern uses the first of %d model graphs", len(model))
        return constant(model[0])
    if kind == "cyclic":
        return cyclic(list(model), model)
    return iid_random(model, seed)
