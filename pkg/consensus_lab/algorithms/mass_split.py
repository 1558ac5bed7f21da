from dataclasses import dataclass
from typing import Optional

import networkx as nx

from ..errors import ConfigurationError, ContractError
from ..graphs import CommGraph
from .base import Point, Received, RoundAlgorithm
from .registry import registry


@dataclass(frozen=True)
class MassSplitState:
    y: Point


@registry.register
class MassSplit(RoundAlgorithm):
    """Each agent splits its value equally among its out-neighbors and sums what it gets.

    Only defined for the constant graph given at construction. Not a convex
    combination: an agent may end up outside the hull of the values it received.
    """

    CONVEX = False
    SUPPORTED_FEATURES = {"rounds", "fixed-graph"}

    def __init__(self, graph: Optional[CommGraph] = None):
        super().__init__()
        self.graph = graph
        self._shares: tuple[int, ...] = ()

    @property
    def name(self) -> str:
        return "mass-split"

    def setup(self, n: int) -> None:
        if self.graph is None:
            raise ConfigurationError("mass-split needs the fixed communication graph")
        if self.graph.n != n:
            raise ConfigurationError(f"mass-split graph has {self.graph.n} agents, run has {n}")
        digraph = self.graph.to_networkx()
        if not (nx.is_strongly_connected(digraph) and nx.is_aperiodic(digraph)):
            raise ConfigurationError("mass-split needs a strongly connected, aperiodic graph")
        super().setup(n)
        self._shares = tuple(len(self.graph.out_neighbors(j)) for j in range(n))

    def check_graph(self, graph: CommGraph) -> None:
        if graph != self.graph:
            raise ContractError(
                f"mass-split is fixed to {self.graph.label() if self.graph else '?'}, "
                f"round graph was {graph.label()}"
            )

    def initial_state(self, agent: int, value: Point) -> MassSplitState:
        return MassSplitState(tuple(value))

    def transition(self, agent: int, state: MassSplitState, received: Received) -> MassSplitState:
        parts = [tuple(c / self._shares[sender] for c in s.y) for sender, s in received]
        return MassSplitState(tuple(sum(column) for column in zip(*parts)))
