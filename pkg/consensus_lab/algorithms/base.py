from abc import ABC, abstractmethod
from typing import Any, ClassVar, Protocol, Sequence, runtime_checkable

from ..errors import ConfigurationError
from ..graphs import CommGraph

Point = tuple[Any, ...]
Received = Sequence[tuple[int, Any]]


@runtime_checkable
class AgentState(Protocol):
    @property
    def y(self) -> Any: ...


class Algorithm(ABC):
    SUPPORTED_FEATURES: ClassVar[set[str]] = set()  # "rounds", "async", "convex", "fixed-graph"

    @property
    @abstractmethod
    def name(self) -> str: ...

    def supports_feature(self, feature: str) -> bool:
        return feature in self.SUPPORTED_FEATURES


class RoundAlgorithm(Algorithm):
    """Full-information round algorithm: every agent applies a pure transition each round."""

    CONVEX: ClassVar[bool] = True

    def __init__(self):
        self.n = 0

    def setup(self, n: int) -> None:
        """Bind the agent count before a run; subclasses reject unsupported arities."""
        if n < 1:
            raise ConfigurationError(f"{self.name} needs at least one agent")
        self.n = n

    @abstractmethod
    def initial_state(self, agent: int, value: Point) -> Any: ...

    @abstractmethod
    def transition(self, agent: int, state: Any, received: Received) -> Any:
        """New state of ``agent`` from its own state and (sender, state) pairs sorted by sender."""

    def check_graph(self, graph: CommGraph) -> None:
        """Runtime contract on the round graph; no restriction by default."""


class AsyncAlgorithm(Algorithm):
    """Event-driven algorithm for the asynchronous simulator."""

    @abstractmethod
    def initial_state(self, agent: int, value: Any) -> Any: ...

    @abstractmethod
    def message(self, state: Any) -> Any:
        """Payload broadcast by an agent in ``state``."""

    @abstractmethod
    def on_receive(self, agent: int, state: Any, sender: int, payload: Any) -> Any: ...

    @abstractmethod
    def wants_broadcast(self, state: Any) -> bool: ...

    @abstractmethod
    def after_broadcast(self, state: Any) -> Any: ...
