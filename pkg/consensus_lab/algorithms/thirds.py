from dataclasses import dataclass

from ..errors import ConfigurationError
from .base import Point, Received, RoundAlgorithm
from .registry import registry


@dataclass(frozen=True)
class ThirdsState:
    y: Point


@registry.register
class TwoAgentThirds(RoundAlgorithm):
    """Two agents; on hearing the other agent, y ← y/3 + 2·y_other/3."""

    SUPPORTED_FEATURES = {"rounds", "convex"}

    @property
    def name(self) -> str:
        return "thirds"

    def setup(self, n: int) -> None:
        if n != 2:
            raise ConfigurationError(f"thirds runs on exactly 2 agents, got {n}")
        super().setup(n)

    def initial_state(self, agent: int, value: Point) -> ThirdsState:
        return ThirdsState(tuple(value))

    def transition(self, agent: int, state: ThirdsState, received: Received) -> ThirdsState:
        other = [s for sender, s in received if sender != agent]
        if not other:
            return state
        return ThirdsState(tuple(a / 3 + 2 * b / 3 for a, b in zip(state.y, other[0].y)))
