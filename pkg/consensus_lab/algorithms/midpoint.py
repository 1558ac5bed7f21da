from dataclasses import dataclass

from .base import Point, Received, RoundAlgorithm
from .registry import registry


@dataclass(frozen=True)
class MidpointState:
    y: Point


def coordinate_midpoint(points: list[Point]) -> Point:
    """(min + max)/2 per coordinate; the canonical rule for d = 1."""
    return tuple((min(column) + max(column)) / 2 for column in zip(*points))


@registry.register
class Midpoint(RoundAlgorithm):
    SUPPORTED_FEATURES = {"rounds", "convex"}

    @property
    def name(self) -> str:
        return "midpoint"

    def initial_state(self, agent: int, value: Point) -> MidpointState:
        return MidpointState(tuple(value))

    def transition(self, agent: int, state: MidpointState, received: Received) -> MidpointState:
        # own value arrives through the self-loop
        return MidpointState(coordinate_midpoint([s.y for _, s in received]))
