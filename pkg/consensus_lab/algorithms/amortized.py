from dataclasses import dataclass

from .base import Point, Received, RoundAlgorithm
from .midpoint import coordinate_midpoint
from .registry import registry


@dataclass(frozen=True)
class AmortizedMidpointState:
    y: Point
    low: Point
    high: Point
    phase_pos: int = 0


@registry.register
class AmortizedMidpoint(RoundAlgorithm):
    """Midpoint over phases of n-1 rounds.

    During a phase agents relay the smallest and largest phase-start outputs they
    have heard of; at the phase end y becomes their midpoint. Over rooted graphs
    every phase product is non-split, which halves the output diameter per phase.
    """

    SUPPORTED_FEATURES = {"rounds", "convex"}

    @property
    def name(self) -> str:
        return "amortized-midpoint"

    @property
    def phase_length(self) -> int:
        return max(self.n - 1, 1)

    def initial_state(self, agent: int, value: Point) -> AmortizedMidpointState:
        y = tuple(value)
        return AmortizedMidpointState(y, y, y, 0)

    def transition(
        self, agent: int, state: AmortizedMidpointState, received: Received
    ) -> AmortizedMidpointState:
        low = tuple(min(column) for column in zip(*(s.low for _, s in received)))
        high = tuple(max(column) for column in zip(*(s.high for _, s in received)))
        position = state.phase_pos + 1
        if position < self.phase_length:
            return AmortizedMidpointState(state.y, low, high, position)
        y = coordinate_midpoint([low, high])
        return AmortizedMidpointState(y, y, y, 0)
