from dataclasses import dataclass, replace
from typing import Any

from .base import AsyncAlgorithm
from .registry import registry


@dataclass(frozen=True)
class MinRelayState:
    values: frozenset
    dirty: bool = True

    @property
    def y(self) -> Any:
        return min(self.values)


@registry.register
class MinRelay(AsyncAlgorithm):
    """Relay every value seen; output the minimum. Broadcasts at start and on every change."""

    SUPPORTED_FEATURES = {"async"}

    @property
    def name(self) -> str:
        return "minrelay"

    def initial_state(self, agent: int, value: Any) -> MinRelayState:
        return MinRelayState(frozenset({value}), dirty=True)

    def message(self, state: MinRelayState) -> frozenset:
        return state.values

    def on_receive(
        self, agent: int, state: MinRelayState, sender: int, payload: frozenset
    ) -> MinRelayState:
        if payload <= state.values:
            return state
        return MinRelayState(state.values | payload, dirty=True)

    def wants_broadcast(self, state: MinRelayState) -> bool:
        return state.dirty

    def after_broadcast(self, state: MinRelayState) -> MinRelayState:
        return replace(state, dirty=False)
