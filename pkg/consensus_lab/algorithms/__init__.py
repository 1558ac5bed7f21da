"""Consensus algorithms; importing this package registers every named algorithm."""

from .amortized import AmortizedMidpoint, AmortizedMidpointState
from .approx import (
    REGIME_ALGORITHMS,
    ApproxAgreement,
    DecisionState,
    Regime,
    approx_wrapper,
    ceil_log,
    parse_regime,
    regime_decision_round,
)
from .base import Algorithm, AgentState, AsyncAlgorithm, Point, RoundAlgorithm
from .mass_split import MassSplit, MassSplitState
from .midpoint import Midpoint, MidpointState, coordinate_midpoint
from .minrelay import MinRelay, MinRelayState
from .registry import AlgorithmRegistry, get_algorithm, list_algorithms, registry
from .thirds import ThirdsState, TwoAgentThirds

__all__ = [
    "Algorithm",
    "AgentState",
    "AlgorithmRegistry",
    "AmortizedMidpoint",
    "AmortizedMidpointState",
    "ApproxAgreement",
    "AsyncAlgorithm",
    "DecisionState",
    "MassSplit",
    "MassSplitState",
    "Midpoint",
    "MidpointState",
    "MinRelay",
    "MinRelayState",
    "Point",
    "REGIME_ALGORITHMS",
    "Regime",
    "RoundAlgorithm",
    "ThirdsState",
    "TwoAgentThirds",
    "approx_wrapper",
    "ceil_log",
    "coordinate_midpoint",
    "get_algorithm",
    "list_algorithms",
    "parse_regime",
    "regime_decision_round",
    "registry",
]
