"""Approximate-consensus decision wrappers.

Each regime pairs a model class with the algorithm that is optimal for it. The
wrapper runs the inner algorithm for a fixed number of rounds T and then decides
on the current output.
"""

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from numbers import Real
from typing import Any, Optional

from ..errors import ConfigurationError, ContractError, ValidationError
from ..graphs import CommGraph, is_nonsplit, is_rooted
from .base import Point, Received, RoundAlgorithm


class Regime(str, Enum):
    TWO_AGENT = "two_agent"
    NONSPLIT_MIDPOINT = "nonsplit_midpoint"
    ROOTED_AMORTIZED = "rooted_amortized"


REGIME_ALGORITHMS = {
    Regime.TWO_AGENT: "thirds",
    Regime.NONSPLIT_MIDPOINT: "midpoint",
    Regime.ROOTED_AMORTIZED: "amortized-midpoint",
}


def parse_regime(value: "str | Regime") -> Regime:
    try:
        return Regime(value)
    except ValueError:
        available = ", ".join(r.value for r in Regime)
        raise ValidationError(f"Unknown regime '{value}'. Available regimes: {available}") from None


def _exact(value: Real) -> Fraction:
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def ceil_log(base: int, delta: Real, eps: Real) -> int:
    """Smallest t >= 0 with eps·base^t >= delta, i.e. ⌈log_base(delta/eps)⌉ clamped at 0.

    Floats are read through their decimal representation so that 0.1 means 1/10.
    """
    if base < 2:
        raise ValidationError(f"Logarithm base must be >= 2, got {base}")
    delta, eps = _exact(delta), _exact(eps)
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if delta < 0:
        raise ValidationError(f"delta must be nonnegative, got {delta}")
    t, reach = 0, eps
    while reach < delta:
        reach *= base
        t += 1
    return t


def regime_decision_round(regime: "str | Regime", n: int, delta: Real, eps: Real) -> int:
    regime = parse_regime(regime)
    if regime is Regime.TWO_AGENT:
        return ceil_log(3, delta, eps)
    if regime is Regime.NONSPLIT_MIDPOINT:
        return ceil_log(2, delta, eps)
    return max(n - 1, 1) * ceil_log(2, delta, eps)


@dataclass(frozen=True)
class DecisionState:
    inner: Any
    round: int = 0
    decision: Optional[Point] = None
    decided_at: Optional[int] = None

    @property
    def y(self) -> Point:
        return self.inner.y

    @property
    def decided(self) -> bool:
        return self.decision is not None


class ApproxAgreement(RoundAlgorithm):
    """Runs ``inner`` and decides its output once round T is reached."""

    SUPPORTED_FEATURES = {"rounds", "decision"}

    def __init__(self, inner: RoundAlgorithm, delta: Real, eps: Real, regime: "str | Regime"):
        super().__init__()
        self.regime = parse_regime(regime)
        expected = REGIME_ALGORITHMS[self.regime]
        if inner.name != expected:
            raise ConfigurationError(
                f"Regime {self.regime.value} runs {expected}, got {inner.name}"
            )
        self.inner = inner
        self.delta = delta
        self.eps = eps
        self.decision_round = 0

    @property
    def name(self) -> str:
        return f"approx[{self.inner.name}]"

    def setup(self, n: int) -> None:
        self.inner.setup(n)
        super().setup(n)
        self.decision_round = regime_decision_round(self.regime, n, self.delta, self.eps)

    def check_graph(self, graph: CommGraph) -> None:
        if self.regime is Regime.NONSPLIT_MIDPOINT:
            ok = is_nonsplit(graph)
        else:
            ok = is_rooted(graph)
        if not ok:
            raise ContractError(
                f"Graph {graph.label()} is outside the {self.regime.value} model class"
            )
        self.inner.check_graph(graph)

    def initial_state(self, agent: int, value: Point) -> DecisionState:
        inner = self.inner.initial_state(agent, value)
        if self.decision_round == 0:
            return DecisionState(inner, 0, inner.y, 0)
        return DecisionState(inner)

    def transition(self, agent: int, state: DecisionState, received: Received) -> DecisionState:
        inner = self.inner.transition(agent, state.inner, [(j, s.inner) for j, s in received])
        advanced = replace(state, inner=inner, round=state.round + 1)
        if not advanced.decided and advanced.round >= self.decision_round:
            return replace(advanced, decision=inner.y, decided_at=advanced.round)
        return advanced


def approx_wrapper(
    algorithm: Optional[RoundAlgorithm],
    delta: Real,
    eps: Real,
    regime: "str | Regime",
) -> ApproxAgreement:
    """Decision algorithm for ``regime``; the inner algorithm defaults to the regime's own."""
    if algorithm is None:
        # imported here: the registry is populated by the package __init__
        from .registry import get_algorithm  # pylint: disable=import-outside-toplevel

        algorithm = get_algorithm(REGIME_ALGORITHMS[parse_regime(regime)])
    return ApproxAgreement(algorithm, delta, eps, regime)
