"""Deterministic round-based execution of algorithms under communication patterns."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .algorithms.base import Point, RoundAlgorithm
from .errors import ConsistencyError, LabError, TransitionError, ValidationError
from .graphs import CommGraph, NetworkModel
from .patterns import PatternSource

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]


def as_point(value: Any) -> Point:
    """Scalars become 1-dimensional points."""
    if isinstance(value, (tuple, list)):
        return tuple(value)
    return (value,)


def diameter(points: Iterable[Any]) -> Any:
    """Largest pairwise Euclidean distance.

    For 1-dimensional points this is max - min in the points' own number type, so
    Fractions stay exact. Higher dimensions go through numpy and return a float.
    """
    pts = [as_point(p) for p in points]
    if not pts:
        raise ValidationError("Diameter of an empty set is undefined")
    dims = {len(p) for p in pts}
    if len(dims) != 1:
        raise ValidationError(f"Points disagree on dimension: {sorted(dims)}")
    if dims == {1}:
        values = [p[0] for p in pts]
        return max(values) - min(values)
    arr = np.array([[float(c) for c in p] for p in pts])
    return float(np.linalg.norm(arr[:, None, :] - arr[None, :, :], axis=-1).max())


def output_hull(points: Iterable[Any]) -> tuple[Point, Point]:
    """Coordinate-wise (min, max) box of the points."""
    columns = list(zip(*(as_point(p) for p in points)))
    return tuple(min(c) for c in columns), tuple(max(c) for c in columns)


def _inside(point: Point, hull: tuple[Point, Point]) -> bool:
    low, high = hull
    return all(lo <= c <= hi for c, lo, hi in zip(point, low, high))


@dataclass(frozen=True)
class Configuration:
    states: tuple
    round: int = 0

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def outputs(self) -> tuple[Point, ...]:
        return tuple(as_point(s.y) for s in self.states)

    @property
    def delta(self) -> Any:
        return diameter(self.outputs)


@dataclass
class Execution:
    """C_0, then (G_t, C_t) for t = 1..T with Δ(y(t)) recorded per configuration.

    ``brackets`` and ``choices`` are filled by adversaries; ``choices`` holds the
    1-based model position of each round graph when the source has a finite model.
    """

    algorithm: str
    initial: Configuration
    graphs: list[CommGraph] = field(default_factory=list)
    configurations: list[Configuration] = field(default_factory=list)
    deltas: list[Any] = field(default_factory=list)
    brackets: list[Any] = field(default_factory=list)
    choices: list[Optional[int]] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.configurations:
            self.configurations = [self.initial]
            self.deltas = [self.initial.delta]

    @property
    def rounds(self) -> int:
        return len(self.graphs)

    @property
    def final(self) -> Configuration:
        return self.configurations[-1]

    def append(self, graph: CommGraph, config: Configuration, choice: Optional[int] = None):
        self.graphs.append(graph)
        self.configurations.append(config)
        self.deltas.append(config.delta)
        self.choices.append(choice)

    def lower_bounds(self) -> list[Any]:
        """δ_lb per configuration, None where no bracket was taken."""
        padded = list(self.brackets) + [None] * (len(self.configurations) - len(self.brackets))
        return [b.lower if b is not None else None for b in padded]

    def verify(self, algorithm: RoundAlgorithm) -> None:
        """Re-derive every C_t from C_{t-1} and G_t; raise ConsistencyError on mismatch."""
        algorithm.setup(self.initial.n)
        if len(self.configurations) != len(self.graphs) + 1:
            raise ConsistencyError(
                f"{len(self.graphs)} graphs but {len(self.configurations)} configurations"
            )
        for t, graph in enumerate(self.graphs, 1):
            expected = step(algorithm, self.configurations[t - 1], graph)
            if expected != self.configurations[t]:
                raise ConsistencyError(f"Round {t}: recorded configuration differs from G_t.C_(t-1)")
        for t, config in enumerate(self.configurations):
            if self.deltas[t] != config.delta:
                raise ConsistencyError(f"Round {t}: recorded Δ does not match the outputs")

    def to_dict(self) -> dict:
        """Canonical plain-data form; identical runs give identical dicts."""
        return {
            "algorithm": self.algorithm,
            "n": self.initial.n,
            "rounds": self.rounds,
            "graphs": [g.label() for g in self.graphs],
            "choices": list(self.choices),
            "outputs": [[[plain_number(c) for c in p] for p in cfg.outputs] for cfg in self.configurations],
            "deltas": [plain_number(d) for d in self.deltas],
            "delta_lb": [plain_number(v) for v in self.lower_bounds()],
            "notes": dict(self.notes),
        }


def plain_number(value: Any) -> Any:
    """JSON-friendly number: Fractions and numpy scalars become floats, infinity a string."""
    if value is None or isinstance(value, (bool, int)):
        return value
    if isinstance(value, (Fraction, np.floating)):
        value = float(value)
    if isinstance(value, float) and value in (float("inf"), float("-inf")):
        return "inf" if value > 0 else "-inf"
    return value


def initial_configuration(
    algorithm: RoundAlgorithm, initial_outputs: Sequence[Any]
) -> Configuration:
    points = [as_point(v) for v in initial_outputs]
    if not points:
        raise ValidationError("Need at least one initial output")
    diameter(points)  # dimension check
    algorithm.setup(len(points))
    return Configuration(tuple(algorithm.initial_state(i, p) for i, p in enumerate(points)), 0)


def step(algorithm: RoundAlgorithm, config: Configuration, graph: CommGraph) -> Configuration:
    """G.C: every agent applies its transition to the states of its in-neighbors."""
    if graph.n != config.n:
        raise ValidationError(f"Graph has {graph.n} agents, configuration has {config.n}")
    algorithm.check_graph(graph)
    t = config.round + 1
    successors = []
    for agent, senders in enumerate(graph.sorted_in):
        received = [(j, config.states[j]) for j in senders]
        try:
            successors.append(algorithm.transition(agent, config.states[agent], received))
        except LabError:
            raise
        except Exception as e:
            raise TransitionError(str(e), t, agent) from e
    return Configuration(tuple(successors), t)


def apply_pattern(
    algorithm: RoundAlgorithm, config: Configuration, graphs: Iterable[CommGraph]
) -> Configuration:
    for graph in graphs:
        config = step(algorithm, config, graph)
    return config


def run(
    algorithm: RoundAlgorithm,
    initial_outputs: Sequence[Any],
    source: PatternSource,
    rounds: int,
    progress_callback: Optional[ProgressCallback] = None,
) -> Execution:
    if rounds < 0:
        raise ValidationError(f"rounds must be >= 0, got {rounds}")
    config = initial_configuration(algorithm, initial_outputs)
    if source.n != config.n:
        raise ValidationError(f"Source is over {source.n} agents, got {config.n} initial outputs")
    execution = Execution(algorithm.name, config)
    for t in range(1, rounds + 1):
        graph = source.next_graph(t, execution)
        config = step(algorithm, config, graph)
        execution.append(graph, config, _model_position(source.model, graph))
        logger.debug("round %d: %s Δ=%s", t, graph.label(), execution.deltas[-1])
        if progress_callback:
            progress_callback(t, rounds)
    return execution


def _model_position(model: Optional[NetworkModel], graph: CommGraph) -> Optional[int]:
    if model is None or graph not in model:
        return None
    return model.index(graph) + 1


def indistinguishable(a: Configuration, b: Configuration, agent: int) -> bool:
    """C ∼_i C': agent i is in the same local state in both."""
    if a.n != b.n:
        raise ValidationError(f"Configurations have {a.n} and {b.n} agents")
    return a.states[agent] == b.states[agent]


def staircase_configurations(n: int, delta: Real) -> list[tuple]:
    """Initial outputs with ``delta`` on agents 1..k and 0 elsewhere, for k = 0..n."""
    zero = delta - delta
    return [tuple([delta] * k + [zero] * (n - k)) for k in range(n + 1)]


def hull_nested(execution: Execution) -> bool:
    """True iff the output box never grows from one configuration to the next."""
    previous = output_hull(execution.configurations[0].outputs)
    for config in execution.configurations[1:]:
        current = output_hull(config.outputs)
        if not (_inside(current[0], previous) and _inside(current[1], previous)):
            return False
        previous = current
    return True


@dataclass(frozen=True)
class HullExit:
    round: int
    agent: int
    value: Point
    low: Point
    high: Point

    def as_dict(self) -> dict:
        return {
            "round": self.round,
            "agent": self.agent + 1,
            "value": [plain_number(c) for c in self.value],
            "received_low": [plain_number(c) for c in self.low],
            "received_high": [plain_number(c) for c in self.high],
        }


def received_hull_exits(execution: Execution) -> list[HullExit]:
    """Agents whose new output lies outside the box of the outputs they just received."""
    exits = []
    for t, graph in enumerate(execution.graphs, 1):
        before = execution.configurations[t - 1].outputs
        after = execution.configurations[t].outputs
        for agent, senders in enumerate(graph.sorted_in):
            hull = output_hull(before[j] for j in senders)
            if not _inside(after[agent], hull):
                exits.append(HullExit(t, agent, after[agent], hull[0], hull[1]))
    return exits


@dataclass(frozen=True)
class ApproxOutcome:
    decisions: tuple[Optional[Point], ...]
    decided_at: tuple[Optional[int], ...]
    gap: Any
    valid: bool

    @property
    def all_decided(self) -> bool:
        return all(d is not None for d in self.decisions)


def approx_outcome(execution: Execution) -> ApproxOutcome:
    """Decisions at the end of a wrapped run, their spread and whether they lie in the initial hull."""
    states = execution.final.states
    decisions = tuple(getattr(s, "decision", None) for s in states)
    made = [d for d in decisions if d is not None]
    hull = output_hull(execution.initial.outputs)
    return ApproxOutcome(
        decisions=decisions,
        decided_at=tuple(getattr(s, "decided_at", None) for s in states),
        gap=diameter(made) if made else None,
        valid=all(_inside(as_point(d), hull) for d in made),
    )
