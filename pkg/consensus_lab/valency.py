"""Finite-horizon valency brackets and contraction estimates.

The valency of a configuration is the set of limits its continuations can reach.
It is estimated by enumerating short pattern prefixes and closing every leaf with
each constant continuation G^ω, recording the first agent's output once the
outputs agree up to a threshold.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .algorithms.base import RoundAlgorithm
from .engine import Configuration, apply_pattern, diameter, step
from .errors import ConvergenceBudgetError, ValidationError
from .graphs import CommGraph, NetworkModel

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_BRANCHING_CAP = 4096
DEFAULT_ROUND_BUDGET = 10**6
MAX_REFINEMENTS = 8
# refined passes close continuations well below the bound they certify
REFINE_FACTOR = 64


@dataclass(frozen=True)
class ValencyBracket:
    lower: Any
    upper: Any
    depth: int
    tol: float
    slack: Any = 0
    limit_samples: tuple = ()
    prefixes: int = 1
    sampled: bool = False

    def as_dict(self) -> dict:
        from .engine import plain_number  # pylint: disable=import-outside-toplevel

        return {
            "delta_lb": plain_number(self.lower),
            "delta_ub": plain_number(self.upper),
            "depth": self.depth,
            "tol": self.tol,
            "slack": plain_number(self.slack),
            "prefixes": self.prefixes,
            "sampled": self.sampled,
            "limit_samples": len(self.limit_samples),
        }


def _resolution_floor(config: Configuration) -> float:
    values = [c for p in config.outputs for c in p]
    if not any(isinstance(v, float) for v in values):
        return 0
    return 8 * math.ulp(max(abs(float(v)) for v in values))


def limit_estimate(
    algorithm: RoundAlgorithm,
    config: Configuration,
    graph: CommGraph,
    threshold: Any,
    round_budget: int = DEFAULT_ROUND_BUDGET,
) -> tuple:
    """Run G^ω from ``config`` until Δ(y) <= threshold and return agent 1's output."""
    for _ in range(round_budget + 1):
        if config.delta <= threshold:
            return config.outputs[0]
        config = step(algorithm, config, graph)
    raise ConvergenceBudgetError(
        f"Continuation {graph.label()} did not reach Δ <= {threshold} within {round_budget} rounds"
    )


def _leaves(
    blocks: Sequence[Sequence[CommGraph]], depth: int, cap: int, seed: Any
) -> tuple[list[tuple[int, ...]], bool]:
    count = len(blocks) ** depth
    if count <= cap:
        return list(itertools.product(range(len(blocks)), repeat=depth)), False
    logger.warning(
        "Branching cap reached: %d prefixes of depth %d, sampling %d", count, depth, cap
    )
    rng = random.Random(seed)
    return [tuple(rng.randrange(len(blocks)) for _ in range(depth)) for _ in range(cap)], True


def valency_bracket(
    algorithm: RoundAlgorithm,
    model: NetworkModel,
    config: Configuration,
    depth: int = 0,
    tol: float = DEFAULT_TOL,
    *,
    continuations: Optional[Sequence[CommGraph]] = None,
    blocks: Optional[Sequence[Sequence[CommGraph]]] = None,
    branching_cap: int = DEFAULT_BRANCHING_CAP,
    seed: Any = 0,
    round_budget: int = DEFAULT_ROUND_BUDGET,
) -> ValencyBracket:
    """Bracket δ(C) from below by sampled limits and from above by the output hull.

    ``blocks`` are the prefix steps (default: each model graph as a one-round
    block); ``continuations`` are the constant closings (default: the model).
    Thresholds are relative: first tol·Δ(y(C)), then tol·δ_lb/64 once a positive
    lower bound is known, never below a few ulps for float outputs.
    """
    if depth < 0:
        raise ValidationError(f"depth must be >= 0, got {depth}")
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    blocks = [[g] for g in model] if blocks is None else [list(b) for b in blocks]
    closings = list(model) if continuations is None else list(continuations)

    spread = config.delta
    upper = spread if algorithm.CONVEX else math.inf
    floor = _resolution_floor(config)
    prefixes, sampled = _leaves(blocks, depth, branching_cap, seed)
    leaves = [
        apply_pattern(algorithm, config, (g for i in prefix for g in blocks[i]))
        for prefix in prefixes
    ]

    threshold = max(spread * tol, floor)
    samples: list = []
    lower: Any = 0
    for attempt in range(MAX_REFINEMENTS):
        samples = [
            limit_estimate(algorithm, leaf, graph, threshold, round_budget)
            for leaf in leaves
            for graph in closings
        ]
        lower = max(diameter(samples) - 2 * threshold, 0)
        if lower <= 0:
            break
        refined = max(lower * tol / REFINE_FACTOR, floor)
        if refined * 2 > threshold:
            break
        logger.debug("bracket pass %d: δ_lb=%s, refining threshold to %s", attempt + 1, lower, refined)
        threshold = refined

    return ValencyBracket(
        lower=lower,
        upper=upper,
        depth=depth,
        tol=tol,
        slack=threshold,
        limit_samples=tuple(samples),
        prefixes=len(prefixes),
        sampled=sampled,
    )


@dataclass(frozen=True)
class ContractionSummary:
    ratios: list = field(default_factory=list)
    roots: list = field(default_factory=list)
    time_roots: list = field(default_factory=list)

    @property
    def sup_ratio(self) -> Optional[float]:
        return float(max(self.ratios)) if self.ratios else None

    @property
    def sup_root(self) -> Optional[float]:
        return max(self.roots) if self.roots else None

    @property
    def sup_time_root(self) -> Optional[float]:
        return max(self.time_roots) if self.time_roots else None

    def as_dict(self) -> dict:
        return {
            "ratios": [float(r) for r in self.ratios],
            "roots": self.roots,
            "time_roots": self.time_roots,
            "sup_ratio": self.sup_ratio,
            "sup_root": self.sup_root,
            "sup_time_root": self.sup_time_root,
        }


def contraction_estimate(
    series: Sequence[Any], times: Optional[Sequence[float]] = None
) -> ContractionSummary:
    """Per-step ratios s_t/s_(t-1) and t-th roots (s_t/s_0)^(1/t), up to the first zero.

    ``times`` gives the elapsed time of each entry (times[0] is the start); with it
    the roots are also taken per unit of time.
    """
    values = list(series)
    if times is not None and len(times) != len(values):
        raise ValidationError(f"{len(times)} times for {len(values)} series entries")
    if not values or values[0] <= 0:
        return ContractionSummary()
    ratios, roots, time_roots = [], [], []
    for t in range(1, len(values)):
        if values[t - 1] <= 0:
            break
        ratios.append(values[t] / values[t - 1])
        relative = float(values[t] / values[0])
        roots.append(relative ** (1 / t))
        if times is not None:
            elapsed = times[t] - times[0]
            if elapsed > 0:
                time_roots.append(relative ** (1 / elapsed))
    return ContractionSummary(ratios, roots, time_roots)
