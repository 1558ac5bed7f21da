"""Adversaries that realize lower bounds on contraction rates and decision times."""

from __future__ import annotations

import logging
from numbers import Real
from typing import Any, Optional, Sequence

from .algorithms.approx import Regime, ceil_log, parse_regime
from .algorithms.base import RoundAlgorithm
from .engine import (
    Configuration,
    Execution,
    ProgressCallback,
    apply_pattern,
    initial_configuration,
    staircase_configurations,
    step,
)
from .errors import ValidationError
from .graphs import NetworkModel, psi_model, sigma_block
from .valency import (
    DEFAULT_BRANCHING_CAP,
    DEFAULT_ROUND_BUDGET,
    DEFAULT_TOL,
    ValencyBracket,
    valency_bracket,
)

logger = logging.getLogger(__name__)


def greedy_adversary(
    algorithm: RoundAlgorithm,
    model: NetworkModel,
    initial_outputs: Sequence[Any],
    rounds: int,
    depth: int = 0,
    tol: float = DEFAULT_TOL,
    *,
    branching_cap: int = DEFAULT_BRANCHING_CAP,
    seed: Any = 0,
    round_budget: int = DEFAULT_ROUND_BUDGET,
    progress_callback: Optional[ProgressCallback] = None,
) -> Execution:
    """Each round, pick the model graph whose successor has the largest δ_lb.

    Ties go to the earliest graph in canonical model order.
    """
    if rounds < 0:
        raise ValidationError(f"rounds must be >= 0, got {rounds}")
    config = initial_configuration(algorithm, initial_outputs)
    if config.n != model.n:
        raise ValidationError(f"Model is over {model.n} agents, got {config.n} initial outputs")

    def bracket(c: Configuration) -> ValencyBracket:
        return valency_bracket(
            algorithm,
            model,
            c,
            depth,
            tol,
            branching_cap=branching_cap,
            seed=seed,
            round_budget=round_budget,
        )

    execution = Execution(algorithm.name, config)
    execution.brackets.append(bracket(config))
    for t in range(1, rounds + 1):
        best: Optional[tuple[int, Configuration, ValencyBracket]] = None
        for index, graph in enumerate(model):
            successor = step(algorithm, config, graph)
            candidate = bracket(successor)
            if best is None or candidate.lower > best[2].lower:
                best = (index, successor, candidate)
        assert best is not None
        index, config, chosen = best
        execution.append(model[index], config, index + 1)
        execution.brackets.append(chosen)
        logger.debug("round %d: chose graph %d, δ_lb=%s", t, index + 1, chosen.lower)
        if progress_callback:
            progress_callback(t, rounds)
    return execution


def psi_adversary(
    algorithm: RoundAlgorithm,
    n: int,
    initial_outputs: Sequence[Any],
    phases: int,
    tol: float = DEFAULT_TOL,
    *,
    round_budget: int = DEFAULT_ROUND_BUDGET,
    progress_callback: Optional[ProgressCallback] = None,
) -> Execution:
    """Commit phase by phase to the σ block (Ψ_i for n-2 rounds) maximizing phase-end δ_lb.

    Brackets close with the constant Ψ continuations and are recorded at phase
    boundaries only. ``notes["sigma"]`` lists the chosen i per phase.
    """
    if n < 4:
        raise ValidationError(f"The Ψ adversary needs n >= 4, got {n}")
    if phases < 0:
        raise ValidationError(f"phases must be >= 0, got {phases}")
    model = psi_model(n)
    config = initial_configuration(algorithm, initial_outputs)
    if config.n != n:
        raise ValidationError(f"Expected {n} initial outputs, got {config.n}")
    blocks = {i: sigma_block(n, i) for i in (1, 2, 3)}

    def bracket(c: Configuration) -> ValencyBracket:
        return valency_bracket(
            algorithm, model, c, 0, tol, continuations=list(model), round_budget=round_budget
        )

    execution = Execution(algorithm.name, config)
    execution.brackets.append(bracket(config))
    execution.notes["sigma"] = []
    execution.notes["phase_length"] = n - 2
    for phase in range(1, phases + 1):
        best: Optional[tuple[int, ValencyBracket]] = None
        for i, block in blocks.items():
            candidate = bracket(apply_pattern(algorithm, config, block))
            if best is None or candidate.lower > best[1].lower:
                best = (i, candidate)
        assert best is not None
        choice, chosen = best
        for graph in blocks[choice]:
            config = step(algorithm, config, graph)
            execution.append(graph, config, model.index(graph) + 1)
            execution.brackets.append(None)
        execution.brackets[-1] = chosen
        execution.notes["sigma"].append(choice)
        logger.info("phase %d: committed σ_%d, δ_lb=%s", phase, choice, chosen.lower)
        if progress_callback:
            progress_callback(phase, phases)
    return execution


def best_staircase_initial(
    algorithm: RoundAlgorithm,
    model: NetworkModel,
    delta: Real,
    tol: float = DEFAULT_TOL,
    *,
    continuations=None,
    round_budget: int = DEFAULT_ROUND_BUDGET,
) -> tuple[tuple, ValencyBracket]:
    """The staircase initial outputs with the largest δ_lb; one of them reaches Δ/n."""
    best: Optional[tuple[tuple, ValencyBracket]] = None
    for outputs in staircase_configurations(model.n, delta):
        config = initial_configuration(algorithm, outputs)
        candidate = valency_bracket(
            algorithm, model, config, 0, tol, continuations=continuations, round_budget=round_budget
        )
        if best is None or candidate.lower > best[1].lower:
            best = (outputs, candidate)
    assert best is not None
    return best


def decision_lower_bound(
    regime: "str | Regime", n: int, delta: Real, eps: Real
) -> Optional[int]:
    """Latest round at which some execution still has δ > ε; None if even round 0 has not."""
    regime = parse_regime(regime)
    if regime is Regime.TWO_AGENT:
        bound = ceil_log(3, delta, eps) - 1
    elif regime is Regime.NONSPLIT_MIDPOINT:
        bound = ceil_log(2, delta, eps) - 1
    else:
        if n < 4:
            raise ValidationError(f"The rooted lower bound is shown with Ψ graphs, needs n >= 4, got {n}")
        bound = (n - 2) * (ceil_log(2, delta, eps) - 1)
    return bound if bound >= 0 else None


def diameter_decision_lower_bound(
    alpha_diameter: int, n: int, delta: Real, eps: Real
) -> Optional[int]:
    """Same, for a model whose unsolvable part has α-diameter D: ⌈log_(D+1)(Δ/(εn))⌉ - 1."""
    if alpha_diameter < 1:
        raise ValidationError(f"α-diameter must be >= 1, got {alpha_diameter}")
    bound = ceil_log(alpha_diameter + 1, delta, eps * n) - 1
    return bound if bound >= 0 else None
