"""Decision-time experiments for approximate consensus.

The upper side runs a decision wrapper over many patterns and checks ε-agreement
and validity. The lower side lets an adversary keep δ_lb above ε for as long as the
matching lower bound says it must.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Any, Optional

from .adversary import (
    best_staircase_initial,
    decision_lower_bound,
    diameter_decision_lower_bound,
    greedy_adversary,
    psi_adversary,
)
from .algorithms import Regime, RoundAlgorithm, approx_wrapper, get_algorithm, parse_regime
from .engine import ProgressCallback, approx_outcome, plain_number, run
from .graphs import NetworkModel, complete_graph, deaf_family, two_agent_graphs
from .model_analysis import min_alpha_diameter_unsolvable
from .patterns import iid_random, random_class, recorded
from .valency import DEFAULT_TOL

logger = logging.getLogger(__name__)

EXHAUSTIVE_CAP = 4096


def _exact(value: Real) -> Fraction:
    return Fraction(str(value)) if isinstance(value, float) else Fraction(value)


@dataclass
class AgreementCheck:
    regime: str
    n: int
    decision_round: int
    patterns: int = 0
    exhaustive: bool = False
    max_gap: Any = 0
    all_decided: bool = True
    valid: bool = True
    eps: Any = 0

    @property
    def ok(self) -> bool:
        return self.all_decided and self.valid and self.max_gap <= self.eps

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "n": self.n,
            "decision_round": self.decision_round,
            "patterns": self.patterns,
            "exhaustive": self.exhaustive,
            "max_gap": plain_number(self.max_gap),
            "all_decided": self.all_decided,
            "valid": self.valid,
            "eps_agreement": self.ok,
        }


def check_agreement(
    regime: "str | Regime",
    n: int,
    delta: Real,
    eps: Real,
    samples: int = 1000,
    seed: Any = 0,
    progress_callback: Optional[ProgressCallback] = None,
) -> AgreementCheck:
    """Run the regime's decision wrapper; exhaustive for two agents when 3^T is small."""
    regime = parse_regime(regime)
    if regime is Regime.TWO_AGENT:
        n = 2
    algorithm = approx_wrapper(None, delta, eps, regime)
    algorithm.setup(n)
    rounds = algorithm.decision_round
    check = AgreementCheck(regime.value, n, rounds, eps=eps)

    for index, (initial, source) in enumerate(_trials(regime, n, delta, rounds, samples, seed, check)):
        execution = run(algorithm, initial, source, rounds)
        outcome = approx_outcome(execution)
        check.patterns += 1
        check.all_decided = check.all_decided and outcome.all_decided
        check.valid = check.valid and outcome.valid
        if outcome.gap is not None and outcome.gap > check.max_gap:
            check.max_gap = outcome.gap
        if progress_callback:
            progress_callback(index + 1, check.patterns if check.exhaustive else samples)
    logger.info(
        "%s: T=%d over %d patterns, max gap %s", regime.value, rounds, check.patterns, check.max_gap
    )
    return check


def _trials(regime: Regime, n: int, delta: Real, rounds: int, samples: int, seed: Any, check):
    if regime is Regime.TWO_AGENT:
        model = two_agent_graphs()
        initial = (delta - delta, delta)
        if len(model) ** rounds <= EXHAUSTIVE_CAP:
            check.exhaustive = True
            for pattern in itertools.product(model.graphs, repeat=rounds):
                yield initial, recorded(list(pattern), model)
            return
        for k in range(samples):
            yield initial, iid_random(model, f"{seed}/{k}")
        return

    kind = "nonsplit" if regime is Regime.NONSPLIT_MIDPOINT else "rooted"
    for k in range(samples):
        rng = random.Random(f"{seed}/init/{k}")
        values = [rng.uniform(0, float(delta)) for _ in range(n)]
        values[0], values[1 % n] = 0.0, float(delta)
        yield values, random_class(n, kind, f"{seed}/{k}")


@dataclass
class LowerBoundCertificate:
    regime: str
    round: Optional[int]
    eps: Any
    delta_lb: Any = None
    alpha_diameter: Optional[int] = None
    initial: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        """δ_lb > ε at the bound's round; vacuous when no round is claimed."""
        return self.round is None or (self.delta_lb is not None and self.delta_lb > self.eps)

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "lower_bound_round": self.round,
            "delta_lb_at_round": plain_number(self.delta_lb),
            "certified": self.certified,
            "alpha_diameter": self.alpha_diameter,
            "initial": [plain_number(v) for v in self.initial],
        }


def certify_lower_bound(
    regime: "str | Regime",
    n: int,
    delta: Real,
    eps: Real,
    tol: float = DEFAULT_TOL,
    progress_callback: Optional[ProgressCallback] = None,
) -> LowerBoundCertificate:
    """Run the regime's adversary up to the lower-bound round from a Δ-spread start."""
    regime = parse_regime(regime)
    if regime is Regime.TWO_AGENT:
        n = 2
    bound = decision_lower_bound(regime, n, delta, eps)
    spread = _exact(delta)
    if regime is Regime.TWO_AGENT:
        initial = [Fraction(0), spread]
    elif regime is Regime.NONSPLIT_MIDPOINT:
        initial = [spread] + [Fraction(0)] * (n - 1)
    else:
        initial = [Fraction(0), spread] + [spread / 2] * (n - 2)
    certificate = LowerBoundCertificate(regime.value, bound, eps, initial=initial)
    if bound is None:
        return certificate

    if regime is Regime.TWO_AGENT:
        execution = greedy_adversary(
            get_algorithm("thirds"), two_agent_graphs(), initial, bound, tol=tol,
            progress_callback=progress_callback,
        )
    elif regime is Regime.NONSPLIT_MIDPOINT:
        execution = greedy_adversary(
            get_algorithm("midpoint"), deaf_family(complete_graph(n)), initial, bound, tol=tol,
            progress_callback=progress_callback,
        )
    else:
        execution = psi_adversary(
            get_algorithm("amortized-midpoint"), n, initial, bound // (n - 2), tol=tol,
            progress_callback=progress_callback,
        )
    certificate.delta_lb = execution.lower_bounds()[bound]
    return certificate


def certify_diameter_lower_bound(
    model: NetworkModel,
    algorithm: RoundAlgorithm,
    delta: Real,
    eps: Real,
    tol: float = DEFAULT_TOL,
    progress_callback: Optional[ProgressCallback] = None,
) -> LowerBoundCertificate:
    """The α-diameter bound: some staircase start keeps δ_lb > ε up to ⌈log_(D+1)(Δ/(εn))⌉ - 1."""
    diameter = min_alpha_diameter_unsolvable(model)
    if math.isinf(diameter):
        return LowerBoundCertificate("alpha_diameter", None, eps)
    bound = diameter_decision_lower_bound(int(diameter), model.n, delta, eps)
    initial, _ = best_staircase_initial(algorithm, model, _exact(delta), tol)
    certificate = LowerBoundCertificate(
        "alpha_diameter", bound, eps, alpha_diameter=int(diameter), initial=list(initial)
    )
    if bound is None:
        return certificate
    execution = greedy_adversary(
        algorithm, model, initial, bound, tol=tol, progress_callback=progress_callback
    )
    certificate.delta_lb = execution.lower_bounds()[bound]
    return certificate
