"""Run configuration: CLI flags merged over an optional YAML file."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigurationError, ParseError, ValidationError

COMMANDS = ("analyze", "simulate", "adversary", "async", "approx")
ADVERSARIES = ("greedy", "psi")
DELAY_KINDS = ("constant", "random", "worst-case")
REPORT_FORMATS = ("json", "csv")


def parse_number(text: Any, exact: bool = True) -> Any:
    """'1/3' or '0.25' as a Fraction (exact) or a float."""
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return Fraction(text) if exact else float(text)
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"Not a number: {text!r}") from e
    return value if exact else float(value)


def parse_values(raw: Any, exact: bool = True) -> list:
    """Initial outputs from '0,1,1/2', a YAML list, or None."""
    if raw is None:
        return []
    items = raw.split(",") if isinstance(raw, str) else list(raw)
    return [parse_number(item, exact) for item in items if str(item).strip()]


@dataclass
class RunConfig:
    command: str
    model: Optional[str] = None
    algorithm: str = "midpoint"
    initial: list = field(default_factory=list)
    exact: bool = True
    pattern: str = "constant"
    adversary: str = "greedy"
    seed: Optional[int] = None
    tol: float = 1e-9
    depth: int = 0
    rounds: int = 10
    phases: int = 4
    n: Optional[int] = None
    branching_cap: int = 4096
    round_budget: int = 10**6
    delta: Optional[float] = None
    eps: Optional[float] = None
    regime: Optional[str] = None
    samples: int = 1000
    f: int = 0
    schedule: Optional[str] = None
    delays: str = "constant"
    horizon: float = 10.0
    round_epsilon: float = 0.0
    out_dir: Optional[str] = None
    format: str = "json"

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    @classmethod
    def from_sources(
        cls, command: str, flags: dict[str, Any], config_file: Optional[Path] = None
    ) -> "RunConfig":
        """YAML file values first, then every CLI flag that was actually given."""
        values: dict[str, Any] = {}
        if config_file is not None:
            values.update(load_yaml(config_file))
        values.update({k: v for k, v in flags.items() if v is not None})
        unknown = sorted(set(values) - cls.field_names())
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")
        values["command"] = command
        config = cls(**values)
        config.initial = parse_values(config.initial, config.exact)
        return config

    def validate(self) -> "RunConfig":
        """Check the selected command's schema before any work starts."""
        if self.command not in COMMANDS:
            raise ConfigurationError(f"Unknown command '{self.command}'")
        if self.tol <= 0:
            raise ConfigurationError(f"tol must be positive, got {self.tol}")
        if self.rounds < 0 or self.phases < 0 or self.depth < 0:
            raise ConfigurationError("rounds, phases and depth must be >= 0")
        if self.format not in REPORT_FORMATS:
            raise ConfigurationError(
                f"Unknown format '{self.format}'. Available formats: {', '.join(REPORT_FORMATS)}"
            )
        getattr(self, f"_validate_{self.command}")()
        return self

    def _require(self, *names: str) -> None:
        missing = [name for name in names if getattr(self, name) in (None, [])]
        if missing:
            raise ConfigurationError(f"{self.command} needs: {', '.join(missing)}")

    def _require_seed(self, why: str) -> None:
        if self.seed is None:
            raise ConfigurationError(f"{self.command} {why} and needs --seed")

    def _validate_analyze(self) -> None:
        self._require("model")

    def _validate_simulate(self) -> None:
        self._require("initial")
        if self.pattern in ("sigma", "random-rooted", "random-nonsplit"):
            self.n = self.n or len(self.initial)
        else:
            self._require("model")
        if self.pattern in ("iid", "sigma", "random-rooted", "random-nonsplit"):
            self._require_seed(f"samples the '{self.pattern}' pattern")

    def _validate_adversary(self) -> None:
        if self.adversary not in ADVERSARIES:
            raise ConfigurationError(
                f"Unknown adversary '{self.adversary}'. Available adversaries: {', '.join(ADVERSARIES)}"
            )
        if self.adversary == "greedy":
            self._require("model")
        else:
            self._require("initial")

    def check_prefix_sampling(self, blocks: int) -> None:
        """Brackets sample prefixes once blocks**depth exceeds the branching cap.

        Args:
            blocks: Number of one-step prefix blocks (the model size for greedy)

        Raises:
            ConfigurationError: If sampling would happen without --seed
        """
        if blocks**self.depth > self.branching_cap:
            self._require_seed(
                f"samples {self.branching_cap} of {blocks}**{self.depth} bracket prefixes"
            )

    def _validate_async(self) -> None:
        if self.algorithm.startswith("round:"):
            self._require("initial")
            self.n = self.n or len(self.initial)
        else:
            self._require("n")
        if self.initial and self.n is not None and len(self.initial) != self.n:
            raise ConfigurationError(
                f"--initial has {len(self.initial)} values but --n is {self.n}"
            )
        if self.n is not None and not 0 <= self.f < self.n:
            raise ConfigurationError(f"Need 0 <= f < n, got n={self.n}, f={self.f}")
        if self.delays not in DELAY_KINDS:
            raise ConfigurationError(
                f"Unknown delays '{self.delays}'. Available delays: {', '.join(DELAY_KINDS)}"
            )
        if self.delays == "random":
            self._require_seed("draws random delays")
        if not 0 <= self.round_epsilon < 1:
            raise ConfigurationError(f"round_epsilon must lie in [0, 1), got {self.round_epsilon}")

    def _validate_approx(self) -> None:
        self._require("regime", "delta", "eps")
        if self.eps is not None and self.eps <= 0:
            raise ConfigurationError(f"eps must be positive, got {self.eps}")
        if self.regime != "two_agent":
            self._require_seed("samples patterns")
            self._require("n")


def load_yaml(path: Path) -> dict[str, Any]:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        raise ParseError(
            f"Malformed YAML in {path}: {e.problem}",
            line=mark.line + 1 if mark else 0,
            column=mark.column + 1 if mark else 0,
        ) from e
    except yaml.YAMLError as e:
        raise ParseError(f"Malformed YAML in {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a mapping of configuration keys")
    return {str(k).replace("-", "_"): v for k, v in data.items()}
