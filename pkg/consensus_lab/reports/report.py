from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class SeriesRow:
    """One configuration of a run; ``round`` 0 is the initial configuration."""

    round: int
    graph_id: Optional[int]
    outputs: list[Any]
    delta: Any
    delta_lb: Any = None
    delta_ub: Any = None
    ratio: Any = None
    decision: Optional[list[Any]] = None


@dataclass
class Report:
    command: str
    summary: dict[str, Any] = field(default_factory=dict)
    rows: list[SeriesRow] = field(default_factory=list)
    events: list[dict[str, Any]] = field(default_factory=list)

    @property
    def agent_count(self) -> int:
        return max((len(r.outputs) for r in self.rows), default=0)
