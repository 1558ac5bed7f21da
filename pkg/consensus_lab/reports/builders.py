"""Turn library results into Report objects; numbers become JSON-friendly floats."""

from typing import Any, Optional

from ..engine import Execution, plain_number
from ..valency import contraction_estimate
from .report import Report, SeriesRow


def _point(point: tuple) -> Any:
    values = [plain_number(c) for c in point]
    return values[0] if len(values) == 1 else values


def series_rows(execution: Execution) -> list[SeriesRow]:
    rows = []
    padded = list(execution.brackets) + [None] * (
        len(execution.configurations) - len(execution.brackets)
    )
    for t, config in enumerate(execution.configurations):
        bracket = padded[t]
        previous = execution.deltas[t - 1] if t > 0 else None
        ratio = execution.deltas[t] / previous if previous else None
        decisions = [getattr(s, "decision", None) for s in config.states]
        rows.append(
            SeriesRow(
                round=t,
                graph_id=execution.choices[t - 1] if t > 0 else None,
                outputs=[_point(p) for p in config.outputs],
                delta=plain_number(execution.deltas[t]),
                delta_lb=plain_number(bracket.lower) if bracket is not None else None,
                delta_ub=plain_number(bracket.upper) if bracket is not None else None,
                ratio=plain_number(ratio),
                decision=(
                    [None if d is None else _point(d) for d in decisions]
                    if any(d is not None for d in decisions)
                    else None
                ),
            )
        )
    return rows


def execution_summary(execution: Execution) -> dict:
    lower = [(t, v) for t, v in enumerate(execution.lower_bounds()) if v is not None]
    summary = {
        "algorithm": execution.algorithm,
        "n": execution.initial.n,
        "rounds": execution.rounds,
        "initial_delta": plain_number(execution.deltas[0]),
        "final_delta": plain_number(execution.deltas[-1]),
        "final_outputs": [_point(p) for p in execution.final.outputs],
        "delta_contraction": contraction_estimate(execution.deltas).as_dict(),
    }
    if any(c is not None for c in execution.choices):
        summary["choices"] = list(execution.choices)
    if lower:
        summary["delta_lb"] = {str(t): plain_number(v) for t, v in lower}
        summary["delta_lb_contraction"] = contraction_estimate([v for _, v in lower]).as_dict()
    round_times = execution.notes.get("round_times")
    if round_times:
        summary["delta_time_contraction"] = contraction_estimate(
            execution.deltas, round_times
        ).as_dict()
    for key, value in execution.notes.items():
        summary.setdefault(key, value)
    return summary


def execution_report(
    command: str, execution: Execution, extra: Optional[dict] = None
) -> Report:
    summary = execution_summary(execution)
    summary.update(extra or {})
    return Report(command=command, summary=summary, rows=series_rows(execution))


def summary_report(command: str, summary: dict, events: Optional[list[dict]] = None) -> Report:
    return Report(command=command, summary=summary, events=list(events or []))
