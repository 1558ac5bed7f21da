import csv
import io

from .base import BaseWriter
from .report import Report
from .registry import registry

BASE_COLUMNS = ["round", "graph_id"]
TRAILING_COLUMNS = ["delta", "delta_lb", "delta_ub", "ratio"]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return value


@registry.register
class CsvWriter(BaseWriter):
    """Per-round series; one ``y<i>`` column per agent output."""

    SUPPORTED_FEATURES = {"series"}

    @property
    def format_name(self) -> str:
        return "csv"

    @property
    def file_extension(self) -> str:
        return ".csv"

    def render(self, report: Report) -> str:
        agents = [f"y{i}" for i in range(1, report.agent_count + 1)]
        has_decisions = any(row.decision is not None for row in report.rows)
        fieldnames = BASE_COLUMNS + agents + TRAILING_COLUMNS + (["decision"] if has_decisions else [])

        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in report.rows:
            record = {
                "round": row.round,
                "graph_id": _cell(row.graph_id),
                "delta": _cell(row.delta),
                "delta_lb": _cell(row.delta_lb),
                "delta_ub": _cell(row.delta_ub),
                "ratio": _cell(row.ratio),
            }
            record.update({name: _cell(value) for name, value in zip(agents, row.outputs)})
            if has_decisions:
                record["decision"] = _cell(row.decision)
            writer.writerow(record)
        return buf.getvalue()
