import json
from dataclasses import asdict

from .base import BaseWriter
from .report import Report
from .registry import registry


@registry.register
class JsonWriter(BaseWriter):
    """Summary plus per-round rows in one JSON document."""

    SUPPORTED_FEATURES = {"summary", "series"}

    @property
    def format_name(self) -> str:
        return "json"

    @property
    def file_extension(self) -> str:
        return ".json"

    def render(self, report: Report) -> str:
        data = {"command": report.command, "summary": report.summary}
        if report.rows:
            data["rows"] = [asdict(row) for row in report.rows]
        return json.dumps(data, indent=2, sort_keys=False) + "\n"
