import json

from .base import BaseWriter
from .report import Report
from .registry import registry


@registry.register
class JsonlWriter(BaseWriter):
    """Event log, one JSON object per line."""

    SUPPORTED_FEATURES = {"events"}

    @property
    def format_name(self) -> str:
        return "jsonl"

    @property
    def file_extension(self) -> str:
        return ".jsonl"

    def render(self, report: Report) -> str:
        return "".join(json.dumps(event) + "\n" for event in report.events)
