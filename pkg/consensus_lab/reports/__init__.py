"""Report model and writers (json, csv, jsonl)."""

from .base import BaseWriter, ReportWriteError, ReportWriter, atomic_write
from .builders import execution_report, execution_summary, series_rows, summary_report
from .registry import get_writer, list_formats, registry
from .report import Report, SeriesRow

# Import writers to trigger registration
from . import csv_writer  # noqa: F401
from . import json_writer  # noqa: F401
from . import jsonl_writer  # noqa: F401

__all__ = [
    "Report",
    "SeriesRow",
    "BaseWriter",
    "ReportWriter",
    "ReportWriteError",
    "atomic_write",
    "execution_report",
    "execution_summary",
    "series_rows",
    "summary_report",
    "registry",
    "get_writer",
    "list_formats",
]
