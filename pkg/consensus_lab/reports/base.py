import os
import tempfile
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Protocol, runtime_checkable

from ..errors import LabError
from .report import Report


@runtime_checkable
class ReportWriter(Protocol):
    @property
    def format_name(self) -> str: ...

    @property
    def file_extension(self) -> str: ...

    def write(self, report: Report, output_dir: Path, stem: str) -> Path: ...


class BaseWriter(ABC):
    SUPPORTED_FEATURES: set[str] = set()  # "summary", "series", "events"

    @property
    @abstractmethod
    def format_name(self) -> str: ...

    @property
    @abstractmethod
    def file_extension(self) -> str: ...

    @abstractmethod
    def render(self, report: Report) -> str:
        """Full file contents for ``report``."""

    def write(self, report: Report, output_dir: Path, stem: str) -> Path:
        """Write ``<output_dir>/<stem><ext>`` atomically and return its path."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        target = output_dir / f"{stem}{self.file_extension}"
        atomic_write(target, self.render(report))
        return target

    def supports_feature(self, feature: str) -> bool:
        return feature in self.SUPPORTED_FEATURES


class ReportWriteError(LabError):
    pass


def atomic_write(target: Path, text: str) -> None:
    """Write to a temporary file next to ``target``, then rename over it."""
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except OSError as e:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise ReportWriteError(f"Cannot write {target}: {e}") from e
