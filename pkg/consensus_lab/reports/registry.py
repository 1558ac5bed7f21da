from typing import Type, TypeVar

from ..errors import ValidationError
from .base import BaseWriter

T = TypeVar("T", bound=BaseWriter)


class WriterRegistry:
    """Singleton registry for report writer classes."""

    _instance: "WriterRegistry | None" = None
    _writers: dict[str, Type[BaseWriter]]

    def __new__(cls) -> "WriterRegistry":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._writers = {}
        return cls._instance

    def register(self, cls: Type[T]) -> Type[T]:
        """Decorator to register a writer class."""
        instance = cls()
        self._writers[instance.format_name] = cls
        return cls

    def get(self, format_name: str) -> Type[BaseWriter]:
        if format_name not in self._writers:
            available = ", ".join(self._writers.keys())
            raise ValidationError(f"Unknown format '{format_name}'. Available formats: {available}")
        return self._writers[format_name]

    def create(self, format_name: str, **kwargs) -> BaseWriter:
        return self.get(format_name)(**kwargs)

    def list_formats(self) -> list[str]:
        return list(self._writers.keys())


registry = WriterRegistry()


def get_writer(format_name: str, **kwargs) -> BaseWriter:
    return registry.create(format_name, **kwargs)


def list_formats() -> list[str]:
    return registry.list_formats()
