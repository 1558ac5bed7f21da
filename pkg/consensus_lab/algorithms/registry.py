from typing import Type, TypeVar

from ..errors import ValidationError
from .base import Algorithm

T = TypeVar("T", bound=Algorithm)


class AlgorithmRegistry:
    """Singleton registry for algorithm classes."""

    _instance: "AlgorithmRegistry | None" = None
    _algorithms: dict[str, Type[Algorithm]]

    def __new__(cls) -> "AlgorithmRegistry":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._algorithms = {}
        return cls._instance

    def register(self, cls: Type[T]) -> Type[T]:
        """Decorator to register an algorithm class."""
        instance = cls()
        self._algorithms[instance.name] = cls
        return cls

    def get(self, name: str) -> Type[Algorithm]:
        if name not in self._algorithms:
            available = ", ".join(self._algorithms.keys())
            raise ValidationError(f"Unknown algorithm '{name}'. Available algorithms: {available}")
        return self._algorithms[name]

    def create(self, name: str, **kwargs) -> Algorithm:
        return self.get(name)(**kwargs)

    def list_algorithms(self) -> list[str]:
        return list(self._algorithms.keys())


registry = AlgorithmRegistry()


def get_algorithm(name: str, **kwargs) -> Algorithm:
    """Create algorithm instance by name."""
    return registry.create(name, **kwargs)


def list_algorithms() -> list[str]:
    return registry.list_algorithms()
