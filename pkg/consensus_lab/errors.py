"""Exception hierarchy shared by the library and the CLI."""

from typing import Optional


class LabError(Exception):
    """Base class for all consensus_lab errors."""

    exit_code: int = 1


class ValidationError(LabError, ValueError):
    exit_code = 2


class GraphValidationError(ValidationError):
    def __init__(self, message: str, agent: Optional[int] = None):
        super().__init__(message)
        self.agent = agent


class ParseError(ValidationError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ConfigurationError(ValidationError):
    pass


class ContractError(LabError):
    exit_code = 2


class ResourceLimitError(LabError):
    exit_code = 3

    def __init__(self, message: str, count: Optional[int] = None):
        super().__init__(message)
        self.count = count


class ConvergenceBudgetError(LabError):
    exit_code = 4


class TransitionError(LabError):
    def __init__(self, message: str, round_index: int, agent: int):
        super().__init__(f"round {round_index}, agent {agent + 1}: {message}")
        self.round_index = round_index
        self.agent = agent


class ConsistencyError(LabError):
    pass
