"""State machine for a lab run: load inputs, compute, write reports."""

from dataclasses import dataclass
from enum import Enum, auto
from typing import Optional


class RunState(Enum):
    """States of a lab run."""

    PENDING = auto()
    LOADING = auto()
    RUNNING = auto()
    WRITING = auto()
    COMPLETED = auto()
    FAILED = auto()


@dataclass
class RunProgress:
    state: RunState
    progress: float  # 0.0-100.0
    current_step: str = ""
    rounds_done: int = 0
    rounds_total: int = 0
    error: Optional[str] = None


class RunStateMachine:
    STAGE_WEIGHTS = {
        RunState.LOADING: 10.0,
        RunState.RUNNING: 80.0,
        RunState.WRITING: 10.0,
    }

    VALID_TRANSITIONS = {
        RunState.PENDING: [RunState.LOADING, RunState.FAILED],
        RunState.LOADING: [RunState.RUNNING, RunState.FAILED],
        RunState.RUNNING: [RunState.WRITING, RunState.FAILED],
        RunState.WRITING: [RunState.COMPLETED, RunState.FAILED],
    }

    def __init__(self):
        self.state = RunState.PENDING
        self.progress = RunProgress(state=RunState.PENDING, progress=0.0)

    def transition_to(self, new_state: RunState, step_description: str = ""):
        """Move to ``new_state``.

        Args:
            new_state: Target state
            step_description: Human-readable description of the current step

        Raises:
            ValueError: If the transition is invalid
        """
        if new_state not in self.VALID_TRANSITIONS.get(self.state, []):
            raise ValueError(f"Invalid transition: {self.state} -> {new_state}")

        self.state = new_state
        self.progress.state = new_state
        self.progress.current_step = step_description
        self.progress.progress = self._base_progress(new_state)

    def _base_progress(self, state: RunState) -> float:
        if state is RunState.COMPLETED:
            return 100.0
        base = 0.0
        for stage, weight in self.STAGE_WEIGHTS.items():
            if stage is state:
                return base
            base += weight
        return 0.0

    def update_rounds_progress(self, done: int, total: int):
        """Advance the RUNNING stage by the fraction of rounds (or phases) done.

        Args:
            done: Rounds completed so far
            total: Total rounds of the run
        """
        if self.state != RunState.RUNNING:
            return

        self.progress.rounds_done = done
        self.progress.rounds_total = total
        if total > 0:
            stage = self.STAGE_WEIGHTS[RunState.RUNNING] * min(done / total, 1.0)
            self.progress.progress = self._base_progress(RunState.RUNNING) + stage

    def mark_failed(self, error: str):
        """Mark the run as failed.

        Args:
            error: Error message describing the failure
        """
        self.state = RunState.FAILED
        self.progress.state = RunState.FAILED
        self.progress.error = error
