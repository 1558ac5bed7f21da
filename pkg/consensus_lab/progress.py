"""Progress reporter using rich library; draws on stderr so stdout stays clean."""

from rich.console import Console
from rich.progress import BarColumn, Progress, TaskProgressColumn, TextColumn

from .state_machine import RunState, RunStateMachine


class ProgressReporter:
    """Progress bar bound to a RunStateMachine."""

    def __init__(self, command: str, enabled: bool = True):
        """Initialize progress reporter.

        Args:
            command: CLI command name shown in the status column
            enabled: Draw the bar; verbose runs log instead
        """
        self.command = command
        self.enabled = enabled
        self.console = Console(stderr=True)
        self.progress = Progress(
            TextColumn("[bold blue]{task.fields[status]}"),
            BarColumn(),
            TaskProgressColumn(),
            console=self.console,
            transient=True,
        )
        self.task_id = None
        self.state_machine = RunStateMachine()

    def start(self):
        if not self.enabled:
            return
        self.progress.start()
        self.task_id = self.progress.add_task(description="", total=100.0, status="Starting...")

    def stop(self):
        if self.enabled:
            self.progress.stop()

    def update_state(self, new_state: RunState, step_description: str = ""):
        """Update run state.

        Args:
            new_state: New state
            step_description: Description of current step
        """
        self.state_machine.transition_to(new_state, step_description)
        self._refresh_display()

    def update_rounds_progress(self, done: int, total: int):
        """Callback shape expected by the engine: ``(done, total)``.

        Args:
            done: Rounds completed so far
            total: Total rounds of the run
        """
        self.state_machine.update_rounds_progress(done, total)
        self._refresh_display()

    def mark_failed(self, error: str):
        """Mark the run as failed.

        Args:
            error: Error message describing the failure
        """
        self.state_machine.mark_failed(error)
        self._refresh_display()

    def _refresh_display(self):
        if self.task_id is None:
            return

        prog = self.state_machine.progress
        status_text = self._format_status(prog.state)
        if prog.state == RunState.RUNNING and prog.rounds_total > 0:
            status_text += f" ({prog.rounds_done}/{prog.rounds_total})"

        self.progress.update(self.task_id, completed=prog.progress, status=status_text)

    def _format_status(self, state: RunState) -> str:
        status_map = {
            RunState.PENDING: "Pending...",
            RunState.LOADING: f"{self.command}: loading inputs...",
            RunState.RUNNING: f"{self.command}: running",
            RunState.WRITING: f"{self.command}: writing reports...",
            RunState.COMPLETED: "Completed",
            RunState.FAILED: "Failed",
        }
        return status_map.get(state, "Unknown")

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type is not None and self.state_machine.state is not RunState.FAILED:
            self.state_machine.mark_failed(str(exc_val))
        self.stop()
