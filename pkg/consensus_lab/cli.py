import json
import logging
import traceback
from fractions import Fraction
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Optional

import click
from rich.console import Console
from rich.logging import RichHandler

from . import __version__
from .adversary import best_staircase_initial, greedy_adversary, psi_adversary
from .algorithms import AsyncAlgorithm, RoundAlgorithm, get_algorithm, list_algorithms, registry
from .async_sim import (
    ConstantDelay,
    CrashSchedule,
    DelayPolicy,
    RandomDelay,
    load_schedule,
    round_based_wrapper,
    run_async,
    worst_case_crash_schedule,
)
from .config import ADVERSARIES, DELAY_KINDS, REPORT_FORMATS, RunConfig
from .decision import certify_diameter_lower_bound, certify_lower_bound, check_agreement
from .engine import plain_number, received_hull_exits, run
from .errors import LabError, ValidationError
from .graph_io import load_model, serialize_pattern
from .graphs import NetworkModel
from .model_analysis import analyze_model
from .patterns import PATTERN_KINDS, build_source
from .progress import ProgressReporter
from .reports import Report, atomic_write, execution_report, get_writer, summary_report
from .state_machine import RunState

logger = logging.getLogger(__name__)


class LabClickException(click.ClickException):
    """ClickException that keeps the library error's exit code."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _configure_logging(verbose: bool) -> None:
    package_logger = logging.getLogger("consensus_lab")
    for handler in list(package_logger.handlers):
        if isinstance(handler, RichHandler):
            package_logger.removeHandler(handler)
    package_logger.addHandler(RichHandler(console=Console(stderr=True), show_path=False))
    package_logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


def _lab_command(func: Callable) -> Callable:
    """Run a subcommand body, turning library errors into exit codes."""

    @wraps(func)
    @click.pass_context
    def wrapper(ctx: click.Context, **kwargs):
        verbose = ctx.obj.get("verbose", False)
        try:
            return func(ctx.obj, **kwargs)
        except click.ClickException:
            raise
        except LabError as e:
            if verbose:
                traceback.print_exc()
            raise LabClickException(str(e), e.exit_code) from e
        except Exception as e:
            if verbose:
                traceback.print_exc()
            raise click.ClickException(f"Failed: {e}") from e

    return wrapper


def _shared_options(func: Callable) -> Callable:
    options = [
        click.option("--model", default=None, help="Model or graph file (JSON)"),
        click.option("--seed", type=int, default=None, help="Seed for every random choice"),
        click.option("--tol", type=float, default=None, help="Continuation tolerance (default: 1e-9)"),
        click.option("--out-dir", default=None, help="Directory for report files"),
        click.option(
            "--format",
            "format",
            type=click.Choice(list(REPORT_FORMATS)),
            default=None,
            help="Report format for per-round series (default: json)",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _config(obj: dict, command: str, flags: dict[str, Any]) -> RunConfig:
    return RunConfig.from_sources(command, flags, obj.get("config")).validate()


def _load_model(config: RunConfig) -> Optional[NetworkModel]:
    if not config.model:
        return None
    model = load_model(Path(config.model))
    logger.info("Loaded %d graphs over %d agents from %s", len(model), model.n, config.model)
    return model


def _round_algorithm(name: str, model: Optional[NetworkModel]) -> RoundAlgorithm:
    if name == "mass-split":
        if model is None or len(model) != 1:
            raise ValidationError("mass-split needs --model with exactly one graph")
        algorithm = get_algorithm(name, graph=model[0])
    else:
        algorithm = get_algorithm(name)
    if not isinstance(algorithm, RoundAlgorithm):
        raise ValidationError(f"{name} is not a round-based algorithm; use the async command")
    return algorithm


def _write_report(report: Report, config: RunConfig, stem: str) -> list[Path]:
    out_dir = Path(config.out_dir or ".")
    paths = []
    if config.format == "csv" and report.rows:
        paths.append(get_writer("csv").write(report, out_dir, stem))
        summary = Report(report.command, report.summary)
        paths.append(get_writer("json").write(summary, out_dir, f"{stem}_summary"))
    else:
        paths.append(get_writer("json").write(report, out_dir, stem))
    if report.events:
        paths.append(get_writer("jsonl").write(report, out_dir, f"{stem}_events"))
    return paths


def _echo_saved(paths: list[Path]) -> None:
    for path in paths:
        click.echo(f"Saved: {path}")


@click.group()
@click.option("-v", "--verbose", is_flag=True, default=False, help="Enable verbose output")
@click.option(
    "--config",
    "config_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="YAML run configuration; command-line flags win",
)
@click.version_option(__version__, prog_name="consensus-lab")
@click.pass_context
def main(ctx: click.Context, verbose: bool, config_file: Optional[Path]) -> None:
    """Consensus laboratory for dynamic directed networks.

    Examples:
      consensus-lab analyze --model samples/two_agent.json
      consensus-lab adversary --model samples/deaf_k3.json --algorithm midpoint --initial 1,0,0 --rounds 10
      consensus-lab async --n 5 --f 2 --algorithm minrelay --delays worst-case
      consensus-lab approx --regime nonsplit_midpoint --n 4 --delta 1 --eps 0.1 --seed 7
    """
    _configure_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["config"] = config_file


@main.command("list-algorithms")
def list_algorithms_command() -> None:
    """List registered algorithms and their features."""
    click.echo("Available algorithms:")
    for name in list_algorithms():
        algorithm_cls = registry.get(name)
        features = ", ".join(sorted(algorithm_cls.SUPPORTED_FEATURES))
        click.echo(f"  * {name} (features: {features})")


@main.command()
@_shared_options
@_lab_command
def analyze(obj: dict, **flags) -> None:
    """Decide rootedness, β-classes, solvability and α-diameter of a model."""
    config = _config(obj, "analyze", flags)
    model = _load_model(config)
    assert model is not None
    report = analyze_model(model)
    click.echo(json.dumps(report, indent=2))
    if config.out_dir:
        _echo_saved(_write_report(summary_report("analyze", report), config, "analyze"))


@main.command()
@_shared_options
@click.option("--algorithm", default=None, help="Round algorithm name")
@click.option("--initial", default=None, help="Initial outputs, e.g. 0,1,1/2")
@click.option("--pattern", type=click.Choice(list(PATTERN_KINDS)), default=None)
@click.option("--rounds", type=int, default=None)
@click.option("--n", type=int, default=None, help="Agent count for class-wide patterns")
@_lab_command
def simulate(obj: dict, **flags) -> None:
    """Run an algorithm under a communication pattern."""
    config = _config(obj, "simulate", flags)
    with ProgressReporter("simulate", enabled=not obj.get("verbose")) as reporter:
        reporter.update_state(RunState.LOADING)
        model = _load_model(config)
        algorithm = _round_algorithm(config.algorithm, model)
        source = build_source(config.pattern, model, config.seed, config.n)

        reporter.update_state(RunState.RUNNING)
        execution = run(
            algorithm, config.initial, source, config.rounds, reporter.update_rounds_progress
        )
        extra: dict[str, Any] = {"pattern": config.pattern, "seed": config.seed}
        if not algorithm.CONVEX:
            extra["hull_exits"] = [h.as_dict() for h in received_hull_exits(execution)]

        reporter.update_state(RunState.WRITING)
        paths = _write_report(execution_report("simulate", execution, extra), config, "simulate")
        reporter.update_state(RunState.COMPLETED)
    click.echo(f"Final Δ: {plain_number(execution.deltas[-1])}")
    _echo_saved(paths)


@main.command()
@_shared_options
@click.option("--adversary", type=click.Choice(list(ADVERSARIES)), default=None)
@click.option("--algorithm", default=None, help="Round algorithm name")
@click.option("--initial", default=None, help="Initial outputs (default: best staircase)")
@click.option("--rounds", type=int, default=None, help="Rounds for the greedy adversary")
@click.option("--phases", type=int, default=None, help="σ phases for the Ψ adversary")
@click.option("--depth", type=int, default=None, help="Prefix depth of valency brackets")
@click.option("--branching-cap", type=int, default=None)
@click.option("--round-budget", type=int, default=None)
@_lab_command
def adversary(obj: dict, **flags) -> None:
    """Run a lower-bound adversary and record valency brackets."""
    config = _config(obj, "adversary", flags)
    with ProgressReporter("adversary", enabled=not obj.get("verbose")) as reporter:
        reporter.update_state(RunState.LOADING)
        model = _load_model(config)
        algorithm = _round_algorithm(config.algorithm, model)

        reporter.update_state(RunState.RUNNING)
        if config.adversary == "psi":
            execution = psi_adversary(
                algorithm,
                len(config.initial),
                config.initial,
                config.phases,
                config.tol,
                round_budget=config.round_budget,
                progress_callback=reporter.update_rounds_progress,
            )
        else:
            assert model is not None
            config.check_prefix_sampling(len(model))
            initial = config.initial
            if not initial:
                initial, _ = best_staircase_initial(algorithm, model, Fraction(1), config.tol)
            execution = greedy_adversary(
                algorithm,
                model,
                initial,
                config.rounds,
                config.depth,
                config.tol,
                branching_cap=config.branching_cap,
                seed=config.seed,
                round_budget=config.round_budget,
                progress_callback=reporter.update_rounds_progress,
            )
        extra = {"adversary": config.adversary, "depth": config.depth, "tol": config.tol}

        reporter.update_state(RunState.WRITING)
        paths = _write_report(execution_report("adversary", execution, extra), config, "adversary")
        reporter.update_state(RunState.COMPLETED)
    final = execution.lower_bounds()
    click.echo(f"δ_lb at round {len(final) - 1}: {plain_number(final[-1])}")
    _echo_saved(paths)


def _delay_policy(config: RunConfig) -> DelayPolicy:
    if config.delays == "random":
        return RandomDelay(config.seed)
    return ConstantDelay(1 / (1 + config.round_epsilon))


@main.command("async")
@_shared_options
@click.option("--n", type=int, default=None)
@click.option("--f", type=int, default=None, help="Crash budget")
@click.option("--algorithm", default=None, help="minrelay or round:<name>")
@click.option("--initial", default=None, help="Initial values (default: 0..n-1)")
@click.option("--schedule", default=None, help="Crash schedule file (JSON)")
@click.option("--delays", type=click.Choice(list(DELAY_KINDS)), default=None)
@click.option("--horizon", type=float, default=None)
@click.option("--rounds", type=int, default=None, help="Rounds for round:<name>")
@click.option("--round-epsilon", type=float, default=None)
@_lab_command
def async_command(obj: dict, **flags) -> None:
    """Asynchronous simulation with crash faults."""
    config = _config(obj, "async", flags)
    assert config.n is not None
    with ProgressReporter("async", enabled=not obj.get("verbose")) as reporter:
        reporter.update_state(RunState.LOADING)
        if config.algorithm.startswith("round:"):
            if config.delays == "worst-case":
                raise ValidationError("worst-case delays apply to minrelay only")
            algorithm = _round_algorithm(config.algorithm.removeprefix("round:"), None)
            schedule = load_schedule(Path(config.schedule)) if config.schedule else None
            reporter.update_state(RunState.RUNNING)
            result = round_based_wrapper(
                algorithm,
                config.initial,
                config.f,
                _delay_policy(config),
                config.rounds,
                reporter.update_rounds_progress,
                schedule=schedule,
            )
            induced = len(result.model) if result.pattern else 0
            report = execution_report(
                "async", result.execution, {"f": config.f, "induced_graphs": induced}
            )
            report.events = [e.as_dict() for e in result.events]
            reporter.update_state(RunState.WRITING)
            paths = _write_report(report, config, "async")
            if result.pattern:
                pattern_path = Path(config.out_dir or ".") / "async_pattern.json"
                atomic_write(pattern_path, serialize_pattern(result.pattern))
                paths.append(pattern_path)
        else:
            algorithm = get_algorithm(config.algorithm)
            if not isinstance(algorithm, AsyncAlgorithm):
                raise ValidationError(
                    f"{config.algorithm} is round-based; "
                    f"use --algorithm minrelay or round:{config.algorithm}"
                )
            if config.delays == "worst-case":
                schedule, delays, initial = worst_case_crash_schedule(config.n, config.f)
            else:
                schedule = load_schedule(Path(config.schedule)) if config.schedule else CrashSchedule()
                delays = _delay_policy(config)
                initial = config.initial or list(range(config.n))
            reporter.update_state(RunState.RUNNING)
            timeline = run_async(algorithm, initial, config.f, delays, schedule, config.horizon)
            agreed = timeline.agreement_time()
            summary = {
                "algorithm": config.algorithm,
                "n": config.n,
                "f": config.f,
                "schedule": schedule.to_dict(),
                "correct": [i + 1 for i in timeline.correct],
                "agreement_time": agreed,
                "agreed_by_f_plus_1": agreed is not None and agreed <= config.f + 1,
                "stable_since": timeline.stabilization_time(),
                "final_outputs": {
                    str(i + 1): plain_number(y)
                    for i, y in timeline.outputs_at(config.horizon).items()
                },
            }
            reporter.update_state(RunState.WRITING)
            report = summary_report("async", summary, timeline.event_dicts())
            paths = _write_report(report, config, "async")
        reporter.update_state(RunState.COMPLETED)
    _echo_saved(paths)


@main.command()
@_shared_options
@click.option("--regime", default=None, help="two_agent, nonsplit_midpoint or rooted_amortized")
@click.option("--delta", type=float, default=None, help="Bound on the initial output spread")
@click.option("--eps", type=float, default=None, help="Agreement tolerance")
@click.option("--n", type=int, default=None)
@click.option("--samples", type=int, default=None, help="Sampled patterns per check")
@click.option("--algorithm", default=None, help="Algorithm for the α-diameter bound (with --model)")
@_lab_command
def approx(obj: dict, **flags) -> None:
    """Decision rounds for approximate consensus: agreement check and lower-bound certificate."""
    config = _config(obj, "approx", flags)
    assert config.regime is not None and config.delta is not None and config.eps is not None
    n = config.n or 2
    with ProgressReporter("approx", enabled=not obj.get("verbose")) as reporter:
        reporter.update_state(RunState.LOADING)
        model = _load_model(config)
        reporter.update_state(RunState.RUNNING)
        check = check_agreement(
            config.regime,
            n,
            config.delta,
            config.eps,
            config.samples,
            config.seed,
            reporter.update_rounds_progress,
        )
        certificate = certify_lower_bound(config.regime, n, config.delta, config.eps, config.tol)
        summary: dict[str, Any] = {
            "decision_round": check.decision_round,
            "agreement": check.as_dict(),
            "lower_bound": certificate.as_dict(),
        }
        if model is not None:
            summary["alpha_diameter_bound"] = certify_diameter_lower_bound(
                model, _round_algorithm(config.algorithm, model), config.delta, config.eps, config.tol
            ).as_dict()
        reporter.update_state(RunState.WRITING)
        paths = _write_report(summary_report("approx", summary), config, "approx")
        reporter.update_state(RunState.COMPLETED)
    click.echo(
        f"T = {check.decision_round}, ε-agreement: {check.ok}, "
        f"lower bound round {certificate.round} certified: {certificate.certified}"
    )
    _echo_saved(paths)


if __name__ == "__main__":
    main()  # pylint: disable=no-value-for-parameter
