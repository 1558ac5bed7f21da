"""Discrete-event asynchronous message passing with crash faults.

Message delays are normalized to (0, 1]. Events are ordered by (time, rank, seq):
deliveries before crashes at equal times, then by creation order. A broadcast made
exactly at the sender's crash time reaches only that crash's recipients; nothing
is sent or processed by an agent after its crash time.
"""

from __future__ import annotations

import heapq
import itertools
import json
import logging
import random
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from .algorithms.base import AsyncAlgorithm, RoundAlgorithm
from .engine import Execution, ProgressCallback, initial_configuration, plain_number, run
from .errors import ConsistencyError, ParseError, ValidationError
from .graphs import CommGraph, NetworkModel, identity_graph
from .patterns import recorded

logger = logging.getLogger(__name__)


class EventKind(str, Enum):
    SEND = "send"
    DELIVER = "deliver"
    CRASH = "crash"


_RANK = {EventKind.DELIVER: 0, EventKind.CRASH: 1}


@dataclass(frozen=True)
class AsyncEvent:
    kind: EventKind
    time: float
    sender: int
    receiver: Optional[int] = None
    payload: Any = None
    seq: int = 0

    def as_dict(self) -> dict:
        payload = self.payload
        if isinstance(payload, frozenset):
            payload = sorted(plain_number(v) for v in payload)
        return {
            "kind": self.kind.value,
            "time": plain_number(self.time),
            "sender": self.sender + 1,
            "receiver": None if self.receiver is None else self.receiver + 1,
            "payload": payload,
        }


@dataclass(frozen=True)
class Crash:
    agent: int
    time: float
    recipients: frozenset[int] = frozenset()


@dataclass
class CrashSchedule:
    crashes: dict[int, Crash] = field(default_factory=dict)

    @classmethod
    def of(cls, crashes: Sequence[Crash]) -> "CrashSchedule":
        schedule = cls()
        for crash in crashes:
            if crash.agent in schedule.crashes:
                raise ValidationError(f"Agent {crash.agent + 1} crashes twice")
            schedule.crashes[crash.agent] = crash
        return schedule

    def __len__(self) -> int:
        return len(self.crashes)

    def crash_time(self, agent: int) -> Optional[float]:
        crash = self.crashes.get(agent)
        return None if crash is None else crash.time

    def correct(self, n: int) -> list[int]:
        return [i for i in range(n) if i not in self.crashes]

    def validate(self, n: int, f: int) -> None:
        if len(self.crashes) > f:
            raise ValidationError(f"Schedule has {len(self.crashes)} crashes, budget is f={f}")
        for agent, crash in self.crashes.items():
            if not 0 <= agent < n:
                raise ValidationError(f"Crash of agent {agent + 1} outside 1..{n}")
            if crash.time < 0:
                raise ValidationError(f"Agent {agent + 1} crashes at negative time {crash.time}")
            bad = sorted(r + 1 for r in crash.recipients if not 0 <= r < n or r == agent)
            if bad:
                raise ValidationError(f"Agent {agent + 1}: invalid final-broadcast recipients {bad}")

    @classmethod
    def from_dict(cls, data: Any) -> "CrashSchedule":
        """Parse ``{"crashes": [{"agent": 1, "time": 0.5, "recipients": [2]}]}`` (1-based)."""
        if not isinstance(data, dict) or not isinstance(data.get("crashes", []), list):
            raise ValidationError("Crash schedule must be an object with a 'crashes' list")
        crashes = []
        for index, entry in enumerate(data.get("crashes", []), 1):
            try:
                crashes.append(
                    Crash(
                        agent=int(entry["agent"]) - 1,
                        time=float(entry["time"]),
                        recipients=frozenset(int(r) - 1 for r in entry.get("recipients", [])),
                    )
                )
            except (KeyError, TypeError, ValueError) as e:
                raise ValidationError(f"Crash entry {index} is malformed: {e}") from e
        return cls.of(crashes)

    def to_dict(self) -> dict:
        return {
            "crashes": [
                {
                    "agent": c.agent + 1,
                    "time": c.time,
                    "recipients": sorted(r + 1 for r in c.recipients),
                }
                for c in sorted(self.crashes.values(), key=lambda c: (c.time, c.agent))
            ]
        }


def load_schedule(path: Path) -> CrashSchedule:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"Cannot read schedule file {path}: {e.strerror}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Malformed schedule JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    return CrashSchedule.from_dict(data)


class DelayPolicy(ABC):
    """Delay of the ``index``-th broadcast of ``sender`` towards ``receiver``."""

    @abstractmethod
    def raw_delay(self, sender: int, receiver: int, index: int) -> float: ...

    def delay(self, sender: int, receiver: int, index: int) -> float:
        value = self.raw_delay(sender, receiver, index)
        if not 0 < value <= 1:
            raise ValidationError(
                f"Delay {value} for {sender + 1}->{receiver + 1} is outside (0, 1]"
            )
        return value


class ConstantDelay(DelayPolicy):
    def __init__(self, value: float = 1.0):
        self.value = value

    def raw_delay(self, sender: int, receiver: int, index: int) -> float:
        return self.value


class RandomDelay(DelayPolicy):
    def __init__(self, seed: Any, low: float = 0.05):
        if not 0 < low <= 1:
            raise ValidationError(f"Lowest random delay must lie in (0, 1], got {low}")
        self.seed = seed
        self.low = low

    def raw_delay(self, sender: int, receiver: int, index: int) -> float:
        rng = random.Random(f"{self.seed}/{sender}/{receiver}/{index}")
        return rng.uniform(self.low, 1.0)


class TableDelay(DelayPolicy):
    """Explicit delays per (sender, receiver) or (sender, receiver, index); ``default`` otherwise."""

    def __init__(self, table: dict[tuple, float], default: float = 1.0):
        self.table = dict(table)
        self.default = default

    def raw_delay(self, sender: int, receiver: int, index: int) -> float:
        if (sender, receiver, index) in self.table:
            return self.table[(sender, receiver, index)]
        return self.table.get((sender, receiver), self.default)


class PatternDelay(DelayPolicy):
    """Round k messages along edges of pattern[k] arrive after 1/(1+ε), all others after 1."""

    def __init__(self, pattern: Sequence[CommGraph], epsilon: float = 0.1):
        if epsilon <= 0:
            raise ValidationError(f"Pattern delays need epsilon > 0, got {epsilon}")
        self.pattern = list(pattern)
        self.fast = 1 / (1 + epsilon)

    def raw_delay(self, sender: int, receiver: int, index: int) -> float:
        if index < len(self.pattern) and sender in self.pattern[index].in_neighbors[receiver]:
            return self.fast
        return 1.0


def pattern_delays(pattern: Sequence[CommGraph], epsilon: float = 0.1) -> PatternDelay:
    return PatternDelay(pattern, epsilon)


@dataclass
class AsyncTimeline:
    n: int
    events: list[AsyncEvent] = field(default_factory=list)
    snapshots: list[list[tuple[float, Any]]] = field(default_factory=list)
    crashed: dict[int, float] = field(default_factory=dict)
    correct: list[int] = field(default_factory=list)
    horizon: float = 0.0

    def state_at(self, agent: int, time: float) -> Any:
        """Latest state of ``agent`` recorded at or before ``time``."""
        state = None
        for at, snapshot in self.snapshots[agent]:
            if at > time:
                break
            state = snapshot
        return state

    def outputs_at(self, time: float, agents: Optional[Sequence[int]] = None) -> dict[int, Any]:
        chosen = self.correct if agents is None else agents
        return {i: self.state_at(i, time).y for i in chosen}

    def agreement_time(self, key: Optional[Callable[[Any], Any]] = None) -> Optional[float]:
        """Earliest time from which all correct agents agree on ``key`` (default: output)."""
        key = key or (lambda s: s.y)
        if not self.correct:
            return None
        times = sorted({at for i in self.correct for at, _ in self.snapshots[i]})
        agreed_since: Optional[float] = None
        for at in times:
            values = [key(self.state_at(i, at)) for i in self.correct]
            if all(v == values[0] for v in values):
                if agreed_since is None:
                    agreed_since = at
            else:
                agreed_since = None
        return agreed_since

    def stabilization_time(self, key: Optional[Callable[[Any], Any]] = None) -> Optional[float]:
        """Time of the last change of ``key`` (default: output) at any correct agent.

        With a single correct agent ``agreement_time`` is trivially 0; this measures
        when that agent's output settles instead.
        """
        key = key or (lambda s: s.y)
        if not self.correct:
            return None
        last = 0.0
        for i in self.correct:
            history = self.snapshots[i]
            for (_, before), (at, after) in zip(history, history[1:]):
                if key(after) != key(before):
                    last = max(last, at)
        return last

    def event_dicts(self) -> list[dict]:
        return [e.as_dict() for e in self.events]


class _EventQueue:
    def __init__(self):
        self._heap: list = []
        self._seq = itertools.count()

    def push(self, kind: EventKind, time: float, sender: int, receiver=None, payload=None):
        seq = next(self._seq)
        event = AsyncEvent(kind, time, sender, receiver, payload, seq)
        heapq.heappush(self._heap, (time, _RANK[kind], seq, event))

    def __bool__(self) -> bool:
        return bool(self._heap)

    def peek_time(self) -> float:
        return self._heap[0][0]

    def pop(self) -> AsyncEvent:
        return heapq.heappop(self._heap)[3]


def run_async(
    algorithm: AsyncAlgorithm,
    initial_values: Sequence[Any],
    f: int,
    delays: DelayPolicy,
    schedule: Optional[CrashSchedule] = None,
    horizon: float = 10.0,
) -> AsyncTimeline:
    n = len(initial_values)
    if not 0 <= f < n:
        raise ValidationError(f"Need 0 <= f < n, got n={n}, f={f}")
    if horizon < 0:
        raise ValidationError(f"horizon must be >= 0, got {horizon}")
    schedule = schedule or CrashSchedule()
    schedule.validate(n, f)

    timeline = AsyncTimeline(n, snapshots=[[] for _ in range(n)], horizon=horizon)
    timeline.correct = schedule.correct(n)
    queue = _EventQueue()
    broadcasts = [0] * n
    crashed: set[int] = set()
    states = [algorithm.initial_state(i, v) for i, v in enumerate(initial_values)]
    for i, state in enumerate(states):
        timeline.snapshots[i].append((0.0, state))
    for crash in schedule.crashes.values():
        queue.push(EventKind.CRASH, crash.time, crash.agent)

    def broadcast(agent: int, time: float) -> None:
        payload = algorithm.message(states[agent])
        states[agent] = algorithm.after_broadcast(states[agent])
        crash = schedule.crashes.get(agent)
        targets = [j for j in range(n) if j != agent]
        if crash is not None and crash.time == time:
            targets = [j for j in targets if j in crash.recipients]
        for receiver in targets:
            at = time + delays.delay(agent, receiver, broadcasts[agent])
            timeline.events.append(AsyncEvent(EventKind.SEND, time, agent, receiver, payload))
            queue.push(EventKind.DELIVER, at, agent, receiver, payload)
        broadcasts[agent] += 1

    def maybe_broadcast(agent: int, time: float) -> None:
        if agent not in crashed and algorithm.wants_broadcast(states[agent]):
            broadcast(agent, time)

    for agent in range(n):
        maybe_broadcast(agent, 0.0)

    while queue and queue.peek_time() <= horizon:
        event = queue.pop()
        if event.kind is EventKind.CRASH:
            crashed.add(event.sender)
            timeline.crashed[event.sender] = event.time
            timeline.events.append(event)
            logger.debug("t=%s: agent %d crashed", event.time, event.sender + 1)
            continue
        receiver = event.receiver
        assert receiver is not None
        if receiver in crashed:
            continue
        timeline.events.append(event)
        updated = algorithm.on_receive(receiver, states[receiver], event.sender, event.payload)
        if updated != states[receiver]:
            states[receiver] = updated
            timeline.snapshots[receiver].append((event.time, updated))
        maybe_broadcast(receiver, event.time)
    return timeline


def worst_case_crash_schedule(n: int, f: int) -> tuple[CrashSchedule, DelayPolicy, list[int]]:
    """Relay chain: agent k (k < f) crashes at time k with agent k+1 as sole final recipient.

    Returns the schedule, unit delays and initial values in which agent 1 alone holds
    the minimum, so that value reaches the first correct agent only at time f.
    With f = n-1 the lone survivor agrees with itself from time 0; its output
    settles at time f, which ``AsyncTimeline.stabilization_time`` reports.
    """
    if not 0 <= f < n:
        raise ValidationError(f"Need 0 <= f < n, got n={n}, f={f}")
    schedule = CrashSchedule.of([Crash(k, float(k), frozenset({k + 1})) for k in range(f)])
    return schedule, ConstantDelay(1.0), list(range(n))


def random_crash_schedule(
    n: int, f: int, rng: random.Random, latest: Optional[float] = None
) -> CrashSchedule:
    """Up to f crashes at random (sometimes integral) times with random final recipients."""
    if not 0 <= f < n:
        raise ValidationError(f"Need 0 <= f < n, got n={n}, f={f}")
    latest = float(f + 1) if latest is None else latest
    crashes = []
    for agent in rng.sample(range(n), rng.randint(0, f)):
        if rng.random() < 0.5:
            time = float(rng.randint(0, int(latest)))
        else:
            time = rng.uniform(0, latest)
        others = [j for j in range(n) if j != agent]
        recipients = frozenset(j for j in others if rng.random() < 0.5)
        crashes.append(Crash(agent, time, recipients))
    return CrashSchedule.of(crashes)


@dataclass
class WrapperResult:
    execution: Execution
    pattern: list[CommGraph]
    round_times: list[float]
    events: list[AsyncEvent]

    @property
    def model(self) -> NetworkModel:
        return NetworkModel(tuple(self.pattern))


def round_based_wrapper(
    algorithm: RoundAlgorithm,
    initial_outputs: Sequence[Any],
    f: int,
    delays: DelayPolicy,
    rounds: int,
    progress_callback: Optional[ProgressCallback] = None,
    *,
    schedule: Optional[CrashSchedule] = None,
) -> WrapperResult:
    """Lock-step rounds over asynchronous messages; agents wait for n-f round messages.

    All deliveries sharing a timestamp are applied before any agent advances; an
    advancing agent uses every message of its round buffered by then, its own
    included. The senders it used form In_i of the induced round graph.

    Crashed agents follow the ``run_async`` rules: they act up to and at their crash
    time, a broadcast at the crash time reaches only the crash's recipients, and
    they do nothing afterwards. A round a crashed agent never completes appears in
    the induced pattern with In_i = {i}; its state there is read by nobody.
    """
    n = len(initial_outputs)
    if not 0 <= 2 * f < n:
        raise ValidationError(f"The round wrapper needs f < n/2, got n={n}, f={f}")
    if rounds < 0:
        raise ValidationError(f"rounds must be >= 0, got {rounds}")
    schedule = schedule or CrashSchedule()
    schedule.validate(n, f)
    correct = schedule.correct(n)

    config = initial_configuration(algorithm, initial_outputs)
    states = list(config.states)
    current = [0] * n
    inbox: list[dict[int, dict[int, Any]]] = [defaultdict(dict) for _ in range(n)]
    in_sets: list[list[frozenset[int]]] = [
        [frozenset({i}) for i in range(n)] for _ in range(rounds)
    ]
    completed: list[list[Any]] = [[None] * n for _ in range(rounds)]
    finish_times = [[0.0] * n for _ in range(rounds)]
    events: list[AsyncEvent] = []
    queue = _EventQueue()

    def alive(agent: int, time: float) -> bool:
        crash_time = schedule.crash_time(agent)
        return crash_time is None or time <= crash_time

    def broadcast(agent: int, time: float) -> None:
        tag = current[agent] + 1
        if tag > rounds:
            return
        inbox[agent][tag][agent] = states[agent]
        targets = [j for j in range(n) if j != agent]
        if schedule.crash_time(agent) == time:
            targets = [j for j in targets if j in schedule.crashes[agent].recipients]
        for receiver in targets:
            at = time + delays.delay(agent, receiver, tag - 1)
            events.append(AsyncEvent(EventKind.SEND, time, agent, receiver, tag))
            queue.push(EventKind.DELIVER, at, agent, receiver, (tag, states[agent]))

    def advance(agent: int, time: float) -> bool:
        tag = current[agent] + 1
        if tag > rounds or not alive(agent, time) or len(inbox[agent][tag]) < n - f:
            return False
        received = sorted(inbox[agent].pop(tag).items())
        states[agent] = algorithm.transition(agent, states[agent], received)
        current[agent] = tag
        in_sets[tag - 1][agent] = frozenset(j for j, _ in received)
        completed[tag - 1][agent] = states[agent]
        finish_times[tag - 1][agent] = time
        broadcast(agent, time)
        return True

    def correct_round() -> int:
        return min(current[i] for i in correct)

    for crash in schedule.crashes.values():
        queue.push(EventKind.CRASH, crash.time, crash.agent)
    for agent in range(n):
        broadcast(agent, 0.0)
    done = 0
    while queue and correct_round() < rounds:
        time = queue.peek_time()
        while queue and queue.peek_time() == time:
            event = queue.pop()
            if event.kind is EventKind.CRASH:
                events.append(event)
                logger.debug("t=%s: agent %d crashed", time, event.sender + 1)
                continue
            receiver = event.receiver
            assert receiver is not None
            if not alive(receiver, time):
                continue
            tag, state = event.payload
            events.append(AsyncEvent(EventKind.DELIVER, time, event.sender, receiver, tag))
            if tag > current[receiver]:
                inbox[receiver][tag][event.sender] = state
        for agent in range(n):
            while advance(agent, time):
                pass
        if progress_callback and correct_round() > done:
            done = correct_round()
            progress_callback(done, rounds)
    if correct_round() < rounds:
        raise ConsistencyError("Round wrapper stalled before completing all rounds")

    pattern = [CommGraph(tuple(row)) for row in in_sets]
    model = NetworkModel(tuple(pattern) or (identity_graph(n),))
    execution = run(algorithm, initial_outputs, recorded(pattern, model), rounds)
    for t, row in enumerate(completed, 1):
        for agent, state in enumerate(row):
            if state is not None and state != execution.configurations[t].states[agent]:
                raise ConsistencyError(
                    f"Round {t}, agent {agent + 1}: asynchronous state differs from the round engine"
                )
    round_times = [0.0] + [max(row[i] for i in correct) for row in finish_times]
    execution.notes["round_times"] = round_times
    if len(schedule):
        execution.notes["crashed"] = sorted(a + 1 for a in schedule.crashes)
    logger.info("Round wrapper: %d rounds finished at time %s", rounds, round_times[-1])
    return WrapperResult(execution, pattern, round_times, events)

