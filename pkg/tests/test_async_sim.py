import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from consensus_lab.algorithms import get_algorithm
from consensus_lab.async_sim import (
    AsyncEvent,
    ConstantDelay,
    Crash,
    CrashSchedule,
    EventKind,
    RandomDelay,
    TableDelay,
    load_schedule,
    pattern_delays,
    random_crash_schedule,
    round_based_wrapper,
    run_async,
    worst_case_crash_schedule,
)
from consensus_lab.errors import ParseError, ValidationError
from consensus_lab.graphs import complete_graph, random_async_graph

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


class TestCrashSchedule:
    def test_one_based_round_trip_through_dict(self):
        data = {"crashes": [{"agent": 2, "time": 0.5, "recipients": [3, 1]}]}
        schedule = CrashSchedule.from_dict(data)
        assert schedule.crashes[1] == Crash(1, 0.5, frozenset({0, 2}))
        assert schedule.to_dict() == {"crashes": [{"agent": 2, "time": 0.5, "recipients": [1, 3]}]}

    def test_sample_file(self):
        schedule = load_schedule(SAMPLES / "worst_case_3_1.json")
        assert schedule.crash_time(0) == 0.0
        assert schedule.correct(3) == [1, 2]

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"crashes": [', encoding="utf-8")
        with pytest.raises(ParseError):
            load_schedule(path)

    def test_malformed_entry(self):
        with pytest.raises(ValidationError, match="entry 1"):
            CrashSchedule.from_dict({"crashes": [{"time": 1}]})

    def test_budget_exceeded(self):
        schedule = CrashSchedule.of([Crash(0, 0.0), Crash(1, 0.0)])
        with pytest.raises(ValidationError, match="budget"):
            schedule.validate(4, 1)

    def test_self_recipient_rejected(self):
        with pytest.raises(ValidationError):
            CrashSchedule.of([Crash(0, 0.0, frozenset({0}))]).validate(3, 1)

    def test_double_crash_rejected(self):
        with pytest.raises(ValidationError):
            CrashSchedule.of([Crash(0, 0.0), Crash(0, 1.0)])


class TestDelays:
    def test_range_enforced(self):
        with pytest.raises(ValidationError):
            ConstantDelay(0.0).delay(0, 1, 0)
        with pytest.raises(ValidationError):
            ConstantDelay(1.5).delay(0, 1, 0)

    def test_random_delay_replayable(self):
        a, b = RandomDelay(seed=4), RandomDelay(seed=4)
        values = [a.delay(0, 1, k) for k in range(20)]
        assert values == [b.delay(0, 1, k) for k in range(20)]
        assert all(0.05 <= v <= 1 for v in values)

    def test_table_delay(self):
        table = TableDelay({(0, 1): 0.5, (0, 1, 2): 0.25})
        assert table.delay(0, 1, 0) == 0.5
        assert table.delay(0, 1, 2) == 0.25
        assert table.delay(1, 0, 0) == 1.0

    def test_pattern_delay_needs_positive_epsilon(self):
        with pytest.raises(ValidationError):
            pattern_delays([complete_graph(2)], epsilon=0.0)


class TestRunAsync:
    def test_no_crashes_agree_after_one_delay(self):
        timeline = run_async(get_algorithm("minrelay"), [3, 1, 2], 0, ConstantDelay(1.0))
        assert timeline.agreement_time() == 1.0
        assert timeline.outputs_at(10.0) == {0: 1, 1: 1, 2: 1}

    def test_broadcast_at_crash_time_reaches_recipients_only(self):
        schedule = load_schedule(SAMPLES / "worst_case_3_1.json")
        timeline = run_async(get_algorithm("minrelay"), [0, 1, 2], 1, ConstantDelay(1.0), schedule)
        sends = [e for e in timeline.events if e.kind is EventKind.SEND and e.sender == 0]
        assert [e.receiver for e in sends] == [1]
        assert timeline.crashed == {0: 0.0}
        assert timeline.state_at(2, 1.5).y == 1
        assert timeline.state_at(2, 2.0).y == 0
        assert timeline.agreement_time() == 2.0

    @pytest.mark.parametrize("n,f", [(2, 0), (3, 1), (4, 2), (5, 2), (6, 4)])
    def test_worst_case_is_tight(self, n, f):
        schedule, delays, initial = worst_case_crash_schedule(n, f)
        timeline = run_async(get_algorithm("minrelay"), initial, f, delays, schedule, horizon=f + 3)
        assert timeline.agreement_time() == f + 1
        assert all(y == 0 for y in timeline.outputs_at(f + 3).values())
        assert timeline.stabilization_time() == f + 1

    @pytest.mark.parametrize("n", [2, 3, 4, 6])
    def test_lone_survivor_settles_at_f(self, n):
        f = n - 1
        schedule, delays, initial = worst_case_crash_schedule(n, f)
        timeline = run_async(get_algorithm("minrelay"), initial, f, delays, schedule, horizon=f + 3)
        assert timeline.correct == [n - 1]
        assert timeline.agreement_time() == 0.0
        assert timeline.stabilization_time() == f
        assert timeline.outputs_at(f + 3) == {n - 1: 0}

    @pytest.mark.parametrize("seed", range(500))
    def test_minrelay_agrees_by_f_plus_one(self, seed):
        rng = random.Random(seed)
        n = rng.randint(2, 8)
        f = rng.randint(0, n - 1)
        schedule = random_crash_schedule(n, f, rng)
        initial = [rng.randint(0, 9) for _ in range(n)]
        timeline = run_async(get_algorithm("minrelay"), initial, f, RandomDelay(seed), schedule, horizon=f + 2)
        agreed = timeline.agreement_time(key=lambda s: s.values)
        assert agreed is not None
        assert agreed <= f + 1
        known = set().union(*(timeline.state_at(i, f + 2).values for i in timeline.correct))
        assert known <= set(initial)

    def test_crashed_agents_receive_nothing(self):
        schedule = CrashSchedule.of([Crash(2, 0.5)])
        timeline = run_async(get_algorithm("minrelay"), [5, 1, 0], 1, ConstantDelay(1.0), schedule)
        delivered_to_crashed = [e for e in timeline.events if e.kind is EventKind.DELIVER and e.receiver == 2]
        assert delivered_to_crashed == []
        assert timeline.correct == [0, 1]
        assert timeline.agreement_time() == 1.0

    def test_event_dicts_are_one_based(self):
        event = AsyncEvent(EventKind.SEND, 0.0, 0, 2, frozenset({Fraction(1, 2), 0}))
        assert event.as_dict() == {"kind": "send", "time": 0.0, "sender": 1, "receiver": 3, "payload": [0, 0.5]}

    def test_invalid_budget(self):
        with pytest.raises(ValidationError):
            run_async(get_algorithm("minrelay"), [0, 1], 2, ConstantDelay())

    def test_deterministic(self):
        def once():
            rng = random.Random(8)
            schedule = random_crash_schedule(5, 2, rng)
            return run_async(get_algorithm("minrelay"), [4, 3, 2, 1, 0], 2, RandomDelay(8), schedule).event_dicts()

        assert json.dumps(once()) == json.dumps(once())


class TestRoundWrapper:
    def test_equal_delays_give_complete_graphs(self):
        result = round_based_wrapper(get_algorithm("midpoint"), [0, 1, 1, 0, 1], 2, ConstantDelay(1.0), 3)
        assert result.pattern == [complete_graph(5)] * 3
        assert result.round_times == [0.0, 1.0, 2.0, 3.0]
        assert result.execution.deltas[1] == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_pattern_delays_reproduce_async_pattern(self, seed):
        rng = random.Random(seed)
        n, f, rounds = 5, 2, 4
        pattern = [random_async_graph(n, f, rng) for _ in range(rounds)]
        initial = [Fraction(rng.randint(0, 8)) for _ in range(n)]
        result = round_based_wrapper(get_algorithm("midpoint"), initial, f, pattern_delays(pattern, 0.25), rounds)
        assert result.pattern == pattern
        assert result.execution.graphs == pattern
        assert result.round_times == [pytest.approx(k / 1.25) for k in range(rounds + 1)]
        assert result.execution.notes["round_times"] == result.round_times

    def test_midpoint_halves_per_round_over_async_graphs(self):
        rng = random.Random(1)
        pattern = [random_async_graph(3, 1, rng) for _ in range(6)]
        result = round_based_wrapper(
            get_algorithm("midpoint"), [Fraction(0), Fraction(1), Fraction(1, 3)], 1, pattern_delays(pattern), 6
        )
        deltas = result.execution.deltas
        for t in range(1, 7):
            assert deltas[t] <= deltas[t - 1] / 2

    def test_random_delays_still_consistent(self):
        result = round_based_wrapper(get_algorithm("amortized-midpoint"), [0, 1, 2, 3, 4, 5, 6], 3, RandomDelay(2), 6)
        assert result.execution.rounds == 6
        for graph in result.pattern:
            assert all(len(senders) >= 4 for senders in graph.in_neighbors)
        result.execution.verify(get_algorithm("amortized-midpoint"))

    def test_crashed_agents_do_not_stall_the_rounds(self):
        schedule = CrashSchedule.of([Crash(0, 0.0, frozenset({1})), Crash(3, 1.5)])
        initial = [Fraction(v) for v in (0, 1, 2, 3, 4)]
        result = round_based_wrapper(
            get_algorithm("midpoint"), initial, 2, ConstantDelay(1.0), 4, schedule=schedule
        )
        assert result.round_times == [0.0, 1.0, 2.0, 3.0, 4.0]
        assert [g.in_neighbors[0] for g in result.pattern] == [frozenset({0})] * 4
        assert result.pattern[0].in_neighbors[3] == frozenset(range(5)) - {0}
        assert [g.in_neighbors[3] for g in result.pattern[1:]] == [frozenset({3})] * 3
        assert 0 in result.pattern[0].in_neighbors[1]
        assert 0 not in result.pattern[0].in_neighbors[2]
        crashes = [e for e in result.events if e.kind is EventKind.CRASH]
        assert sorted(e.sender for e in crashes) == [0, 3]
        assert result.execution.notes["crashed"] == [1, 4]
        result.execution.verify(get_algorithm("midpoint"))

    @pytest.mark.parametrize("seed", range(40))
    def test_random_crashes_keep_quorums(self, seed):
        rng = random.Random(seed)
        n = rng.randint(3, 8)
        f = (n - 1) // 2
        schedule = random_crash_schedule(n, f, rng, latest=3.0)
        initial = [Fraction(rng.randint(0, 8)) for _ in range(n)]
        result = round_based_wrapper(
            get_algorithm("midpoint"), initial, f, RandomDelay(seed), 5, schedule=schedule
        )
        assert result.execution.rounds == 5
        for graph in result.pattern:
            for i in schedule.correct(n):
                assert len(graph.in_neighbors[i]) >= n - f
        result.execution.verify(get_algorithm("midpoint"))

    def test_schedule_over_budget(self):
        schedule = CrashSchedule.of([Crash(0, 0.0), Crash(1, 0.0)])
        with pytest.raises(ValidationError):
            round_based_wrapper(get_algorithm("midpoint"), [0, 1, 2, 3, 4], 1, ConstantDelay(), 2, schedule=schedule)

    def test_majority_correct_required(self):
        with pytest.raises(ValidationError):
            round_based_wrapper(get_algorithm("midpoint"), [0, 1, 2, 3], 2, ConstantDelay(), 1)

    def test_zero_rounds(self):
        result = round_based_wrapper(get_algorithm("midpoint"), [0, 1, 2], 1, ConstantDelay(), 0)
        assert result.pattern == []
        assert result.execution.rounds == 0
