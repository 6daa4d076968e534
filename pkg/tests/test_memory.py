"""
history buffer and summarizer tests
"""

import random
from collections import deque

import pytest

from lib.backends.scripted import new_scripted
from lib.errors import BackendError, InvalidCapacityError, NonMonotonicStepError
from lib.memory import (
    Belief,
    BeliefFact,
    new_buffer,
    parse_belief,
    summarize,
    summarize_deterministic,
)
from tests.conftest import make_entry


class TestHistoryBuffer:
    def test_new_buffer_is_empty(self):
        buffer = new_buffer(16)
        assert buffer.capacity == 16
        assert buffer.entries == []

    @pytest.mark.parametrize("capacity", [0, -3])
    def test_capacity_must_be_positive(self, capacity):
        with pytest.raises(InvalidCapacityError):
            new_buffer(capacity)

    def test_oldest_entries_evicted_first(self):
        buffer = new_buffer(16)
        for i in range(1, 21):
            buffer.push(make_entry(i, "go_to(robot1, table)"))
        assert [e.step for e in buffer.entries] == list(range(5, 21))

    def test_push_rejects_non_increasing_step(self):
        buffer = new_buffer(4).push(make_entry(5, "skipped"))
        with pytest.raises(NonMonotonicStepError):
            buffer.push(make_entry(3, "skipped"))
        with pytest.raises(NonMonotonicStepError):
            buffer.push(make_entry(5, "skipped"))

    def test_matches_reference_fifo(self):
        rng = random.Random(7)
        for capacity in range(1, 65):
            buffer = new_buffer(capacity)
            reference = deque(maxlen=capacity)
            step = 0
            for _ in range(rng.randrange(0, 3 * capacity + 2)):
                step += rng.randrange(1, 4)
                entry = make_entry(step, "skipped")
                buffer.push(entry)
                reference.append(entry)
                assert len(buffer) <= capacity
            assert buffer.entries == list(reference)


class TestSummarizeDeterministic:
    def test_empty_history(self):
        belief = summarize_deterministic([], "find water")
        assert belief == Belief()

    def test_pure(self):
        entries = [
            make_entry(0, "go_to(robot1, refrigerator)", observation="robot1 is at table."),
            make_entry(1, "open(robot1, refrigerator)", observation="robot1 is at refrigerator."),
        ]
        assert summarize_deterministic(entries, "t") == summarize_deterministic(entries, "t")

    def test_observed_location_becomes_fact(self):
        entries = [
            make_entry(
                3,
                "pick_from(robot1, medication, drawer_left)",
                status="Err",
                kind="ObjectNotVisible",
                message="medication is not in drawer_left",
                observation="robot1 is at drawer_left. drawer_left is open. medication is in drawer_left.",
            )
        ]
        belief = summarize_deterministic(entries, "find medication")
        assert belief.place_of("medication") == "drawer_left"

    def test_pick_then_release_latest_wins(self):
        entries = [
            make_entry(0, "pick_from(robot1, cup, table)", observation="cup is on table."),
            make_entry(1, "go_to(robot1, sink)"),
            make_entry(2, "release_to(robot1, sink)", observation="robot1 is holding cup."),
        ]
        belief = summarize_deterministic(entries, "move the cup")
        assert belief.facts == [BeliefFact(object="cup", place="sink", step=2)]
        assert belief.completed == [
            "pick_from(robot1, cup, table)",
            "go_to(robot1, sink)",
            "release_to(robot1, sink)",
        ]

    def test_error_message_becomes_issue(self):
        entries = [
            make_entry(
                4,
                "pick_from(robot1, water, refrigerator)",
                status="Err",
                kind="ContainerClosed",
                message="refrigerator is closed",
            )
        ]
        belief = summarize_deterministic(entries, "t")
        assert any("refrigerator is closed" in issue for issue in belief.issues)
        assert belief.completed == []

    def test_keeps_last_three_issues(self):
        entries = [
            make_entry(i, "skipped", status="Err", kind="critic_outdated", message=f"veto {i}")
            for i in range(5)
        ]
        belief = summarize_deterministic(entries, "t")
        assert [issue.split(": ", 1)[1] for issue in belief.issues] == ["veto 2", "veto 3", "veto 4"]

    def test_render_lists_facts(self):
        belief = Belief(summary="s", facts=[BeliefFact(object="apple", place="oven")])
        assert "- apple -> oven" in belief.render()

    def test_one_place_per_object(self):
        with pytest.raises(ValueError):
            Belief(
                facts=[
                    BeliefFact(object="apple", place="oven"),
                    BeliefFact(object="apple", place="table"),
                ]
            )


SUMMARY_RESPONSE = """SUMMARY: The water was found in the refrigerator.
FACTS:
- water -> refrigerator
- medication: drawer_right
DONE:
- opened the refrigerator
ISSUES:
- none
"""


class TestSummarize:
    def test_parse_sections(self):
        belief = parse_belief(SUMMARY_RESPONSE)
        assert belief.summary == "The water was found in the refrigerator."
        assert [(f.object, f.place) for f in belief.facts] == [
            ("water", "refrigerator"),
            ("medication", "drawer_right"),
        ]
        assert belief.completed == ["opened the refrigerator"]
        assert belief.issues == []

    @pytest.mark.asyncio
    async def test_scripted_backend_fixture(self):
        backend = new_scripted([{"role": "summarizer", "response": SUMMARY_RESPONSE}])
        belief = await summarize(backend, [make_entry(0, "open(robot1, refrigerator)")], "find water")
        assert belief == parse_belief(SUMMARY_RESPONSE)

    @pytest.mark.asyncio
    async def test_retries_once_then_falls_back(self):
        backend = new_scripted([{"role": "summarizer", "response": "I am not sure."}])
        entries = [make_entry(0, "go_to(robot1, sink)", observation="cup is on sink.")]
        belief = await summarize(backend, entries, "t")
        assert belief == summarize_deterministic(entries, "t")

    @pytest.mark.asyncio
    async def test_retry_note_reaches_backend(self):
        backend = new_scripted(
            [
                {"role": "summarizer", "contains": "PREVIOUS RESPONSE ERRORS", "response": SUMMARY_RESPONSE},
                {"role": "summarizer", "response": "garbage"},
            ]
        )
        belief = await summarize(backend, [], "t")
        assert belief.place_of("water") == "refrigerator"

    @pytest.mark.asyncio
    async def test_backend_error_without_fallback(self):
        backend = new_scripted([])
        with pytest.raises(BackendError):
            await summarize(backend, [], "t", fallback=False)

    @pytest.mark.asyncio
    async def test_backend_error_with_fallback(self):
        backend = new_scripted([])
        belief = await summarize(backend, [], "t")
        assert belief == Belief()
