"""
scripted backend tests
"""

import pytest

from lib.backends.base import ChatMessage, ChatRequest, MessageRole, Role
from lib.backends.scripted import ScriptedBackend, ScriptRule, load_script, new_scripted
from lib.errors import BackendError, BackendErrorKind, SchemaError


def request(role, text):
    return ChatRequest(
        role=role,
        messages=[
            ChatMessage(role=MessageRole.SYSTEM, content="system"),
            ChatMessage(role=MessageRole.USER, content=text),
        ],
    )


class TestScriptRule:
    def test_contains_and_pattern_are_exclusive(self):
        with pytest.raises(ValueError):
            ScriptRule(contains="a", pattern="b", response="x")

    def test_invalid_pattern(self):
        with pytest.raises(ValueError):
            ScriptRule(pattern="(", response="x")

    def test_role_filter(self):
        rule = ScriptRule(role=Role.CRITIC, response="x")
        assert rule.matches(request(Role.CRITIC, "anything"))
        assert not rule.matches(request(Role.PLANNER, "anything"))


class TestScriptedBackend:
    @pytest.mark.asyncio
    async def test_first_matching_rule_wins(self):
        backend = new_scripted(
            [
                {"role": "planner", "contains": "water", "response": "first"},
                {"role": "planner", "pattern": "wat.r", "response": "second"},
                {"response": "fallback"},
            ]
        )
        assert await backend.complete(request(Role.PLANNER, "find water")) == "first"
        assert await backend.complete(request(Role.PLANNER, "find milk")) == "fallback"

    @pytest.mark.asyncio
    async def test_matches_only_final_user_message(self):
        backend = new_scripted([{"contains": "secret", "response": "hit"}, {"response": "miss"}])
        req = ChatRequest(
            role=Role.PLANNER,
            messages=[
                ChatMessage(role=MessageRole.USER, content="secret"),
                ChatMessage(role=MessageRole.ASSISTANT, content="ok"),
                ChatMessage(role=MessageRole.USER, content="plain"),
            ],
        )
        assert await backend.complete(req) == "miss"

    @pytest.mark.asyncio
    async def test_once_rules_are_consumed_per_session(self):
        backend = new_scripted(
            [{"once": True, "response": "first time"}, {"response": "later"}]
        )
        assert await backend.complete(request(Role.PLANNER, "x")) == "first time"
        assert await backend.complete(request(Role.PLANNER, "x")) == "later"

        fresh = backend.session()
        assert await fresh.complete(request(Role.PLANNER, "x")) == "first time"

    @pytest.mark.asyncio
    async def test_no_rule_matched(self):
        backend = new_scripted([])
        with pytest.raises(BackendError) as exc_info:
            await backend.complete(request(Role.CRITIC, "x"))
        assert exc_info.value.kind == BackendErrorKind.NO_RULE_MATCHED
        assert exc_info.value.detail["role"] == "critic"

    def test_serves_only_scripted_roles(self):
        backend = new_scripted([{"role": "planner", "response": "x"}])
        assert backend.serves(Role.PLANNER)
        assert not backend.serves(Role.CRITIC)
        assert new_scripted([{"response": "x"}]).serves(Role.OBSERVER)


class TestLoadScript:
    def test_mapping_with_rules(self, tmp_path):
        path = tmp_path / "script.yaml"
        path.write_text("rules:\n  - role: planner\n    response: hello\n")
        rules = load_script(path)
        assert rules == [ScriptRule(role=Role.PLANNER, response="hello")]
        assert isinstance(ScriptedBackend.from_file(path), ScriptedBackend)

    def test_bare_list(self, tmp_path):
        path = tmp_path / "script.yaml"
        path.write_text("- response: hi\n")
        assert load_script(path)[0].response == "hi"

    def test_invalid_rule_has_location(self, tmp_path):
        path = tmp_path / "script.yaml"
        path.write_text("rules:\n  - role: planner\n  - role: wizard\n    response: x\n")
        with pytest.raises(SchemaError) as exc_info:
            load_script(path)
        assert exc_info.value.detail["location"] == "rules[0]"

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_script(tmp_path / "nope.yaml")

    def test_bundled_scripts_load(self, default_suite):
        for task in default_suite.tasks:
            rules = load_script(default_suite.script_path(task))
            assert rules[-1].contains is None and rules[-1].pattern is None
