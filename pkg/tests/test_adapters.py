from __future__ import annotations

import json

import pytest

from toolsim.adapters import (
    DemonstrationMessage,
    HumanBridgeAgent,
    HumanBridgeUser,
    AgentReply,
    LlmAgent,
    LlmConfig,
    LlmUser,
    ScriptedAgent,
    ScriptedUser,
    UserReply,
    UserSpec,
    agent_view_to_chat,
    assemble_user_context,
    parse_tool_calls,
    user_view_to_chat,
)
from toolsim.bus import Message, Role, view_for
from toolsim.catalog import CallOutcome
from toolsim.errors import AdapterFailure, NeedsHumanInput
from toolsim.registry import ToolCallRequest


def _spec(demos=0, goal="Send a message.", boundary="You know nothing else."):
    demonstrations = []
    for i in range(demos):
        demonstrations.append(DemonstrationMessage("user", f"example ask {i}"))
        demonstrations.append(DemonstrationMessage("agent", f"example reply {i}"))
    return UserSpec(goal=goal, knowledge_boundary=boundary, demonstrations=demonstrations)


def test_context_without_demos_is_one_message_plus_opening():
    messages = assemble_user_context(_spec(), "Hello there")
    assert len(messages) == 2
    assert messages[0].context and messages[0].visible_to == {Role.USER}
    assert messages[1].text == "Hello there"
    assert messages[1].visible_to == {Role.USER, Role.AGENT}


def test_demonstrations_stay_out_of_agent_and_env_views():
    messages = assemble_user_context(_spec(demos=2), "Hi")
    agent_view = view_for(messages, Role.AGENT)
    env_view = view_for(messages, Role.EXECUTION_ENVIRONMENT)
    assert [m.text for m in agent_view] == ["Hi"]
    assert env_view == []
    assert len(view_for(messages, Role.USER)) == len(messages)


def test_goal_only_and_full_context_differ_only_in_user_view():
    plain = assemble_user_context(UserSpec(), "Hi")
    rich = assemble_user_context(_spec(demos=1), "Hi")
    assert view_for(plain, Role.AGENT) == [plain[-1]]
    assert [m.text for m in view_for(rich, Role.AGENT)] == ["Hi"]
    assert len(view_for(rich, Role.USER)) == 4  # goal + 2 demo messages + opening


def test_goal_and_boundary_texts_reach_the_context_message():
    messages = assemble_user_context(_spec(), "Hi")
    assert "Send a message." in messages[0].text
    assert "You know nothing else." in messages[0].text


def test_demonstrations_must_alternate():
    with pytest.raises(ValueError):
        UserSpec(demonstrations=[DemonstrationMessage("agent", "hi")])
    with pytest.raises(ValueError):
        UserSpec(demonstrations=[DemonstrationMessage("user", "hi")])


# ---------------------------------------------------------------- scripted


def test_scripted_agent_replays_steps_then_fails():
    agent = ScriptedAgent([
        {"kind": "tool_calls", "calls": [{"tool": "search_contacts", "arguments": {"name": "John"}}]},
        {"kind": "text", "text": "done"},
    ])
    reply = agent.step([], [])
    assert reply.calls is not None
    assert reply.calls[0].tool_name == "search_contacts"
    assert reply.calls[0].batch_position == 0
    assert agent.step([], []).text == "done"
    with pytest.raises(AdapterFailure):
        agent.step([], [])


def test_scripted_user_final_step_ends_conversation():
    user = ScriptedUser([{"kind": "text", "text": "more"}, {"kind": "end"}])
    assert user.step([]).text == "more"
    assert user.step([]).end is True


def test_human_bridge_is_a_queue_passthrough():
    agent = HumanBridgeAgent()
    with pytest.raises(NeedsHumanInput):
        agent.step([], [])
    agent.push(AgentReply(text="typed by a person"))
    assert agent.step([], []).text == "typed by a person"

    user = HumanBridgeUser()
    user.push(UserReply(end=True))
    assert user.step([]).end


# ---------------------------------------------------------------- chat mapping


def _view():
    call = ToolCallRequest("call-1", "send_message", {"phone_number": "+1", "content": "x"}, 0)
    result = CallOutcome("call-1", "send_message", ok=True, result="message-0")
    messages = [
        Message(sender=Role.USER, recipient=Role.AGENT, text="send it"),
        Message(sender=Role.AGENT, recipient=Role.EXECUTION_ENVIRONMENT, tool_calls=[call]),
        Message(sender=Role.EXECUTION_ENVIRONMENT, recipient=Role.AGENT, tool_results=[result]),
        Message(sender=Role.AGENT, recipient=Role.USER, text="sent!"),
    ]
    return messages


def test_agent_chat_mapping_is_total_and_order_preserving():
    chat = agent_view_to_chat(_view())
    assert chat[0]["role"] == "system"
    assert [m["role"] for m in chat[1:]] == ["user", "assistant", "tool", "assistant"]
    assert chat[2]["tool_calls"][0]["function"]["name"] == "send_message"
    assert chat[3]["tool_call_id"] == "call-1"


def test_user_chat_mapping_swaps_seats():
    spec = _spec(demos=1)
    context = assemble_user_context(spec, "opening ask")
    context.append(Message(sender=Role.AGENT, recipient=Role.USER, text="what number?"))
    chat = user_view_to_chat(context)
    assert chat[0]["role"] == "system"
    # Demo user line speaks as the assistant (the simulator's own seat).
    assert chat[1]["role"] == "assistant"
    assert chat[2]["role"] == "user"
    assert chat[-1] == {"role": "user", "content": "what number?"}


def test_recorded_transcript_replays_to_the_same_batch():
    # Captured chat-completions response carrying two function calls.
    recorded = {
        "role": "assistant",
        "content": None,
        "tool_calls": [
            {"id": "call_abc", "type": "function",
             "function": {"name": "search_location",
                          "arguments": "{\"query\": \"Golden Gate Bridge\"}"}},
            {"id": "call_def", "type": "function",
             "function": {"name": "search_location",
                          "arguments": "{\"query\": \"Eiffel Tower\"}"}},
        ],
    }
    batch = parse_tool_calls(recorded)
    assert [c.batch_position for c in batch] == [0, 1]
    assert batch[0] == ToolCallRequest("call_abc", "search_location",
                                       {"query": "Golden Gate Bridge"}, 0)
    assert batch[1].arguments == {"query": "Eiffel Tower"}


def test_malformed_arguments_surface_as_parse_error():
    with pytest.raises(ValueError):
        parse_tool_calls({"tool_calls": [
            {"id": "x", "function": {"name": "f", "arguments": "{not json"}}
        ]})


class _FakeClient:
    def __init__(self, responses):
        self.responses = list(responses)
        self.payloads = []

    def complete(self, payload):
        self.payloads.append(payload)
        return self.responses.pop(0)


def _llm_config():
    return LlmConfig(endpoint="http://example.invalid/v1", model="test-model")


def test_llm_agent_maps_tool_calls_and_prose():
    client = _FakeClient([
        {"choices": [{"message": {"tool_calls": [
            {"id": "c1", "function": {"name": "get_wifi_status", "arguments": "{}"}}
        ]}}]},
        {"choices": [{"message": {"content": "all good"}}]},
    ])
    agent = LlmAgent(_llm_config(), client=client)
    view = [Message(sender=Role.USER, recipient=Role.AGENT, text="check wifi")]
    tools = [{"name": "get_wifi_status", "description": "", "parameters": {}}]
    first = agent.step(view, tools)
    assert first.calls is not None and first.calls[0].tool_name == "get_wifi_status"
    assert client.payloads[0]["tools"][0]["function"]["name"] == "get_wifi_status"
    second = agent.step(view, tools)
    assert second.text == "all good"


def test_llm_agent_recovers_from_malformed_call():
    client = _FakeClient([
        {"choices": [{"message": {"tool_calls": [
            {"id": "c1", "function": {"name": "f", "arguments": "{broken"}}
        ]}}]},
    ])
    agent = LlmAgent(_llm_config(), client=client)
    reply = agent.step([Message(sender=Role.USER, recipient=Role.AGENT, text="go")], [])
    assert reply.text is not None and "parse error" in reply.text


def test_llm_user_ends_via_end_conversation_tool():
    client = _FakeClient([
        {"choices": [{"message": {"tool_calls": [
            {"id": "e", "function": {"name": "end_conversation", "arguments": "{}"}}
        ]}}]},
    ])
    user = LlmUser(_llm_config(), client=client)
    reply = user.step([Message(sender=Role.AGENT, recipient=Role.USER, text="done!")])
    assert reply.end
    sent_tools = client.payloads[0]["tools"]
    assert sent_tools[0]["function"]["name"] == "end_conversation"
