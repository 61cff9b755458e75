"""Pluggable User and Agent implementations.

Three kinds: scripted playbooks for deterministic tests and golden
trajectories, an LLM adapter speaking the OpenAI-compatible chat-completions
protocol with `tools`/`tool_calls`, and a human bridge that feeds queued
playground input into a session. The hermetic test suite uses scripted
adapters only and never opens a network connection.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Sequence

from .bus import Message, Role
from .errors import AdapterFailure, NeedsHumanInput
from .registry import ToolCallRequest


@dataclass(frozen=True)
class DemonstrationMessage:
    sender: str  # "user" | "agent"
    text: str


@dataclass
class UserSpec:
    """What the simulated user wants, knows, and has seen demonstrated.

    Demonstrations are placed on the bus visible to the User only; they never
    enter the Agent or Environment views.
    """

    goal: str = ""
    knowledge_boundary: str = ""
    demonstrations: list[DemonstrationMessage] = field(default_factory=list)

    def __post_init__(self) -> None:
        expected = "user"
        for demo in self.demonstrations:
            if demo.sender != expected:
                raise ValueError(
                    "demonstrations must alternate user/agent starting with user"
                )
            expected = "agent" if expected == "user" else "user"
        if self.demonstrations and self.demonstrations[-1].sender != "agent":
            raise ValueError("demonstrations must end with an agent message")

    def to_dict(self) -> dict[str, Any]:
        return {
            "goal": self.goal,
            "knowledge_boundary": self.knowledge_boundary,
            "demonstrations": [{"sender": d.sender, "text": d.text} for d in self.demonstrations],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "UserSpec":
        return cls(
            goal=data.get("goal", ""),
            knowledge_boundary=data.get("knowledge_boundary", ""),
            demonstrations=[
                DemonstrationMessage(d["sender"], d["text"])
                for d in data.get("demonstrations", [])
            ],
        )


def _prompt_asset(name: str) -> str:
    return (resources.files("toolsim") / "prompts" / name).read_text()


def assemble_user_context(spec: UserSpec, opening_message: str) -> list[Message]:
    """Initial bus messages: the user simulator's private preamble followed by
    the scenario's opening utterance at default visibility."""
    messages: list[Message] = []
    if spec.goal or spec.knowledge_boundary:
        text = _prompt_asset("user_context.txt").format(
            goal=spec.goal or "(none given)",
            knowledge_boundary=spec.knowledge_boundary or "(no extra constraints)",
        )
        messages.append(
            Message(
                sender=Role.EXECUTION_ENVIRONMENT,
                recipient=Role.USER,
                text=text,
                visible_to=frozenset({Role.USER}),
                context=True,
            )
        )
    for demo in spec.demonstrations:
        sender = Role.USER if demo.sender == "user" else Role.AGENT
        recipient = Role.AGENT if demo.sender == "user" else Role.USER
        messages.append(
            Message(
                sender=sender,
                recipient=recipient,
                text=demo.text,
                visible_to=frozenset({Role.USER}),
                context=True,
            )
        )
    messages.append(Message(sender=Role.USER, recipient=Role.AGENT, text=opening_message))
    return messages


# --------------------------------------------------------------------------
# Adapter reply types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AgentReply:
    text: str | None = None
    calls: list[ToolCallRequest] | None = None


@dataclass(frozen=True)
class UserReply:
    text: str | None = None
    end: bool = False


# --------------------------------------------------------------------------
# Scripted adapters
# --------------------------------------------------------------------------


def _parse_call_steps(calls: Sequence[dict[str, Any]]) -> list[ToolCallRequest]:
    return [
        ToolCallRequest(
            call_id=call.get("call_id", f"call-{position}"),
            tool_name=call["tool"],
            arguments=dict(call.get("arguments", {})),
            batch_position=position,
        )
        for position, call in enumerate(calls)
    ]


class ScriptedAgent:
    """Replays an ordered playbook of text replies and tool-call batches."""

    identity = "scripted"

    def __init__(self, steps: Sequence[dict[str, Any]]):
        self._steps = list(steps)
        self._cursor = 0

    def step(self, view: Sequence[Message], tools: list[dict[str, Any]]) -> AgentReply:
        if self._cursor >= len(self._steps):
            raise AdapterFailure("scripted agent playbook exhausted")
        entry = self._steps[self._cursor]
        self._cursor += 1
        if entry.get("kind") == "text":
            return AgentReply(text=entry["text"])
        if entry.get("kind") == "tool_calls":
            return AgentReply(calls=_parse_call_steps(entry["calls"]))
        raise AdapterFailure(f"unknown scripted agent step kind: {entry.get('kind')!r}")


class ScriptedUser:
    """Replays an ordered playbook of text replies ending in end_conversation."""

    identity = "scripted"

    def __init__(self, steps: Sequence[dict[str, Any]]):
        self._steps = list(steps)
        self._cursor = 0

    def step(self, view: Sequence[Message]) -> UserReply:
        if self._cursor >= len(self._steps):
            raise AdapterFailure("scripted user playbook exhausted")
        entry = self._steps[self._cursor]
        self._cursor += 1
        if entry.get("kind") == "text":
            return UserReply(text=entry["text"])
        if entry.get("kind") == "end":
            return UserReply(end=True)
        raise AdapterFailure(f"unknown scripted user step kind: {entry.get('kind')!r}")


# --------------------------------------------------------------------------
# Human bridge
# --------------------------------------------------------------------------


class HumanBridgeAgent:
    """Pulls the next queued human input; raises NeedsHumanInput when empty."""

    identity = "human"

    def __init__(self) -> None:
        self.queue: list[AgentReply] = []

    def push(self, reply: AgentReply) -> None:
        self.queue.append(reply)

    def step(self, view: Sequence[Message], tools: list[dict[str, Any]]) -> AgentReply:
        if not self.queue:
            raise NeedsHumanInput(Role.AGENT.value)
        return self.queue.pop(0)


class HumanBridgeUser:
    identity = "human"

    def __init__(self) -> None:
        self.queue: list[UserReply] = []

    def push(self, reply: UserReply) -> None:
        self.queue.append(reply)

    def step(self, view: Sequence[Message]) -> UserReply:
        if not self.queue:
            raise NeedsHumanInput(Role.USER.value)
        return self.queue.pop(0)


# --------------------------------------------------------------------------
# LLM adapters (OpenAI-compatible chat completions)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model: str
    token_env: str = "TOOLSIM_API_KEY"
    max_retries: int = 3
    timeout_seconds: float = 60.0

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LlmConfig":
        return cls(
            endpoint=data["endpoint"],
            model=data["model"],
            token_env=data.get("token_env", "TOOLSIM_API_KEY"),
            max_retries=data.get("max_retries", 3),
            timeout_seconds=data.get("timeout_seconds", 60.0),
        )


def agent_view_to_chat(view: Sequence[Message]) -> list[dict[str, Any]]:
    """Map the Agent's bus view onto chat-completions messages.

    Total and order-preserving: text turns map 1:1, a tool-call batch maps to
    one assistant message, and a result batch maps to one tool-role message
    per call outcome (the wire protocol requires one per tool_call_id).
    """
    chat: list[dict[str, Any]] = [{"role": "system", "content": _prompt_asset("agent_system.txt")}]
    for message in view:
        if message.sender == Role.USER and message.text is not None:
            chat.append({"role": "user", "content": message.text})
        elif message.sender == Role.AGENT and message.text is not None:
            chat.append({"role": "assistant", "content": message.text})
        elif message.sender == Role.AGENT and message.tool_calls is not None:
            chat.append(
                {
                    "role": "assistant",
                    "content": None,
                    "tool_calls": [
                        {
                            "id": call.call_id,
                            "type": "function",
                            "function": {
                                "name": call.tool_name,
                                "arguments": json.dumps(call.arguments),
                            },
                        }
                        for call in message.tool_calls
                    ],
                }
            )
        elif message.tool_results is not None:
            for outcome in message.tool_results:
                chat.append(
                    {
                        "role": "tool",
                        "tool_call_id": outcome.call_id,
                        "content": json.dumps(outcome.to_dict()),
                    }
                )
        else:
            chat.append({"role": "user", "content": message.text or ""})
    return chat


def user_view_to_chat(view: Sequence[Message]) -> list[dict[str, Any]]:
    """Map the User's view onto chat messages from the simulator's seat: the
    simulator *is* the assistant, so Agent turns arrive as user messages."""
    chat: list[dict[str, Any]] = []
    for message in view:
        if message.context and message.sender == Role.EXECUTION_ENVIRONMENT:
            chat.append({"role": "system", "content": message.text or ""})
        elif message.sender == Role.USER and message.text is not None:
            chat.append({"role": "assistant", "content": message.text})
        elif message.text is not None:
            chat.append({"role": "user", "content": message.text})
        else:
            chat.append({"role": "user", "content": json.dumps(message.to_dict()["content"])})
    return chat


def parse_tool_calls(message: dict[str, Any]) -> list[ToolCallRequest]:
    """Parse a chat-completions assistant message's tool_calls into a batch.

    Malformed argument JSON raises ValueError; the adapter surfaces it as a
    recoverable text message rather than crashing the session.
    """
    calls = []
    for position, entry in enumerate(message.get("tool_calls") or []):
        function = entry.get("function", {})
        raw = function.get("arguments", "{}")
        try:
            arguments = json.loads(raw) if raw else {}
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed tool call arguments for '{function.get('name')}': {exc}")
        if not isinstance(arguments, dict):
            raise ValueError(f"tool call arguments for '{function.get('name')}' must be an object")
        calls.append(
            ToolCallRequest(
                call_id=entry.get("id", f"call-{position}"),
                tool_name=function.get("name", ""),
                arguments=arguments,
                batch_position=position,
            )
        )
    return calls


class _ChatClient:
    def __init__(self, config: LlmConfig):
        self.config = config

    def complete(self, payload: dict[str, Any]) -> dict[str, Any]:
        import os

        import httpx

        headers = {}
        token = os.environ.get(self.config.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        url = self.config.endpoint.rstrip("/") + "/chat/completions"
        delay = 1.0
        for attempt in range(self.config.max_retries):
            try:
                response = httpx.post(
                    url, json=payload, headers=headers, timeout=self.config.timeout_seconds
                )
                response.raise_for_status()
                return response.json()
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                if attempt == self.config.max_retries - 1:
                    raise AdapterFailure(f"chat endpoint failed after retries: {exc}") from exc
                time.sleep(delay)
                delay *= 2
        raise AdapterFailure("unreachable")


class LlmAgent:
    def __init__(self, config: LlmConfig, client: _ChatClient | None = None):
        self.config = config
        self.client = client or _ChatClient(config)
        self.identity = f"llm:{config.model}"

    def step(self, view: Sequence[Message], tools: list[dict[str, Any]]) -> AgentReply:
        payload = {
            "model": self.config.model,
            "messages": agent_view_to_chat(view),
            "tools": [{"type": "function", "function": tool} for tool in tools],
        }
        response = self.client.complete(payload)
        choice = response["choices"][0]["message"]
        if choice.get("tool_calls"):
            try:
                return AgentReply(calls=parse_tool_calls(choice))
            except ValueError as exc:
                return AgentReply(text=f"(tool call parse error) {exc}")
        return AgentReply(text=choice.get("content") or "")


#: Wire schema for the user simulator's single private tool.
END_CONVERSATION_TOOL = {
    "name": "end_conversation",
    "description": "End the conversation once the task is complete or impossible.",
    "parameters": {"type": "object", "properties": {}, "required": []},
}


class LlmUser:
    def __init__(self, config: LlmConfig, client: _ChatClient | None = None):
        self.config = config
        self.client = client or _ChatClient(config)
        self.identity = f"llm:{config.model}"

    def step(self, view: Sequence[Message]) -> UserReply:
        payload = {
            "model": self.config.model,
            "messages": user_view_to_chat(view),
            "tools": [{"type": "function", "function": END_CONVERSATION_TOOL}],
        }
        response = self.client.complete(payload)
        choice = response["choices"][0]["message"]
        for entry in choice.get("tool_calls") or []:
            if entry.get("function", {}).get("name") == "end_conversation":
                return UserReply(end=True)
        return UserReply(text=choice.get("content") or "")
