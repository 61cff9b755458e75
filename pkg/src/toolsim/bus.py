"""Message passing between User, Agent and Execution Environment.

Every message lands on one shared bus; each role reads a visibility-filtered
sub-view. The orchestration rule is simply that the most recent recipient
speaks next. Parallel tool-call batches execute under Murphy semantics:
every call's reads and dependency checks see the pre-batch state, so a call
racing against its own enabler always fails.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .catalog import CallOutcome, ToolRegistry, merge_writes, run_call_against
from .registry import PresentedToolset, ToolCallRequest
from .world import ToolTrace, WorldState


class Role(str, enum.Enum):
    USER = "user"
    AGENT = "agent"
    EXECUTION_ENVIRONMENT = "execution_environment"


@dataclass
class Message:
    """One transaction on the bus.

    Exactly one of `text`, `tool_calls`, `tool_results` is set; a message has
    one sender and one distinct recipient. `visible_to` defaults to
    {sender, recipient} and may be narrowed (demonstration messages are
    visible to the User only). `context` marks the user-simulator preamble,
    which is excluded from the turn-count metric.
    """

    sender: Role
    recipient: Role
    text: str | None = None
    tool_calls: list[ToolCallRequest] | None = None
    tool_results: list[CallOutcome] | None = None
    visible_to: frozenset[Role] = frozenset()
    context: bool = False
    turn_index: int = 0

    def __post_init__(self) -> None:
        if self.sender == self.recipient:
            raise ValueError("a message must have one recipient distinct from its sender")
        populated = sum(x is not None for x in (self.text, self.tool_calls, self.tool_results))
        if populated != 1:
            raise ValueError("message content must be exactly one of text/tool_calls/tool_results")
        if not self.visible_to:
            self.visible_to = frozenset({self.sender, self.recipient})

    @property
    def content_kind(self) -> str:
        if self.text is not None:
            return "text"
        if self.tool_calls is not None:
            return "tool_calls"
        return "tool_results"

    def to_dict(self) -> dict[str, Any]:
        content: dict[str, Any]
        if self.text is not None:
            content = {"kind": "text", "text": self.text}
        elif self.tool_calls is not None:
            content = {"kind": "tool_calls", "calls": [c.to_dict() for c in self.tool_calls]}
        else:
            content = {
                "kind": "tool_results",
                "results": [r.to_dict() for r in self.tool_results or []],
            }
        return {
            "turn_index": self.turn_index,
            "sender": self.sender.value,
            "recipient": self.recipient.value,
            "visible_to": sorted(role.value for role in self.visible_to),
            "context": self.context,
            "content": content,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Message":
        content = data["content"]
        kwargs: dict[str, Any] = {}
        if content["kind"] == "text":
            kwargs["text"] = content["text"]
        elif content["kind"] == "tool_calls":
            kwargs["tool_calls"] = [ToolCallRequest.from_dict(c) for c in content["calls"]]
        else:
            kwargs["tool_results"] = [CallOutcome.from_dict(r) for r in content["results"]]
        return cls(
            sender=Role(data["sender"]),
            recipient=Role(data["recipient"]),
            visible_to=frozenset(Role(r) for r in data["visible_to"]),
            context=data.get("context", False),
            turn_index=data.get("turn_index", 0),
            **kwargs,
        )


@dataclass(frozen=True)
class SessionConfig:
    max_turns: int = 30
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_turns < 2:
            raise ValueError("max_turns must be at least 2")


def view_for(bus: Sequence[Message], role: Role) -> list[Message]:
    """The sub-view a role is allowed to read, in bus order."""
    return [message for message in bus if role in message.visible_to]


def next_speaker(bus: Sequence[Message]) -> Role:
    """The most recent recipient speaks next."""
    if not bus:
        raise ValueError("cannot determine the next speaker of an empty bus")
    return bus[-1].recipient


def turn_count(bus: Iterable[Message]) -> int:
    """Messages on the bus excluding the User-only context preamble."""
    return sum(1 for message in bus if not message.context)


def execute_batch(
    calls: Sequence[ToolCallRequest],
    state: WorldState,
    registry: ToolRegistry,
    presented: PresentedToolset | None,
    turn_index: int,
) -> list[CallOutcome]:
    """Execute one agent message's batch with Murphy semantics.

    Every call is validated and run against a scratch copy of the pre-batch
    state, so sibling writes are invisible and a detected race always
    manifests. Writes of successful calls are merged in batch order
    afterward; a per-call failure never aborts the batch. Traces record the
    canonical (original) tool name even when the agent called a scrambled
    presented name.
    """
    baseline = state.clone()
    merges: list[tuple[frozenset[str], WorldState]] = []
    outcomes: list[CallOutcome] = []
    for call in calls:
        requested = call.tool_name
        original = presented.original_name(requested) if presented is not None else requested
        tool = registry.get(original) if original is not None else None
        if tool is None:
            outcome = CallOutcome(
                call_id=call.call_id,
                tool_name=requested,
                ok=False,
                error_kind="KeyError",
                error_message=f"tool '{requested}' is not available",
            )
            trace_name, recorded = requested, dict(call.arguments)
        else:
            result, scratch, recorded = run_call_against(
                tool, call.arguments, baseline, registry.fixtures
            )
            outcome = CallOutcome(
                call_id=call.call_id,
                tool_name=requested,
                ok=result.ok,
                result=result.result,
                error_kind=result.error_kind,
                error_message=result.error_message,
            )
            trace_name = tool.schema.name
            if result.ok and scratch is not None:
                merges.append((tool.schema.writes, scratch))
        state.add_trace(
            ToolTrace(
                turn_index=turn_index,
                tool_name=trace_name,
                arguments=recorded,
                ok=outcome.ok,
                result=outcome.result,
                error_kind=outcome.error_kind,
                error_message=outcome.error_message,
            )
        )
        outcomes.append(outcome)
    for writes, scratch in merges:
        merge_writes(state, scratch, writes)
    return outcomes
