"""Tool registry construction and single-call execution.

Execution is all-or-nothing per call: the tool runs against a scratch copy
of a baseline state, and only its declared write set is merged back on
success. Every executed call appends exactly one trace regardless of
outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import ToolArgumentError, ToolError
from ..registry import (
    AugmentationConfig,
    PresentedToolset,
    ToolSchema,
    apply_augmentations,
    validate_arguments,
)
from ..world import SETTINGS_FLAGS, ToolTrace, WorldState
from .builtin import RegisteredTool, ToolContext, builtin_tools, haversine_km
from .fixtures import CatalogFixtures, load_fixtures

__all__ = [
    "CallOutcome",
    "CatalogFixtures",
    "RegisteredTool",
    "ToolContext",
    "ToolRegistry",
    "build_registry",
    "execute_tool",
    "merge_writes",
    "haversine_km",
    "load_fixtures",
]


@dataclass(frozen=True)
class CallOutcome:
    """Result of one executed (or rejected) tool call."""

    call_id: str
    tool_name: str
    ok: bool
    result: Any = None
    error_kind: str | None = None
    error_message: str | None = None

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"call_id": self.call_id, "tool_name": self.tool_name, "ok": self.ok}
        if self.ok:
            data["result"] = self.result
        else:
            data["error_kind"] = self.error_kind
            data["error_message"] = self.error_message
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CallOutcome":
        return cls(
            call_id=data["call_id"],
            tool_name=data["tool_name"],
            ok=bool(data["ok"]),
            result=data.get("result"),
            error_kind=data.get("error_kind"),
            error_message=data.get("error_message"),
        )


@dataclass
class ToolRegistry:
    """Immutable-after-construction catalog of registered tools."""

    fixtures: CatalogFixtures
    _tools: dict[str, RegisteredTool] = field(default_factory=dict)

    def register(self, tool: RegisteredTool) -> None:
        if tool.schema.name in self._tools:
            raise ValueError(f"tool '{tool.schema.name}' is already registered")
        self._tools[tool.schema.name] = tool

    def __contains__(self, name: str) -> bool:
        return name in self._tools

    def get(self, name: str) -> RegisteredTool | None:
        return self._tools.get(name)

    def schema(self, name: str) -> ToolSchema:
        return self._tools[name].schema

    def all_tools(self) -> list[RegisteredTool]:
        return [self._tools[name] for name in sorted(self._tools)]

    def agent_schemas(self) -> list[ToolSchema]:
        return [t.schema for t in self.all_tools() if not t.user_only]

    def tool_names(self) -> set[str]:
        return set(self._tools)

    def present(
        self,
        necessary: list[str],
        config: AugmentationConfig | None = None,
        withheld: list[str] | None = None,
    ) -> PresentedToolset:
        """Agent-facing toolset for a scenario: necessary tools plus
        augmentation-driven distraction tools, never including withheld or
        user-only tools."""
        config = config or AugmentationConfig()
        withheld = withheld or []
        necessary_schemas = [self.schema(name) for name in necessary]
        user_only = [t.schema.name for t in self.all_tools() if t.user_only]
        return apply_augmentations(
            necessary_schemas,
            config,
            catalog=self.agent_schemas(),
            exclude=set(withheld) | set(user_only),
        )


def build_registry(fixtures_dir: Path | None = None) -> ToolRegistry:
    registry = ToolRegistry(fixtures=load_fixtures(fixtures_dir))
    for tool in builtin_tools():
        registry.register(tool)
    return registry


def merge_writes(live: WorldState, scratch: WorldState, writes: frozenset[str]) -> None:
    for key in sorted(writes):
        if key in SETTINGS_FLAGS:
            setattr(live.settings, key, getattr(scratch.settings, key))
        else:
            setattr(live, key, scratch.database(key))
            live.id_counters[key] = scratch.id_counters.get(key, 0)


def run_call_against(
    tool: RegisteredTool,
    args: dict[str, Any],
    baseline: WorldState,
    fixtures: CatalogFixtures,
) -> tuple[CallOutcome, WorldState | None, dict[str, Any]]:
    """Validate and run one call against a scratch copy of `baseline`.

    Returns (outcome, scratch-state-or-None, recorded-arguments). Dependency
    predicates are checked before the tool body runs, so a failing call
    never mutates anything.
    """
    name = tool.schema.name
    try:
        normalized = validate_arguments(tool.schema, args)
    except ToolArgumentError as exc:
        outcome = CallOutcome(
            call_id="", tool_name=name, ok=False, error_kind=exc.kind, error_message=str(exc)
        )
        return outcome, None, dict(args)
    scratch = baseline.clone()
    for predicate in tool.schema.requires:
        if predicate.applies(normalized):
            if getattr(scratch.settings, predicate.flag) != predicate.expected:
                outcome = CallOutcome(
                    call_id="",
                    tool_name=name,
                    ok=False,
                    error_kind=predicate.error_kind,
                    error_message=predicate.message,
                )
                return outcome, None, normalized
    try:
        result = tool.fn(ToolContext(state=scratch, fixtures=fixtures), **normalized)
    except ToolError as exc:
        outcome = CallOutcome(
            call_id="", tool_name=name, ok=False, error_kind=exc.kind, error_message=exc.message
        )
        return outcome, None, normalized
    return CallOutcome(call_id="", tool_name=name, ok=True, result=result), scratch, normalized


def execute_tool(
    registry: ToolRegistry,
    name: str,
    args: dict[str, Any],
    state: WorldState,
    turn_index: int,
) -> CallOutcome:
    """Execute a single registered tool against live state.

    Equivalent to a one-call batch: reads and dependency checks see the
    pre-call state, writes land only on success, and exactly one trace is
    appended either way.
    """
    tool = registry.get(name)
    if tool is None:
        outcome = CallOutcome(
            call_id="",
            tool_name=name,
            ok=False,
            error_kind="KeyError",
            error_message=f"tool '{name}' is not available",
        )
        state.add_trace(
            ToolTrace(
                turn_index=turn_index,
                tool_name=name,
                arguments=dict(args),
                ok=False,
                error_kind=outcome.error_kind,
                error_message=outcome.error_message,
            )
        )
        return outcome
    outcome, scratch, recorded = run_call_against(tool, args, state, registry.fixtures)
    if outcome.ok and scratch is not None:
        merge_writes(state, scratch, tool.schema.writes)
    state.add_trace(
        ToolTrace(
            turn_index=turn_index,
            tool_name=name,
            arguments=recorded,
            ok=outcome.ok,
            result=outcome.result,
            error_kind=outcome.error_kind,
            error_message=outcome.error_message,
        )
    )
    return outcome
