"""Scenario data model, on-disk JSON format, and suite validation.

A scenario bundles the initial world, the simulated user's spec, the tool
surface (necessary tools, withheld tools, augmentation), and the milestone
and minefield DAGs. Every shipped scenario carries a golden scripted
trajectory under `golden/<id>.trajectory`; `validate_suite` replays each
golden and demands a final score of 1.0, standing in as a machine-checked
feasibility pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .adapters import UserSpec
from .bus import Role
from .errors import ScenarioError
from .evaluation import (
    BindingRef,
    ColumnMatcher,
    DbTarget,
    GuardrailTarget,
    MessageTarget,
    Milestone,
    MilestoneDAG,
    TraceTarget,
)
from .registry import AugmentationConfig
from .world import DATABASE_NAMES, SETTINGS_FLAGS, WorldState

CATEGORIES = ("STC", "MTC", "SUT", "MUT", "SD", "C", "II")

SCHEMA_VERSION = 1

_MATCHER_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["exact", "numeric_abs_tol", "rouge_l", "geo_radius", "any"]},
        "expected": {},
        "binding": {
            "type": "object",
            "properties": {"source": {"type": "string"}, "path": {"type": "string"}},
            "required": ["source"],
            "additionalProperties": False,
        },
        "params": {
            "type": "object",
            "properties": {
                "tolerance": {"type": "number"},
                "radius_km": {"type": "number"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_MATCHER_MAP_SCHEMA = {"type": "object", "additionalProperties": _MATCHER_SCHEMA}

_MILESTONE_SCHEMA = {
    "type": "object",
    "properties": {
        "id": {"type": "string"},
        "kind": {"enum": ["db", "trace", "message", "guardrail"]},
        "description": {"type": "string"},
        "db": {"enum": list(DATABASE_NAMES)},
        "rows": {"type": "array", "items": _MATCHER_MAP_SCHEMA},
        "cardinality": {"enum": ["at_least", "exact"]},
        "tool": {"type": "string"},
        "arguments": _MATCHER_MAP_SCHEMA,
        "require_success": {"type": "boolean"},
        "result": _MATCHER_MAP_SCHEMA,
        "sender": {"enum": ["user", "agent", "execution_environment"]},
        "recipient": {"enum": ["user", "agent", "execution_environment"]},
        "content": _MATCHER_SCHEMA,
        "ref_a": {"type": "string"},
        "ref_b": {"type": "string"},
    },
    "required": ["id", "kind"],
    "additionalProperties": False,
}

_DAG_SCHEMA = {
    "type": "object",
    "properties": {
        "nodes": {"type": "array", "items": _MILESTONE_SCHEMA},
        "edges": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "string"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
    },
    "required": ["nodes"],
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "id": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "categories": {
            "type": "array",
            "items": {"enum": list(CATEGORIES)},
            "minItems": 1,
        },
        "initial_world_state": {
            "type": "object",
            "properties": {
                "settings": {
                    "type": "object",
                    "properties": {flag: {"type": "boolean"} for flag in SETTINGS_FLAGS},
                    "required": list(SETTINGS_FLAGS),
                    "additionalProperties": False,
                },
                "contacts": {"type": "array", "items": {"type": "object"}},
                "messages": {"type": "array", "items": {"type": "object"}},
                "reminders": {"type": "array", "items": {"type": "object"}},
                "clock_timestamp": {"type": "number"},
                "current_location": {
                    "type": "object",
                    "properties": {
                        "latitude": {"type": "number"},
                        "longitude": {"type": "number"},
                    },
                    "required": ["latitude", "longitude"],
                    "additionalProperties": False,
                },
            },
            "required": ["settings", "clock_timestamp", "current_location"],
            "additionalProperties": False,
        },
        "user": {
            "type": "object",
            "properties": {
                "goal": {"type": "string"},
                "knowledge_boundary": {"type": "string"},
                "demonstrations": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "sender": {"enum": ["user", "agent"]},
                            "text": {"type": "string"},
                        },
                        "required": ["sender", "text"],
                        "additionalProperties": False,
                    },
                },
            },
            "additionalProperties": False,
        },
        "opening_message": {"type": "string", "minLength": 1},
        "necessary_tools": {"type": "array", "items": {"type": "string"}},
        "withheld_tools": {"type": "array", "items": {"type": "string"}},
        "augmentation": {
            "type": "object",
            "properties": {
                "distraction": {"enum": [0, 3, 10, "all"]},
                "scramble_tool_name": {"type": "boolean"},
                "scramble_tool_description": {"type": "boolean"},
                "scramble_arg_descriptions": {"type": "boolean"},
                "scramble_arg_types": {"type": "boolean"},
                "seed": {"type": "integer"},
            },
            "additionalProperties": False,
        },
        "max_turns": {"type": "integer", "minimum": 2},
        "milestones": _DAG_SCHEMA,
        "minefields": _DAG_SCHEMA,
    },
    "required": [
        "schema_version",
        "id",
        "categories",
        "initial_world_state",
        "user",
        "opening_message",
        "necessary_tools",
        "milestones",
        "minefields",
    ],
    "additionalProperties": False,
}


def _matcher_from_dict(data: dict[str, Any]) -> ColumnMatcher:
    params = data.get("params", {})
    binding = None
    if "binding" in data:
        binding = BindingRef(source_id=data["binding"]["source"], path=data["binding"].get("path", ""))
    return ColumnMatcher(
        kind=data["kind"],
        expected=data.get("expected"),
        binding=binding,
        tolerance=params.get("tolerance", 0.0),
        radius_km=params.get("radius_km", 0.0),
    )


def _matcher_map(data: dict[str, Any]) -> dict[str, ColumnMatcher]:
    return {key: _matcher_from_dict(value) for key, value in data.items()}


def _milestone_from_dict(data: dict[str, Any]) -> Milestone:
    kind = data["kind"]
    if kind == "db":
        target: Any = DbTarget(
            db=data["db"],
            rows=tuple(_matcher_map(row) for row in data.get("rows", [])),
            cardinality=data.get("cardinality", "at_least"),
        )
    elif kind == "trace":
        target = TraceTarget(
            tool=data["tool"],
            arguments=_matcher_map(data.get("arguments", {})),
            require_success=data.get("require_success", True),
            result=_matcher_map(data.get("result", {})),
        )
    elif kind == "message":
        target = MessageTarget(
            sender=Role(data["sender"]),
            recipient=Role(data["recipient"]),
            content=_matcher_from_dict(data.get("content", {"kind": "any"})),
        )
    else:
        target = GuardrailTarget(db=data["db"], ref_a=data["ref_a"], ref_b=data["ref_b"])
    return Milestone(id=data["id"], target=target, description=data.get("description", ""))


def _milestone_to_dict(milestone: Milestone) -> dict[str, Any]:
    target = milestone.target
    data: dict[str, Any] = {"id": milestone.id}
    if milestone.description:
        data["description"] = milestone.description
    if isinstance(target, DbTarget):
        data["kind"] = "db"
        data["db"] = target.db
        data["rows"] = [
            {col: matcher.to_dict() for col, matcher in row.items()} for row in target.rows
        ]
        data["cardinality"] = target.cardinality
    elif isinstance(target, TraceTarget):
        data["kind"] = "trace"
        data["tool"] = target.tool
        data["arguments"] = {a: m.to_dict() for a, m in target.arguments.items()}
        data["require_success"] = target.require_success
        if target.result:
            data["result"] = {p: m.to_dict() for p, m in target.result.items()}
    elif isinstance(target, MessageTarget):
        data["kind"] = "message"
        data["sender"] = target.sender.value
        data["recipient"] = target.recipient.value
        data["content"] = target.content.to_dict()
    else:
        data["kind"] = "guardrail"
        data["db"] = target.db
        data["ref_a"] = target.ref_a
        data["ref_b"] = target.ref_b
    return data


def _dag_from_dict(data: dict[str, Any]) -> MilestoneDAG:
    nodes = [_milestone_from_dict(node) for node in data.get("nodes", [])]
    edges = [(u, v) for u, v in data.get("edges", [])]
    return MilestoneDAG(nodes=nodes, edges=edges)


def _dag_to_dict(dag: MilestoneDAG) -> dict[str, Any]:
    return {
        "nodes": [_milestone_to_dict(m) for m in dag.nodes],
        "edges": [[u, v] for u, v in dag.edges],
    }


@dataclass
class Scenario:
    id: str
    categories: list[str]
    initial_world_state: dict[str, Any]
    user: UserSpec
    opening_message: str
    necessary_tools: list[str]
    milestones: MilestoneDAG
    minefields: MilestoneDAG
    withheld_tools: list[str] = field(default_factory=list)
    augmentation: AugmentationConfig = field(default_factory=AugmentationConfig)
    max_turns: int = 30
    description: str = ""

    def build_world(self) -> WorldState:
        initial = self.initial_world_state
        location = initial["current_location"]
        return WorldState.from_dict(
            {
                "settings": initial["settings"],
                "contacts": initial.get("contacts", []),
                "messages": initial.get("messages", []),
                "reminders": initial.get("reminders", []),
                "clock_timestamp": initial["clock_timestamp"],
                "current_latitude": location["latitude"],
                "current_longitude": location["longitude"],
            }
        )

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "categories": list(self.categories),
            "initial_world_state": self.initial_world_state,
            "user": self.user.to_dict(),
            "opening_message": self.opening_message,
            "necessary_tools": list(self.necessary_tools),
            "withheld_tools": list(self.withheld_tools),
            "augmentation": self.augmentation.to_dict(),
            "max_turns": self.max_turns,
            "milestones": _dag_to_dict(self.milestones),
            "minefields": _dag_to_dict(self.minefields),
        }
        if self.description:
            data["description"] = self.description
        return data


def _default_registry():
    from .catalog import build_registry

    return build_registry()


def scenario_from_dict(data: dict[str, Any], registry=None, path: str | None = None) -> Scenario:
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        location = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"schema violation at {location}: {exc.message}", path)
    try:
        augmentation = AugmentationConfig.from_dict(data.get("augmentation", {}))
    except ValueError as exc:
        raise ScenarioError(str(exc), path)
    try:
        user = UserSpec.from_dict(data.get("user", {}))
    except ValueError as exc:
        raise ScenarioError(str(exc), path)
    try:
        milestones = _dag_from_dict(data["milestones"])
        minefields = _dag_from_dict(data["minefields"])
    except ValueError as exc:
        raise ScenarioError(str(exc), path)
    scenario = Scenario(
        id=data["id"],
        categories=list(data["categories"]),
        initial_world_state=data["initial_world_state"],
        user=user,
        opening_message=data["opening_message"],
        necessary_tools=list(data["necessary_tools"]),
        withheld_tools=list(data.get("withheld_tools", [])),
        augmentation=augmentation,
        max_turns=data.get("max_turns", 30),
        milestones=milestones,
        minefields=minefields,
        description=data.get("description", ""),
    )
    registry = registry or _default_registry()
    _validate_semantics(scenario, registry, path)
    return scenario


def _validate_dag_references(dag: MilestoneDAG, label: str, path: str | None) -> None:
    ancestors = dag.ancestors()
    ids = {m.id for m in dag.nodes}
    for milestone in dag.nodes:
        target = milestone.target
        if isinstance(target, GuardrailTarget):
            for ref in (target.ref_a, target.ref_b):
                if ref not in ids:
                    raise ScenarioError(
                        f"{label} '{milestone.id}' references unknown milestone '{ref}'", path
                    )
                if ref not in ancestors[milestone.id]:
                    raise ScenarioError(
                        f"{label} '{milestone.id}' guardrail reference '{ref}' is not an ancestor",
                        path,
                    )
                if isinstance(dag.node(ref).target, GuardrailTarget):
                    raise ScenarioError(
                        f"{label} '{milestone.id}' may not reference another guardrail", path
                    )
        matchers: list[ColumnMatcher] = []
        if isinstance(target, DbTarget):
            matchers = [m for row in target.rows for m in row.values()]
        elif isinstance(target, TraceTarget):
            matchers = list(target.arguments.values()) + list(target.result.values())
        elif isinstance(target, MessageTarget):
            matchers = [target.content]
        for matcher in matchers:
            if matcher.binding is None:
                continue
            source = matcher.binding.source_id
            if source not in ids:
                raise ScenarioError(
                    f"{label} '{milestone.id}' binds to unknown milestone '{source}'", path
                )
            if source not in ancestors[milestone.id]:
                raise ScenarioError(
                    f"{label} '{milestone.id}' binding source '{source}' is not an ancestor", path
                )
            if not isinstance(dag.node(source).target, TraceTarget):
                raise ScenarioError(
                    f"{label} '{milestone.id}' binding source '{source}' is not a trace milestone",
                    path,
                )


def _validate_semantics(scenario: Scenario, registry, path: str | None) -> None:
    catalog_names = registry.tool_names()
    for name in scenario.necessary_tools:
        if name not in catalog_names:
            raise ScenarioError(f"necessary tool '{name}' is not in the catalog", path)
    for name in scenario.withheld_tools:
        if name not in catalog_names:
            raise ScenarioError(f"withheld tool '{name}' is not in the catalog", path)
    withheld = set(scenario.withheld_tools)
    if withheld & set(scenario.necessary_tools):
        raise ScenarioError("a tool cannot be both necessary and withheld", path)
    settings = scenario.initial_world_state["settings"]
    if settings["low_battery_mode"] and any(
        settings[flag] for flag in ("cellular", "wifi", "location_service")
    ):
        raise ScenarioError(
            "initial state has low battery mode on but a dependent service enabled", path
        )
    _validate_dag_references(scenario.milestones, "milestone", path)
    _validate_dag_references(scenario.minefields, "minefield", path)
    presented = registry.present(
        scenario.necessary_tools, scenario.augmentation, scenario.withheld_tools
    )
    presented_originals = set(presented.name_map) | {"end_conversation"}
    for milestone in scenario.milestones.nodes:
        if isinstance(milestone.target, TraceTarget):
            if milestone.target.tool not in presented_originals:
                raise ScenarioError(
                    f"milestone '{milestone.id}' targets tool '{milestone.target.tool}' "
                    "which is not in the presented tool set",
                    path,
                )
    for milestone in scenario.minefields.nodes:
        if isinstance(milestone.target, TraceTarget):
            if milestone.target.tool not in catalog_names:
                raise ScenarioError(
                    f"minefield '{milestone.id}' targets unknown tool '{milestone.target.tool}'",
                    path,
                )


def load_scenario(path: str | Path, registry=None) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}", str(path))
    return scenario_from_dict(data, registry=registry, path=str(path))


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n")


def load_suite(directory: str | Path, registry=None) -> list[Scenario]:
    registry = registry or _default_registry()
    scenarios = []
    for file in sorted(Path(directory).glob("*.json")):
        scenarios.append(load_scenario(file, registry=registry))
    return scenarios


# --------------------------------------------------------------------------
# Golden playbooks and suite validation
# --------------------------------------------------------------------------


@dataclass
class GoldenPlaybook:
    agent_steps: list[dict[str, Any]]
    user_steps: list[dict[str, Any]]

    @classmethod
    def load(cls, path: str | Path) -> "GoldenPlaybook":
        data = json.loads(Path(path).read_text())
        return cls(agent_steps=data["agent_steps"], user_steps=data["user_steps"])


def golden_path_for(scenario_id: str, scenarios_dir: str | Path) -> Path:
    return Path(scenarios_dir).parent / "golden" / f"{scenario_id}.trajectory"


@dataclass
class SuiteReport:
    results: dict[str, list[str]]  # scenario id -> list of problems (empty = green)

    @property
    def ok(self) -> bool:
        return all(not problems for problems in self.results.values())

    def to_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "results": self.results}


def validate_suite(directory: str | Path, registry=None) -> SuiteReport:
    """Load every scenario and replay its golden scripted trajectory; the
    golden must achieve a final score of exactly 1.0."""
    from .adapters import ScriptedAgent, ScriptedUser
    from .evaluation import evaluate_trajectory
    from .session import Session

    registry = registry or _default_registry()
    directory = Path(directory)
    results: dict[str, list[str]] = {}
    for file in sorted(directory.glob("*.json")):
        problems: list[str] = []
        scenario_id = file.stem
        try:
            scenario = load_scenario(file, registry=registry)
            scenario_id = scenario.id
            golden_file = golden_path_for(scenario.id, directory)
            if not golden_file.exists():
                problems.append(f"missing golden trajectory {golden_file.name}")
            else:
                playbook = GoldenPlaybook.load(golden_file)
                session = Session(
                    scenario,
                    agent=ScriptedAgent(playbook.agent_steps),
                    user=ScriptedUser(playbook.user_steps),
                    registry=registry,
                )
                session.run()
                if session.termination_reason != "end_conversation":
                    problems.append(
                        f"golden trajectory ended with '{session.termination_reason}'"
                    )
                result = evaluate_trajectory(
                    scenario.milestones, scenario.minefields, session.snapshots
                )
                if result.final_score != 1.0:
                    problems.append(
                        f"golden trajectory scored {result.final_score} "
                        f"(milestones {result.per_milestone})"
                    )
        except ScenarioError as exc:
            problems.append(str(exc))
        results[scenario_id] = problems
    return SuiteReport(results=results)
