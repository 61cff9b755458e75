"""Tool schema declarations, argument validation, and schema augmentations.

Schemas declare argument kinds, state read/write sets, and dependency
predicates over the settings flags. Augmentations are pure functions of
(tools, config): distraction tools are appended by a deterministic
domain-then-text-similarity ranking, and scrambling degrades the presented
schema (names, descriptions, types) without ever weakening runtime
validation, so the task stays solvable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Literal, Sequence

from .errors import MissingArgument, UnknownArgument, WrongType

#: Argument kinds and the human-readable description used in WrongType errors.
KIND_DESCRIPTIONS = {
    "string": "string (text)",
    "number": "number",
    "boolean": "boolean (true/false)",
    "timestamp": "timestamp (unix seconds, number)",
    "latitude": "latitude (decimal degrees, number)",
    "longitude": "longitude (decimal degrees, number)",
    "list_of_string": "list of strings",
    "object": "object (key/value map)",
}

#: Bijective kind <-> wire-type map so rendered schemas round-trip.
WIRE_TYPES = {
    "string": "string",
    "number": "number",
    "boolean": "boolean",
    "timestamp": "timestamp",
    "latitude": "latitude",
    "longitude": "longitude",
    "list_of_string": "array",
    "object": "object",
}
KINDS_BY_WIRE_TYPE = {v: k for k, v in WIRE_TYPES.items()}


@dataclass(frozen=True)
class ArgSpec:
    name: str
    kind: str
    description: str = ""
    required: bool = True
    default: Any = None

    def __post_init__(self) -> None:
        if self.kind not in KIND_DESCRIPTIONS:
            raise ValueError(f"unknown argument kind '{self.kind}'")
        if self.required and self.default is not None:
            raise ValueError(f"required argument '{self.name}' must not carry a default")


@dataclass(frozen=True)
class DependencyPredicate:
    """A settings-flag precondition checked before any mutation.

    When `when_arg` names an argument, the predicate only applies to calls
    where that argument is truthy (e.g. enabling a service requires low
    battery mode to be off, disabling it does not).
    """

    flag: str
    expected: bool
    error_kind: str
    message: str
    when_arg: str | None = None

    def applies(self, args: dict[str, Any]) -> bool:
        return self.when_arg is None or bool(args.get(self.when_arg))


@dataclass(frozen=True)
class ToolSchema:
    name: str
    domain: str
    description: str
    args: tuple[ArgSpec, ...] = ()
    returns_description: str = ""
    declared_errors: tuple[str, ...] = ()
    reads: frozenset[str] = frozenset()
    writes: frozenset[str] = frozenset()
    requires: tuple[DependencyPredicate, ...] = ()

    def __post_init__(self) -> None:
        names = [a.name for a in self.args]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate argument names on tool '{self.name}'")
        for predicate in self.requires:
            if predicate.flag not in self.reads:
                raise ValueError(
                    f"tool '{self.name}' requires flag '{predicate.flag}' but does not read it"
                )

    def arg(self, name: str) -> ArgSpec | None:
        for spec in self.args:
            if spec.name == name:
                return spec
        return None


def _kind_accepts(kind: str, value: Any) -> bool:
    if kind == "string":
        return isinstance(value, str)
    if kind in ("number", "timestamp", "latitude", "longitude"):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "list_of_string":
        return isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value)
    if kind == "object":
        return isinstance(value, dict)
    return False


def validate_arguments(schema: ToolSchema, args: dict[str, Any]) -> dict[str, Any]:
    """Check and normalize a call's arguments against the schema.

    Unknown names are hard errors (mirroring strict trace matching in
    evaluation); required arguments must be present; values must match the
    declared kind. Runtime validation always uses the original schema, even
    when the presented schema had its types scrambled away.
    """
    known = {a.name for a in schema.args}
    for name in args:
        if name not in known:
            raise UnknownArgument(name)
    normalized: dict[str, Any] = {}
    for spec in schema.args:
        if spec.name not in args:
            if spec.required:
                raise MissingArgument(spec.name)
            continue
        value = args[spec.name]
        if not _kind_accepts(spec.kind, value):
            raise WrongType(spec.name, KIND_DESCRIPTIONS[spec.kind])
        if spec.kind == "list_of_string":
            value = list(value)
        normalized[spec.name] = value
    return normalized


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokens(schema: ToolSchema) -> frozenset[str]:
    return frozenset(_TOKEN_RE.findall(f"{schema.name} {schema.description}".lower()))


def rank_distraction_tools(
    necessary: Sequence[ToolSchema], pool: Sequence[ToolSchema]
) -> list[ToolSchema]:
    """Order candidate distraction tools: same-domain tools first, then by
    descending token-Jaccard similarity against the union of the necessary
    tools' name+description unigrams, ties broken by ascending name.

    Deterministic and seed-independent.
    """
    necessary_domains = {t.domain for t in necessary}
    reference: set[str] = set()
    for tool in necessary:
        reference |= _tokens(tool)

    def jaccard(tool: ToolSchema) -> float:
        tokens = _tokens(tool)
        union = tokens | reference
        if not union:
            return 0.0
        return len(tokens & reference) / len(union)

    def sort_key(tool: ToolSchema) -> tuple[int, float, str]:
        tier = 0 if tool.domain in necessary_domains else 1
        return (tier, -jaccard(tool), tool.name)

    return sorted(pool, key=sort_key)


@dataclass(frozen=True)
class AugmentationConfig:
    """Which schema degradations to apply when presenting tools to the agent.

    Any scramble flag is only valid in conjunction with 3 distraction tools,
    keeping the augmentation challenging yet feasible.
    """

    distraction: int | Literal["all"] = 0
    scramble_tool_name: bool = False
    scramble_tool_description: bool = False
    scramble_arg_descriptions: bool = False
    scramble_arg_types: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.distraction not in (0, 3, 10, "all"):
            raise ValueError("distraction must be one of 0, 3, 10, 'all'")
        if self.any_scramble and self.distraction != 3:
            raise ValueError("scramble augmentations require distraction = 3")

    @property
    def any_scramble(self) -> bool:
        return (
            self.scramble_tool_name
            or self.scramble_tool_description
            or self.scramble_arg_descriptions
            or self.scramble_arg_types
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "distraction": self.distraction,
            "scramble_tool_name": self.scramble_tool_name,
            "scramble_tool_description": self.scramble_tool_description,
            "scramble_arg_descriptions": self.scramble_arg_descriptions,
            "scramble_arg_types": self.scramble_arg_types,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AugmentationConfig":
        data = dict(data)
        scrambles = [
            data.get(key, False)
            for key in (
                "scramble_tool_name",
                "scramble_tool_description",
                "scramble_arg_descriptions",
                "scramble_arg_types",
            )
        ]
        if "distraction" not in data and any(scrambles):
            data["distraction"] = 3
        return cls(**data)


@dataclass(frozen=True)
class ToolCallRequest:
    """One requested tool invocation inside an agent message's batch."""

    call_id: str
    tool_name: str
    arguments: dict[str, Any]
    batch_position: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "call_id": self.call_id,
            "tool_name": self.tool_name,
            "arguments": self.arguments,
            "batch_position": self.batch_position,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ToolCallRequest":
        return cls(
            call_id=data["call_id"],
            tool_name=data["tool_name"],
            arguments=dict(data["arguments"]),
            batch_position=data.get("batch_position", 0),
        )


@dataclass(frozen=True)
class PresentedToolset:
    """Agent-facing tool surface after augmentation.

    `name_map` is a bijection original -> presented; dispatching through a
    presented name always executes the original tool.
    """

    tools: tuple[ToolSchema, ...]
    name_map: dict[str, str]
    include_types: bool = True

    def original_name(self, presented: str) -> str | None:
        for original, shown in self.name_map.items():
            if shown == presented:
                return original
        return None

    def rendered(self) -> list[dict[str, Any]]:
        return [render_tool(tool, include_types=self.include_types) for tool in self.tools]


def apply_augmentations(
    necessary: Sequence[ToolSchema],
    config: AugmentationConfig,
    catalog: Sequence[ToolSchema],
    exclude: Iterable[str] = (),
) -> PresentedToolset:
    """Build the presented toolset: necessary tools plus ranked distraction
    tools, uniformly scrambled per the config.

    Scrambled names are `<domain>_<k>`; within a domain the necessary tools
    (name-sorted) take the lowest indices so a tool's presented name does not
    depend on which distraction tools joined it.
    """
    necessary = sorted(necessary, key=lambda t: t.name)
    excluded = set(exclude) | {t.name for t in necessary}
    pool = [t for t in catalog if t.name not in excluded]
    ranked = rank_distraction_tools(necessary, pool)
    if config.distraction == "all":
        distractions = ranked
    else:
        distractions = ranked[: config.distraction]
    presented_order = list(necessary) + list(distractions)

    name_map: dict[str, str] = {}
    if config.scramble_tool_name:
        domain_counters: dict[str, int] = {}
        for tool in list(necessary) + sorted(distractions, key=lambda t: t.name):
            index = domain_counters.get(tool.domain, 0)
            domain_counters[tool.domain] = index + 1
            name_map[tool.name] = f"{tool.domain}_{index}"
    else:
        name_map = {tool.name: tool.name for tool in presented_order}

    presented: list[ToolSchema] = []
    for tool in presented_order:
        shown = tool
        if config.scramble_tool_name:
            shown = replace(shown, name=name_map[tool.name])
        if config.scramble_tool_description:
            shown = replace(shown, description="")
        if config.scramble_arg_descriptions:
            shown = replace(shown, args=tuple(replace(a, description="") for a in shown.args))
        presented.append(shown)
    return PresentedToolset(
        tools=tuple(presented),
        name_map=name_map,
        include_types=not config.scramble_arg_types,
    )


def _compose_description(tool: ToolSchema) -> str:
    parts = []
    if tool.description:
        parts.append(tool.description)
    if tool.returns_description:
        parts.append(f"Returns:\n    {tool.returns_description}")
    raises = [f"    {p.error_kind}: If {p.message}" for p in tool.requires]
    if raises:
        parts.append("Raises:\n" + "\n".join(raises))
    return "\n\n".join(parts)


def render_tool(tool: ToolSchema, include_types: bool = True) -> dict[str, Any]:
    """Serialize one schema to the JSON function-calling wire format.

    When types are scrambled the property's `type` key is omitted entirely;
    runtime validation still enforces the original kind.
    """
    properties: dict[str, Any] = {}
    for spec in tool.args:
        prop: dict[str, Any] = {}
        if include_types:
            prop["type"] = WIRE_TYPES[spec.kind]
            if spec.kind == "list_of_string":
                prop["items"] = {"type": "string"}
        if spec.description:
            prop["description"] = spec.description
        properties[spec.name] = prop
    return {
        "name": tool.name,
        "description": _compose_description(tool),
        "parameters": {
            "type": "object",
            "properties": properties,
            "required": [a.name for a in tool.args if a.required],
        },
    }


def parse_rendered_tool(doc: dict[str, Any]) -> ToolSchema:
    """Parse a rendered wire document back into a presentable schema.

    Inverse of `render_tool` on the wire-visible fields; `render_tool` after
    `parse_rendered_tool` reproduces the document byte for byte.
    """
    parameters = doc.get("parameters", {})
    required = set(parameters.get("required", []))
    args = []
    for name, prop in parameters.get("properties", {}).items():
        wire_type = prop.get("type")
        kind = KINDS_BY_WIRE_TYPE.get(wire_type, "string") if wire_type else "string"
        args.append(
            ArgSpec(
                name=name,
                kind=kind,
                description=prop.get("description", ""),
                required=name in required,
            )
        )
    return ToolSchema(
        name=doc["name"],
        domain="",
        description=doc.get("description", ""),
        args=tuple(args),
    )
