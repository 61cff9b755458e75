"""Shared exception types for argument validation, tool execution, and loading."""

from __future__ import annotations


class ToolArgumentError(Exception):
    """Base class for argument validation failures raised before execution."""

    kind = "ToolArgumentError"

    def __init__(self, message: str, argument: str):
        super().__init__(message)
        self.argument = argument


class MissingArgument(ToolArgumentError):
    kind = "MissingArgument"

    def __init__(self, argument: str):
        super().__init__(f"missing required argument '{argument}'", argument)


class UnknownArgument(ToolArgumentError):
    kind = "UnknownArgument"

    def __init__(self, argument: str):
        super().__init__(f"unknown argument '{argument}'", argument)


class WrongType(ToolArgumentError):
    """The error text must name the expected kind so an agent can recover even
    when type hints have been scrambled out of the presented schema."""

    kind = "WrongType"

    def __init__(self, argument: str, expected: str):
        super().__init__(f"argument '{argument}' expects {expected}", argument)
        self.expected = expected


#: Error kinds a tool may raise at runtime.
TOOL_ERROR_KINDS = (
    "ConnectionError",
    "PermissionError",
    "ValueError",
    "KeyError",
    "NoMatchError",
)


class ToolError(Exception):
    """Runtime tool failure. `message` names the blocking state (e.g. "cellular
    service is not on") so agents can plan a repair."""

    def __init__(self, kind: str, message: str):
        if kind not in TOOL_ERROR_KINDS:
            raise ValueError(f"unknown tool error kind: {kind}")
        super().__init__(message)
        self.kind = kind
        self.message = message


class ScenarioError(Exception):
    """Scenario file failed structural or semantic validation."""

    def __init__(self, message: str, path: str | None = None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class AdapterFailure(Exception):
    """A role adapter could not produce a message (playbook exhausted,
    transport dead after retries). The trajectory is marked aborted but
    remains evaluable."""


class NeedsHumanInput(Exception):
    """Raised by human-bridged adapters when their input queue is empty."""

    def __init__(self, role: str):
        super().__init__(f"awaiting input for role '{role}'")
        self.role = role
