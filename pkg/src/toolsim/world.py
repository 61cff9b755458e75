"""Mutable device world plus immutable per-turn snapshots.

All simulation state lives here: the four settings flags, the domain
databases (contacts, messages, reminders), the frozen scenario clock, the
device's current coordinates, and the append-only tool-trace log. Snapshots
are deep value copies taken once per message on the bus; evaluation only
ever reads snapshots.
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from typing import Any

#: Database names addressable by evaluation targets and diff operations.
DATABASE_NAMES = ("settings", "contacts", "messages", "reminders")

#: The four settings flags that participate in tool state dependencies.
SETTINGS_FLAGS = ("cellular", "wifi", "location_service", "low_battery_mode")


@dataclass
class SettingsState:
    """Device settings flags; mutated only through tool execution."""

    cellular: bool = True
    wifi: bool = True
    location_service: bool = True
    low_battery_mode: bool = False

    def to_dict(self) -> dict[str, bool]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SettingsState":
        return cls(**{flag: bool(data.get(flag, getattr(cls, flag, False))) for flag in SETTINGS_FLAGS})


@dataclass
class ContactRecord:
    id: str
    name: str
    phone_number: str
    relationship: str | None = None
    is_self: bool = False


@dataclass
class MessageRecord:
    id: str
    phone_number: str
    content: str
    created_at: int


@dataclass
class ReminderRecord:
    id: str
    content: str
    reminder_timestamp: int
    latitude: float | None = None
    longitude: float | None = None


@dataclass
class ToolTrace:
    """One executed call: appended exactly once, never mutated afterward."""

    turn_index: int
    tool_name: str
    arguments: dict[str, Any]
    ok: bool
    result: Any = None
    error_kind: str | None = None
    error_message: str | None = None

    @property
    def canonical_call(self) -> str:
        """Canonical rendering `name(arg=value, ...)` of the call.

        Arguments are sorted by name so the rendering does not depend on the
        order the caller happened to pass them in.
        """
        rendered = ", ".join(f"{k}={self.arguments[k]!r}" for k in sorted(self.arguments))
        return f"{self.tool_name}({rendered})"

    def to_dict(self) -> dict[str, Any]:
        outcome: dict[str, Any] = {"ok": self.ok}
        if self.ok:
            outcome["result"] = self.result
        else:
            outcome["error_kind"] = self.error_kind
            outcome["error_message"] = self.error_message
        return {
            "turn_index": self.turn_index,
            "tool_name": self.tool_name,
            "arguments": self.arguments,
            "outcome": outcome,
            "canonical": self.canonical_call,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ToolTrace":
        outcome = data["outcome"]
        return cls(
            turn_index=data["turn_index"],
            tool_name=data["tool_name"],
            arguments=dict(data["arguments"]),
            ok=bool(outcome["ok"]),
            result=outcome.get("result"),
            error_kind=outcome.get("error_kind"),
            error_message=outcome.get("error_message"),
        )


_RECORD_TYPES = {
    "contacts": ContactRecord,
    "messages": MessageRecord,
    "reminders": ReminderRecord,
}

_ID_PREFIXES = {"contacts": "contact", "messages": "message", "reminders": "reminder"}


@dataclass
class WorldState:
    """Complete mutable simulation state for one session.

    Deterministic given the scenario seed and the executed calls; the clock
    is frozen at a scenario-configured timestamp and never advances.
    """

    settings: SettingsState = field(default_factory=SettingsState)
    contacts: list[ContactRecord] = field(default_factory=list)
    messages: list[MessageRecord] = field(default_factory=list)
    reminders: list[ReminderRecord] = field(default_factory=list)
    clock_timestamp: int = 0
    current_latitude: float = 0.0
    current_longitude: float = 0.0
    traces: list[ToolTrace] = field(default_factory=list)
    id_counters: dict[str, int] = field(default_factory=dict)

    def next_id(self, db: str) -> str:
        """Deterministic `<domain>-<counter>` record id with a per-db counter."""
        count = self.id_counters.get(db, 0)
        self.id_counters[db] = count + 1
        return f"{_ID_PREFIXES[db]}-{count}"

    def database(self, db: str) -> list[Any]:
        if db not in _RECORD_TYPES:
            raise KeyError(f"unknown database '{db}'")
        return getattr(self, db)

    def database_rows(self, db: str) -> list[dict[str, Any]]:
        """Database content as plain row dicts; `settings` is a one-row table."""
        if db == "settings":
            return [self.settings.to_dict()]
        return [asdict(record) for record in self.database(db)]

    def add_trace(self, trace: ToolTrace) -> None:
        self.traces.append(trace)

    def to_dict(self) -> dict[str, Any]:
        return {
            "settings": self.settings.to_dict(),
            "contacts": [asdict(r) for r in self.contacts],
            "messages": [asdict(r) for r in self.messages],
            "reminders": [asdict(r) for r in self.reminders],
            "clock_timestamp": self.clock_timestamp,
            "current_latitude": self.current_latitude,
            "current_longitude": self.current_longitude,
            "traces": [t.to_dict() for t in self.traces],
            "id_counters": dict(self.id_counters),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "WorldState":
        state = cls(
            settings=SettingsState.from_dict(data.get("settings", {})),
            clock_timestamp=data.get("clock_timestamp", 0),
            current_latitude=data.get("current_latitude", 0.0),
            current_longitude=data.get("current_longitude", 0.0),
        )
        for db, record_type in _RECORD_TYPES.items():
            rows = data.get(db, [])
            records = []
            for row in rows:
                if "id" not in row:
                    row = {"id": state.next_id(db), **row}
                records.append(record_type(**row))
            setattr(state, db, records)
        state.traces = [ToolTrace.from_dict(t) for t in data.get("traces", [])]
        if "id_counters" in data:
            state.id_counters.update(data["id_counters"])
        else:
            state._reset_counters_from_ids()
        return state

    def _reset_counters_from_ids(self) -> None:
        # Seeded rows may carry explicit ids; keep counters ahead of them.
        for db, prefix in _ID_PREFIXES.items():
            highest = self.id_counters.get(db, 0)
            for record in self.database(db):
                head, _, tail = record.id.rpartition("-")
                if head == prefix and tail.isdigit():
                    highest = max(highest, int(tail) + 1)
            self.id_counters[db] = highest

    def clone(self) -> "WorldState":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class Snapshot:
    """Immutable copy of the world taken right after one message.

    Snapshots form the sequence s^1..s^n, one per message on the bus, with
    dense turn indices starting at 1.
    """

    turn_index: int
    state: WorldState
    message: Any

    def database_rows(self, db: str) -> list[dict[str, Any]]:
        return self.state.database_rows(db)

    def traces_at_turn(self) -> list[ToolTrace]:
        return [t for t in self.state.traces if t.turn_index == self.turn_index]


def take_snapshot(state: WorldState, turn: int, message: Any) -> Snapshot:
    """Freeze `state` for turn `turn`; the copy is value-independent of any
    future mutation of the live state."""
    return Snapshot(turn_index=turn, state=state.clone(), message=message)


def db_unchanged_between(
    snapshots: list[Snapshot], a: Snapshot | int, b: Snapshot | int, db: str
) -> bool:
    """True iff database `db` is value-equal in every snapshot in [a, b].

    `a` and `b` may be snapshots or turn indices; their order is normalized.
    """
    if db not in DATABASE_NAMES:
        raise KeyError(f"unknown database '{db}'")
    turn_a = a.turn_index if isinstance(a, Snapshot) else int(a)
    turn_b = b.turn_index if isinstance(b, Snapshot) else int(b)
    low, high = min(turn_a, turn_b), max(turn_a, turn_b)
    window = [s for s in snapshots if low <= s.turn_index <= high]
    if not window:
        return True
    reference = window[0].database_rows(db)
    return all(s.database_rows(db) == reference for s in window[1:])


def diff_snapshots(previous: Snapshot | None, current: Snapshot) -> dict[str, Any]:
    """Structured per-turn diff used by the playground's world-state panel."""
    diff: dict[str, Any] = {"turn_index": current.turn_index}
    prev_settings = previous.state.settings.to_dict() if previous else {}
    cur_settings = current.state.settings.to_dict()
    changed_flags = {
        flag: {"from": prev_settings.get(flag), "to": value}
        for flag, value in cur_settings.items()
        if previous is None or prev_settings.get(flag) != value
    }
    if changed_flags:
        diff["settings"] = changed_flags
    for db in ("contacts", "messages", "reminders"):
        prev_rows = {r["id"]: r for r in previous.database_rows(db)} if previous else {}
        cur_rows = {r["id"]: r for r in current.database_rows(db)}
        added = [r for rid, r in cur_rows.items() if rid not in prev_rows]
        removed = [r for rid, r in prev_rows.items() if rid not in cur_rows]
        changed = [
            {"from": prev_rows[rid], "to": r}
            for rid, r in cur_rows.items()
            if rid in prev_rows and prev_rows[rid] != r
        ]
        if added or removed or changed:
            diff[db] = {"added": added, "removed": removed, "changed": changed}
    new_traces = [t.to_dict() for t in current.traces_at_turn()]
    if new_traces:
        diff["traces"] = new_traces
    return diff
