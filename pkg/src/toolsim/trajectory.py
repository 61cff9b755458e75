"""Trajectory file serialization.

Line-delimited JSON: a header record carrying scenario id, seed, adapter
identities and termination reason, then exactly one record per message with
the fields `turn_index`, `settings`, `contacts`, `messages`, `reminders`,
`traces`, `message`. Serialization is canonical (sorted keys, fixed
separators) so fixed-seed runs are byte-reproducible.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .bus import Message
from .session import Trajectory
from .world import Snapshot, WorldState

TRAJECTORY_SCHEMA_VERSION = 1


def dumps_canonical(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def _turn_record(snapshot: Snapshot) -> dict[str, Any]:
    state = snapshot.state
    return {
        "turn_index": snapshot.turn_index,
        "settings": state.settings.to_dict(),
        "contacts": state.database_rows("contacts"),
        "messages": state.database_rows("messages"),
        "reminders": state.database_rows("reminders"),
        "traces": [t.to_dict() for t in state.traces],
        "message": snapshot.message.to_dict() if snapshot.message is not None else None,
    }


def write_trajectory(trajectory: Trajectory, path: str | Path) -> None:
    header = {
        "schema_version": TRAJECTORY_SCHEMA_VERSION,
        "scenario_id": trajectory.scenario_id,
        "seed": trajectory.seed,
        "agent": trajectory.agent_identity,
        "user": trajectory.user_identity,
        "termination_reason": trajectory.termination_reason,
        "clock_timestamp": trajectory.clock_timestamp,
        "current_location": trajectory.current_location,
    }
    lines = [dumps_canonical(header)]
    lines.extend(dumps_canonical(_turn_record(s)) for s in trajectory.snapshots)
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory(path: str | Path) -> Trajectory:
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines:
        raise ValueError(f"empty trajectory file: {path}")
    header = json.loads(lines[0])
    location = header.get("current_location", {})
    bus: list[Message] = []
    snapshots: list[Snapshot] = []
    for line in lines[1:]:
        record = json.loads(line)
        state = WorldState.from_dict(
            {
                "settings": record["settings"],
                "contacts": record["contacts"],
                "messages": record["messages"],
                "reminders": record["reminders"],
                "traces": record["traces"],
                "clock_timestamp": header.get("clock_timestamp", 0),
                "current_latitude": location.get("latitude", 0.0),
                "current_longitude": location.get("longitude", 0.0),
            }
        )
        message = Message.from_dict(record["message"]) if record["message"] else None
        snapshots.append(Snapshot(turn_index=record["turn_index"], state=state, message=message))
        if message is not None:
            bus.append(message)
    return Trajectory(
        scenario_id=header["scenario_id"],
        seed=header.get("seed", 0),
        agent_identity=header.get("agent", "unknown"),
        user_identity=header.get("user", "unknown"),
        bus=bus,
        snapshots=snapshots,
        termination_reason=header.get("termination_reason", "unknown"),
        clock_timestamp=header.get("clock_timestamp", 0),
        current_location=location,
    )
