from __future__ import annotations

import pytest

from toolsim.bus import Message, Role
from toolsim.catalog import execute_tool
from toolsim.world import (
    SettingsState,
    WorldState,
    db_unchanged_between,
    diff_snapshots,
    take_snapshot,
)


def _msg(sender=Role.USER, recipient=Role.AGENT, text="hi"):
    return Message(sender=sender, recipient=recipient, text=text)


def test_snapshot_of_empty_world_copies_settings():
    state = WorldState(settings=SettingsState(cellular=False))
    snap = take_snapshot(state, 1, _msg())
    assert snap.turn_index == 1
    assert snap.state.settings.cellular is False
    assert snap.database_rows("contacts") == []
    assert snap.database_rows("settings") == [
        {"cellular": False, "wifi": True, "location_service": True, "low_battery_mode": False}
    ]


def test_snapshot_is_isolated_from_future_mutations(registry):
    state = WorldState()
    before = take_snapshot(state, 1, _msg())
    outcome = execute_tool(
        registry, "send_message", {"phone_number": "+1555", "content": "yo"}, state, 2
    )
    assert outcome.ok
    after = take_snapshot(state, 2, _msg())
    assert before.database_rows("messages") == []
    assert len(after.database_rows("messages")) == 1
    # The env-turn snapshot carries both the new row and the trace.
    assert after.traces_at_turn()[0].tool_name == "send_message"


def test_record_ids_are_deterministic_per_database():
    state = WorldState()
    assert state.next_id("contacts") == "contact-0"
    assert state.next_id("contacts") == "contact-1"
    assert state.next_id("messages") == "message-0"


def test_seeded_rows_advance_the_id_counter():
    state = WorldState.from_dict(
        {
            "settings": {},
            "contacts": [{"id": "contact-3", "name": "A", "phone_number": "1", "is_self": False}],
            "clock_timestamp": 0,
        }
    )
    assert state.next_id("contacts") == "contact-4"


def test_db_unchanged_between_trivial_and_forced_change(registry):
    state = WorldState()
    snaps = [take_snapshot(state, 1, _msg())]
    execute_tool(registry, "add_contact", {"name": "Ann", "phone_number": "+1"}, state, 2)
    snaps.append(take_snapshot(state, 2, _msg()))
    execute_tool(registry, "get_wifi_status", {}, state, 3)
    snaps.append(take_snapshot(state, 3, _msg()))

    assert db_unchanged_between(snaps, snaps[0], snaps[0], "contacts")
    assert not db_unchanged_between(snaps, snaps[0], snaps[1], "contacts")
    assert db_unchanged_between(snaps, snaps[1], snaps[2], "contacts")
    assert db_unchanged_between(snaps, snaps[0], snaps[2], "messages")


def test_db_unchanged_rejects_unknown_database():
    state = WorldState()
    snaps = [take_snapshot(state, 1, _msg())]
    with pytest.raises(KeyError):
        db_unchanged_between(snaps, 1, 1, "emails")


def test_interval_of_pure_reads_is_unchanged(registry):
    state = WorldState()
    execute_tool(registry, "add_contact", {"name": "Ann", "phone_number": "+1"}, state, 1)
    snaps = [take_snapshot(state, 1, _msg())]
    for turn in (2, 3):
        execute_tool(registry, "search_contacts", {"name": "Ann"}, state, turn)
        snaps.append(take_snapshot(state, turn, _msg()))
    assert db_unchanged_between(snaps, snaps[0], snaps[-1], "contacts")


def test_world_round_trips_through_dict(registry):
    state = WorldState()
    execute_tool(registry, "add_contact", {"name": "Ann", "phone_number": "+1"}, state, 1)
    execute_tool(registry, "send_message", {"phone_number": "+1", "content": "x"}, state, 2)
    rebuilt = WorldState.from_dict(state.to_dict())
    assert rebuilt.to_dict() == state.to_dict()


def test_diff_snapshots_reports_settings_and_rows(registry):
    state = WorldState()
    first = take_snapshot(state, 1, _msg())
    execute_tool(registry, "set_wifi_status", {"on": False}, state, 2)
    execute_tool(registry, "add_contact", {"name": "Ann", "phone_number": "+1"}, state, 2)
    second = take_snapshot(state, 2, _msg())
    diff = diff_snapshots(first, second)
    assert diff["settings"]["wifi"] == {"from": True, "to": False}
    assert len(diff["contacts"]["added"]) == 1
    assert len(diff["traces"]) == 2
