from __future__ import annotations

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from toolsim.bus import Message, Role, SessionConfig, execute_batch, next_speaker, view_for
from toolsim.registry import ToolCallRequest
from toolsim.world import SettingsState, WorldState


def _msg(sender, recipient, text="x", visible_to=None, context=False):
    return Message(
        sender=sender,
        recipient=recipient,
        text=text,
        visible_to=frozenset(visible_to) if visible_to else frozenset(),
        context=context,
    )


def test_message_requires_distinct_recipient():
    with pytest.raises(ValueError):
        _msg(Role.USER, Role.USER)


def test_message_content_is_exactly_one_kind():
    with pytest.raises(ValueError):
        Message(sender=Role.AGENT, recipient=Role.USER, text="x",
                tool_calls=[ToolCallRequest("c", "t", {})])
    with pytest.raises(ValueError):
        Message(sender=Role.AGENT, recipient=Role.USER)


def test_default_visibility_is_sender_and_recipient():
    message = _msg(Role.USER, Role.AGENT)
    assert message.visible_to == {Role.USER, Role.AGENT}


def test_view_filtering_and_union():
    bus = [
        _msg(Role.EXECUTION_ENVIRONMENT, Role.USER, visible_to={Role.USER}, context=True),
        _msg(Role.USER, Role.AGENT),
        _msg(Role.AGENT, Role.USER),
        _msg(Role.USER, Role.EXECUTION_ENVIRONMENT,
             visible_to={Role.USER, Role.EXECUTION_ENVIRONMENT}),
    ]
    agent_view = view_for(bus, Role.AGENT)
    assert agent_view == bus[1:3]
    union = {id(m) for role in Role for m in view_for(bus, role)}
    assert union == {id(m) for m in bus}
    for message in bus:
        for role in Role:
            assert (message in view_for(bus, role)) == (role in message.visible_to)


def test_empty_bus_has_empty_view():
    assert view_for([], Role.USER) == []


def test_next_speaker_is_most_recent_recipient():
    bus = [_msg(Role.USER, Role.AGENT)]
    assert next_speaker(bus) == Role.AGENT
    bus.append(Message(sender=Role.AGENT, recipient=Role.EXECUTION_ENVIRONMENT,
                       tool_calls=[ToolCallRequest("c", "get_wifi_status", {})]))
    assert next_speaker(bus) == Role.EXECUTION_ENVIRONMENT
    bus.append(Message(sender=Role.EXECUTION_ENVIRONMENT, recipient=Role.AGENT,
                       tool_results=[]))
    assert next_speaker(bus) == Role.AGENT


def test_session_config_bounds():
    with pytest.raises(ValueError):
        SessionConfig(max_turns=1)


def test_message_round_trips_through_dict():
    message = Message(
        sender=Role.AGENT,
        recipient=Role.EXECUTION_ENVIRONMENT,
        tool_calls=[ToolCallRequest("c0", "send_message", {"phone_number": "+1"}, 0)],
    )
    message.turn_index = 4
    rebuilt = Message.from_dict(message.to_dict())
    assert rebuilt.to_dict() == message.to_dict()


# ---------------------------------------------------------------- Murphy semantics


def _call(position, tool, **arguments):
    return ToolCallRequest(f"c{position}", tool, arguments, position)


def test_parallel_enabler_and_dependent_always_races(registry):
    state = WorldState(settings=SettingsState(cellular=False))
    outcomes = execute_batch(
        [_call(0, "set_cellular_service_status", on=True),
         _call(1, "send_message", phone_number="+1", content="hi")],
        state, registry, presented=None, turn_index=1,
    )
    assert outcomes[0].ok
    assert not outcomes[1].ok and outcomes[1].error_kind == "ConnectionError"
    assert state.settings.cellular is True
    assert state.messages == []


def test_batch_of_reads_matches_sequential(registry):
    state = WorldState()
    outcomes = execute_batch(
        [_call(0, "get_wifi_status"), _call(1, "get_current_timestamp")],
        state, registry, presented=None, turn_index=1,
    )
    assert [o.ok for o in outcomes] == [True, True]
    assert outcomes[0].result is True


def test_wifi_repair_in_parallel_with_lookup_fails_the_lookup(registry):
    state = WorldState(settings=SettingsState(wifi=False))
    outcomes = execute_batch(
        [_call(0, "set_wifi_status", on=True), _call(1, "search_stock", query="AAPL")],
        state, registry, presented=None, turn_index=1,
    )
    assert outcomes[0].ok
    assert outcomes[1].error_kind == "ConnectionError"
    assert state.settings.wifi is True


def test_outcome_list_is_order_stable_and_total(registry):
    state = WorldState()
    calls = [
        _call(0, "get_wifi_status"),
        _call(1, "not_a_tool"),
        _call(2, "send_message", phone_number="+1"),
        _call(3, "get_current_timestamp"),
    ]
    outcomes = execute_batch(calls, state, registry, presented=None, turn_index=1)
    assert [o.call_id for o in outcomes] == ["c0", "c1", "c2", "c3"]
    assert [o.ok for o in outcomes] == [True, False, False, True]
    assert outcomes[1].error_kind == "KeyError"
    assert outcomes[2].error_kind == "MissingArgument"
    assert len(state.traces) == 4


def test_unknown_tool_failure_is_traced_with_requested_name(registry):
    state = WorldState()
    execute_batch([_call(0, "remove_everything")], state, registry, None, 1)
    assert state.traces[0].tool_name == "remove_everything"
    assert not state.traces[0].ok


def test_scrambled_dispatch_executes_original_tool(registry):
    from toolsim.registry import AugmentationConfig

    presented = registry.present(
        ["send_message"], AugmentationConfig(distraction=3, scramble_tool_name=True)
    )
    state = WorldState()
    outcomes = execute_batch(
        [_call(0, "messages_0", phone_number="+1", content="hello")],
        state, registry, presented=presented, turn_index=1,
    )
    assert outcomes[0].ok
    assert len(state.messages) == 1
    # The trace records the canonical (original) name.
    assert state.traces[0].tool_name == "send_message"
    # The original name is not dispatchable while scrambled.
    miss = execute_batch(
        [_call(0, "send_message", phone_number="+1", content="x")],
        state, registry, presented=presented, turn_index=2,
    )
    assert miss[0].error_kind == "KeyError"


# Conflict-free pool: no call writes a key another reads or writes.
_CONFLICT_FREE_POOL = [
    ("get_current_timestamp", {}),
    ("timestamp_to_datetime_info", {"timestamp": 86400}),
    ("calculate_lat_lon_distance",
     {"latitude_1": 0, "longitude_1": 0, "latitude_2": 10, "longitude_2": 10}),
    ("unit_conversion", {"amount": 2, "from_unit": "mile", "to_unit": "foot"}),
    ("add_contact", {"name": "Ann", "phone_number": "+1"}),
    ("add_reminder", {"content": "x", "reminder_timestamp": 5}),
    ("send_message", {"phone_number": "+1", "content": "y"}),
    ("set_wifi_status", {"on": False}),
]


@given(
    indices=st.lists(
        st.integers(min_value=0, max_value=len(_CONFLICT_FREE_POOL) - 1),
        min_size=1, max_size=5, unique=True,
    )
)
@hsettings(max_examples=60, deadline=None)
def test_conflict_free_batches_commute_with_sequential(registry, indices):
    calls = [
        _call(pos, name, **args)
        for pos, (name, args) in enumerate(_CONFLICT_FREE_POOL[i] for i in indices)
    ]
    writes = [registry.schema(c.tool_name).writes for c in calls]
    reads = [registry.schema(c.tool_name).reads for c in calls]
    for i in range(len(calls)):
        for j in range(len(calls)):
            if i != j:
                assert not (writes[i] & writes[j]) and not (writes[i] & reads[j])

    batched = WorldState()
    execute_batch(calls, batched, registry, None, turn_index=1)

    sequential = WorldState()
    for call in calls:
        execute_batch([call], sequential, registry, None, turn_index=1)

    assert batched.to_dict() == sequential.to_dict()
