"""Built-in simulated tool catalog.

Eleven agent-facing domains (contacts, messages, reminders, settings, time,
math, map, weather, stock, holiday, conversion) plus the user-only
end_conversation tool. Each domain with searchable state exposes one
omni-search tool; stateful domains expose manipulation tools; utilities
cover timestamp and coordinate canonicalization.

State dependencies:
  * send_message needs cellular service (ConnectionError),
  * knowledge lookups need wifi (ConnectionError),
  * get_current_location needs location service (PermissionError),
  * enabling any of the three services needs low battery mode off
    (PermissionError), and enabling low battery mode force-disables them.
"""

from __future__ import annotations

import datetime
import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Callable

from ..errors import ToolError
from ..registry import ArgSpec, DependencyPredicate, ToolSchema
from ..world import ContactRecord, MessageRecord, ReminderRecord, WorldState
from .fixtures import CatalogFixtures

EARTH_RADIUS_KM = 6371.0

SERVICE_FLAGS = ("cellular", "wifi", "location_service")


@dataclass
class ToolContext:
    state: WorldState
    fixtures: CatalogFixtures


ToolFn = Callable[..., Any]


@dataclass(frozen=True)
class RegisteredTool:
    schema: ToolSchema
    fn: ToolFn
    user_only: bool = False


def _needs_wifi() -> DependencyPredicate:
    return DependencyPredicate(
        flag="wifi", expected=True, error_kind="ConnectionError", message="wifi is not on"
    )


def _needs_low_battery_off() -> DependencyPredicate:
    return DependencyPredicate(
        flag="low_battery_mode",
        expected=False,
        error_kind="PermissionError",
        message="low battery mode is on",
        when_arg="on",
    )


def _check_latitude(value: float, name: str = "latitude") -> None:
    if not -90.0 <= value <= 90.0:
        raise ToolError("ValueError", f"{name} must be within [-90, 90]")


def _check_longitude(value: float, name: str = "longitude") -> None:
    if not -180.0 <= value <= 180.0:
        raise ToolError("ValueError", f"{name} must be within [-180, 180]")


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance with Earth radius 6371 km."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlambda = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlambda / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


# --------------------------------------------------------------------------
# Contacts
# --------------------------------------------------------------------------


def add_contact(
    ctx: ToolContext,
    name: str,
    phone_number: str,
    relationship: str | None = None,
    is_self: bool = False,
) -> str:
    if is_self and any(c.is_self for c in ctx.state.contacts):
        raise ToolError("ValueError", "another contact is already marked as self")
    record = ContactRecord(
        id=ctx.state.next_id("contacts"),
        name=name,
        phone_number=phone_number,
        relationship=relationship,
        is_self=is_self,
    )
    ctx.state.contacts.append(record)
    return record.id


def search_contacts(
    ctx: ToolContext,
    contact_id: str | None = None,
    name: str | None = None,
    phone_number: str | None = None,
    relationship: str | None = None,
    is_self: bool | None = None,
) -> list[dict[str, Any]]:
    def matches(record: ContactRecord) -> bool:
        if contact_id is not None and record.id != contact_id:
            return False
        if name is not None and name.lower() not in record.name.lower():
            return False
        if phone_number is not None and record.phone_number != phone_number:
            return False
        if relationship is not None and (
            record.relationship is None or relationship.lower() not in record.relationship.lower()
        ):
            return False
        if is_self is not None and record.is_self != is_self:
            return False
        return True

    found = [asdict(r) for r in ctx.state.contacts if matches(r)]
    if not found:
        raise ToolError("NoMatchError", "no contacts matched the search")
    return found


def _find_contact(ctx: ToolContext, contact_id: str) -> ContactRecord:
    for record in ctx.state.contacts:
        if record.id == contact_id:
            return record
    raise ToolError("KeyError", f"contact '{contact_id}' does not exist")


def modify_contact(
    ctx: ToolContext,
    contact_id: str,
    name: str | None = None,
    phone_number: str | None = None,
    relationship: str | None = None,
    is_self: bool | None = None,
) -> dict[str, Any]:
    record = _find_contact(ctx, contact_id)
    if is_self and any(c.is_self and c.id != contact_id for c in ctx.state.contacts):
        raise ToolError("ValueError", "another contact is already marked as self")
    updated = replace(
        record,
        name=name if name is not None else record.name,
        phone_number=phone_number if phone_number is not None else record.phone_number,
        relationship=relationship if relationship is not None else record.relationship,
        is_self=is_self if is_self is not None else record.is_self,
    )
    ctx.state.contacts[ctx.state.contacts.index(record)] = updated
    return asdict(updated)


def remove_contact(ctx: ToolContext, contact_id: str) -> str:
    record = _find_contact(ctx, contact_id)
    ctx.state.contacts.remove(record)
    return contact_id


# --------------------------------------------------------------------------
# Messages
# --------------------------------------------------------------------------


def send_message(ctx: ToolContext, phone_number: str, content: str) -> str:
    record = MessageRecord(
        id=ctx.state.next_id("messages"),
        phone_number=phone_number,
        content=content,
        created_at=ctx.state.clock_timestamp,
    )
    ctx.state.messages.append(record)
    return record.id


def search_messages(
    ctx: ToolContext,
    message_id: str | None = None,
    phone_number: str | None = None,
    content: str | None = None,
) -> list[dict[str, Any]]:
    def matches(record: MessageRecord) -> bool:
        if message_id is not None and record.id != message_id:
            return False
        if phone_number is not None and record.phone_number != phone_number:
            return False
        if content is not None and content.lower() not in record.content.lower():
            return False
        return True

    found = [asdict(r) for r in ctx.state.messages if matches(r)]
    if not found:
        raise ToolError("NoMatchError", "no messages matched the search")
    return found


# --------------------------------------------------------------------------
# Reminders
# --------------------------------------------------------------------------


def add_reminder(
    ctx: ToolContext,
    content: str,
    reminder_timestamp: float,
    latitude: float | None = None,
    longitude: float | None = None,
) -> str:
    if latitude is not None:
        _check_latitude(latitude)
    if longitude is not None:
        _check_longitude(longitude)
    record = ReminderRecord(
        id=ctx.state.next_id("reminders"),
        content=content,
        reminder_timestamp=reminder_timestamp,
        latitude=latitude,
        longitude=longitude,
    )
    ctx.state.reminders.append(record)
    return record.id


def _find_reminder(ctx: ToolContext, reminder_id: str) -> ReminderRecord:
    for record in ctx.state.reminders:
        if record.id == reminder_id:
            return record
    raise ToolError("KeyError", f"reminder '{reminder_id}' does not exist")


def modify_reminder(
    ctx: ToolContext,
    reminder_id: str,
    content: str | None = None,
    reminder_timestamp: float | None = None,
    latitude: float | None = None,
    longitude: float | None = None,
) -> dict[str, Any]:
    record = _find_reminder(ctx, reminder_id)
    if latitude is not None:
        _check_latitude(latitude)
    if longitude is not None:
        _check_longitude(longitude)
    updated = replace(
        record,
        content=content if content is not None else record.content,
        reminder_timestamp=(
            reminder_timestamp if reminder_timestamp is not None else record.reminder_timestamp
        ),
        latitude=latitude if latitude is not None else record.latitude,
        longitude=longitude if longitude is not None else record.longitude,
    )
    ctx.state.reminders[ctx.state.reminders.index(record)] = updated
    return asdict(updated)


def search_reminders(
    ctx: ToolContext,
    reminder_id: str | None = None,
    content: str | None = None,
    reminder_timestamp: float | None = None,
) -> list[dict[str, Any]]:
    def matches(record: ReminderRecord) -> bool:
        if reminder_id is not None and record.id != reminder_id:
            return False
        if content is not None and content.lower() not in record.content.lower():
            return False
        if reminder_timestamp is not None and record.reminder_timestamp != reminder_timestamp:
            return False
        return True

    found = [asdict(r) for r in ctx.state.reminders if matches(r)]
    if not found:
        raise ToolError("NoMatchError", "no reminders matched the search")
    return found


def remove_reminder(ctx: ToolContext, reminder_id: str) -> str:
    record = _find_reminder(ctx, reminder_id)
    ctx.state.reminders.remove(record)
    return reminder_id


# --------------------------------------------------------------------------
# Settings
# --------------------------------------------------------------------------


def _make_get_flag(flag: str) -> ToolFn:
    def get_flag(ctx: ToolContext) -> bool:
        return getattr(ctx.state.settings, flag)

    return get_flag


def _make_set_flag(flag: str) -> ToolFn:
    def set_flag(ctx: ToolContext, on: bool) -> bool:
        setattr(ctx.state.settings, flag, on)
        return on

    return set_flag


def set_low_battery_mode_status(ctx: ToolContext, on: bool) -> bool:
    ctx.state.settings.low_battery_mode = on
    if on:
        # Low battery mode force-disables every dependent service.
        for flag in SERVICE_FLAGS:
            setattr(ctx.state.settings, flag, False)
    return on


def get_current_location(ctx: ToolContext) -> dict[str, float]:
    return {
        "latitude": ctx.state.current_latitude,
        "longitude": ctx.state.current_longitude,
    }


# --------------------------------------------------------------------------
# Time utilities
# --------------------------------------------------------------------------

_WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")


def get_current_timestamp(ctx: ToolContext) -> float:
    return ctx.state.clock_timestamp


def timestamp_to_datetime_info(ctx: ToolContext, timestamp: float) -> dict[str, Any]:
    if not math.isfinite(timestamp):
        raise ToolError("ValueError", "timestamp must be finite")
    moment = datetime.datetime.fromtimestamp(timestamp, tz=datetime.timezone.utc)
    return {
        "year": moment.year,
        "month": moment.month,
        "day": moment.day,
        "hour": moment.hour,
        "minute": moment.minute,
        "second": moment.second,
        "weekday": _WEEKDAYS[moment.weekday()],
    }


def datetime_info_to_timestamp(
    ctx: ToolContext,
    year: float,
    month: float,
    day: float,
    hour: float = 0,
    minute: float = 0,
    second: float = 0,
) -> int:
    try:
        moment = datetime.datetime(
            int(year),
            int(month),
            int(day),
            int(hour),
            int(minute),
            int(second),
            tzinfo=datetime.timezone.utc,
        )
    except ValueError as exc:
        raise ToolError("ValueError", str(exc)) from exc
    return int(moment.timestamp())


def shift_timestamp(
    ctx: ToolContext,
    timestamp: float,
    days: float = 0,
    hours: float = 0,
    minutes: float = 0,
    seconds: float = 0,
) -> float:
    return timestamp + days * 86400 + hours * 3600 + minutes * 60 + seconds


def timestamp_diff(ctx: ToolContext, timestamp_a: float, timestamp_b: float) -> dict[str, float]:
    delta = timestamp_b - timestamp_a
    days = math.trunc(delta / 86400)
    remaining = delta - days * 86400
    return {"days": days, "remaining_seconds": remaining}


# --------------------------------------------------------------------------
# Math utilities
# --------------------------------------------------------------------------


def calculate_lat_lon_distance(
    ctx: ToolContext,
    latitude_1: float,
    longitude_1: float,
    latitude_2: float,
    longitude_2: float,
) -> float:
    _check_latitude(latitude_1, "latitude_1")
    _check_latitude(latitude_2, "latitude_2")
    _check_longitude(longitude_1, "longitude_1")
    _check_longitude(longitude_2, "longitude_2")
    return haversine_km(latitude_1, longitude_1, latitude_2, longitude_2)


def unit_conversion(ctx: ToolContext, amount: float, from_unit: str, to_unit: str) -> float:
    from_unit, to_unit = from_unit.lower(), to_unit.lower()
    tables = ctx.fixtures.units
    category_of = {unit: cat for cat, table in tables.items() for unit in table}
    if from_unit not in category_of:
        raise ToolError("ValueError", f"unknown unit '{from_unit}'")
    if to_unit not in category_of:
        raise ToolError("ValueError", f"unknown unit '{to_unit}'")
    if category_of[from_unit] != category_of[to_unit]:
        raise ToolError(
            "ValueError",
            f"cannot convert between '{from_unit}' ({category_of[from_unit]}) "
            f"and '{to_unit}' ({category_of[to_unit]})",
        )
    if category_of[from_unit] == "temperature":
        celsius = {
            "celsius": lambda v: v,
            "fahrenheit": lambda v: (v - 32.0) * 5.0 / 9.0,
            "kelvin": lambda v: v - 273.15,
        }[from_unit](amount)
        return {
            "celsius": lambda c: c,
            "fahrenheit": lambda c: c * 9.0 / 5.0 + 32.0,
            "kelvin": lambda c: c + 273.15,
        }[to_unit](celsius)
    table = tables[category_of[from_unit]]
    return amount * table[from_unit] / table[to_unit]


# --------------------------------------------------------------------------
# Knowledge lookups (wifi-gated, fixture-backed)
# --------------------------------------------------------------------------


def search_location(ctx: ToolContext, query: str) -> list[dict[str, Any]]:
    found = ctx.fixtures.find_locations(query)
    if not found:
        raise ToolError("NoMatchError", f"no locations matched '{query}'")
    return [dict(loc) for loc in found]


def search_weather_around_lat_lon(
    ctx: ToolContext, latitude: float, longitude: float
) -> dict[str, Any]:
    _check_latitude(latitude)
    _check_longitude(longitude)
    best: tuple[float, str] | None = None
    for loc in ctx.fixtures.locations:
        report = ctx.fixtures.weather_for(loc["name"])
        if report is None:
            continue
        distance = haversine_km(latitude, longitude, loc["latitude"], loc["longitude"])
        if best is None or distance < best[0]:
            best = (distance, loc["name"])
    if best is None:
        raise ToolError("NoMatchError", "no weather reports available")
    report = ctx.fixtures.weather_for(best[1])
    assert report is not None
    return {"location": best[1], **report}


def search_stock(ctx: ToolContext, query: str) -> dict[str, Any]:
    entry = ctx.fixtures.find_stock(query)
    if entry is None:
        raise ToolError("NoMatchError", f"no stock matched '{query}'")
    return entry


def search_holiday(ctx: ToolContext, holiday_name: str, year: float) -> float:
    date = ctx.fixtures.holiday_date(holiday_name, int(year))
    if date is None:
        raise ToolError("NoMatchError", f"no holiday '{holiday_name}' known for year {int(year)}")
    return date


def convert_currency(
    ctx: ToolContext, amount: float, from_currency_code: str, to_currency_code: str
) -> float:
    rate = ctx.fixtures.fx_rate(from_currency_code, to_currency_code)
    if rate is None:
        raise ToolError(
            "NoMatchError",
            f"no exchange rate from '{from_currency_code.upper()}' "
            f"to '{to_currency_code.upper()}'",
        )
    return amount * rate


def end_conversation(ctx: ToolContext) -> str:
    return "Conversation ended."


# --------------------------------------------------------------------------
# Schema table
# --------------------------------------------------------------------------


def _contact_search_args(id_required: bool = False) -> tuple[ArgSpec, ...]:
    return (
        ArgSpec("contact_id", "string", "Unique contact identifier.", required=id_required),
        ArgSpec("name", "string", "Name to search for (substring match).", required=False),
        ArgSpec("phone_number", "string", "Phone number to search for.", required=False),
        ArgSpec("relationship", "string", "Relationship to search for.", required=False),
        ArgSpec("is_self", "boolean", "Whether the contact is the device owner.", required=False),
    )


def builtin_tools() -> list[RegisteredTool]:
    cellular = DependencyPredicate(
        flag="cellular",
        expected=True,
        error_kind="ConnectionError",
        message="cellular service is not on",
    )
    location_service = DependencyPredicate(
        flag="location_service",
        expected=True,
        error_kind="PermissionError",
        message="location service is not on",
    )
    tools = [
        RegisteredTool(
            ToolSchema(
                name="add_contact",
                domain="contacts",
                description="Add a new contact to the contacts database.",
                args=(
                    ArgSpec("name", "string", "Name of the contact."),
                    ArgSpec("phone_number", "string", "Phone number of the contact."),
                    ArgSpec("relationship", "string", "Relationship to the owner.", required=False),
                    ArgSpec(
                        "is_self",
                        "boolean",
                        "Whether this contact is the device owner.",
                        required=False,
                    ),
                ),
                returns_description="Unique identifier of the new contact.",
                declared_errors=("ValueError",),
                reads=frozenset({"contacts"}),
                writes=frozenset({"contacts"}),
            ),
            add_contact,
        ),
        RegisteredTool(
            ToolSchema(
                name="search_contacts",
                domain="contacts",
                description="Search for contacts matching any combination of fields.",
                args=_contact_search_args(),
                returns_description="List of matching contact records with all fields.",
                declared_errors=("NoMatchError",),
                reads=frozenset({"contacts"}),
            ),
            search_contacts,
        ),
        RegisteredTool(
            ToolSchema(
                name="modify_contact",
                domain="contacts",
                description="Modify fields of an existing contact.",
                args=(
                    ArgSpec("contact_id", "string", "Unique contact identifier."),
                    ArgSpec("name", "string", "New name.", required=False),
                    ArgSpec("phone_number", "string", "New phone number.", required=False),
                    ArgSpec("relationship", "string", "New relationship.", required=False),
                    ArgSpec("is_self", "boolean", "New is-self flag.", required=False),
                ),
                returns_description="The updated contact record.",
                declared_errors=("KeyError", "ValueError"),
                reads=frozenset({"contacts"}),
                writes=frozenset({"contacts"}),
            ),
            modify_contact,
        ),
        RegisteredTool(
            ToolSchema(
                name="remove_contact",
                domain="contacts",
                description="Remove a contact from the contacts database.",
                args=(ArgSpec("contact_id", "string", "Unique contact identifier."),),
                returns_description="Identifier of the removed contact.",
                declared_errors=("KeyError",),
                reads=frozenset({"contacts"}),
                writes=frozenset({"contacts"}),
            ),
            remove_contact,
        ),
        RegisteredTool(
            ToolSchema(
                name="send_message",
                domain="messages",
                description="Send a message to a phone number.",
                args=(
                    ArgSpec("phone_number", "string", "Phone number to send a message to."),
                    ArgSpec("content", "string", "The content of the message to send."),
                ),
                returns_description="Unique identifier of the sent message.",
                declared_errors=("ConnectionError",),
                reads=frozenset({"cellular", "messages", "clock"}),
                writes=frozenset({"messages"}),
                requires=(cellular,),
            ),
            send_message,
        ),
        RegisteredTool(
            ToolSchema(
                name="search_messages",
                domain="messages",
                description="Search sent messages matching any combination of fields.",
                args=(
                    ArgSpec("message_id", "string", "Unique message identifier.", required=False),
                    ArgSpec("phone_number", "string", "Phone number to search for.", required=False),
                    ArgSpec(
                        "content", "string", "Content to search for (substring match).", required=False
                    ),
                ),
                returns_description="List of matching message records with all fields.",
                declared_errors=("NoMatchError",),
                reads=frozenset({"messages"}),
            ),
            search_messages,
        ),
        RegisteredTool(
            ToolSchema(
                name="add_reminder",
                domain="reminders",
                description="Add a new reminder, optionally pinned to coordinates.",
                args=(
                    ArgSpec("content", "string", "What to be reminded about."),
                    ArgSpec("reminder_timestamp", "timestamp", "When to fire, as unix seconds."),
                    ArgSpec(
                        "latitude", "latitude", "Latitude to pin the reminder to.", required=False
                    ),
                    ArgSpec(
                        "longitude", "longitude", "Longitude to pin the reminder to.", required=False
                    ),
                ),
                returns_description="Unique identifier of the new reminder.",
                declared_errors=("ValueError",),
                reads=frozenset({"reminders"}),
                writes=frozenset({"reminders"}),
            ),
            add_reminder,
        ),
        RegisteredTool(
            ToolSchema(
                name="modify_reminder",
                domain="reminders",
                description="Modify fields of an existing reminder.",
                args=(
                    ArgSpec("reminder_id", "string", "Unique reminder identifier."),
                    ArgSpec("content", "string", "New content.", required=False),
                    ArgSpec(
                        "reminder_timestamp",
                        "timestamp",
                        "New fire time, as unix seconds.",
                        required=False,
                    ),
                    ArgSpec("latitude", "latitude", "New latitude.", required=False),
                    ArgSpec("longitude", "longitude", "New longitude.", required=False),
                ),
                returns_description="The updated reminder record.",
                declared_errors=("KeyError", "ValueError"),
                reads=frozenset({"reminders"}),
                writes=frozenset({"reminders"}),
            ),
            modify_reminder,
        ),
        RegisteredTool(
            ToolSchema(
                name="search_reminders",
                domain="reminders",
                description="Search reminders matching any combination of fields.",
                args=(
                    ArgSpec("reminder_id", "string", "Unique reminder identifier.", required=False),
                    ArgSpec(
                        "content", "string", "Content to search for (substring match).", required=False
                    ),
                    ArgSpec(
                        "reminder_timestamp",
                        "timestamp",
                        "Fire time to search for, as unix seconds.",
                        required=False,
                    ),
                ),
                returns_description="List of matching reminder records with all fields.",
                declared_errors=("NoMatchError",),
                reads=frozenset({"reminders"}),
            ),
            search_reminders,
        ),
        RegisteredTool(
            ToolSchema(
                name="remove_reminder",
                domain="reminders",
                description="Remove a reminder.",
                args=(ArgSpec("reminder_id", "string", "Unique reminder identifier."),),
                returns_description="Identifier of the removed reminder.",
                declared_errors=("KeyError",),
                reads=frozenset({"reminders"}),
                writes=frozenset({"reminders"}),
            ),
            remove_reminder,
        ),
    ]

    flag_labels = {
        "cellular": "cellular service",
        "wifi": "wifi",
        "location_service": "location service",
    }
    for flag, label in flag_labels.items():
        tools.append(
            RegisteredTool(
                ToolSchema(
                    name=f"get_{flag}_status" if flag != "cellular" else "get_cellular_service_status",
                    domain="settings",
                    description=f"Get whether {label} is currently on.",
                    returns_description=f"True if {label} is on.",
                    reads=frozenset({flag}),
                ),
                _make_get_flag(flag),
            )
        )
        tools.append(
            RegisteredTool(
                ToolSchema(
                    name=f"set_{flag}_status" if flag != "cellular" else "set_cellular_service_status",
                    domain="settings",
                    description=f"Turn {label} on or off.",
                    args=(ArgSpec("on", "boolean", f"Whether {label} should be on."),),
                    returns_description="The new flag value.",
                    declared_errors=("PermissionError",),
                    reads=frozenset({flag, "low_battery_mode"}),
                    writes=frozenset({flag}),
                    requires=(_needs_low_battery_off(),),
                ),
                _make_set_flag(flag),
            )
        )
    tools.append(
        RegisteredTool(
            ToolSchema(
                name="get_low_battery_mode_status",
                domain="settings",
                description="Get whether low battery mode is currently on.",
                returns_description="True if low battery mode is on.",
                reads=frozenset({"low_battery_mode"}),
            ),
            _make_get_flag("low_battery_mode"),
        )
    )
    tools.append(
        RegisteredTool(
            ToolSchema(
                name="set_low_battery_mode_status",
                domain="settings",
                description=(
                    "Turn low battery mode on or off. Turning it on also turns off "
                    "cellular service, wifi and location service."
                ),
                args=(ArgSpec("on", "boolean", "Whether low battery mode should be on."),),
                returns_description="The new flag value.",
                reads=frozenset({"low_battery_mode"}),
                writes=frozenset({"low_battery_mode", *SERVICE_FLAGS}),
            ),
            set_low_battery_mode_status,
        )
    )

    tools.extend(
        [
            RegisteredTool(
                ToolSchema(
                    name="get_current_location",
                    domain="map",
                    description="Get the device's current latitude and longitude.",
                    returns_description="Object with latitude and longitude in decimal degrees.",
                    declared_errors=("PermissionError",),
                    reads=frozenset({"location_service", "current_location"}),
                    requires=(location_service,),
                ),
                get_current_location,
            ),
            RegisteredTool(
                ToolSchema(
                    name="search_location",
                    domain="map",
                    description="Search for places by name and return their coordinates.",
                    args=(ArgSpec("query", "string", "Place name to search for."),),
                    returns_description=(
                        "List of matching places, each with name, latitude and longitude."
                    ),
                    declared_errors=("ConnectionError", "NoMatchError"),
                    reads=frozenset({"wifi"}),
                    requires=(_needs_wifi(),),
                ),
                search_location,
            ),
            RegisteredTool(
                ToolSchema(
                    name="get_current_timestamp",
                    domain="time",
                    description="Get the current time as a unix timestamp.",
                    returns_description="Current unix timestamp in seconds.",
                    reads=frozenset({"clock"}),
                ),
                get_current_timestamp,
            ),
            RegisteredTool(
                ToolSchema(
                    name="timestamp_to_datetime_info",
                    domain="time",
                    description="Break a unix timestamp into calendar fields (UTC).",
                    args=(ArgSpec("timestamp", "timestamp", "Unix timestamp in seconds."),),
                    returns_description=(
                        "Object with year, month, day, hour, minute, second and weekday name."
                    ),
                    declared_errors=("ValueError",),
                ),
                timestamp_to_datetime_info,
            ),
            RegisteredTool(
                ToolSchema(
                    name="datetime_info_to_timestamp",
                    domain="time",
                    description="Build a unix timestamp from calendar fields (UTC).",
                    args=(
                        ArgSpec("year", "number", "Calendar year."),
                        ArgSpec("month", "number", "Month 1-12."),
                        ArgSpec("day", "number", "Day of month."),
                        ArgSpec("hour", "number", "Hour 0-23.", required=False),
                        ArgSpec("minute", "number", "Minute 0-59.", required=False),
                        ArgSpec("second", "number", "Second 0-59.", required=False),
                    ),
                    returns_description="Unix timestamp in seconds.",
                    declared_errors=("ValueError",),
                ),
                datetime_info_to_timestamp,
            ),
            RegisteredTool(
                ToolSchema(
                    name="shift_timestamp",
                    domain="time",
                    description="Shift a unix timestamp by days, hours, minutes and seconds.",
                    args=(
                        ArgSpec("timestamp", "timestamp", "Unix timestamp in seconds."),
                        ArgSpec("days", "number", "Days to add (may be negative).", required=False),
                        ArgSpec("hours", "number", "Hours to add.", required=False),
                        ArgSpec("minutes", "number", "Minutes to add.", required=False),
                        ArgSpec("seconds", "number", "Seconds to add.", required=False),
                    ),
                    returns_description="The shifted unix timestamp.",
                ),
                shift_timestamp,
            ),
            RegisteredTool(
                ToolSchema(
                    name="timestamp_diff",
                    domain="time",
                    description="Difference between two unix timestamps, b minus a.",
                    args=(
                        ArgSpec("timestamp_a", "timestamp", "Earlier unix timestamp."),
                        ArgSpec("timestamp_b", "timestamp", "Later unix timestamp."),
                    ),
                    returns_description=(
                        "Object with whole days and remaining seconds; sign preserved."
                    ),
                ),
                timestamp_diff,
            ),
            RegisteredTool(
                ToolSchema(
                    name="calculate_lat_lon_distance",
                    domain="math",
                    description="Great-circle distance in kilometers between two coordinates.",
                    args=(
                        ArgSpec("latitude_1", "latitude", "Latitude of the first point."),
                        ArgSpec("longitude_1", "longitude", "Longitude of the first point."),
                        ArgSpec("latitude_2", "latitude", "Latitude of the second point."),
                        ArgSpec("longitude_2", "longitude", "Longitude of the second point."),
                    ),
                    returns_description="Distance in kilometers.",
                    declared_errors=("ValueError",),
                ),
                calculate_lat_lon_distance,
            ),
            RegisteredTool(
                ToolSchema(
                    name="unit_conversion",
                    domain="math",
                    description="Convert an amount between units of length, mass or temperature.",
                    args=(
                        ArgSpec("amount", "number", "Amount to convert."),
                        ArgSpec("from_unit", "string", "Unit to convert from, e.g. 'mile'."),
                        ArgSpec("to_unit", "string", "Unit to convert to, e.g. 'kilometer'."),
                    ),
                    returns_description="The converted amount.",
                    declared_errors=("ValueError",),
                ),
                unit_conversion,
            ),
            RegisteredTool(
                ToolSchema(
                    name="search_weather_around_lat_lon",
                    domain="weather",
                    description="Current weather report closest to the given coordinates.",
                    args=(
                        ArgSpec("latitude", "latitude", "Latitude of the point of interest."),
                        ArgSpec("longitude", "longitude", "Longitude of the point of interest."),
                    ),
                    returns_description=(
                        "Object with location, current_temperature (Celsius), low, high "
                        "and humidity (percent)."
                    ),
                    declared_errors=("ConnectionError", "ValueError"),
                    reads=frozenset({"wifi"}),
                    requires=(_needs_wifi(),),
                ),
                search_weather_around_lat_lon,
            ),
            RegisteredTool(
                ToolSchema(
                    name="search_stock",
                    domain="stock",
                    description="Look up a stock quote by symbol or company name.",
                    args=(ArgSpec("query", "string", "Stock symbol or company name."),),
                    returns_description="Object with symbol, price and currency_code.",
                    declared_errors=("ConnectionError", "NoMatchError"),
                    reads=frozenset({"wifi"}),
                    requires=(_needs_wifi(),),
                ),
                search_stock,
            ),
            RegisteredTool(
                ToolSchema(
                    name="search_holiday",
                    domain="holiday",
                    description="Look up the date of a holiday in a given year.",
                    args=(
                        ArgSpec("holiday_name", "string", "Holiday name, e.g. 'Christmas'."),
                        ArgSpec("year", "number", "Calendar year."),
                    ),
                    returns_description="Unix timestamp of the holiday at UTC midnight.",
                    declared_errors=("ConnectionError", "NoMatchError"),
                    reads=frozenset({"wifi"}),
                    requires=(_needs_wifi(),),
                ),
                search_holiday,
            ),
            RegisteredTool(
                ToolSchema(
                    name="convert_currency",
                    domain="conversion",
                    description="Convert an amount between currencies by ISO 4217 code.",
                    args=(
                        ArgSpec("amount", "number", "Amount to convert."),
                        ArgSpec("from_currency_code", "string", "ISO 4217 code to convert from."),
                        ArgSpec("to_currency_code", "string", "ISO 4217 code to convert to."),
                    ),
                    returns_description="The converted amount.",
                    declared_errors=("ConnectionError", "NoMatchError"),
                    reads=frozenset({"wifi"}),
                    requires=(_needs_wifi(),),
                ),
                convert_currency,
            ),
            RegisteredTool(
                ToolSchema(
                    name="end_conversation",
                    domain="conversation",
                    description="End the conversation and put the session in its end state.",
                    returns_description="Confirmation text.",
                ),
                end_conversation,
                user_only=True,
            ),
        ]
    )
    return tools
