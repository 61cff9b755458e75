from __future__ import annotations

import json
import re
import subprocess
import sys

import pytest

from toolsim.errors import MissingArgument, UnknownArgument, WrongType
from toolsim.registry import (
    ArgSpec,
    AugmentationConfig,
    ToolSchema,
    apply_augmentations,
    parse_rendered_tool,
    rank_distraction_tools,
    render_tool,
    validate_arguments,
)

# ---------------------------------------------------------------- validation


def _schema(registry, name):
    return registry.schema(name)


def test_valid_send_message_arguments_pass_through(registry):
    args = {"phone_number": "+15551234567", "content": "hi"}
    assert validate_arguments(_schema(registry, "send_message"), args) == args


def test_missing_required_argument(registry):
    with pytest.raises(MissingArgument) as exc:
        validate_arguments(_schema(registry, "send_message"), {"phone_number": "+1555"})
    assert exc.value.argument == "content"


def test_wrong_type_error_names_the_expected_kind(registry):
    with pytest.raises(WrongType) as exc:
        validate_arguments(
            _schema(registry, "add_reminder"),
            {"content": "x", "reminder_timestamp": "tomorrow"},
        )
    assert "timestamp (unix seconds, number)" in str(exc.value)


def test_unknown_argument_is_a_hard_error(registry):
    with pytest.raises(UnknownArgument):
        validate_arguments(
            _schema(registry, "send_message"),
            {"phone_number": "+1", "content": "x", "priority": 1},
        )


def test_integer_accepted_where_number_expected(registry):
    args = validate_arguments(_schema(registry, "convert_currency"),
                              {"amount": 100, "from_currency_code": "USD",
                               "to_currency_code": "EUR"})
    assert args["amount"] == 100


def test_boolean_is_not_a_number(registry):
    with pytest.raises(WrongType):
        validate_arguments(_schema(registry, "timestamp_to_datetime_info"), {"timestamp": True})


# ---------------------------------------------------------------- ranking

def _jaccard_oracle(tool, reference_tokens):
    tokens = set(re.findall(r"[a-z0-9]+", f"{tool.name} {tool.description}".lower()))
    union = tokens | reference_tokens
    return len(tokens & reference_tokens) / len(union) if union else 0.0


def test_domain_overlap_tier_comes_first(registry):
    necessary = [registry.schema("send_message")]
    pool = [registry.schema("search_messages"), registry.schema("search_stock")]
    ranked = rank_distraction_tools(necessary, pool)
    assert [t.name for t in ranked] == ["search_messages", "search_stock"]


def test_same_domain_beats_other_domains(registry):
    necessary = [registry.schema("send_message")]
    pool = [
        registry.schema("search_messages"),
        registry.schema("modify_reminder"),
        registry.schema("search_reminders"),
    ]
    assert rank_distraction_tools(necessary, pool)[0].name == "search_messages"


def test_full_catalog_ranking_matches_independent_jaccard(registry):
    necessary = [registry.schema("add_reminder")]
    pool = [t for t in registry.agent_schemas() if t.name != "add_reminder"]
    ranked = rank_distraction_tools(necessary, pool)

    reference = set(
        re.findall(r"[a-z0-9]+", f"{necessary[0].name} {necessary[0].description}".lower())
    )
    expected = sorted(
        pool,
        key=lambda t: (
            0 if t.domain == "reminders" else 1,
            -_jaccard_oracle(t, reference),
            t.name,
        ),
    )
    assert [t.name for t in ranked] == [t.name for t in expected]


# ---------------------------------------------------------------- augmentations


def test_identity_augmentation_keeps_schemas(registry):
    presented = registry.present(["send_message"], AugmentationConfig())
    assert [t.name for t in presented.tools] == ["send_message"]
    assert presented.name_map == {"send_message": "send_message"}
    assert presented.include_types


def test_scramble_flags_require_three_distractions():
    with pytest.raises(ValueError):
        AugmentationConfig(distraction=0, scramble_tool_name=True)


def test_config_from_dict_defaults_distraction_for_scrambles():
    config = AugmentationConfig.from_dict({"scramble_tool_name": True})
    assert config.distraction == 3


def test_send_message_scrambles_to_messages_0(registry):
    presented = registry.present(
        ["send_message"], AugmentationConfig(distraction=3, scramble_tool_name=True)
    )
    assert presented.name_map["send_message"] == "messages_0"
    assert len(presented.tools) == 4


def test_name_map_is_a_bijection(registry):
    presented = registry.present(
        ["send_message", "search_contacts", "set_cellular_service_status"],
        AugmentationConfig(distraction=3, scramble_tool_name=True),
    )
    assert len(set(presented.name_map.values())) == len(presented.name_map)
    for original, shown in presented.name_map.items():
        assert presented.original_name(shown) == original


def test_description_scrambling_empties_the_summary(registry):
    presented = registry.present(
        ["send_message"], AugmentationConfig(distraction=3, scramble_tool_description=True)
    )
    send = next(t for t in presented.tools if t.name == "send_message")
    assert send.description == ""
    # Args and returns documentation survive.
    assert send.args[0].description
    assert send.returns_description


def test_arg_description_scrambling_empties_all_arg_docs(registry):
    presented = registry.present(
        ["send_message"], AugmentationConfig(distraction=3, scramble_arg_descriptions=True)
    )
    send = next(t for t in presented.tools if t.name == "send_message")
    assert all(a.description == "" for a in send.args)
    assert send.description


def test_type_scrambling_removes_type_keys_from_rendering(registry):
    presented = registry.present(
        ["send_message"], AugmentationConfig(distraction=3, scramble_arg_types=True)
    )
    rendered = presented.rendered()
    for doc in rendered:
        for prop in doc["parameters"]["properties"].values():
            assert "type" not in prop


def test_distraction_all_presents_every_agent_tool(registry):
    presented = registry.present(["send_message"], AugmentationConfig(distraction="all"))
    assert {t.name for t in presented.tools} == {t.name for t in registry.agent_schemas()}


def test_withheld_tools_never_appear_as_distractions(registry):
    presented = registry.present(
        ["search_holiday"],
        AugmentationConfig(distraction="all"),
        withheld=["get_current_timestamp"],
    )
    assert "get_current_timestamp" not in {t.name for t in presented.tools}


def test_augmentation_is_a_pure_function(registry):
    config = AugmentationConfig(distraction=3, scramble_tool_name=True)
    first = registry.present(["send_message", "add_reminder"], config)
    second = registry.present(["send_message", "add_reminder"], config)
    assert json.dumps(first.rendered(), sort_keys=True) == json.dumps(
        second.rendered(), sort_keys=True
    )


def test_augmentation_independent_of_hash_seed(registry):
    """Simulates a second platform: a fresh interpreter with a different
    PYTHONHASHSEED must render byte-identical schemas."""
    config = AugmentationConfig(distraction=10)
    local = json.dumps(
        registry.present(["send_message", "add_reminder"], config).rendered(), sort_keys=True
    )
    script = (
        "import json;"
        "from toolsim.catalog import build_registry;"
        "from toolsim.registry import AugmentationConfig;"
        "r = build_registry();"
        "p = r.present(['send_message', 'add_reminder'], AugmentationConfig(distraction=10));"
        "print(json.dumps(p.rendered(), sort_keys=True))"
    )
    result = subprocess.run(
        [sys.executable, "-c", script],
        capture_output=True,
        text=True,
        env={"PYTHONHASHSEED": "12345", "PATH": "/usr/bin:/bin"},
    )
    assert result.returncode == 0, result.stderr
    assert result.stdout.strip() == local


# ---------------------------------------------------------------- rendering


def test_rendered_schema_shape(registry):
    doc = render_tool(registry.schema("send_message"))
    assert doc["name"] == "send_message"
    assert doc["parameters"]["type"] == "object"
    assert doc["parameters"]["required"] == ["phone_number", "content"]
    assert doc["parameters"]["properties"]["phone_number"]["type"] == "string"
    assert "ConnectionError" in doc["description"]


def test_render_parse_round_trips_on_all_catalog_tools(registry):
    for schema in registry.agent_schemas():
        rendered = render_tool(schema)
        reparsed = render_tool(parse_rendered_tool(rendered))
        assert json.dumps(rendered, sort_keys=True) == json.dumps(reparsed, sort_keys=True)


def test_schema_invariants_are_enforced():
    with pytest.raises(ValueError):
        ToolSchema(
            name="bad",
            domain="x",
            description="",
            args=(ArgSpec("a", "string"), ArgSpec("a", "number")),
        )
    with pytest.raises(ValueError):
        ArgSpec("a", "string", required=True, default="x")
