from __future__ import annotations

import itertools
import math
import random
from functools import lru_cache

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from toolsim.bus import Message, Role
from toolsim.evaluation import (
    BindingRef,
    ColumnMatcher,
    DbTarget,
    GuardrailTarget,
    MessageTarget,
    Milestone,
    MilestoneDAG,
    TraceTarget,
    db_similarity,
    evaluate_trajectory,
    exhaustive_match,
    match_milestones,
    milestone_similarity,
    rouge_l_f,
    row_similarity,
    score_assignment,
    tokenize,
)
from toolsim.world import Snapshot, ToolTrace, WorldState

# ---------------------------------------------------------------- oracles


def lcs_oracle(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    """Independent LCS: top-down recursion with memoization."""

    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    return rec(0, 0)


def rouge_oracle(reference: str, candidate: str) -> float:
    ref, cand = tuple(tokenize(reference)), tuple(tokenize(candidate))
    if not ref and not cand:
        return 1.0
    if not ref or not cand:
        return 0.0
    lcs = lcs_oracle(ref, cand)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


def db_similarity_oracle(matrix: list[list[float]]) -> float:
    """Exhaustive max over injective row->column assignments."""
    k = len(matrix)
    if k == 0:
        return 1.0
    best = 0.0
    for columns in itertools.permutations(range(len(matrix[0])), k):
        product = 1.0
        for i, j in zip(range(k), columns):
            product *= matrix[i][j]
        best = max(best, 0.0 if product == 0.0 else product ** (1.0 / k))
    return best


# ---------------------------------------------------------------- ROUGE-L


def test_rouge_identity_is_one():
    assert rouge_l_f("send message to John", "send message to John") == 1.0


def test_rouge_worked_example_is_exactly_point_eight():
    # L=2, P=1, R=2/3, F=0.8
    assert rouge_l_f("buy chocolate milk", "buy milk") == 0.8


def test_rouge_one_sided_empty_is_zero():
    assert rouge_l_f("", "hello") == 0.0
    assert rouge_l_f("hello", "") == 0.0
    assert rouge_l_f("", "") == 1.0


def test_rouge_tokenizes_case_and_punctuation():
    assert rouge_l_f("Buy milk!", "buy MILK") == 1.0


_WORDS = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"]


@given(
    a=st.lists(st.sampled_from(_WORDS), max_size=12),
    b=st.lists(st.sampled_from(_WORDS), max_size=12),
)
@hsettings(max_examples=200, deadline=None)
def test_rouge_matches_independent_oracle_and_stays_bounded(a, b):
    reference, candidate = " ".join(a), " ".join(b)
    value = rouge_l_f(reference, candidate)
    assert value == rouge_oracle(reference, candidate)
    assert 0.0 <= value <= 1.0
    assert rouge_l_f(reference, reference) == 1.0


# ---------------------------------------------------------------- row similarity


def _exact(value):
    return ColumnMatcher(kind="exact", expected=value)


def _rouge(value):
    return ColumnMatcher(kind="rouge_l", expected=value)


def test_row_all_exact_matches_is_one():
    row = {"a": _exact(1), "b": _exact("x")}
    assert row_similarity(row, {"a": 1, "b": "x"}) == 1.0


def test_row_zero_column_nullifies():
    row = {"a": _exact(1), "b": _exact("x"), "c": _exact(True)}
    assert row_similarity(row, {"a": 1, "b": "WRONG", "c": True}) == 0.0


def test_row_geometric_mean_of_partial_scores():
    row = {"phone": _exact("+1"), "content": _rouge("buy chocolate milk")}
    value = row_similarity(row, {"phone": "+1", "content": "buy milk"})
    assert value == pytest.approx(math.sqrt(0.8))


def test_missing_column_scores_zero():
    assert row_similarity({"ghost": _exact(1)}, {"other": 1}) == 0.0


def test_numeric_tolerance_and_any_and_geo():
    tol = ColumnMatcher(kind="numeric_abs_tol", expected=10.0, tolerance=0.5)
    assert row_similarity({"v": tol}, {"v": 10.4}) == 1.0
    assert row_similarity({"v": tol}, {"v": 10.6}) == 0.0
    anything = ColumnMatcher(kind="any")
    assert row_similarity({"v": anything}, {"v": object()}) == 1.0
    geo = ColumnMatcher(kind="geo_radius", expected=[37.0, -122.0], radius_km=5.0)
    assert row_similarity({"latitude,longitude": geo},
                          {"latitude": 37.01, "longitude": -122.01}) == 1.0
    assert row_similarity({"latitude,longitude": geo},
                          {"latitude": 38.0, "longitude": -122.0}) == 0.0
    assert row_similarity({"latitude,longitude": geo}, {"latitude": 37.0}) == 0.0


# ---------------------------------------------------------------- db similarity


def _db_target(rows, cardinality="at_least"):
    return DbTarget(db="contacts", rows=tuple(rows), cardinality=cardinality)


def test_single_target_row_exact_match():
    target = _db_target([{"name": _exact("Ann")}])
    assert db_similarity(target, [{"name": "Ann"}]) == 1.0


def test_swapped_rows_still_match_by_assignment():
    target = _db_target([{"name": _exact("Ann")}, {"name": _exact("Bob")}])
    rows = [{"name": "Bob"}, {"name": "Ann"}]
    assert db_similarity(target, rows) == 1.0


def test_fewer_candidate_rows_than_targets_is_zero():
    target = _db_target([{"name": _exact("Ann")}, {"name": _exact("Bob")}])
    assert db_similarity(target, [{"name": "Ann"}]) == 0.0


def test_exact_cardinality_requires_equal_counts():
    target = _db_target([{"name": _exact("Ann")}], cardinality="exact")
    assert db_similarity(target, [{"name": "Ann"}, {"name": "Bob"}]) == 0.0
    assert db_similarity(target, [{"name": "Ann"}]) == 1.0


def test_db_similarity_matches_permutation_oracle_on_random_instances():
    # Column scores are shared (rouge); the assignment search is what this
    # oracle checks, by exhaustive permutation enumeration.
    rng = random.Random(20240521)
    words = ["red", "blue", "green", "gold", "milk", "bread", "stone", "light"]
    for _ in range(200):
        k = rng.randint(1, 5)
        n = rng.randint(k, 7)
        target_texts = [" ".join(rng.choices(words, k=rng.randint(1, 5))) for _ in range(k)]
        candidate_texts = [" ".join(rng.choices(words, k=rng.randint(1, 5))) for _ in range(n)]
        target = _db_target([{"text": _rouge(t)} for t in target_texts])
        value = db_similarity(target, [{"text": c} for c in candidate_texts])
        matrix = [[rouge_l_f(t, c) for c in candidate_texts] for t in target_texts]
        assert value == db_similarity_oracle(matrix)


# ---------------------------------------------------------------- fixtures for matching


def _message(sender, recipient, text):
    return Message(sender=sender, recipient=recipient, text=text)


def _snapshots(turns):
    """Build a snapshot sequence from per-turn specs.

    Each spec: dict with optional `message` (sender, recipient, text),
    `traces` (list of (tool, args, ok, result)), and `contacts` /
    `messages_db` row lists carried forward as given.
    """
    snapshots = []
    all_traces: list[ToolTrace] = []
    for index, spec in enumerate(turns, start=1):
        for tool, args, ok, result in spec.get("traces", []):
            all_traces.append(
                ToolTrace(
                    turn_index=index, tool_name=tool, arguments=args, ok=ok,
                    result=result if ok else None,
                    error_kind=None if ok else "ValueError",
                    error_message=None if ok else "boom",
                )
            )
        state = WorldState.from_dict(
            {
                "settings": spec.get("settings", {}),
                "contacts": spec.get("contacts", []),
                "messages": spec.get("messages_db", []),
                "reminders": spec.get("reminders", []),
                "clock_timestamp": 0,
            }
        )
        state.traces = list(all_traces)
        sender, recipient, text = spec.get(
            "message", (Role.USER, Role.AGENT, f"turn {index}")
        )
        snapshots.append(
            Snapshot(turn_index=index, state=state, message=_message(sender, recipient, text))
        )
    return snapshots


def test_trace_milestone_gates_on_tool_name():
    snaps = _snapshots([
        {"traces": [("search_contacts", {"name": "John"}, True, [{"phone_number": "+1"}])]},
        {"traces": [("send_message", {"phone_number": "+1", "content": "hi"}, True, "message-0")]},
    ])
    milestone = Milestone("m", TraceTarget(tool="send_message"))
    dag = MilestoneDAG(nodes=[milestone])
    assert milestone_similarity(milestone, 1, snaps, {"m": 1}, dag) == 0.0
    assert milestone_similarity(milestone, 2, snaps, {"m": 2}, dag) == 1.0


def test_trace_milestone_require_success_and_arguments():
    snaps = _snapshots([
        {"traces": [("send_message", {"phone_number": "+1", "content": "hi"}, False, None)]},
        {"traces": [("send_message", {"phone_number": "+1", "content": "hi"}, True, "m-0")]},
    ])
    strict = Milestone("m", TraceTarget(
        tool="send_message",
        arguments={"phone_number": _exact("+1"), "content": _rouge("hi")},
    ))
    lenient = Milestone("m2", TraceTarget(tool="send_message", require_success=False))
    dag = MilestoneDAG(nodes=[strict, lenient])
    assert milestone_similarity(strict, 1, snaps, {}, dag) == 0.0
    assert milestone_similarity(strict, 2, snaps, {}, dag) == 1.0
    assert milestone_similarity(lenient, 1, snaps, {}, dag) == 1.0


def test_trace_milestone_missing_argument_is_zero():
    snaps = _snapshots([
        {"traces": [("send_message", {"phone_number": "+1"}, True, "m-0")]},
    ])
    milestone = Milestone("m", TraceTarget(
        tool="send_message", arguments={"content": _rouge("hi")}
    ))
    dag = MilestoneDAG(nodes=[milestone])
    assert milestone_similarity(milestone, 1, snaps, {}, dag) == 0.0


def test_message_milestone_checks_roles_then_content():
    snaps = _snapshots([
        {"message": (Role.AGENT, Role.USER, "I cannot do that")},
        {"message": (Role.USER, Role.AGENT, "I cannot do that")},
    ])
    milestone = Milestone("m", MessageTarget(
        sender=Role.AGENT, recipient=Role.USER, content=_rouge("I cannot do that")
    ))
    dag = MilestoneDAG(nodes=[milestone])
    assert milestone_similarity(milestone, 1, snaps, {}, dag) == 1.0
    assert milestone_similarity(milestone, 2, snaps, {}, dag) == 0.0


def test_db_milestone_scores_snapshot_rows():
    snaps = _snapshots([
        {},
        {"messages_db": [{"id": "message-0", "phone_number": "+1",
                          "content": "hello there", "created_at": 0}]},
    ])
    milestone = Milestone("m", DbTarget(
        db="messages",
        rows=({"phone_number": _exact("+1"), "content": _rouge("hello there")},),
    ))
    dag = MilestoneDAG(nodes=[milestone])
    assert milestone_similarity(milestone, 1, snaps, {}, dag) == 0.0
    assert milestone_similarity(milestone, 2, snaps, {}, dag) == 1.0


def test_binding_pulls_expected_from_matched_source_trace():
    snaps = _snapshots([
        {"traces": [("search_contacts", {"name": "John"}, True,
                     [{"name": "John", "phone_number": "+15551234567"}])]},
        {"traces": [("send_message",
                     {"phone_number": "+15551234567", "content": "hi"}, True, "m-0")]},
    ])
    source = Milestone("m1", TraceTarget(tool="search_contacts"))
    dependent = Milestone("m2", TraceTarget(
        tool="send_message",
        arguments={"phone_number": ColumnMatcher(
            kind="exact", binding=BindingRef("m1", "0.phone_number"))},
    ))
    dag = MilestoneDAG(nodes=[source, dependent], edges=[("m1", "m2")])
    assert milestone_similarity(dependent, 2, snaps, {"m1": 1}, dag) == 1.0
    # Unplaced source -> unresolved -> zero.
    assert milestone_similarity(dependent, 2, snaps, {"m1": None}, dag) == 0.0
    # Source turn without a successful matching trace -> unresolved.
    assert milestone_similarity(dependent, 2, snaps, {"m1": 2}, dag) == 0.0


def test_binding_resolves_against_the_trace_its_source_matched():
    # Two same-tool traces share a turn; the binding must extract from the
    # trace the source milestone actually matches, not the first one.
    snaps = _snapshots([
        {"traces": [
            ("search_location", {"query": "Golden Gate Bridge"}, True,
             [{"latitude": 37.8199, "longitude": -122.4786}]),
            ("search_location", {"query": "Eiffel Tower"}, True,
             [{"latitude": 48.8584, "longitude": 2.2945}]),
        ]},
        {"traces": [("calculate_lat_lon_distance",
                     {"latitude_1": 48.8584, "longitude_1": 2.2945}, True, 0.0)]},
    ])
    eiffel = Milestone("m1", TraceTarget(
        tool="search_location", arguments={"query": _rouge("Eiffel Tower")}
    ))
    dependent = Milestone("m2", TraceTarget(
        tool="calculate_lat_lon_distance",
        arguments={"latitude_1": ColumnMatcher(kind="exact",
                                               binding=BindingRef("m1", "0.latitude"))},
    ))
    dag = MilestoneDAG(nodes=[eiffel, dependent], edges=[("m1", "m2")])
    assert milestone_similarity(dependent, 2, snaps, {"m1": 1}, dag) == 1.0


def test_guardrail_checks_db_stability_between_referenced_turns():
    row = {"id": "contact-0", "name": "Ann", "phone_number": "+1",
           "relationship": None, "is_self": False}
    snaps = _snapshots([
        {"contacts": [row], "traces": [("search_contacts", {}, True, [row])]},
        {"contacts": [row]},
        {"contacts": [row], "traces": [("send_message", {}, True, "m-0")]},
        {"contacts": [], "traces": [("send_message", {}, True, "m-1")]},
    ])
    a = Milestone("a", TraceTarget(tool="search_contacts"))
    b = Milestone("b", TraceTarget(tool="send_message"))
    guard = Milestone("g", GuardrailTarget(db="contacts", ref_a="a", ref_b="b"))
    dag = MilestoneDAG(nodes=[a, b, guard], edges=[("a", "g"), ("b", "g"), ("a", "b")])
    assert milestone_similarity(guard, 4, snaps, {"a": 1, "b": 3}, dag) == 1.0
    assert milestone_similarity(guard, 4, snaps, {"a": 1, "b": 4}, dag) == 0.0
    assert milestone_similarity(guard, 4, snaps, {"a": 1, "b": None}, dag) == 0.0


# ---------------------------------------------------------------- matching


def test_single_milestone_lands_on_its_only_turn():
    snaps = _snapshots([
        {},
        {},
        {"traces": [("send_message", {"phone_number": "+1", "content": "x"}, True, "m")]},
    ])
    dag = MilestoneDAG(nodes=[Milestone("m", TraceTarget(tool="send_message"))])
    result = match_milestones(dag, snaps)
    assert result.assignment == {"m": 3}
    assert result.score_plus == 1.0


def test_chain_constraint_forces_order_respecting_optimum():
    # u scores 1.0 only at turn 3; v scores 1.0 only at turn 1 but 0.5 at
    # turn 4; the constrained optimum takes u@3, v@4.
    snaps = _snapshots([
        {"traces": [("beta", {"x": "good match here"}, True, None)]},
        {},
        {"traces": [("alpha", {}, True, None)]},
        {"traces": [("beta", {"x": "good"}, True, None)]},
    ])
    u = Milestone("u", TraceTarget(tool="alpha"))
    v = Milestone("v", TraceTarget(tool="beta",
                                   arguments={"x": _rouge("good match here")}))
    dag = MilestoneDAG(nodes=[u, v], edges=[("u", "v")])
    result = match_milestones(dag, snaps)
    oracle = exhaustive_match(dag, snaps)
    assert result.score_plus == oracle.score_plus
    assert result.assignment == {"u": 3, "v": 4}
    assert result.per_milestone["v"] == rouge_l_f("good match here", "good")


def test_milestones_may_share_a_turn_nonstrict():
    row = {"id": "message-0", "phone_number": "+1", "content": "x", "created_at": 0}
    snaps = _snapshots([
        {},
        {"traces": [("send_message", {}, True, "m-0")], "messages_db": [row]},
    ])
    call = Milestone("call", TraceTarget(tool="send_message"))
    stored = Milestone("stored", DbTarget(db="messages",
                                          rows=({"phone_number": _exact("+1")},)))
    dag = MilestoneDAG(nodes=[call, stored], edges=[("call", "stored")])
    result = match_milestones(dag, snaps)
    assert result.score_plus == 1.0
    assert result.assignment == {"call": 2, "stored": 2}
    # Under the strict sensitivity mode the call and the row it causes can no
    # longer share turn 2, so one of the two milestones is forfeited.
    strict = match_milestones(dag, snaps, strict=True)
    assert strict.score_plus == 0.5


def test_node_order_permutation_does_not_change_score():
    snaps = _snapshots([
        {"traces": [("alpha", {"x": "one two three"}, True, None)]},
        {"traces": [("beta", {"x": "four five"}, True, None)]},
        {"traces": [("gamma", {"x": "six"}, True, None)]},
    ])
    nodes = [
        Milestone("a", TraceTarget(tool="alpha", arguments={"x": _rouge("one two")})),
        Milestone("b", TraceTarget(tool="beta", arguments={"x": _rouge("four")})),
        Milestone("c", TraceTarget(tool="gamma", arguments={"x": _rouge("six six")})),
    ]
    baseline = match_milestones(MilestoneDAG(nodes=list(nodes)), snaps).score_plus
    for permutation in itertools.permutations(nodes):
        permuted = match_milestones(MilestoneDAG(nodes=list(permutation)), snaps).score_plus
        assert permuted == baseline


def test_unmatched_milestones_contribute_zero():
    snaps = _snapshots([{"traces": [("alpha", {}, True, None)]}])
    dag = MilestoneDAG(nodes=[
        Milestone("hit", TraceTarget(tool="alpha")),
        Milestone("miss", TraceTarget(tool="omega")),
    ])
    result = match_milestones(dag, snaps)
    assert result.per_milestone == {"hit": 1.0, "miss": 0.0}
    assert result.score_plus == 0.5
    assert result.assignment["miss"] is None


def test_empty_dag_scores_zero():
    snaps = _snapshots([{}])
    result = match_milestones(MilestoneDAG(nodes=[]), snaps)
    assert result.score_plus == 0.0


def test_cyclic_dag_is_rejected():
    with pytest.raises(ValueError):
        MilestoneDAG(
            nodes=[Milestone("a", TraceTarget(tool="x")), Milestone("b", TraceTarget(tool="y"))],
            edges=[("a", "b"), ("b", "a")],
        )


# ---------------------------------------------------------------- final score


def test_empty_minefield_is_vacuous():
    snaps = _snapshots([{"traces": [("alpha", {}, True, None)]}])
    milestones = MilestoneDAG(nodes=[Milestone("m", TraceTarget(tool="alpha"))])
    result = evaluate_trajectory(milestones, MilestoneDAG(nodes=[]), snaps)
    assert result.score_minus == 0.0
    assert result.final_score == result.score_plus == 1.0


def test_minefield_violation_nullifies():
    snaps = _snapshots([
        {"traces": [("alpha", {}, True, None)]},
        {"traces": [("timestamp_diff", {"timestamp_a": 1, "timestamp_b": 2}, True, {})]},
    ])
    milestones = MilestoneDAG(nodes=[Milestone("m", TraceTarget(tool="alpha"))])
    minefields = MilestoneDAG(nodes=[
        Milestone("x", TraceTarget(tool="timestamp_diff", require_success=False))
    ])
    result = evaluate_trajectory(milestones, minefields, snaps)
    assert result.score_plus == 1.0
    assert result.score_minus == 1.0
    assert result.final_score == 0.0


def test_partial_positive_score_still_nullified():
    snaps = _snapshots([
        {"traces": [("timestamp_diff", {}, True, {})]},
    ])
    milestones = MilestoneDAG(nodes=[
        Milestone("m", TraceTarget(tool="alpha")),
        Milestone("n", TraceTarget(tool="timestamp_diff")),
    ])
    minefields = MilestoneDAG(nodes=[
        Milestone("x", TraceTarget(tool="timestamp_diff", require_success=False))
    ])
    result = evaluate_trajectory(milestones, minefields, snaps)
    assert result.score_plus == 0.5
    assert result.final_score == 0.0
