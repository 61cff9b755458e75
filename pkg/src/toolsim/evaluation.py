"""Trajectory scoring against milestone and minefield DAGs.

A milestone defines a [0,1] similarity against one turn's snapshot: database
targets solve a best-assignment problem between target rows and snapshot
rows, trace targets match tool calls argument by argument, message targets
match a turn's utterance, and guardrail targets check that a database held
still between two other milestones. Geometric means are used throughout so
any hard-constraint column can nullify the whole score.

The matcher assigns every milestone a turn, maximizing the average
similarity under the constraint that assigned turns respect the DAG's
temporal edges (non-strict, so a tool call and the row it inserts may share
the environment turn). Minefields are scored with the same machinery; any
positive minefield similarity nullifies the trajectory.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .bus import Role
from .world import Snapshot, ToolTrace, db_unchanged_between

# --------------------------------------------------------------------------
# ROUGE-L
# --------------------------------------------------------------------------

_WORD_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation."""
    return _WORD_RE.findall(text.lower())


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0]
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def rouge_l_f(reference: str, candidate: str) -> float:
    """ROUGE-L F measure over token sequences.

    Both empty scores 1; one-sided empty scores 0.
    """
    ref = tokenize(reference)
    cand = tokenize(candidate)
    if not ref and not cand:
        return 1.0
    if not ref or not cand:
        return 0.0
    lcs = lcs_length(ref, cand)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


# --------------------------------------------------------------------------
# Column matchers
# --------------------------------------------------------------------------

_UNRESOLVED = object()
_MISSING = object()


@dataclass(frozen=True)
class BindingRef:
    """Pulls the expected value out of an ancestor milestone's matched trace
    result, letting milestones track information flow between tools."""

    source_id: str
    path: str = ""


@dataclass(frozen=True)
class ColumnMatcher:
    kind: str  # exact | numeric_abs_tol | rouge_l | geo_radius | any
    expected: Any = None
    binding: BindingRef | None = None
    tolerance: float = 0.0
    radius_km: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "numeric_abs_tol", "rouge_l", "geo_radius", "any"):
            raise ValueError(f"unknown matcher kind '{self.kind}'")

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind}
        if self.binding is not None:
            data["binding"] = {"source": self.binding.source_id, "path": self.binding.path}
        elif self.kind != "any":
            data["expected"] = self.expected
        params: dict[str, Any] = {}
        if self.kind == "numeric_abs_tol":
            params["tolerance"] = self.tolerance
        if self.kind == "geo_radius":
            params["radius_km"] = self.radius_km
        if params:
            data["params"] = params
        return data


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _matcher_score(matcher: ColumnMatcher, candidate: Any, expected: Any) -> float:
    if expected is _UNRESOLVED:
        return 0.0
    if matcher.kind == "any":
        return 1.0
    if matcher.kind == "exact":
        return 1.0 if candidate == expected else 0.0
    if matcher.kind == "numeric_abs_tol":
        if not _is_number(candidate) or not _is_number(expected):
            return 0.0
        return 1.0 if abs(candidate - expected) <= matcher.tolerance else 0.0
    if matcher.kind == "rouge_l":
        if not isinstance(candidate, str) or not isinstance(expected, str):
            return 0.0
        return rouge_l_f(expected, candidate)
    # geo_radius: both sides are (latitude, longitude) pairs
    try:
        lat_c, lon_c = float(candidate[0]), float(candidate[1])
        lat_e, lon_e = float(expected[0]), float(expected[1])
    except (TypeError, ValueError, IndexError, KeyError):
        return 0.0
    from .catalog import haversine_km

    return 1.0 if haversine_km(lat_e, lon_e, lat_c, lon_c) <= matcher.radius_km else 0.0


def geometric_mean(scores: Sequence[float]) -> float:
    """Zero-containing sets map to 0 by definition; the empty product is 1."""
    if not scores:
        return 1.0
    product = 1.0
    for score in scores:
        product *= score
    if product == 0.0:
        return 0.0
    return product ** (1.0 / len(scores))


def _column_value(row: dict[str, Any], column: str) -> Any:
    # A comma pair like "latitude,longitude" reads a composite coordinate value.
    if "," in column:
        parts = [p.strip() for p in column.split(",")]
        if any(p not in row or row[p] is None for p in parts):
            return _MISSING
        return tuple(row[p] for p in parts)
    if column not in row:
        return _MISSING
    return row[column]


Resolver = Callable[[ColumnMatcher], Any]


def row_similarity(
    target_row: dict[str, ColumnMatcher],
    candidate_row: dict[str, Any],
    resolver: Resolver | None = None,
) -> float:
    """Geometric mean of column similarities; a missing column scores 0."""
    resolver = resolver or (lambda matcher: matcher.expected)
    scores = []
    for column, matcher in target_row.items():
        value = _column_value(candidate_row, column)
        if value is _MISSING:
            scores.append(0.0)
            continue
        scores.append(_matcher_score(matcher, value, resolver(matcher)))
    return geometric_mean(scores)


# --------------------------------------------------------------------------
# Milestone targets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DbTarget:
    db: str
    rows: tuple[dict[str, ColumnMatcher], ...]
    cardinality: str = "at_least"  # at_least | exact

    def __post_init__(self) -> None:
        if self.cardinality not in ("at_least", "exact"):
            raise ValueError("cardinality must be 'at_least' or 'exact'")


@dataclass(frozen=True)
class TraceTarget:
    tool: str
    arguments: dict[str, ColumnMatcher] = field(default_factory=dict)
    require_success: bool = True
    result: dict[str, ColumnMatcher] = field(default_factory=dict)


@dataclass(frozen=True)
class MessageTarget:
    sender: Role
    recipient: Role
    content: ColumnMatcher = field(default_factory=lambda: ColumnMatcher(kind="any"))


@dataclass(frozen=True)
class GuardrailTarget:
    """Scores 1 iff `db` is value-equal across the turns assigned to the two
    referenced (ancestor) milestones."""

    db: str
    ref_a: str
    ref_b: str


MilestoneTarget = DbTarget | TraceTarget | MessageTarget | GuardrailTarget


@dataclass(frozen=True)
class Milestone:
    id: str
    target: MilestoneTarget
    description: str = ""


@dataclass
class MilestoneDAG:
    nodes: list[Milestone]
    edges: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [m.id for m in self.nodes]
        if len(ids) != len(set(ids)):
            raise ValueError("milestone ids must be unique")
        known = set(ids)
        for u, v in self.edges:
            if u not in known or v not in known:
                raise ValueError(f"edge ({u}, {v}) references an unknown milestone")
        self.topological_order()  # raises on cycles

    def node(self, milestone_id: str) -> Milestone:
        for milestone in self.nodes:
            if milestone.id == milestone_id:
                return milestone
        raise KeyError(milestone_id)

    def topological_order(self) -> list[str]:
        """Kahn's algorithm, stable with respect to node declaration order."""
        indegree = {m.id: 0 for m in self.nodes}
        for _, v in self.edges:
            indegree[v] += 1
        order: list[str] = []
        remaining = [m.id for m in self.nodes]
        while remaining:
            ready = [mid for mid in remaining if indegree[mid] == 0]
            if not ready:
                raise ValueError("milestone graph contains a cycle")
            chosen = ready[0]
            remaining.remove(chosen)
            order.append(chosen)
            for u, v in self.edges:
                if u == chosen:
                    indegree[v] -= 1
        return order

    def ancestors(self) -> dict[str, set[str]]:
        closure: dict[str, set[str]] = {m.id: set() for m in self.nodes}
        for mid in self.topological_order():
            for u, v in self.edges:
                if v == mid:
                    closure[mid] |= {u} | closure[u]
        return closure


# --------------------------------------------------------------------------
# Similarity of one milestone against one turn
# --------------------------------------------------------------------------


def _extract_path(value: Any, path: str) -> Any:
    if path == "":
        return value
    for part in path.split("."):
        try:
            if isinstance(value, Sequence) and not isinstance(value, (str, bytes)):
                value = value[int(part)]
            elif isinstance(value, dict):
                value = value[part]
            else:
                return _UNRESOLVED
        except (KeyError, IndexError, ValueError, TypeError):
            return _UNRESOLVED
    return value


def _make_resolver(
    dag: MilestoneDAG, snapshots: Sequence[Snapshot], placement: dict[str, int | None]
) -> Resolver:
    def resolve(matcher: ColumnMatcher) -> Any:
        if matcher.binding is None:
            return matcher.expected
        source_turn = placement.get(matcher.binding.source_id)
        if source_turn is None:
            return _UNRESOLVED
        try:
            source = dag.node(matcher.binding.source_id)
        except KeyError:
            return _UNRESOLVED
        if not isinstance(source.target, TraceTarget):
            return _UNRESOLVED
        snapshot = snapshots[source_turn - 1]
        # Extract from the trace the source milestone itself matched: among
        # successful traces of its tool this turn, the one it scores highest.
        matched = _matching_trace(source.target, snapshot.traces_at_turn(), resolve)
        if matched is None:
            return _UNRESOLVED
        return _extract_path(matched.result, matcher.binding.path)

    return resolve


def db_similarity(target: DbTarget, rows: Sequence[dict[str, Any]], resolver: Resolver | None = None) -> float:
    """Best assignment of target rows onto snapshot rows, maximizing the
    geometric mean of row similarities.

    Fewer snapshot rows than target rows scores 0; `exact` cardinality
    additionally requires equal row counts.
    """
    resolver = resolver or (lambda matcher: matcher.expected)
    k = len(target.rows)
    if target.cardinality == "exact" and len(rows) != k:
        return 0.0
    if len(rows) < k:
        return 0.0
    if k == 0:
        return 1.0
    matrix = [[row_similarity(t, row, resolver) for row in rows] for t in target.rows]
    product = _best_assignment_product(matrix)
    if product == 0.0:
        return 0.0
    return product ** (1.0 / k)


_LOG_ZERO_COST = 1e9


def _best_assignment_product(matrix: list[list[float]]) -> float:
    """Maximum product over injective row->column assignments, solved in log
    space as a rectangular linear sum assignment problem."""
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    cost = np.array(
        [[_LOG_ZERO_COST if score == 0.0 else -math.log(score) for score in row] for row in matrix]
    )
    row_indices, col_indices = linear_sum_assignment(cost)
    product = 1.0
    for i, j in zip(row_indices, col_indices):
        product *= matrix[i][j]
    return product


def milestone_similarity(
    milestone: Milestone,
    turn: int,
    snapshots: Sequence[Snapshot],
    placement: dict[str, int | None],
    dag: MilestoneDAG,
) -> float:
    """Similarity of one milestone against the snapshot at `turn`, with
    trace-dependent bindings resolved from the ancestors' assigned turns."""
    snapshot = snapshots[turn - 1]
    target = milestone.target
    resolver = _make_resolver(dag, snapshots, placement)
    if isinstance(target, DbTarget):
        return db_similarity(target, snapshot.database_rows(target.db), resolver)
    if isinstance(target, TraceTarget):
        return _trace_similarity(target, snapshot.traces_at_turn(), resolver)
    if isinstance(target, MessageTarget):
        message = snapshot.message
        if message is None or message.sender != target.sender or message.recipient != target.recipient:
            return 0.0
        if message.text is None:
            return 0.0
        return _matcher_score(target.content, message.text, resolver(target.content))
    if isinstance(target, GuardrailTarget):
        turn_a = placement.get(target.ref_a)
        turn_b = placement.get(target.ref_b)
        if turn_a is None or turn_b is None:
            return 0.0
        return 1.0 if db_unchanged_between(list(snapshots), turn_a, turn_b, target.db) else 0.0
    raise TypeError(f"unknown milestone target: {target!r}")


def _score_one_trace(target: TraceTarget, trace: ToolTrace, resolver: Resolver) -> float:
    scores: list[float] = []
    for arg, matcher in target.arguments.items():
        if arg not in trace.arguments:
            scores.append(0.0)
            continue
        scores.append(_matcher_score(matcher, trace.arguments[arg], resolver(matcher)))
    for path, matcher in target.result.items():
        value = _extract_path(trace.result, path)
        if value is _UNRESOLVED:
            scores.append(0.0)
            continue
        scores.append(_matcher_score(matcher, value, resolver(matcher)))
    return geometric_mean(scores)


def _trace_similarity(
    target: TraceTarget, traces: Iterable[ToolTrace], resolver: Resolver
) -> float:
    best = 0.0
    for trace in traces:
        if trace.tool_name != target.tool:
            continue
        if target.require_success and not trace.ok:
            continue
        best = max(best, _score_one_trace(target, trace, resolver))
    return best


def _matching_trace(
    target: TraceTarget, traces: Iterable[ToolTrace], resolver: Resolver
) -> ToolTrace | None:
    """The successful trace of the target's tool that the target scores
    highest (first on ties); bindings extract from this trace."""
    best: tuple[float, ToolTrace] | None = None
    for trace in traces:
        if trace.tool_name != target.tool or not trace.ok:
            continue
        score = _score_one_trace(target, trace, resolver)
        if best is None or score > best[0]:
            best = (score, trace)
    return best[1] if best else None


# --------------------------------------------------------------------------
# Constrained optimal matching
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TurnOption:
    """One placement option for a milestone during the search.

    `turn` pins an exact turn; `segment` stands for a run of turns with
    identical similarity (databases between changes) and resolves to its
    earliest feasible turn; `flexible` marks turn-independent similarity.
    """

    kind: str  # turn | segment | flexible
    turn: int = 0
    start: int = 0
    end: int = 0

    def resolve(self, lower_bound: int) -> int | None:
        if self.kind == "turn":
            return self.turn if self.turn >= lower_bound else None
        if self.kind == "segment":
            return max(self.start, lower_bound) if self.end >= lower_bound else None
        return lower_bound


@dataclass
class MatchResult:
    assignment: dict[str, int | None]
    per_milestone: dict[str, float]
    avgsim_plus: float
    score_plus: float
    score_minus: float | None = None
    final_score: float | None = None
    minefield_assignment: dict[str, int | None] = field(default_factory=dict)
    minefield_per_milestone: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "assignment": self.assignment,
            "per_milestone": self.per_milestone,
            "avgsim_plus": self.avgsim_plus,
            "score_plus": self.score_plus,
            "score_minus": self.score_minus,
            "final_score": self.final_score,
            "minefield_assignment": self.minefield_assignment,
            "minefield_per_milestone": self.minefield_per_milestone,
        }


def _db_segments(snapshots: Sequence[Snapshot], db: str) -> list[tuple[int, int]]:
    segments: list[list[int]] = []
    previous: Any = None
    for snapshot in snapshots:
        rows = snapshot.database_rows(db)
        if not segments or rows != previous:
            segments.append([snapshot.turn_index, snapshot.turn_index])
        else:
            segments[-1][1] = snapshot.turn_index
        previous = rows
    return [(s, e) for s, e in segments]


def candidate_options(
    dag: MilestoneDAG, snapshots: Sequence[Snapshot]
) -> dict[str, list[TurnOption]]:
    """Per-milestone placement options with a nonzero gate.

    Trace targets gate on tool-name matches, message targets on role
    matches, database targets on change segments, and guardrails are
    turn-flexible. A milestone referenced by a guardrail is instead offered
    every turn: the guardrail's value depends on the referenced milestone's
    exact turn even where that milestone itself scores zero, so gating it
    would lose assignments the exhaustive formulation allows.
    """
    guardrail_refs = {
        ref
        for milestone in dag.nodes
        if isinstance(milestone.target, GuardrailTarget)
        for ref in (milestone.target.ref_a, milestone.target.ref_b)
    }
    every_turn = [TurnOption("turn", turn=s.turn_index) for s in snapshots]
    options: dict[str, list[TurnOption]] = {}
    for milestone in dag.nodes:
        target = milestone.target
        if milestone.id in guardrail_refs and not isinstance(target, GuardrailTarget):
            options[milestone.id] = list(every_turn)
        elif isinstance(target, TraceTarget):
            turns = [
                s.turn_index
                for s in snapshots
                if any(t.tool_name == target.tool for t in s.traces_at_turn())
            ]
            options[milestone.id] = [TurnOption("turn", turn=t) for t in turns]
        elif isinstance(target, MessageTarget):
            turns = [
                s.turn_index
                for s in snapshots
                if s.message is not None
                and s.message.sender == target.sender
                and s.message.recipient == target.recipient
            ]
            options[milestone.id] = [TurnOption("turn", turn=t) for t in turns]
        elif isinstance(target, DbTarget):
            segments = _db_segments(snapshots, target.db)
            options[milestone.id] = [TurnOption("segment", start=s, end=e) for s, e in segments]
        else:
            options[milestone.id] = [TurnOption("flexible")] if snapshots else []
    return options


_PRUNE_SLACK = 1e-9


def match_milestones(
    dag: MilestoneDAG, snapshots: Sequence[Snapshot], strict: bool = False
) -> MatchResult:
    """Find the assignment of milestones to turns maximizing average
    similarity while every DAG edge's source turn precedes (<=) its target
    turn. Agrees exactly with exhaustive enumeration.

    `strict` switches the edge constraint to strictly-increasing turns (a
    sensitivity-analysis mode, solved by plain enumeration).
    """
    if strict:
        return exhaustive_match(dag, snapshots, strict=True)
    m = len(dag.nodes)
    if m == 0:
        return MatchResult(assignment={}, per_milestone={}, avgsim_plus=0.0, score_plus=0.0)
    order = dag.topological_order()
    ancestors = dag.ancestors()
    options = candidate_options(dag, snapshots)
    milestones = {milestone.id: milestone for milestone in dag.nodes}

    placement: dict[str, int | None] = {}
    sims: list[float] = []
    best_sum = -1.0
    best_placement: dict[str, int | None] = {mid: None for mid in order}

    def dfs(depth: int) -> None:
        nonlocal best_sum, best_placement
        if depth == m:
            total = math.fsum(sims)
            if total > best_sum:
                best_sum = total
                best_placement = dict(placement)
            return
        if math.fsum(sims) + (m - depth) <= best_sum - _PRUNE_SLACK:
            return
        mid = order[depth]
        lower_bound = 1
        for ancestor in ancestors[mid]:
            turn = placement.get(ancestor)
            if turn is not None and turn > lower_bound:
                lower_bound = turn
        seen: set[int] = set()
        for option in options[mid]:
            turn = option.resolve(lower_bound)
            if turn is None or turn in seen:
                continue
            seen.add(turn)
            placement[mid] = turn
            sims.append(milestone_similarity(milestones[mid], turn, snapshots, placement, dag))
            dfs(depth + 1)
            sims.pop()
            del placement[mid]
        placement[mid] = None
        sims.append(0.0)
        dfs(depth + 1)
        sims.pop()
        del placement[mid]

    dfs(0)
    per, avg = score_assignment(dag, snapshots, best_placement)
    return MatchResult(assignment=best_placement, per_milestone=per, avgsim_plus=avg, score_plus=avg)


def score_assignment(
    dag: MilestoneDAG, snapshots: Sequence[Snapshot], placement: dict[str, int | None]
) -> tuple[dict[str, float], float]:
    """Per-milestone similarities and their average for a full placement.

    Uses math.fsum so the average is independent of summation order.
    """
    per: dict[str, float] = {}
    for milestone in dag.nodes:
        turn = placement.get(milestone.id)
        per[milestone.id] = (
            0.0
            if turn is None
            else milestone_similarity(milestone, turn, snapshots, placement, dag)
        )
    if not dag.nodes:
        return per, 0.0
    return per, math.fsum(per.values()) / len(dag.nodes)


def exhaustive_match(
    dag: MilestoneDAG, snapshots: Sequence[Snapshot], strict: bool = False
) -> MatchResult:
    """Reference matcher enumerating every order-respecting assignment.

    Exponential in the milestone count; used for the strict-ordering
    sensitivity mode and as a cross-check on small instances.
    """
    m = len(dag.nodes)
    if m == 0 or not snapshots:
        placement = {milestone.id: None for milestone in dag.nodes}
        per, avg = score_assignment(dag, snapshots, placement)
        return MatchResult(assignment=placement, per_milestone=per, avgsim_plus=avg, score_plus=avg)
    ids = [milestone.id for milestone in dag.nodes]
    n = len(snapshots)
    best_score = -1.0
    best_placement: dict[str, int | None] = {mid: None for mid in ids}
    for combo in itertools.product(range(1, n + 1), repeat=m):
        placement = dict(zip(ids, combo))
        feasible = all(
            placement[u] < placement[v] if strict else placement[u] <= placement[v]
            for u, v in dag.edges
        )
        if not feasible:
            continue
        _, avg = score_assignment(dag, snapshots, placement)
        if avg > best_score:
            best_score = avg
            best_placement = dict(placement)
    per, avg = score_assignment(dag, snapshots, best_placement)
    return MatchResult(assignment=best_placement, per_milestone=per, avgsim_plus=avg, score_plus=avg)


def final_score(
    score_plus: float,
    minefield_dag: MilestoneDAG,
    snapshots: Sequence[Snapshot],
    strict: bool = False,
) -> tuple[float, MatchResult]:
    """Nullify the trajectory whenever any minefield similarity is positive."""
    minus = match_milestones(minefield_dag, snapshots, strict=strict)
    value = score_plus if minus.score_plus == 0.0 else 0.0
    return value, minus


def evaluate_trajectory(
    milestones: MilestoneDAG,
    minefields: MilestoneDAG,
    snapshots: Sequence[Snapshot],
    strict: bool = False,
) -> MatchResult:
    """Full scoring: milestone match, minefield match, and their combination."""
    plus = match_milestones(milestones, snapshots, strict=strict)
    value, minus = final_score(plus.score_plus, minefields, snapshots, strict=strict)
    plus.score_minus = minus.score_plus
    plus.final_score = value
    plus.minefield_assignment = minus.assignment
    plus.minefield_per_milestone = minus.per_milestone
    return plus
