"""Batch execution, results store, and report aggregation.

The results store is a directory: `runs.jsonl` (one deterministic record per
(scenario, repeat)), `index.json`, and `trajectories/`. Wall-clock timings
go to a `timings.jsonl` sidecar kept out of the canonical store so that
fixed-seed scripted runs are byte-reproducible end to end.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from .adapters import LlmAgent, LlmConfig, LlmUser, ScriptedAgent, ScriptedUser
from .catalog import ToolRegistry, build_registry
from .evaluation import MatchResult, evaluate_trajectory
from .scenario import GoldenPlaybook, Scenario, golden_path_for, load_suite
from .session import Session, Trajectory
from .trajectory import dumps_canonical, write_trajectory

#: Report column orders mirror the score and turn-count tables.
CATEGORY_COLUMNS = ("STC", "MTC", "SUT", "MUT", "SD", "C", "II")
AUGMENTATION_COLUMNS = ("0 DT", "3 DT", "10 DT", "AT", "TNS", "TDS", "ADS", "ATS")


@dataclass
class RunRecord:
    scenario_id: str
    categories: list[str]
    augmentation: dict[str, Any]
    agent: str
    user: str
    seed: int
    repeat: int
    trajectory_file: str
    match: MatchResult
    turn_count: int
    termination_reason: str
    wall_time_seconds: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        # wall_time_seconds deliberately excluded: it goes to the sidecar.
        return {
            "scenario_id": self.scenario_id,
            "categories": self.categories,
            "augmentation": self.augmentation,
            "agent": self.agent,
            "user": self.user,
            "seed": self.seed,
            "repeat": self.repeat,
            "trajectory_file": self.trajectory_file,
            "match": self.match.to_dict(),
            "turn_count": self.turn_count,
            "termination_reason": self.termination_reason,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunRecord":
        match = MatchResult(
            assignment=data["match"]["assignment"],
            per_milestone=data["match"]["per_milestone"],
            avgsim_plus=data["match"]["avgsim_plus"],
            score_plus=data["match"]["score_plus"],
            score_minus=data["match"].get("score_minus"),
            final_score=data["match"].get("final_score"),
            minefield_assignment=data["match"].get("minefield_assignment", {}),
            minefield_per_milestone=data["match"].get("minefield_per_milestone", {}),
        )
        return cls(
            scenario_id=data["scenario_id"],
            categories=list(data["categories"]),
            augmentation=dict(data["augmentation"]),
            agent=data["agent"],
            user=data["user"],
            seed=data["seed"],
            repeat=data["repeat"],
            trajectory_file=data["trajectory_file"],
            match=match,
            turn_count=data["turn_count"],
            termination_reason=data["termination_reason"],
        )


def _adapter_factories(
    spec: str, llm_config: LlmConfig | None
) -> tuple[Callable[[Scenario, Path], Any], Callable[[Scenario, Path], Any]]:
    """Build per-session (agent, user) factories from a CLI adapter spec.

    `golden` replays the scenario's golden playbook; `llm` speaks to the
    configured chat endpoint.
    """

    def golden_agent(scenario: Scenario, scenarios_dir: Path) -> ScriptedAgent:
        playbook = GoldenPlaybook.load(golden_path_for(scenario.id, scenarios_dir))
        return ScriptedAgent(playbook.agent_steps)

    def golden_user(scenario: Scenario, scenarios_dir: Path) -> ScriptedUser:
        playbook = GoldenPlaybook.load(golden_path_for(scenario.id, scenarios_dir))
        return ScriptedUser(playbook.user_steps)

    if spec == "golden":
        return golden_agent, golden_user
    if spec == "llm":
        if llm_config is None:
            raise ValueError("adapter spec 'llm' requires --llm-config")
        return (
            lambda scenario, _dir: LlmAgent(llm_config),
            lambda scenario, _dir: LlmUser(llm_config),
        )
    raise ValueError(f"unknown adapter spec '{spec}' (expected 'golden' or 'llm')")


def run_suite(
    scenarios_dir: str | Path,
    out_dir: str | Path,
    agent_spec: str = "golden",
    user_spec: str = "golden",
    repeats: int = 1,
    seed: int = 0,
    parallel: int = 1,
    registry: ToolRegistry | None = None,
    llm_config: LlmConfig | None = None,
) -> list[RunRecord]:
    """Run every scenario `repeats` times and persist the results store."""
    scenarios_dir = Path(scenarios_dir)
    out_dir = Path(out_dir)
    registry = registry or build_registry()
    scenarios = load_suite(scenarios_dir, registry=registry)
    agent_factory, _ = _adapter_factories(agent_spec, llm_config)
    _, user_factory = _adapter_factories(user_spec, llm_config)

    jobs = [(scenario, repeat) for scenario in scenarios for repeat in range(repeats)]

    def execute(job: tuple[Scenario, int]) -> tuple[RunRecord, Trajectory]:
        scenario, repeat = job
        started = time.monotonic()
        session = Session(
            scenario,
            agent=agent_factory(scenario, scenarios_dir),
            user=user_factory(scenario, scenarios_dir),
            registry=registry,
            seed=seed + repeat,
        )
        trajectory = session.run()
        match = evaluate_trajectory(scenario.milestones, scenario.minefields, session.snapshots)
        record = RunRecord(
            scenario_id=scenario.id,
            categories=list(scenario.categories),
            augmentation=scenario.augmentation.to_dict(),
            agent=trajectory.agent_identity,
            user=trajectory.user_identity,
            seed=seed + repeat,
            repeat=repeat,
            trajectory_file=f"trajectories/{scenario.id}__r{repeat}.trajectory.jsonl",
            match=match,
            turn_count=trajectory.turn_count,
            termination_reason=trajectory.termination_reason,
            wall_time_seconds=time.monotonic() - started,
        )
        return record, trajectory

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(execute, jobs))
    else:
        outcomes = [execute(job) for job in jobs]

    # Single serialized writer; sorted order keeps the store deterministic
    # regardless of execution interleaving.
    outcomes.sort(key=lambda pair: (pair[0].scenario_id, pair[0].repeat))
    write_store(out_dir, outcomes)
    return [record for record, _ in outcomes]


def write_store(out_dir: Path, outcomes: Sequence[tuple[RunRecord, Trajectory]]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trajectories").mkdir(exist_ok=True)
    runs_lines = []
    timing_lines = []
    for record, trajectory in outcomes:
        write_trajectory(trajectory, out_dir / record.trajectory_file)
        runs_lines.append(dumps_canonical(record.to_dict()))
        timing_lines.append(
            dumps_canonical(
                {
                    "scenario_id": record.scenario_id,
                    "repeat": record.repeat,
                    "wall_time_seconds": record.wall_time_seconds,
                }
            )
        )
    (out_dir / "runs.jsonl").write_text("\n".join(runs_lines) + "\n")
    (out_dir / "timings.jsonl").write_text("\n".join(timing_lines) + "\n")
    index = {
        "schema_version": 1,
        "record_count": len(outcomes),
        "files": sorted(["runs.jsonl"] + [record.trajectory_file for record, _ in outcomes]),
    }
    (out_dir / "index.json").write_text(dumps_canonical(index) + "\n")


def read_store(out_dir: str | Path) -> list[RunRecord]:
    out_dir = Path(out_dir)
    records = []
    for line in (out_dir / "runs.jsonl").read_text().splitlines():
        if line.strip():
            records.append(RunRecord.from_dict(json.loads(line)))
    return records


# --------------------------------------------------------------------------
# Aggregation
# --------------------------------------------------------------------------


def _augmentation_columns(augmentation: dict[str, Any]) -> list[str]:
    columns = {0: "0 DT", 3: "3 DT", 10: "10 DT", "all": "AT"}
    result = [columns[augmentation.get("distraction", 0)]]
    if augmentation.get("scramble_tool_name"):
        result.append("TNS")
    if augmentation.get("scramble_tool_description"):
        result.append("TDS")
    if augmentation.get("scramble_arg_descriptions"):
        result.append("ADS")
    if augmentation.get("scramble_arg_types"):
        result.append("ATS")
    return result


def _mean(values: Sequence[float]) -> float | None:
    if not values:
        return None
    return math.fsum(values) / len(values)


@dataclass
class Report:
    """Score and turn-count tables broken down by category and augmentation."""

    record_count: int
    avg_score: float | None
    avg_turn_count: float | None
    score_by_category: dict[str, float | None]
    score_by_augmentation: dict[str, float | None]
    turns_by_category: dict[str, float | None]
    turns_by_augmentation: dict[str, float | None]

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "record_count": self.record_count,
            "avg_score": self.avg_score,
            "avg_turn_count": self.avg_turn_count,
            "score_by_category": self.score_by_category,
            "score_by_augmentation": self.score_by_augmentation,
            "turns_by_category": self.turns_by_category,
            "turns_by_augmentation": self.turns_by_augmentation,
        }


def aggregate(records: Sequence[RunRecord]) -> Report:
    """Mean final score (x100) and mean turn count per column; a record
    contributes to every category it carries and to each augmentation column
    its config switches on."""
    if not records:
        raise ValueError("cannot aggregate an empty record set")
    scores_by_cat: dict[str, list[float]] = {c: [] for c in CATEGORY_COLUMNS}
    scores_by_aug: dict[str, list[float]] = {c: [] for c in AUGMENTATION_COLUMNS}
    turns_by_cat: dict[str, list[float]] = {c: [] for c in CATEGORY_COLUMNS}
    turns_by_aug: dict[str, list[float]] = {c: [] for c in AUGMENTATION_COLUMNS}
    all_scores: list[float] = []
    all_turns: list[float] = []
    for record in records:
        score = (record.match.final_score or 0.0) * 100.0
        turns = float(record.turn_count)
        all_scores.append(score)
        all_turns.append(turns)
        for category in record.categories:
            scores_by_cat[category].append(score)
            turns_by_cat[category].append(turns)
        for column in _augmentation_columns(record.augmentation):
            scores_by_aug[column].append(score)
            turns_by_aug[column].append(turns)
    return Report(
        record_count=len(records),
        avg_score=_mean(all_scores),
        avg_turn_count=_mean(all_turns),
        score_by_category={c: _mean(v) for c, v in scores_by_cat.items()},
        score_by_augmentation={c: _mean(v) for c, v in scores_by_aug.items()},
        turns_by_category={c: _mean(v) for c, v in turns_by_cat.items()},
        turns_by_augmentation={c: _mean(v) for c, v in turns_by_aug.items()},
    )


def format_report_table(report: Report) -> str:
    def fmt(value: float | None) -> str:
        return "-" if value is None else f"{value:.1f}"

    lines = []
    header = ["metric", "avg"] + list(CATEGORY_COLUMNS) + list(AUGMENTATION_COLUMNS)
    rows = [
        ["score"]
        + [fmt(report.avg_score)]
        + [fmt(report.score_by_category[c]) for c in CATEGORY_COLUMNS]
        + [fmt(report.score_by_augmentation[c]) for c in AUGMENTATION_COLUMNS],
        ["turns"]
        + [fmt(report.avg_turn_count)]
        + [fmt(report.turns_by_category[c]) for c in CATEGORY_COLUMNS]
        + [fmt(report.turns_by_augmentation[c]) for c in AUGMENTATION_COLUMNS],
    ]
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    lines.append("  ".join(h.rjust(widths[i]) for i, h in enumerate(header)))
    for row in rows:
        lines.append("  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)))
    lines.append(f"records: {report.record_count}")
    return "\n".join(lines)
