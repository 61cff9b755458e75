"""HTTP session API for the playground UI.

Creates live sessions from scenarios with a human occupying the Agent or
User role, streams messages / world-state diffs / milestone-score updates
over server-sent events, and serves incremental evaluation so the UI can
mirror the final batch score while the session is still running. Visibility
is enforced server side: every view in a payload is produced by the same
sub-view filter the orchestrator uses.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse

from .adapters import AgentReply, HumanBridgeAgent, HumanBridgeUser, ScriptedAgent, ScriptedUser, UserReply
from .bus import Role, view_for
from .catalog import ToolRegistry, build_registry
from .errors import ToolArgumentError
from .evaluation import MatchResult, evaluate_trajectory
from .registry import ToolCallRequest, validate_arguments
from .scenario import GoldenPlaybook, Scenario, golden_path_for, load_suite
from .session import Session
from .trajectory import read_trajectory, write_trajectory
from .world import diff_snapshots

SERVICE_SCHEMA_VERSION = 1


@dataclass
class LiveSession:
    session_id: str
    session: Session | None
    role_config: dict[str, str]
    events: list[dict[str, Any]] = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock)
    condition: threading.Condition = field(default_factory=threading.Condition)
    status: dict[str, Any] = field(default_factory=dict)
    replay_snapshots: list = field(default_factory=list)
    replay_bus: list = field(default_factory=list)
    scenario: Scenario | None = None

    def snapshots(self):
        return self.session.snapshots if self.session is not None else self.replay_snapshots

    def bus(self):
        return self.session.bus if self.session is not None else self.replay_bus


def _evaluation_payload(scenario: Scenario, result: MatchResult) -> dict[str, Any]:
    def nodes(dag):
        return [
            {
                "id": m.id,
                "kind": type(m.target).__name__.removesuffix("Target").lower(),
                "description": m.description,
            }
            for m in dag.nodes
        ]

    return {
        "schema_version": SERVICE_SCHEMA_VERSION,
        "milestones": nodes(scenario.milestones),
        "edges": [[u, v] for u, v in scenario.milestones.edges],
        "minefields": nodes(scenario.minefields),
        "minefield_edges": [[u, v] for u, v in scenario.minefields.edges],
        "assignment": result.assignment,
        "per_milestone": result.per_milestone,
        "minefield_assignment": result.minefield_assignment,
        "minefield_per_milestone": result.minefield_per_milestone,
        "score_plus": result.score_plus,
        "score_minus": result.score_minus,
        "final_score": result.final_score,
    }


def create_app(
    scenarios_dir: str | Path,
    out_dir: str | Path = "playground-out",
    registry: ToolRegistry | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    registry = registry or build_registry()
    scenarios_dir = Path(scenarios_dir)
    out_dir = Path(out_dir)
    scenarios = {s.id: s for s in load_suite(scenarios_dir, registry=registry)}
    sessions: dict[str, LiveSession] = {}

    app = FastAPI(title="toolsim playground", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def incremental_evaluation(live: LiveSession) -> dict[str, Any]:
        assert live.scenario is not None
        result = evaluate_trajectory(
            live.scenario.milestones, live.scenario.minefields, list(live.snapshots())
        )
        return _evaluation_payload(live.scenario, result)

    def push_event(live: LiveSession, kind: str, data: dict[str, Any]) -> None:
        with live.condition:
            live.events.append({"id": len(live.events), "type": kind, "data": data})
            live.condition.notify_all()

    def refresh_status(live: LiveSession) -> None:
        session = live.session
        assert session is not None
        if session.ended:
            live.status = {"state": "ended", "reason": session.termination_reason}
        else:
            awaiting = session.awaiting_role()
            live.status = {
                "state": "awaiting",
                "role": awaiting.value if awaiting else None,
            }

    def persist(live: LiveSession) -> None:
        session = live.session
        if session is None or not session.ended:
            return
        out_dir.mkdir(parents=True, exist_ok=True)
        write_trajectory(session.trajectory(), out_dir / f"{live.session_id}.trajectory.jsonl")

    def advance(live: LiveSession) -> None:
        """Drive the session until it needs human input or ends, emitting one
        message / snapshot-diff / evaluation event triple per new message."""
        session = live.session
        assert session is not None
        while True:
            outcome = session.step()
            if outcome.kind == "message":
                snapshots = session.snapshots
                previous = snapshots[-2] if len(snapshots) > 1 else None
                push_event(live, "message", outcome.message.to_dict())
                push_event(live, "snapshot_diff", diff_snapshots(previous, snapshots[-1]))
                push_event(live, "evaluation", incremental_evaluation(live))
                continue
            if outcome.kind == "awaiting":
                break
            # ended
            push_event(live, "status", {"state": "ended", "reason": outcome.reason})
            persist(live)
            break
        refresh_status(live)

    def get_live(session_id: str) -> LiveSession:
        live = sessions.get(session_id)
        if live is None:
            raise HTTPException(status_code=404, detail=f"unknown session '{session_id}'")
        return live

    @app.get("/scenarios")
    def list_scenarios() -> dict[str, Any]:
        return {
            "schema_version": SERVICE_SCHEMA_VERSION,
            "scenarios": [
                {
                    "id": s.id,
                    "categories": s.categories,
                    "description": s.description,
                    "opening_message": s.opening_message,
                    "max_turns": s.max_turns,
                }
                for s in scenarios.values()
            ],
        }

    def build_adapter(kind: str, role: str, scenario: Scenario):
        if kind == "human":
            return HumanBridgeAgent() if role == "agent" else HumanBridgeUser()
        if kind == "golden":
            playbook = GoldenPlaybook.load(golden_path_for(scenario.id, scenarios_dir))
            if role == "agent":
                return ScriptedAgent(playbook.agent_steps)
            return ScriptedUser(playbook.user_steps)
        raise HTTPException(status_code=422, detail=f"unknown adapter kind '{kind}'")

    @app.post("/sessions")
    def create_session(body: dict[str, Any]) -> dict[str, Any]:
        scenario_id = body.get("scenario_id")
        if scenario_id not in scenarios:
            raise HTTPException(status_code=404, detail=f"unknown scenario '{scenario_id}'")
        scenario = scenarios[scenario_id]
        role_config = {"agent": "human", "user": "golden"}
        role_config.update(body.get("role_config", {}))
        session = Session(
            scenario,
            agent=build_adapter(role_config["agent"], "agent", scenario),
            user=build_adapter(role_config["user"], "user", scenario),
            registry=registry,
        )
        live = LiveSession(
            session_id=uuid.uuid4().hex[:12],
            session=session,
            role_config=role_config,
            scenario=scenario,
        )
        sessions[live.session_id] = live
        with live.lock:
            for snapshot in session.snapshots:
                push_event(live, "message", snapshot.message.to_dict())
            push_event(live, "evaluation", incremental_evaluation(live))
            advance(live)
        return {"session_id": live.session_id, "status": live.status}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        live = get_live(session_id)
        with live.lock:
            bus = list(live.bus())
            snapshots = list(live.snapshots())
            previous = snapshots[-2] if len(snapshots) > 1 else None
            latest_diff = diff_snapshots(previous, snapshots[-1]) if snapshots else None
            tools = (
                live.session.rendered_tools
                if live.session is not None
                else []
            )
            return {
                "schema_version": SERVICE_SCHEMA_VERSION,
                "session_id": session_id,
                "scenario_id": live.scenario.id if live.scenario else None,
                "status": live.status,
                "role_config": live.role_config,
                "tools": tools,
                "views": {
                    role.value: [m.to_dict() for m in view_for(bus, role)] for role in Role
                },
                "latest_diff": latest_diff,
                "turn_count": sum(1 for m in bus if not m.context),
            }

    @app.post("/sessions/{session_id}/input")
    def post_input(session_id: str, body: dict[str, Any]) -> dict[str, Any]:
        live = get_live(session_id)
        with live.lock:
            session = live.session
            if session is None:
                raise HTTPException(status_code=409, detail="replay sessions accept no input")
            role = body.get("role")
            awaiting = session.awaiting_role()
            if session.ended or awaiting is None or awaiting.value != role:
                raise HTTPException(
                    status_code=409,
                    detail=f"session is not awaiting input for role '{role}'",
                )
            if role == "agent":
                if "tool_calls" in body:
                    calls = _validated_calls(session, body["tool_calls"])
                    session.agent.push(AgentReply(calls=calls))
                else:
                    session.agent.push(AgentReply(text=str(body.get("text", ""))))
            else:
                if body.get("end"):
                    session.user.push(UserReply(end=True))
                else:
                    session.user.push(UserReply(text=str(body.get("text", ""))))
            advance(live)
            return {"status": live.status}

    def _validated_calls(session: Session, raw_calls: list[dict[str, Any]]) -> list[ToolCallRequest]:
        """Pre-flight the human's tool calls; a schema-invalid call is
        rejected with the same error text an agent would see."""
        calls = []
        for position, raw in enumerate(raw_calls):
            name = raw.get("tool_name") or raw.get("tool") or ""
            original = session.presented.original_name(name)
            if original is None:
                raise HTTPException(
                    status_code=422,
                    detail={"error_kind": "KeyError", "message": f"tool '{name}' is not available"},
                )
            schema = session.registry.schema(original)
            try:
                validate_arguments(schema, dict(raw.get("arguments", {})))
            except ToolArgumentError as exc:
                raise HTTPException(
                    status_code=422,
                    detail={"error_kind": exc.kind, "message": str(exc)},
                )
            calls.append(
                ToolCallRequest(
                    call_id=raw.get("call_id", f"human-{position}"),
                    tool_name=name,
                    arguments=dict(raw.get("arguments", {})),
                    batch_position=position,
                )
            )
        return calls

    @app.get("/sessions/{session_id}/evaluation")
    def get_evaluation(session_id: str) -> dict[str, Any]:
        live = get_live(session_id)
        with live.lock:
            if not live.snapshots():
                raise HTTPException(status_code=409, detail="session has no snapshots yet")
            return incremental_evaluation(live)

    @app.post("/sessions/{session_id}/end")
    def end_session(session_id: str) -> dict[str, Any]:
        live = get_live(session_id)
        with live.lock:
            session = live.session
            if session is not None and not session.ended:
                session.termination_reason = "forced"
                push_event(live, "status", {"state": "ended", "reason": "forced"})
                persist(live)
                refresh_status(live)
            return {"status": live.status}

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, request: Request, after: int = -1, once: bool = False):
        live = get_live(session_id)

        def stream() -> Iterator[str]:
            cursor = after + 1
            while True:
                with live.condition:
                    pending = live.events[cursor:]
                for event in pending:
                    cursor = event["id"] + 1
                    payload = json.dumps(event["data"], sort_keys=True)
                    yield f"id: {event['id']}\nevent: {event['type']}\ndata: {payload}\n\n"
                if once:
                    return
                ended = live.status.get("state") == "ended"
                with live.condition:
                    if len(live.events) > cursor:
                        continue
                    if ended:
                        return
                    live.condition.wait(timeout=0.5)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/trajectories")
    def list_trajectories() -> dict[str, Any]:
        files = sorted(p.name for p in out_dir.glob("*.trajectory.jsonl")) if out_dir.exists() else []
        return {"schema_version": SERVICE_SCHEMA_VERSION, "files": files}

    @app.post("/sessions/replay")
    def replay_session(body: dict[str, Any]) -> dict[str, Any]:
        name = body.get("file", "")
        path = out_dir / name
        if not path.exists() or not name.endswith(".trajectory.jsonl"):
            raise HTTPException(status_code=404, detail=f"unknown trajectory '{name}'")
        trajectory = read_trajectory(path)
        scenario = scenarios.get(trajectory.scenario_id)
        if scenario is None:
            raise HTTPException(
                status_code=422,
                detail=f"trajectory references unknown scenario '{trajectory.scenario_id}'",
            )
        live = LiveSession(
            session_id=uuid.uuid4().hex[:12],
            session=None,
            role_config={"agent": "replay", "user": "replay"},
            scenario=scenario,
            replay_snapshots=list(trajectory.snapshots),
            replay_bus=list(trajectory.bus),
        )
        live.status = {"state": "ended", "reason": trajectory.termination_reason}
        sessions[live.session_id] = live
        with live.lock:
            previous = None
            for snapshot in trajectory.snapshots:
                push_event(live, "message", snapshot.message.to_dict())
                push_event(live, "snapshot_diff", diff_snapshots(previous, snapshot))
                previous = snapshot
            push_event(live, "evaluation", incremental_evaluation(live))
            push_event(
                live, "status", {"state": "ended", "reason": trajectory.termination_reason}
            )
        return {"session_id": live.session_id, "status": live.status}

    if static_dir is not None and Path(static_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
