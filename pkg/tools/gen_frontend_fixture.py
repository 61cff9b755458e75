"""Capture a real playground-service protocol walkthrough as a frontend test fixture.

Drives the send-message scenario as a human Agent against the live FastAPI app
(in-process), records every request/response and the full event stream, then
re-scores the persisted trajectory the same way the CLI does. Output:
frontend/test/fixtures/walkthrough.json
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from toolsim.catalog import build_registry  # noqa: E402
from toolsim.evaluation import evaluate_trajectory  # noqa: E402
from toolsim.scenario import load_scenario  # noqa: E402
from toolsim.service import create_app  # noqa: E402
from toolsim.trajectory import read_trajectory  # noqa: E402

SCENARIO_ID = "send_message_cellular_off"


def drain_events(client: TestClient, session_id: str) -> list[dict]:
    events = []
    with client.stream("GET", f"/sessions/{session_id}/events?once=true") as stream:
        current: dict = {}
        for line in stream.iter_lines():
            if line.startswith("id: "):
                current["id"] = int(line.removeprefix("id: "))
            elif line.startswith("event: "):
                current["type"] = line.removeprefix("event: ")
            elif line.startswith("data: "):
                current["data"] = json.loads(line.removeprefix("data: "))
            elif not line and current:
                events.append(current)
                current = {}
    return events


def main() -> None:
    registry = build_registry()
    out_dir = Path(tempfile.mkdtemp()) / "out"
    app = create_app(REPO / "scenarios", out_dir=out_dir, registry=registry)
    client = TestClient(app)

    created = client.post(
        "/sessions",
        json={"scenario_id": SCENARIO_ID, "role_config": {"agent": "human", "user": "golden"}},
    ).json()
    sid = created["session_id"]

    fixture: dict = {
        "scenario_id": SCENARIO_ID,
        "create": created,
        "initial_session": client.get(f"/sessions/{sid}").json(),
        "inputs": [],
    }

    def post_input(body: dict) -> None:
        response = client.post(f"/sessions/{sid}/input", json=body)
        fixture["inputs"].append(
            {
                "body": body,
                "status": response.status_code,
                "response": response.json(),
                "events": drain_events(client, sid),
                "session_after": client.get(f"/sessions/{sid}").json(),
            }
        )

    # Schema-invalid call: rejected with the same error an agent would see.
    post_input({"role": "agent",
                "tool_calls": [{"tool": "send_message", "arguments": {"phone_number": "+1"}}]})
    # Valid call.
    post_input({"role": "agent",
                "tool_calls": [{"tool": "search_contacts", "arguments": {"name": "John"}}]})
    # Dependency-violating call: executes and fails with ConnectionError.
    post_input({"role": "agent",
                "tool_calls": [{"tool": "send_message",
                                "arguments": {"phone_number": "+15551234567",
                                              "content": "How is it going"}}]})
    # Repair and complete the golden path.
    post_input({"role": "agent",
                "tool_calls": [{"tool": "set_cellular_service_status",
                                "arguments": {"on": True}}]})
    post_input({"role": "agent",
                "tool_calls": [{"tool": "send_message",
                                "arguments": {"phone_number": "+15551234567",
                                              "content": "How is it going"}}]})
    post_input({"role": "agent", "text": "I've sent the message to John."})

    fixture["final_evaluation"] = client.get(f"/sessions/{sid}/evaluation").json()
    fixture["final_session"] = client.get(f"/sessions/{sid}").json()

    trajectory = read_trajectory(out_dir / f"{sid}.trajectory.jsonl")
    scenario = load_scenario(REPO / "scenarios" / f"{SCENARIO_ID}.json", registry=registry)
    batch = evaluate_trajectory(scenario.milestones, scenario.minefields, trajectory.snapshots)
    fixture["cli_batch_score"] = batch.final_score

    target = REPO / "frontend" / "test" / "fixtures" / "walkthrough.json"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(fixture, indent=2) + "\n")
    print(f"wrote {target} (final={fixture['final_evaluation']['final_score']}, "
          f"cli={fixture['cli_batch_score']})")


if __name__ == "__main__":
    main()
