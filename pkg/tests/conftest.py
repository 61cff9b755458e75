from __future__ import annotations

import socket
from pathlib import Path

import pytest

from toolsim.adapters import ScriptedAgent, ScriptedUser
from toolsim.catalog import build_registry
from toolsim.scenario import GoldenPlaybook, golden_path_for, load_scenario, load_suite
from toolsim.session import Session

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIOS_DIR = REPO_ROOT / "scenarios"
GOLDEN_DIR = REPO_ROOT / "golden"


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """The hermetic suite must never open a network connection."""

    def refuse(self, *args, **kwargs):
        raise RuntimeError("network access attempted inside the hermetic test suite")

    monkeypatch.setattr(socket.socket, "connect", refuse)


@pytest.fixture(scope="session")
def registry():
    return build_registry()


@pytest.fixture(scope="session")
def suite(registry):
    return load_suite(SCENARIOS_DIR, registry=registry)


def run_golden(scenario_id: str, registry, agent_steps=None, user_steps=None):
    """Replay a scenario's golden playbook (or an override) to completion."""
    scenario = load_scenario(SCENARIOS_DIR / f"{scenario_id}.json", registry=registry)
    playbook = GoldenPlaybook.load(golden_path_for(scenario_id, SCENARIOS_DIR))
    session = Session(
        scenario,
        agent=ScriptedAgent(agent_steps if agent_steps is not None else playbook.agent_steps),
        user=ScriptedUser(user_steps if user_steps is not None else playbook.user_steps),
        registry=registry,
    )
    session.run()
    return scenario, session
