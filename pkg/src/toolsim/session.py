"""Session orchestration: one scenario driven turn by turn to an end state.

The loop is the recipient-speaks-next rule. Agent text goes to the User;
agent tool-call batches go to the Execution Environment, which executes them
under Murphy semantics and answers with the outcome batch. The User ends the
conversation through its private end_conversation tool, routed User -> Env
with the Agent unable to see it. One snapshot is taken per message.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .adapters import AgentReply, UserReply, assemble_user_context
from .bus import Message, Role, SessionConfig, execute_batch, next_speaker, turn_count, view_for
from .catalog import ToolRegistry
from .errors import AdapterFailure, NeedsHumanInput
from .registry import ToolCallRequest
from .scenario import Scenario
from .world import Snapshot, take_snapshot


@dataclass(frozen=True)
class StepOutcome:
    kind: str  # "message" | "awaiting" | "ended"
    message: Message | None = None
    role: str | None = None
    reason: str | None = None


@dataclass
class Trajectory:
    """The full session artifact: bus, per-turn snapshots, termination."""

    scenario_id: str
    seed: int
    agent_identity: str
    user_identity: str
    bus: list[Message]
    snapshots: list[Snapshot]
    termination_reason: str
    clock_timestamp: int = 0
    current_location: dict[str, float] = field(default_factory=dict)

    @property
    def turn_count(self) -> int:
        return turn_count(self.bus)


class Session:
    """One live scenario run; drive with `step()` or `run()`.

    `config` overrides the scenario's turn budget when given; the seed is
    recorded into the trajectory for provenance.
    """

    def __init__(
        self,
        scenario: Scenario,
        agent,
        user,
        registry: ToolRegistry,
        seed: int = 0,
        config: SessionConfig | None = None,
    ):
        self.scenario = scenario
        self.agent = agent
        self.user = user
        self.registry = registry
        self.config = config or SessionConfig(max_turns=scenario.max_turns, seed=seed)
        self.seed = self.config.seed
        self.state = scenario.build_world()
        self.presented = registry.present(
            scenario.necessary_tools, scenario.augmentation, scenario.withheld_tools
        )
        self.rendered_tools = self.presented.rendered()
        self.bus: list[Message] = []
        self.snapshots: list[Snapshot] = []
        self.termination_reason: str | None = None
        for message in assemble_user_context(scenario.user, scenario.opening_message):
            self._append(message)

    @property
    def ended(self) -> bool:
        return self.termination_reason is not None

    def _append(self, message: Message) -> Message:
        message.turn_index = len(self.bus) + 1
        self.bus.append(message)
        self.snapshots.append(take_snapshot(self.state, message.turn_index, message))
        return message

    def view(self, role: Role) -> list[Message]:
        return view_for(self.bus, role)

    def awaiting_role(self) -> Role | None:
        if self.ended:
            return None
        speaker = next_speaker(self.bus)
        if speaker == Role.AGENT and isinstance(self.agent, _HUMAN_KINDS):
            return Role.AGENT
        if speaker == Role.USER and isinstance(self.user, _HUMAN_KINDS):
            return Role.USER
        return None

    def step(self) -> StepOutcome:
        if self.ended:
            return StepOutcome(kind="ended", reason=self.termination_reason)
        if turn_count(self.bus) >= self.config.max_turns:
            self.termination_reason = "cutoff"
            return StepOutcome(kind="ended", reason=self.termination_reason)
        speaker = next_speaker(self.bus)
        try:
            if speaker == Role.AGENT:
                message = self._agent_turn()
            elif speaker == Role.USER:
                message = self._user_turn()
            else:
                message = self._environment_turn()
        except NeedsHumanInput as exc:
            return StepOutcome(kind="awaiting", role=exc.role)
        except AdapterFailure as exc:
            self.termination_reason = f"aborted: {exc}"
            return StepOutcome(kind="ended", reason=self.termination_reason)
        return StepOutcome(kind="message", message=message)

    def _agent_turn(self) -> Message:
        reply: AgentReply = self.agent.step(self.view(Role.AGENT), self.rendered_tools)
        if reply.calls is not None:
            calls = [
                ToolCallRequest(
                    call_id=call.call_id,
                    tool_name=call.tool_name,
                    arguments=call.arguments,
                    batch_position=position,
                )
                for position, call in enumerate(reply.calls)
            ]
            return self._append(
                Message(
                    sender=Role.AGENT,
                    recipient=Role.EXECUTION_ENVIRONMENT,
                    tool_calls=calls,
                )
            )
        return self._append(
            Message(sender=Role.AGENT, recipient=Role.USER, text=reply.text or "")
        )

    def _user_turn(self) -> Message:
        reply: UserReply = self.user.step(self.view(Role.USER))
        if reply.end:
            call = ToolCallRequest(call_id="end", tool_name="end_conversation", arguments={})
            return self._append(
                Message(
                    sender=Role.USER,
                    recipient=Role.EXECUTION_ENVIRONMENT,
                    tool_calls=[call],
                    visible_to=frozenset({Role.USER, Role.EXECUTION_ENVIRONMENT}),
                )
            )
        return self._append(Message(sender=Role.USER, recipient=Role.AGENT, text=reply.text or ""))

    def _environment_turn(self) -> Message:
        request = self.bus[-1]
        if request.tool_calls is None:
            raise AdapterFailure("environment addressed without a tool-call batch")
        if request.sender == Role.USER:
            # The user's private end_conversation: executed, traced, Agent-unseen.
            outcomes = execute_batch(
                request.tool_calls,
                self.state,
                self.registry,
                presented=None,
                turn_index=len(self.bus) + 1,
            )
            message = self._append(
                Message(
                    sender=Role.EXECUTION_ENVIRONMENT,
                    recipient=Role.USER,
                    tool_results=outcomes,
                    visible_to=frozenset({Role.USER, Role.EXECUTION_ENVIRONMENT}),
                )
            )
            self.termination_reason = "end_conversation"
            return message
        outcomes = execute_batch(
            request.tool_calls,
            self.state,
            self.registry,
            presented=self.presented,
            turn_index=len(self.bus) + 1,
        )
        return self._append(
            Message(
                sender=Role.EXECUTION_ENVIRONMENT,
                recipient=Role.AGENT,
                tool_results=outcomes,
            )
        )

    def run(self) -> Trajectory:
        while not self.ended:
            outcome = self.step()
            if outcome.kind == "awaiting":
                raise RuntimeError(
                    f"session is awaiting input for role '{outcome.role}'; "
                    "human-bridged sessions must be driven step by step"
                )
        return self.trajectory()

    def trajectory(self) -> Trajectory:
        return Trajectory(
            scenario_id=self.scenario.id,
            seed=self.seed,
            agent_identity=getattr(self.agent, "identity", "unknown"),
            user_identity=getattr(self.user, "identity", "unknown"),
            bus=list(self.bus),
            snapshots=list(self.snapshots),
            termination_reason=self.termination_reason or "incomplete",
            clock_timestamp=self.state.clock_timestamp,
            current_location={
                "latitude": self.state.current_latitude,
                "longitude": self.state.current_longitude,
            },
        )


def run_session(scenario: Scenario, agent, user, registry: ToolRegistry, seed: int = 0) -> Trajectory:
    """Run a scenario to its end state with non-interactive adapters."""
    return Session(scenario, agent, user, registry, seed=seed).run()


def _human_kinds() -> tuple[type, ...]:
    from .adapters import HumanBridgeAgent, HumanBridgeUser

    return (HumanBridgeAgent, HumanBridgeUser)


_HUMAN_KINDS = _human_kinds()
