"""Command-line surface.

Subcommands: `run` executes a scenario suite and persists a results store,
`report` aggregates a store into score/turn tables, `validate` replays every
golden trajectory, `evaluate` re-scores one persisted trajectory, `list`
shows the suite, and `serve` starts the playground service.

Exit status: 0 success, 1 failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .catalog import build_registry
from .errors import ScenarioError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toolsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario suite and persist results")
    run.add_argument("--scenarios", required=True, help="directory of scenario JSON files")
    run.add_argument("--agent", default="golden", help="agent adapter: golden | llm")
    run.add_argument("--user", default="golden", help="user adapter: golden | llm")
    run.add_argument("--repeats", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", required=True, help="results store directory")
    run.add_argument("--parallel", type=int, default=1, help="concurrent sessions")
    run.add_argument("--llm-config", help="JSON file with endpoint/model/token_env")

    report = sub.add_parser("report", help="aggregate a results store")
    report.add_argument("--in", dest="store", required=True)
    report.add_argument("--format", choices=["table", "structured"], default="table")

    validate = sub.add_parser("validate", help="validate scenarios and golden trajectories")
    validate.add_argument("--scenarios", required=True)

    evaluate = sub.add_parser("evaluate", help="re-score one persisted trajectory")
    evaluate.add_argument("--scenarios", required=True)
    evaluate.add_argument("--trajectory", required=True)
    evaluate.add_argument("--format", choices=["table", "structured"], default="structured")

    lst = sub.add_parser("list", help="list scenarios in a suite")
    lst.add_argument("--scenarios", required=True)

    serve = sub.add_parser("serve", help="start the playground service")
    serve.add_argument("--scenarios", required=True)
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--out", default="playground-out", help="trajectory output directory")
    serve.add_argument("--ui", default="frontend/dist", help="static UI assets directory")

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    from .adapters import LlmConfig
    from .runner import run_suite

    llm_config = None
    if args.llm_config:
        llm_config = LlmConfig.from_dict(json.loads(Path(args.llm_config).read_text()))
    records = run_suite(
        scenarios_dir=args.scenarios,
        out_dir=args.out,
        agent_spec=args.agent,
        user_spec=args.user,
        repeats=args.repeats,
        seed=args.seed,
        parallel=args.parallel,
        llm_config=llm_config,
    )
    print(f"ran {len(records)} sessions -> {args.out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    from .runner import aggregate, format_report_table, read_store

    records = read_store(args.store)
    report = aggregate(records)
    if args.format == "structured":
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(format_report_table(report))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    from .scenario import validate_suite

    report = validate_suite(args.scenarios)
    for scenario_id in sorted(report.results):
        problems = report.results[scenario_id]
        status = "ok" if not problems else "FAIL"
        print(f"{scenario_id}: {status}")
        for problem in problems:
            print(f"  - {problem}")
    return 0 if report.ok else 1


def _cmd_evaluate(args: argparse.Namespace) -> int:
    from .evaluation import evaluate_trajectory
    from .scenario import load_suite
    from .trajectory import read_trajectory

    registry = build_registry()
    trajectory = read_trajectory(args.trajectory)
    suites = {s.id: s for s in load_suite(args.scenarios, registry=registry)}
    scenario = suites.get(trajectory.scenario_id)
    if scenario is None:
        print(f"scenario '{trajectory.scenario_id}' not found in {args.scenarios}", file=sys.stderr)
        return 1
    result = evaluate_trajectory(scenario.milestones, scenario.minefields, trajectory.snapshots)
    if args.format == "structured":
        print(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"final_score: {result.final_score}")
        for milestone_id, score in result.per_milestone.items():
            print(f"  {milestone_id}: {score} @ turn {result.assignment.get(milestone_id)}")
    return 0


def _cmd_list(args: argparse.Namespace) -> int:
    from .scenario import load_suite

    for scenario in load_suite(args.scenarios):
        categories = ",".join(scenario.categories)
        augmentation = scenario.augmentation
        extras = []
        if augmentation.distraction:
            extras.append(f"dt={augmentation.distraction}")
        for flag in ("tool_name", "tool_description", "arg_descriptions", "arg_types"):
            if getattr(augmentation, f"scramble_{flag}"):
                extras.append(f"scramble:{flag}")
        suffix = f" [{' '.join(extras)}]" if extras else ""
        print(f"{scenario.id}  ({categories}){suffix}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    static_dir = Path(args.ui) if Path(args.ui).exists() else None
    app = create_app(scenarios_dir=args.scenarios, out_dir=args.out, static_dir=static_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "report": _cmd_report,
    "validate": _cmd_validate,
    "evaluate": _cmd_evaluate,
    "list": _cmd_list,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ScenarioError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
