"""Command-line entry points: batch simulations, single plans, task
validation, plan-cache precomputation, and the HTTP service."""
from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .planner import CemConfig, PlanCache, _dump_result, plan
from .rules import validate_template
from .session import METHOD_NAIVE, METHOD_PCPBO, SessionConfig, metrics, run_session
from .settle import max_penetration
from .tasks import SHIPPED_TASKS, TaskDefinition, load_task
from .users import PreferenceModel, SimulatedUser, UncertainConfig

_METHOD_ALIASES = {"pcpbo": METHOD_PCPBO, "naive": METHOD_NAIVE,
                   METHOD_NAIVE: METHOD_NAIVE}


def load_users(source: str, task: TaskDefinition) -> list[dict]:
    """User fixtures from a YAML file or a shipped fixture name."""
    name = str(source)
    shipped = f"users_{name}.yaml"
    try:
        text = resources.files("platekit.data").joinpath(shipped).read_text()
    except FileNotFoundError:
        text = Path(source).read_text()
    data = yaml.safe_load(text)
    users = data["users"] if isinstance(data, dict) else data
    for u in users:
        if len(u["w_star"]) != task.n_w:
            raise ValueError(f"user {u} has wrong weight dimension for {task.task_id}")
    return users


def build_answerer(user: dict, task: TaskDefinition, rng: np.random.Generator,
                   mode: str) -> SimulatedUser:
    model = PreferenceModel(tuple(float(v) for v in user["w_star"]))
    uncertain = None
    if user.get("type", "ideal") == "uncertain":
        uncertain = UncertainConfig(
            t0=float(user.get("t0", 20.0)),
            t1=float(user.get("t1", 50.0)),
            skip_enabled=mode != "noskip",
        )
    return SimulatedUser(model, task.rule, uncertain=uncertain, rng=rng,
                         name=str(user.get("name", "")))


def cmd_simulate(args) -> int:
    task = load_task(args.task)
    users = load_users(args.users, task)
    cem = CemConfig(population=args.population, iterations=args.iterations,
                    seed=args.seed)
    cache = PlanCache(args.cache)
    methods = [_METHOD_ALIASES[m] for m in args.method]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{task.task_id}_simulate.csv"
    rows = []
    for u_idx, user in enumerate(users):
        w_star = tuple(float(v) for v in user["w_star"])
        uname = str(user.get("name", f"user{u_idx}"))
        for trial in range(args.trials):
            for method in methods:
                session_seed = args.seed * 100_000 + u_idx * 1_000 + trial
                cfg = SessionConfig(
                    method=method, n_queries=args.n_queries, n_init=args.n_init,
                    synthesis_mode=args.mode, seed=session_seed, cem=cem,
                )
                rng = np.random.default_rng(
                    np.random.SeedSequence((args.seed, u_idx, trial, 5))
                )
                answerer = build_answerer(user, task, rng, args.mode)
                result = run_session(task, cfg, answerer, plan_cache=cache)
                curve, _ = metrics(result, w_star)
                for k, round_ in enumerate(result.rounds):
                    rows.append(
                        (
                            task.task_id,
                            "naive" if method == METHOD_NAIVE else "pcpbo",
                            args.mode,
                            uname,
                            trial,
                            round_.query_index,
                            repr(curve[k]),
                            1 if round_.answer is None else 0,
                            session_seed,
                        )
                    )
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["task", "method", "mode", "user", "trial", "query_index",
             "distance", "skipped", "seed"]
        )
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {out_path}")
    return 0


def cmd_plan(args) -> int:
    task = load_task(args.task)
    w = tuple(float(v) for v in args.w.split(","))
    if len(w) != task.n_w:
        print(f"error: task {task.task_id} needs {task.n_w} weight components",
              file=sys.stderr)
        return 2
    cem = CemConfig(population=args.population, iterations=args.iterations,
                    seed=args.seed)
    result = plan(task.initial_state, w, task, cem)
    index = task.grid.index_of(w)
    print(_dump_result(result, index, args.seed))
    return 0


def cmd_precompute(args) -> int:
    task = load_task(args.task)
    cache = PlanCache(args.out)
    cem_base = CemConfig(population=args.population, iterations=args.iterations,
                         seed=args.seed)
    total = len(task.grid) * args.restarts
    done = 0
    for idx in range(len(task.grid)):
        for r in range(args.restarts):
            cache.get_or_plan(task, idx, replace(cem_base, seed=args.seed + r))
            done += 1
        if args.verbose and (idx + 1) % 50 == 0:
            print(f"{done}/{total} plans", file=sys.stderr)
    print(f"cached {done} plans under {Path(args.out) / task.task_id}")
    return 0


def cmd_validate_task(args) -> int:
    task = load_task(args.task)
    pen = max_penetration(task.initial_state)
    if pen > task.settle.penetration_tolerance:
        print(f"FAIL: fixed items interpenetrate by {pen:.2e} m")
        return 1
    try:
        report = validate_template(
            task.rule, task.grid, task.settle.tip_angle, task.plate_radius
        )
    except ValueError as e:
        print(f"FAIL: {e}")
        return 1
    print(
        f"OK: {task.task_id}: {report['grid_points']} grid targets valid, "
        f"min pairwise gap {report['min_gap']:.3g}"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(cache_root=args.cache, log_dir=args.log_dir, ui_dir=args.ui)
    host = args.host or os.environ.get("PLATEKIT_HOST", "127.0.0.1")
    port = args.port or int(os.environ.get("PLATEKIT_PORT", "8800"))
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platekit",
        description="Preference elicitation over physically settled arrangements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="batch simulated-user sessions -> CSV")
    p.add_argument("--task", required=True, help=f"task file or one of {SHIPPED_TASKS}")
    p.add_argument("--method", nargs="+", default=["pcpbo", "naive"],
                   choices=["pcpbo", "naive"])
    p.add_argument("--mode", default="synth", choices=["synth", "skip", "noskip"])
    p.add_argument("--users", required=True, help="user fixture YAML or shipped name")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--n-queries", type=int, default=50)
    p.add_argument("--n-init", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=48)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--cache", default=None, help="plan cache directory")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plan", help="single lower-level solve")
    p.add_argument("--task", required=True)
    p.add_argument("--w", required=True, help="comma-separated weights, e.g. 0.5,0.3")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=128)
    p.add_argument("--iterations", type=int, default=20)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("precompute", help="fill the plan cache for a task")
    p.add_argument("--task", required=True)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=64)
    p.add_argument("--iterations", type=int, default=12)
    p.add_argument("--out", required=True, help="cache directory")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("validate-task", help="check rule-map injectivity and predicates")
    p.add_argument("--task", required=True)
    p.set_defaults(func=cmd_validate_task)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--cache", default=None, help="plan cache directory")
    p.add_argument("--log-dir", default=None, help="session log directory")
    p.add_argument("--ui", default=None,
                   help="directory with the built browser UI to mount at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
