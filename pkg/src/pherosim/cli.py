"""Command line front end.

Exit codes: 0 on success, 2 for configuration problems (bad flags, bad
config file, bad map), 1 for runtime failures.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import (
    Config,
    case1_from_config,
    case2_from_config,
    load_config,
    override,
    parse_config,
    serialize_config,
    world_from_config,
)
from .engine import RunLog, run_simulation
from .errors import ConfigurationError, SimulatorError
from .outputs import export_outputs
from .scenarios import Case1Scenario, Case2Scenario

SCENARIO_TAG = "# scenario: "


def _echo_text(cfg: Config, kind: str) -> str:
    # First line records which study produced the log so `render` can replay it.
    return SCENARIO_TAG + kind + "\n" + serialize_config(cfg)


def _load_base(path: str | None) -> Config:
    if path is None:
        return Config()
    return load_config(path)


def _prune(updates: dict) -> dict:
    return {k: v for k, v in updates.items() if v is not None}


def _run_and_export(scenario, world, cfg: Config, kind: str, out_dir: str, figures: bool) -> RunLog:
    log = run_simulation(
        scenario,
        world,
        cfg.sim.seed,
        snapshot_stride=cfg.sim.snapshot_stride,
        config_text=_echo_text(cfg, kind),
    )
    export_outputs(log, out_dir, figures=figures)
    return log


def cmd_run_case1(args) -> int:
    cfg = _load_base(args.config)
    cfg = override(
        cfg,
        sim=_prune({"seed": args.seed, "snapshot_stride": args.stride}),
        case1=_prune({"group": args.group, "trials": args.trials}),
    )
    world = world_from_config(cfg, "case1")
    scenario = Case1Scenario(case1_from_config(cfg), world)
    log = _run_and_export(scenario, world, cfg, "case1", args.out, not args.no_figures)
    food = set(cfg.case1.food_endpoints)
    arrivals = sum(1 for t in log.trials if t.endpoint is not None)
    at_food = sum(1 for t in log.trials if t.endpoint in food)
    print(
        "case1 group=%s seed=%d: %d/%d trials arrived (%d at food), output in %s"
        % (cfg.case1.group, cfg.sim.seed, arrivals, len(log.trials), at_food, args.out)
    )
    return 0


def cmd_run_case2(args) -> int:
    cfg = _load_base(args.config)
    cfg = override(
        cfg,
        sim=_prune({"seed": args.seed, "snapshot_stride": args.stride}),
        case2=_prune({"duration": args.duration}),
    )
    world = world_from_config(cfg, "case2")
    scenario = Case2Scenario(case2_from_config(cfg), world)
    log = _run_and_export(scenario, world, cfg, "case2", args.out, not args.no_figures)
    alarms = sum(1 for ev in log.events if ev.kind == "alarm")
    print(
        "case2 seed=%d: %.1f s simulated, %d alarm events, output in %s"
        % (cfg.sim.seed, cfg.case2.duration, alarms, args.out)
    )
    return 0


def cmd_render(args) -> int:
    echo_path = os.path.join(args.log, "config_echo.txt")
    with open(echo_path, "r", encoding="utf-8") as fh:
        text = fh.read()
    first = text.splitlines()[0] if text else ""
    if not first.startswith(SCENARIO_TAG):
        raise ConfigurationError("%s does not name its scenario" % echo_path)
    kind = first[len(SCENARIO_TAG) :].strip()
    cfg = override(parse_config(text), sim={"snapshot_stride": args.stride})
    world = world_from_config(cfg, kind)
    if kind == "case1":
        scenario = Case1Scenario(case1_from_config(cfg), world)
    elif kind == "case2":
        scenario = Case2Scenario(case2_from_config(cfg), world)
    else:
        raise ConfigurationError("unknown scenario %r in %s" % (kind, echo_path))
    log = _run_and_export(scenario, world, cfg, kind, args.log, figures=True)
    frames = len(log.snapshots)
    print("rendered %d frames at stride %d into %s" % (frames, args.stride, args.log))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pherosim",
        description="Deterministic pheromone-robotics simulator with two built-in studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="root random seed")
        p.add_argument("--config", default=None, help="config file path (defaults built in)")
        p.add_argument("--out", required=True, help="output directory for logs and figures")
        p.add_argument(
            "--stride", type=int, default=None, help="write a pixmap frame every K ticks"
        )
        p.add_argument(
            "--no-figures", action="store_true", help="skip matplotlib figure rendering"
        )

    p1 = sub.add_parser("run-case1", help="branching-trail foraging trials")
    p1.add_argument("--group", choices=("g1", "g2", "g3"), default=None)
    p1.add_argument("--trials", type=int, default=None)
    common(p1)
    p1.set_defaults(func=cmd_run_case1)

    p2 = sub.add_parser("run-case2", help="aggregation-versus-alarm run")
    p2.add_argument("--duration", type=float, default=None, help="simulated seconds")
    common(p2)
    p2.set_defaults(func=cmd_run_case2)

    p3 = sub.add_parser("render", help="replay a logged run and write pixmap frames")
    p3.add_argument("--log", required=True, help="output directory of a previous run")
    p3.add_argument("--stride", type=int, default=50, help="ticks between frames")
    p3.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FileNotFoundError) as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return 2
    except SimulatorError as exc:
        print("runtime error: %s" % exc, file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - last-resort guard
        print("internal error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
