"""Command-line entry point: ``acer train|eval|diagnose|sweep``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..envs import ConfigurationError, load_scenario
from .config import RunConfig, load_config
from .train import SWEEP_AXES, diagnose_priorities, evaluate, format_table, sweep, train


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _value_list(text: str) -> list[str]:
    return [x for x in text.replace(",", " ").split()]


def _config(path: str | None, **overrides) -> RunConfig:
    if path is None:
        return RunConfig().replace(**{k: v for k, v in overrides.items() if v is not None})
    return load_config(path, **overrides)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="acer", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one agent")
    t.add_argument("--config")
    t.add_argument("--seed", type=int)
    t.add_argument("--mode", choices=("uniform", "per", "acer"))
    t.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="evaluate a checkpoint with exploration off")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--scenario", required=True)
    e.add_argument("--episodes", type=int, default=100)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", help="directory for trajectory CSVs")

    d = sub.add_parser("diagnose", help="compare stored and recomputed priorities")
    d.add_argument("--config")
    d.add_argument("--steps", required=True, type=_int_list, help="comma-separated global steps")
    d.add_argument("--mode", choices=("per", "acer"))
    d.add_argument("--out", default="diagnose")

    s = sub.add_parser("sweep", help="grid over one parameter")
    s.add_argument("--config")
    s.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    s.add_argument("--values", required=True, type=_value_list)
    s.add_argument("--seeds", type=int, default=1)
    s.add_argument("--out", default="sweep")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "train":
            cfg = _config(args.config, seed=args.seed, mode=args.mode, out_dir=args.out)
            res = train(cfg)
            print(json.dumps(res.summary.as_dict()))
        elif args.command == "eval":
            env = load_scenario(args.scenario)
            res = evaluate(args.checkpoint, env, args.episodes, seed=args.seed,
                           trajectory_dir=args.out)
            print(json.dumps({"hit_rate": res.hit_rate, "episodes": args.episodes}))
        elif args.command == "diagnose":
            cfg = _config(args.config, mode=args.mode)
            res = diagnose_priorities(cfg, args.steps, out_dir=args.out)
            for step in res.steps:
                print(f"step {step}: mean |stored - oracle| = {res.mean_gap(step):.6g}")
        elif args.command == "sweep":
            rows = sweep(_config(args.config), args.axis, args.values, args.seeds, out_dir=args.out)
            sys.stdout.write(format_table(rows))
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
