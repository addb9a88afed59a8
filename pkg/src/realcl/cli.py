"""Command-line entry points: synth, run, validate, report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import runner, scenario
from .embedstore import SynthSpec, generate_synthetic, load_store, save_store
from .memory import MemoryPolicy
from .optim import OptimConfig, Strategy
from .scenario import GENERATORS, StreamKind

SCENARIO_ALIASES = {
    "unreal": StreamKind.UNREALISTIC,
    "unrealistic": StreamKind.UNREALISTIC,
    "semireal": StreamKind.SEMIREAL,
    "real": StreamKind.REAL,
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file mirroring RunConfig")
    p.add_argument("--store", help="path to a CLEB-v1 embedding store")
    p.add_argument("--scenario", choices=sorted(SCENARIO_ALIASES))
    p.add_argument("--tasks", type=int, help="number of tasks K")
    p.add_argument("--memory", type=int, help="memory buffer capacity M")
    p.add_argument("--policy", choices=[p.value for p in MemoryPolicy])
    p.add_argument("--strategy", choices=[s.value for s in Strategy])
    p.add_argument("--epochs", type=int, help="epochs per task")
    p.add_argument("--seeds", type=int, nargs="+", help="run seeds")
    p.add_argument("--out", help="output directory")


def _build_config(args) -> runner.RunConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text())
    if args.store:
        base["store_path"] = args.store
    if args.scenario:
        base["scenario"] = SCENARIO_ALIASES[args.scenario].value
    if args.tasks is not None:
        base["num_tasks"] = args.tasks
    if args.memory is not None:
        base["memory_capacity"] = args.memory
    if args.policy:
        base["memory_policy"] = args.policy
    if args.strategy:
        base["strategy"] = args.strategy
    if args.epochs is not None:
        opt = dict(base.get("optim", {}))
        opt["epochs_per_task"] = args.epochs
        base["optim"] = opt
    if args.seeds:
        base["seeds"] = args.seeds
    if args.out:
        base["output_dir"] = args.out
    if "store_path" not in base:
        raise SystemExit("a store is required (--store or config file)")
    return runner.RunConfig.from_dict(base)


def cmd_synth(args) -> int:
    spec = SynthSpec(
        num_classes=args.classes,
        dim=args.dim,
        train_per_class=args.train_per_class,
        test_per_class=args.test_per_class,
        mean_radius=args.mean_radius,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    n = save_store(generate_synthetic(spec), args.out)
    print(f"wrote {args.out} ({n} bytes)")
    return 0


def cmd_run(args) -> int:
    config = _build_config(args)
    report = runner.run_experiment(config)
    agg = report["aggregate"]
    for name in ("last_task_accuracy", "average_accuracy",
                 "avg_global_forgetting", "avg_task_forgetting"):
        print(f"{name}: {100 * agg[name]['mean']:.2f} ±{100 * agg[name]['std']:.2f}")
    print(f"artifacts in {config.output_dir}")
    return 0


def cmd_validate(args) -> int:
    store = load_store(args.store)
    kind = SCENARIO_ALIASES[args.scenario]
    stream = GENERATORS[kind](store, args.tasks, args.seed)
    violations = runner.validate_stream(stream, store)
    if violations:
        for v in violations:
            print(f"violation: {v}")
        return 1
    print(f"ok: {kind.value} stream, K={args.tasks}, seed={args.seed}, "
          f"manifest {scenario.manifest_hash(stream)[:12]}")
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.inputs:
        doc = json.loads(Path(path).read_text())
        if "aggregate" not in doc:
            raise SystemExit(f"{path} is not an experiment report")
        reports.append(doc)
    runner.write_aggregate_csv(args.out, reports)
    print(f"wrote {args.out} ({len(reports)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="realcl",
        description="Continual-learning benchmark over frozen embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="emit a synthetic embedding store")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--train-per-class", type=int, default=100)
    p.add_argument("--test-per-class", type=int, default=50)
    p.add_argument("--mean-radius", type=float, default=10.0)
    p.add_argument("--noise-sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="execute an experiment configuration")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="generate and validate a task stream")
    p.add_argument("--store", required=True)
    p.add_argument("--scenario", choices=sorted(SCENARIO_ALIASES), required=True)
    p.add_argument("--tasks", type=int, required=True)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="re-aggregate report JSON files into CSV")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
