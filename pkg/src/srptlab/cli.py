"""Command line driver: ``srptlab run | validate | demo``.

Exit status: 0 on success, 2 on a configuration error, 3 when an invariant is
violated during simulation (or an assumption fails in ``validate``).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .engine import FIFO, SRPT, InvariantViolation, simulate
from .experiment import ConfigError, ExperimentConfig, run_experiment, write_artifacts
from .ht_sequence import build, validate
from .primitives import PrimitiveStreams

log = logging.getLogger("srptlab")

DEMOS = [
    ("SRPT: job 1 size 3 at t=0, job 2 size 1 at t=1", SRPT, [3.0], [1.0], [1.0]),
    ("SRPT tie: job 1 size 2 at t=0, job 2 size 1 at t=1", SRPT, [2.0], [1.0], [1.0]),
    ("FIFO: job 1 size 3 at t=0, job 2 size 1 at t=1", FIFO, [3.0], [1.0], [1.0]),
]


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None):
        overrides["out"] = args.out
    if getattr(args, "emit", None):
        overrides["emit"] = [e for e in args.emit.split(",") if e]
    if overrides:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **overrides})
    return cfg


def cmd_run(args) -> int:
    cfg = _load_config(args)
    result = run_experiment(cfg, threads=args.threads)
    files = write_artifacts(result, cfg.out, cfg.emit)
    for f in files:
        log.info("wrote %s", f)
    for name, verdict in sorted(result.report.verdicts.items()):
        print(f"{name}: {verdict}")
    if result.violations:
        for v in result.violations[:20]:
            print("violation:", v, file=sys.stderr)
        return 3
    return 0


def cmd_validate(args) -> int:
    cfg = _load_config(args)
    spec = cfg.spec()
    report = validate(build(spec), spec.service, spec.gamma)
    print(json.dumps(report.rows(), indent=2))
    return 0 if report.ok else 3


def cmd_demo(args) -> int:
    for title, policy, initial, arrivals, sizes in DEMOS:
        streams = PrimitiveStreams(initial, arrivals, sizes, horizon=max(arrivals))
        traj = simulate(policy, streams)
        print(f"# {title}")
        print(traj.events_csv(), end="")
        deps = ", ".join(f"D{j + 1}={d:g}" for j, d in enumerate(traj.departure_time))
        print(f"# departures: {deps}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="srptlab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the heavy-traffic experiment in a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=int, default=1, help="worker processes")
    run.add_argument("--out")
    run.add_argument("--emit", help="comma list of csv,json,svg")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="print the heavy-traffic assumption report")
    val.add_argument("--config", required=True)
    val.add_argument("--seed", type=int)
    val.set_defaults(func=cmd_validate)

    demo = sub.add_parser("demo", help="print the hand-checkable event logs")
    demo.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
