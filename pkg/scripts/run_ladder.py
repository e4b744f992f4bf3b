"""Run a config and print a statistic-by-r table.

    python3 scripts/run_ladder.py configs/two_point.json --threads 4
"""
import argparse

from srptlab.experiment import ExperimentConfig, run_experiment, write_artifacts


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--replications", type=int)
    ap.add_argument("--out")
    args = ap.parse_args()

    cfg = ExperimentConfig.load(args.config)
    over = {k: v for k, v in (("replications", args.replications), ("out", args.out)) if v is not None}
    if over:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **over})
    res = run_experiment(cfg, threads=args.threads)
    write_artifacts(res, cfg.out, cfg.emit)

    stats = sorted({row["statistic"] for row in res.report.rows})
    rs = sorted({row["r"] for row in res.report.rows})
    print("statistic".ljust(22) + "".join(f"r={r:<10g}" for r in rs))
    for s in stats:
        got, vals, _ = res.report.series(s)
        cells = dict(zip(got, vals))
        print(s.ljust(22) + "".join(f"{cells.get(r, float('nan')):<12.4g}" for r in rs))
    for name, v in sorted(res.report.verdicts.items()):
        print(f"{name}: {v}")
    print(f"RBM reference: {res.rbm}")
    print(f"artifacts in {cfg.out}")


if __name__ == "__main__":
    main()
