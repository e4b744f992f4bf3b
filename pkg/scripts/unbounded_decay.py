"""How fast does the scaled queue vanish when service is Exponential(1)?

Extends the exponential ladder and fits mean max Zhat against r^-k and 1/log r.
"""
import argparse
import os

import numpy as np

from srptlab.experiment import ExperimentConfig, run_experiment

HERE = os.path.dirname(__file__)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--r", type=float, nargs="+", default=[5, 10, 20, 40, 80, 160])
    ap.add_argument("--replications", type=int, default=200)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    base = ExperimentConfig.load(os.path.join(HERE, os.pardir, "configs", "exponential.json"))
    cfg = ExperimentConfig.from_dict(
        {**base.to_dict(), "r_values": args.r, "replications": args.replications, "rbm_paths": 2000}
    )
    res = run_experiment(cfg, threads=args.threads)
    rs, vals, ses = res.report.series("max_Zhat")
    rs, vals = np.array(rs), np.array(vals)
    for r, v, s in zip(rs, vals, ses):
        print(f"r={r:<6g} mean max Zhat {v:.4f} (se {s:.4f})  v*log(r) {v * np.log(r):.3f}")
    k = -np.polyfit(np.log(rs), np.log(vals), 1)[0]
    c = np.mean(vals * np.log(rs))
    print(f"power fit exponent {k:.3f}; r for 0.2 under power law {rs[-1] * (vals[-1] / 0.2) ** (1 / k):.0f}")
    print(f"1/log r fit constant {c:.3f}; r for 0.2 under 1/log r {np.exp(c / 0.2):.0f}")


if __name__ == "__main__":
    main()
