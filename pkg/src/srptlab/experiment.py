"""Replication harness shared by the command line and the acceptance suite."""
from __future__ import annotations

import json
import math
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .diagnostics import (
    ConvergenceReport,
    bl_to_limit,
    concentration_stats,
    decreasing_trend,
    fclt_variance_check,
    ks_statistic,
    queue_deviation,
    summarize,
    workload_ks,
)
from .distributions import interarrival_from_config, is_continuity_point, is_unbounded, service_from_config
from .engine import Policy, check_bounds, coupled_run
from .ht_sequence import HeavyTrafficSpec, build, validate
from .primitives import SeedPlan, generate
from .rbm_reference import RbmParams, rbm_marginal_cdf, simulate_rbm_marginal
from .scaling import ScaledLoad, default_grid, paths_csv, scale_load, scale_state

__all__ = ["ConfigError", "ExperimentConfig", "run_replication", "run_experiment", "write_artifacts"]

WORK_TOL = 1e-9


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    service: dict
    interarrival: dict
    gamma: float
    w0: float
    r_values: list
    replications: int = 100
    T: float = 1.0
    grid_size: int = 200
    x_levels: list = field(default_factory=list)
    eps: float | None = None
    seed: int = 0
    out: str = "out"
    emit: list = field(default_factory=lambda: ["csv", "json"])
    policies: list = field(default_factory=lambda: ["srpt"])
    t0: float = 1.0
    load_check: bool = False
    path_samples: int = 2
    rbm_paths: int = 20000
    rbm_steps: int = 1000

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            cfg = cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def check(self):
        try:
            svc = service_from_config(self.service)
            arr = interarrival_from_config(self.interarrival)
            spec = self.spec(svc, arr)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.grid_size < 2:
            raise ConfigError("grid_size must be >= 2")
        if not 0 < self.t0 <= self.T:
            raise ConfigError("t0 must lie in (0, T]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        for x in self.x_levels:
            if x < 0 or not is_continuity_point(svc, x):
                raise ConfigError(f"truncation level {x} is an atom of the service law")
        x_star = svc.moments().x_star
        if self.eps is not None and not is_unbounded(x_star):
            if not self.eps > 0:
                raise ConfigError("eps must be positive")
            for x in (x_star - self.eps, x_star + self.eps):
                if x >= 0 and not is_continuity_point(svc, x):
                    raise ConfigError(f"concentration level {x} is an atom of the service law")
        try:
            [Policy(p) for p in self.policies]
        except ValueError as exc:
            raise ConfigError(f"unknown policy in {self.policies}") from exc
        if self.policies and "srpt" not in self.policies:
            raise ConfigError("policies must include srpt")
        bad = set(self.emit) - {"csv", "json", "svg"}
        if bad:
            raise ConfigError(f"unknown emit targets {sorted(bad)}")
        try:
            build(spec)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def spec(self, svc=None, arr=None) -> HeavyTrafficSpec:
        return HeavyTrafficSpec(
            service=svc or service_from_config(self.service),
            interarrival=arr or interarrival_from_config(self.interarrival),
            gamma=float(self.gamma),
            r_values=tuple(self.r_values),
            w0=float(self.w0),
        )

    @property
    def grid(self) -> np.ndarray:
        return default_grid(self.T, self.grid_size)


def r_key(r: float) -> int:
    return int(round(r * 1000))


def run_replication(cfg: ExperimentConfig, model, rep: int, keep_path: bool = False) -> dict:
    """One replication at one r.  Returns scalar statistics (and optionally the paths)."""
    r = model.r
    grid = cfg.grid
    seeds = SeedPlan(cfg.seed).child(r_key(r), rep)
    streams = generate(model.interarrival, model.service, model.initial_jobs, r * r * cfg.T, seeds)
    i0 = int(np.searchsorted(grid, cfg.t0, side="right")) - 1
    out = {"rep": rep, "violations": []}
    x_star = model.service.moments().x_star

    if cfg.load_check:
        ld = scale_load(streams, model, grid, cfg.x_levels)
        out["Ehat_t0"] = float(ld.E[i0])
        out["Vhat_t0"] = float(ld.V[i0])
        for x in cfg.x_levels:
            out[f"Vhat_below_{x:g}_t0"] = float(ld.V_below[x][i0])
        if keep_path:
            out["load"] = ld
    if not cfg.policies:
        return out

    times = r * r * grid
    trajs = coupled_run([Policy(p) for p in cfg.policies], streams, times)
    srpt = trajs[0] if trajs[0].policy is Policy.SRPT else next(t for t in trajs if t.policy is Policy.SRPT)

    # work conservation: W(t) = W(0) + V(t) - busy(t)
    csum = np.concatenate([[0.0], np.cumsum(streams.service_sizes)])
    v = csum[np.searchsorted(streams.arrival_times, times, side="right")]
    for tr in trajs:
        busy = times - tr.idle_time
        err = np.max(np.abs(tr.workload - (tr.initial_workload + v - busy)))
        if err > WORK_TOL * max(1.0, float(np.max(tr.workload))):
            out["violations"].append(f"work conservation {tr.policy.value}: {err:.3g}")
    if len(trajs) > 1:
        rep_b = check_bounds(trajs, x_star)
        if rep_b.max_workload_gap > WORK_TOL * max(1.0, float(np.max(srpt.workload))):
            out["violations"].append(f"workload differs across policies: {rep_b.max_workload_gap:.3g}")
        if rep_b.max_optimality_violation > 0:
            out["violations"].append(f"SRPT queue exceeds another policy by {rep_b.max_optimality_violation}")
        if rep_b.max_static_violation > 1e-9:
            out["violations"].append(f"static bound violated by {rep_b.max_static_violation:.3g}")

    path = scale_state(srpt, r, grid)
    out["What_0"] = float(path.W[0])
    out["What_t0"] = float(path.W[i0])
    out["Zhat_t0"] = float(path.Z[i0])
    out["max_Zhat"] = float(np.max(path.Z))
    if not is_unbounded(x_star):
        out["D"], out["D_rel"] = queue_deviation(path, x_star)
        out["bl_t0"] = bl_to_limit(path, i0, x_star)
        if cfg.eps is not None:
            out.update(concentration_stats(path, x_star, cfg.eps, model.service))
    for x in cfg.x_levels:
        zb, _ = path.below(x)
        out[f"max_Zhat_below_{x:g}"] = float(np.max(zb))
    if keep_path:
        out["path"] = path
    return out


def _task(args):
    cfg, model, rep, keep = args
    return run_replication(cfg, model, rep, keep)


SCALARS = (
    "D",
    "D_rel",
    "mass_below",
    "mass_above",
    "band_gap",
    "bl_t0",
    "max_Zhat",
    "Zhat_t0",
    "What_0",
    "What_t0",
    "Ehat_t0",
    "Vhat_t0",
)
TRENDS = ("D", "mass_below", "bl_t0", "ks_What_t0", "max_Zhat")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    models: list
    per_r: dict  # r -> list of replication dicts
    report: ConvergenceReport
    fclt: dict  # r -> variance rows
    assumptions: object
    rbm: dict
    violations: list


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    spec = cfg.spec()
    models = build(spec)
    tasks = [(cfg, m, rep, rep < cfg.path_samples) for m in models for rep in range(cfg.replications)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_task, tasks, chunksize=max(1, len(tasks) // (8 * threads))))
    else:
        results = [_task(t) for t in tasks]

    per_r = {m.r: [] for m in models}
    for (c, m, rep, keep), res in zip(tasks, results):
        per_r[m.r].append(res)

    svc = spec.service
    mom = svc.moments()
    params = RbmParams(float(cfg.w0), float(cfg.gamma), (spec.a**2 + mom.b**2) * spec.alpha)
    rbm_rng = SeedPlan(cfg.seed).child(0).stream("rbm")
    rbm_samples = simulate_rbm_marginal(params, cfg.t0, cfg.rbm_paths, cfg.rbm_steps, rbm_rng)
    rbm = {
        "w0": params.w0,
        "gamma": params.gamma,
        "sigma2": params.sigma2,
        "t0": cfg.t0,
        "mc_mean": float(rbm_samples.mean()),
        "mc_se": float(rbm_samples.std(ddof=1) / math.sqrt(rbm_samples.size)),
        "ks_mc_vs_closed_form": ks_statistic(rbm_samples, lambda x: rbm_marginal_cdf(params, cfg.t0, x)),
    }

    report = ConvergenceReport()
    fclt = {}
    violations = []
    for m in models:
        rows = per_r[m.r]
        n = len(rows)
        for res in rows:
            violations += [f"r={m.r:g} rep={res['rep']}: {v}" for v in res["violations"]]
        keys = [k for k in SCALARS if k in rows[0]] + sorted(k for k in rows[0] if k.startswith("max_Zhat_below"))
        for k in keys:
            s = summarize([res[k] for res in rows])
            report.add(m.r, n, k, s["mean"], s["se"])
        if "What_t0" in rows[0]:
            # sampling sd of a KS statistic is roughly 0.5 / sqrt(n)
            ks = workload_ks([res["What_t0"] for res in rows], params, cfg.t0)
            report.add(m.r, n, "ks_What_t0", ks, 0.5 / math.sqrt(n))
        if cfg.load_check:
            loads = [
                ScaledLoad(
                    m.r,
                    np.array([cfg.t0]),
                    np.array([res["Ehat_t0"]]),
                    np.array([res["Vhat_t0"]]),
                    {x: np.array([res[f"Vhat_below_{x:g}_t0"]]) for x in cfg.x_levels},
                )
                for res in rows
            ]
            fclt[m.r] = fclt_variance_check(loads, m, cfg.x_levels, cfg.t0, min_reps=1)
            for row in fclt[m.r]:
                name = "var_ratio_" + row["statistic"] + ("" if row["x"] is None else f"_{row['x']:g}")
                report.add(m.r, n, name, row["ratio"], row["se"] / row["limit"] if row["limit"] > 0 else math.nan)
    report.sort()
    for stat in TRENDS:
        if stat == "max_Zhat" and not is_unbounded(mom.x_star):
            continue  # converges to What / x*, not to zero
        rs, vals, ses = report.series(stat)
        if len(rs) > 1:
            ses = [0.0 if math.isnan(s) else s for s in ses]
            report.verdicts[f"{stat}_decreasing"] = decreasing_trend(vals, ses)
    report.verdicts["invariant_violations"] = len(violations)

    assumptions = validate(models, spec.service, spec.gamma)
    return ExperimentResult(cfg, models, per_r, report, fclt, assumptions, rbm, violations)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_csv(report: ConvergenceReport) -> str:
    lines = ["r,replications,statistic,value,se"]
    for row in report.rows:
        lines.append(",".join(_fmt(row[k]) for k in ("r", "replications", "statistic", "value", "se")))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _jsonable(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def write_artifacts(result: ExperimentResult, out_dir: str, emit=("csv", "json")) -> list[str]:
    """Write report, path samples, manifest and plots; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.config
    written = []

    def put(name, text):
        p = os.path.join(out_dir, name)
        with open(p, "w", newline="") as fh:
            fh.write(text)
        written.append(p)

    try:
        if "csv" in emit:
            put("report.csv", report_csv(result.report))
            samples = []
            for r, rows in result.per_r.items():
                for res in rows:
                    if "path" in res:
                        samples.append((res["rep"], res["path"], res.get("load")))
            if samples:
                put("paths.csv", paths_csv(samples, cfg.x_levels))
            fclt_rows = [dict(r=r, **row) for r, rows in result.fclt.items() for row in rows]
            if fclt_rows:
                cols = ["r", "statistic", "x", "sample_variance", "se", "limit", "ratio", "ci_low", "ci_high"]
                put(
                    "fclt.csv",
                    ",".join(cols) + "\n" + "".join(",".join(_fmt(row[c]) for c in cols) + "\n" for row in fclt_rows),
                )
        if "json" in emit:
            doc = {
                "rows": result.report.rows,
                "verdicts": result.report.verdicts,
                "rbm_reference": result.rbm,
                "fclt": result.fclt,
                "assumptions": result.assumptions.rows(),
                "violations": result.violations,
                "note": "finite-r thresholds are pilot-calibrated engineering choices, not theoretical values",
            }
            put("report.json", json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
        if "svg" in emit:
            written += _plots(result.report, out_dir)
        manifest = {
            "config": cfg.to_dict(),
            "seed": cfg.seed,
            "versions": {
                "srptlab": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
        }
        put("manifest.json", json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    except Exception:
        for p in written:
            if os.path.exists(p):
                os.remove(p)
        raise
    return written


def _plots(report: ConvergenceReport, out_dir: str) -> list[str]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "srptlab"
    paths = []
    for stat in sorted({row["statistic"] for row in report.rows}):
        rs, vals, ses = report.series(stat)
        fig, ax = plt.subplots(figsize=(4, 3))
        err = [0.0 if math.isnan(s) else 2 * s for s in ses]
        ax.errorbar(rs, vals, yerr=err, marker="o")
        ax.set_xscale("log")
        ax.set_xlabel("r")
        ax.set_ylabel(stat)
        fig.tight_layout()
        p = os.path.join(out_dir, f"{stat}.svg")
        fig.savefig(p, metadata={"Date": None})
        plt.close(fig)
        paths.append(p)
    return paths


# --- random coupled instances for the pathwise checks -----------------------

_INSTANCE_SERVICES = (
    {"family": "two_point", "x1": 1.0, "p1": 0.5, "x2": 2.0},
    {"family": "discrete", "points": [[0.5, 0.25], [1.0, 0.5], [4.0, 0.25]]},
    {"family": "uniform", "lo": 0.0, "hi": 2.0},
    {"family": "deterministic", "x": 1.0},
    {"family": "bounded_pareto", "shape": 1.5, "lo": 0.5, "hi": 16.0},
    {"family": "exponential", "rate": 1.0},
)
_INSTANCE_ARRIVALS = (
    {"family": "exponential", "rate": 1.0},
    {"family": "scaled_gamma", "shape": 0.5, "mean": 1.0},
    {"family": "scaled_uniform", "mean": 1.0, "halfwidth": 0.9},
)


def random_instance(seed: int, i: int, n_jobs: int = 1000):
    """Primitive streams for coupled-policy checks: mixed laws, loads 0.7 to 1.05.

    Returns ``(streams, service)``; about ``n_jobs`` jobs arrive before the horizon.
    """
    from .distributions import interarrival_from_config, service_from_config

    pick = SeedPlan(seed).child(i).stream("initial")
    svc = service_from_config(_INSTANCE_SERVICES[i % len(_INSTANCE_SERVICES)])
    base = interarrival_from_config(_INSTANCE_ARRIVALS[(i // len(_INSTANCE_SERVICES)) % len(_INSTANCE_ARRIVALS)])
    rho = float(pick.uniform(0.7, 1.05))
    mean_gap = svc.moments().mean / rho
    arr = base.rescaled(mean_gap)
    n0 = int(pick.integers(0, 6))
    initial = svc.sample(pick, n0)
    horizon = n_jobs * mean_gap
    return generate(arr, svc, initial, horizon, SeedPlan(seed).child(i)), svc
