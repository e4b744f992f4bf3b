"""Statistics for the heavy-traffic limit checks.

Per-path functions turn one scaled path into a few numbers; the aggregate
functions summarise those numbers across replications and along the r-ladder.
Finite-r thresholds used with these are pilot-calibrated, not theoretical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import is_continuity_point, is_unbounded
from .point_measures import bl_distance, dirac, ZERO
from .rbm_reference import rbm_marginal_cdf

__all__ = [
    "ks_statistic",
    "queue_deviation",
    "queue_vs_workload",
    "concentration_stats",
    "concentration_profile",
    "bl_to_limit",
    "workload_ks",
    "workload_law_check",
    "fclt_variance_check",
    "summarize",
    "decreasing_trend",
    "ConvergenceReport",
]

EPS0 = 0.01


def ks_statistic(samples, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the sample EDF and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("need at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0))


def summarize(values) -> dict:
    v = np.asarray(values, dtype=float)
    n = v.size
    se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return {
        "n": n,
        "mean": float(v.mean()),
        "se": se,
        "q05": float(np.quantile(v, 0.05)),
        "q50": float(np.quantile(v, 0.5)),
        "q95": float(np.quantile(v, 0.95)),
    }


def queue_deviation(path, x_star: float) -> tuple[float, float]:
    """``(D, D_rel)`` with D = max_t |Zhat(t) - What(t) / x*|."""
    d = float(np.max(np.abs(path.Z - path.W / x_star))) if path.grid.size else 0.0
    scale = float(np.max(path.W)) / x_star if path.grid.size else 0.0
    return d, d / (scale + EPS0)


def queue_vs_workload(paths, x_star) -> dict:
    if is_unbounded(x_star):
        raise ValueError("queue_vs_workload needs a finite x*")
    devs = np.array([queue_deviation(p, x_star) for p in paths]).reshape(-1, 2)
    out = summarize(devs[:, 0]) if len(devs) else {"n": 0}
    if len(devs):
        out["relative_mean"] = float(devs[:, 1].mean())
    return out


def _check_levels(service, levels):
    if service is None:
        return
    for x in levels:
        if x < 0 or not is_continuity_point(service, x):
            raise ValueError(f"truncation level {x} is not a continuity point of the service law")


def concentration_stats(path, x_star: float, eps: float, service=None) -> dict:
    """Below-mass, above-mass and band-work deviation for one path.

    ``mass_below``: max_t of scaled mass on [0, x* - eps].
    ``mass_above``: max_t of scaled mass on (x* + eps, inf).
    ``band_gap``: grid mean of |<chi 1_(x*-eps, x*+eps], Zhat> - What|.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    lo, hi = x_star - eps, x_star + eps
    _check_levels(service, [lo, hi] if lo >= 0 else [hi])
    if path.grid.size == 0:
        return {"mass_below": 0.0, "mass_above": 0.0, "band_gap": 0.0}
    zb, _ = path.below(lo) if lo >= 0 else (np.zeros_like(path.W), None)
    za, _ = path.above(hi)
    band = path.band_work(lo, hi)
    return {
        "mass_below": float(np.max(zb)),
        "mass_above": float(np.max(za)),
        "band_gap": float(np.mean(np.abs(band - path.W))),
    }


def concentration_profile(paths, x_star, eps, service=None) -> dict:
    if is_unbounded(x_star):
        raise ValueError("concentration_profile needs a finite x*")
    rows = [concentration_stats(p, x_star, eps, service) for p in paths]
    return {k: summarize([row[k] for row in rows]) for k in ("mass_below", "mass_above", "band_gap")} if rows else {}


def bl_to_limit(path, i: int, x_star: float) -> float:
    """BL distance between Zhat(t_i) and its claimed limit (What(t_i) / x*) delta_{x*}."""
    w = float(path.W[i])
    target = dirac(x_star, w / x_star) if w > 0 else ZERO
    return bl_distance(path.state(i), target)


def workload_ks(values, params, t0: float) -> float:
    return ks_statistic(values, lambda x: rbm_marginal_cdf(params, t0, x))


def workload_law_check(paths, params, t0: float = 1.0) -> dict:
    if len(paths) < 200:
        raise ValueError("need at least 200 replications for the workload law check")
    vals = np.array([p.value_at(t0, "W") for p in paths])
    return {"ks": workload_ks(vals, params, t0), "n": vals.size, "t0": t0}


def _var_ci(x: np.ndarray) -> tuple[float, float]:
    """Sample variance and its delta-method standard error."""
    n = x.size
    v = float(x.var(ddof=1))
    m4 = float(np.mean((x - x.mean()) ** 4))
    se = math.sqrt(max(m4 - v * v, 0.0) / n)
    return v, se


def fclt_variance_check(loads, model, x_levels, t0: float = 1.0, min_reps: int = 1000) -> list[dict]:
    """Sample variances of the scaled load processes at ``t0`` against their limits.

    Rows for the total load, each truncated load and each tail load.  Limits use
    the limiting alpha and a of ``model``; a zero limit yields ratio NaN.
    """
    from .scaling import tail_variance, total_variance, truncated_variance

    if len(loads) < min_reps:
        raise ValueError(f"need at least {min_reps} replications")
    nu, alpha, a = model.service, model.alpha, model.a
    i = int(np.searchsorted(loads[0].grid, t0, side="right")) - 1
    rows = []

    def row(name, x, samples, limit):
        v, se = _var_ci(samples)
        ratio = v / limit if limit > 0 else math.nan
        rows.append(
            {
                "statistic": name,
                "x": x,
                "sample_variance": v,
                "se": se,
                "limit": limit,
                "ratio": ratio,
                "ci_low": (v - 2 * se) / limit if limit > 0 else math.nan,
                "ci_high": (v + 2 * se) / limit if limit > 0 else math.nan,
            }
        )

    row("V", None, np.array([ld.V[i] for ld in loads]), t0 * total_variance(nu, alpha, a))
    for x in x_levels:
        row("V_below", x, np.array([ld.V_below[x][i] for ld in loads]), t0 * truncated_variance(nu, alpha, a, x))
        row("tail", x, np.array([ld.tail(x)[i] for ld in loads]), t0 * tail_variance(nu, alpha, a, x))
    return rows


def decreasing_trend(means, ses) -> dict:
    """Strict decrease along the ladder, allowing one inversion smaller than 2 combined SEs."""
    bad = []
    for k in range(len(means) - 1):
        if not means[k + 1] < means[k]:
            combined = math.hypot(ses[k], ses[k + 1])
            bad.append((k, means[k + 1] - means[k], combined))
    significant = [b for b in bad if not b[1] < 2 * b[2]]
    ok = len(bad) == 0 or (len(bad) == 1 and not significant)
    return {"ok": ok, "inversions": len(bad), "significant_inversions": len(significant)}


@dataclass
class ConvergenceReport:
    """Per-r rows of (statistic, value, se) plus verdicts."""

    rows: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)

    def add(self, r, n, statistic, value, se):
        self.rows.append({"r": r, "replications": n, "statistic": statistic, "value": value, "se": se})

    def series(self, statistic):
        rs = sorted({row["r"] for row in self.rows if row["statistic"] == statistic})
        vals = {row["r"]: row for row in self.rows if row["statistic"] == statistic}
        return rs, [vals[r]["value"] for r in rs], [vals[r]["se"] for r in rs]

    def sort(self):
        self.rows.sort(key=lambda row: (row["r"], row["statistic"]))
