"""Diffusion scaling: time by r^2, mass and centred counts by 1/r."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .distributions import is_continuity_point
from .engine import Trajectory
from .point_measures import FinitePointMeasure, scale_mass
from .primitives import PrimitiveStreams

__all__ = [
    "ScaledPath",
    "ScaledLoad",
    "scale_state",
    "scale_load",
    "load_variance",
    "tail_variance",
    "truncated_variance",
    "total_variance",
    "default_grid",
]


def default_grid(T: float = 1.0, size: int = 200) -> np.ndarray:
    return np.linspace(0.0, T, size)


@dataclass(frozen=True, eq=False)
class ScaledPath:
    r: float
    grid: np.ndarray
    residuals: tuple  # unscaled residuals at r^2 t; the scaled measure puts weight 1/r on each
    Z: np.ndarray
    W: np.ndarray

    def state(self, i: int) -> FinitePointMeasure:
        return scale_mass(FinitePointMeasure.unit(self.residuals[i]), 1.0 / self.r)

    def below(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        """Scaled mass and work of residuals in ``[0, x]``."""
        z = np.array([np.count_nonzero(s <= x) for s in self.residuals]) / self.r
        w = np.array([s[s <= x].sum() for s in self.residuals]) / self.r
        return z, w

    def above(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        """Scaled mass and work of residuals in ``(x, inf)``."""
        z = np.array([np.count_nonzero(s > x) for s in self.residuals]) / self.r
        w = np.array([s[s > x].sum() for s in self.residuals]) / self.r
        return z, w

    def band_work(self, lo: float, hi: float) -> np.ndarray:
        """Scaled work of residuals in ``(lo, hi]``."""
        return np.array([s[(s > lo) & (s <= hi)].sum() for s in self.residuals]) / self.r

    def value_at(self, t: float, what: str = "W") -> float:
        i = int(np.searchsorted(self.grid, t, side="right")) - 1
        return float(getattr(self, what)[max(i, 0)])


def scale_state(traj: Trajectory, r: float, grid) -> ScaledPath:
    """Scaled state on ``grid``; the trajectory must have been sampled at ``r^2 * grid``."""
    grid = np.asarray(grid, dtype=float)
    want = r * r * grid
    if want.size and traj.sample_times.size and want.max() > traj.sample_times.max() * (1 + 1e-12):
        raise ValueError("trajectory does not reach r^2 * max(grid)")
    if traj.sample_times.shape != want.shape or not np.allclose(traj.sample_times, want, rtol=1e-12, atol=0):
        raise ValueError("trajectory sample times must equal r^2 * grid")
    return ScaledPath(
        r=float(r),
        grid=grid,
        residuals=traj.snapshots,
        Z=traj.queue_length / r,
        W=traj.workload / r,
    )


@dataclass(frozen=True, eq=False)
class ScaledLoad:
    r: float
    grid: np.ndarray
    E: np.ndarray
    V: np.ndarray
    V_below: dict = field(default_factory=dict)  # x -> scaled truncated load

    def tail(self, x: float) -> np.ndarray:
        return self.V - self.V_below[x]


def scale_load(streams: PrimitiveStreams, model, grid, x_levels=()) -> ScaledLoad:
    """Centred, scaled arrival count and load processes on ``grid``.

    Centerings use the model's exact alpha^r and analytic (truncated) means.
    """
    r = model.r
    grid = np.asarray(grid, dtype=float)
    tt = r * r * grid
    if tt.size and tt.max() > streams.horizon * (1 + 1e-12):
        raise ValueError("streams do not reach r^2 * max(grid)")
    e = np.searchsorted(streams.arrival_times, tt, side="right")
    csum = np.concatenate([[0.0], np.cumsum(streams.service_sizes)])
    mean = model.service.moments().mean
    E_hat = (e - model.alpha_r * tt) / r
    V_hat = (csum[e] - model.alpha_r * tt * mean) / r
    below = {}
    for x in x_levels:
        sizes = streams.service_sizes
        cb = np.concatenate([[0.0], np.cumsum(np.where(sizes <= x, sizes, 0.0))])
        mb = model.service.truncated_moments(x).mean_below
        below[x] = (cb[e] - model.alpha_r * tt * mb) / r
    return ScaledLoad(float(r), grid, E_hat, V_hat, below)


def load_variance(alpha: float, a: float, mu: float, sigma2: float) -> float:
    """Variance per unit time of a centred random sum over a renewal count.

    ``mu`` and ``sigma2`` are the mean and variance of the summands.
    """
    return alpha * sigma2 + mu * mu * alpha**3 * a * a


def total_variance(nu, alpha: float, a: float) -> float:
    m = nu.moments()
    return load_variance(alpha, a, m.mean, m.b**2)


def truncated_variance(nu, alpha: float, a: float, x: float) -> float:
    tm = nu.truncated_moments(x)
    return load_variance(alpha, a, tm.mean_below, tm.second_below - tm.mean_below**2)


def tail_variance(nu, alpha: float, a: float, x: float) -> float:
    """s_x^2, the variance per unit time of the limiting tail-load process."""
    if not is_continuity_point(nu, x):
        raise ValueError(f"x = {x} is an atom of the service law")
    tm = nu.truncated_moments(x)
    return load_variance(alpha, a, tm.mean_above, tm.second_above - tm.mean_above**2)


def paths_csv(rows, x_levels=(), header=True) -> str:
    """``r,replication,t,Zhat,What,Zhat_below_{x},What_below_{x},Ehat,Vhat,Vhat_below_{x}``.

    ``rows`` yields ``(replication, ScaledPath, ScaledLoad | None)``.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(
            ["r", "replication", "t", "Zhat", "What"]
            + [f"Zhat_below_{x:g}" for x in x_levels]
            + [f"What_below_{x:g}" for x in x_levels]
            + ["Ehat", "Vhat"]
            + [f"Vhat_below_{x:g}" for x in x_levels]
        )
    for rep, path, ld in rows:
        below = [path.below(x) for x in x_levels]
        for i, t in enumerate(path.grid):
            row = [repr(path.r), rep, repr(float(t)), repr(float(path.Z[i])), repr(float(path.W[i]))]
            row += [repr(float(z[i])) for z, _ in below]
            row += [repr(float(wb[i])) for _, wb in below]
            if ld is None:
                row += [""] * (2 + len(x_levels))
            else:
                row += [repr(float(ld.E[i])), repr(float(ld.V[i]))]
                row += [repr(float(ld.V_below[x][i])) for x in x_levels]
            w.writerow(row)
    return buf.getvalue()
