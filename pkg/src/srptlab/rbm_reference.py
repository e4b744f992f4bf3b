"""One-sided reflected Brownian motion: path simulation and transient marginal CDF."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

__all__ = ["RbmParams", "simulate_rbm", "simulate_rbm_marginal", "rbm_marginal_cdf", "reflect"]


@dataclass(frozen=True)
class RbmParams:
    w0: float
    gamma: float  # drift is -gamma
    sigma2: float

    def __post_init__(self):
        if self.w0 < 0:
            raise ValueError("initial value must be nonnegative")
        if not self.sigma2 > 0:
            raise ValueError("variance must be positive")

    @classmethod
    def for_model(cls, w0: float, gamma: float, alpha: float, a: float, b: float) -> "RbmParams":
        return cls(w0, gamma, (a * a + b * b) * alpha)


def reflect(x: np.ndarray) -> np.ndarray:
    """Discrete Skorokhod map along the last axis: x + max(0, -running min of x)."""
    push = np.maximum(0.0, -np.minimum.accumulate(x, axis=-1))
    return x + push


def simulate_rbm(
    params: RbmParams, grid, rng: np.random.Generator, n_paths: int | None = None, method: str = "bridge"
) -> np.ndarray:
    """Reflected paths on ``grid``; shape ``(len(grid),)`` or ``(n_paths, len(grid))``.

    The free path w0 - gamma t + sigma B(t) is drawn from exact Gaussian
    increments.  ``method="grid"`` applies the Skorokhod map to the grid values
    only, which under-reflects by O(sqrt(step)).  ``method="bridge"`` also draws
    the minimum of the Brownian bridge inside each step, so the reflected values
    at the grid points are exact in law.
    """
    if method not in ("grid", "bridge"):
        raise ValueError(method)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or grid[0] != 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must start at 0 and be strictly increasing")
    m = 1 if n_paths is None else n_paths
    dt = np.diff(grid)
    inc = rng.standard_normal((m, grid.size - 1)) * np.sqrt(params.sigma2 * dt) - params.gamma * dt
    free = params.w0 + np.concatenate([np.zeros((m, 1)), np.cumsum(inc, axis=1)], axis=1)
    if method == "grid":
        out = reflect(free)
    else:
        u = rng.random(inc.shape)
        low = 0.5 * (inc - np.sqrt(inc * inc - 2.0 * params.sigma2 * dt * np.log1p(-u)))
        step_min = free[:, :-1] + low
        running = np.minimum(np.minimum.accumulate(step_min, axis=1), params.w0)
        push = np.maximum(0.0, -running)
        out = free.copy()
        out[:, 1:] += push
    return out[0] if n_paths is None else out


def simulate_rbm_marginal(
    params: RbmParams,
    t: float,
    n_paths: int,
    n_steps: int,
    rng: np.random.Generator,
    method: str = "bridge",
    chunk: int = 20_000,
) -> np.ndarray:
    """Samples of W(t) from ``n_steps`` equal steps, without storing whole paths.

    ``method="grid"`` reflects at grid points only.  ``method="bridge"`` samples
    the minimum of the Brownian bridge over each step, which makes the value at
    the grid points exact in law.
    """
    if method not in ("grid", "bridge"):
        raise ValueError(method)
    dt = t / n_steps
    sd = math.sqrt(params.sigma2 * dt)
    out = np.empty(n_paths)
    for start in range(0, n_paths, chunk):
        m = min(chunk, n_paths - start)
        w = np.full(m, float(params.w0))
        for _ in range(n_steps):
            dx = rng.standard_normal(m) * sd - params.gamma * dt
            if method == "grid":
                w = np.maximum(w + dx, 0.0)
            else:
                # min over the step of a bridge from 0 to dx
                u = rng.random(m)
                low = 0.5 * (dx - np.sqrt(dx * dx - 2.0 * params.sigma2 * dt * np.log1p(-u)))
                w = np.maximum(w + dx, dx - low)
        out[start : start + m] = w
    return out


def rbm_marginal_cdf(params: RbmParams, t: float, x) -> np.ndarray | float:
    """P(W(t) <= x | W(0) = w0) for reflected BM with drift -gamma and variance sigma2.

    P = Phi((x - w0 - mu t) / s) - exp(2 mu x / sigma2) Phi((-x - w0 - mu t) / s),
    with mu = -gamma and s = sigma sqrt(t); the second term is evaluated in log space.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    xs = np.asarray(x, dtype=float)
    mu = -params.gamma
    s = math.sqrt(params.sigma2 * t)
    first = ndtr((xs - params.w0 - mu * t) / s)
    log_second = 2.0 * mu * xs / params.sigma2 + log_ndtr((-xs - params.w0 - mu * t) / s)
    val = np.clip(first - np.exp(log_second), 0.0, 1.0)
    val = np.where(xs < 0, 0.0, val)
    return float(val) if val.ndim == 0 else val
