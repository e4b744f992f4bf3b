"""Primitive streams for one sample path: initial jobs, arrival times, service sizes.

Streams are pre-generated up to a horizon so that several policies can be run
on exactly the same input.  Interarrival times follow the zero-delay
convention: the first gap has the same law as the others.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .point_measures import FinitePointMeasure

__all__ = ["SeedPlan", "PrimitiveStreams", "generate", "count", "load"]

_LABELS = {"arrivals": 0, "services": 1, "initial": 2, "rbm": 3}


@dataclass(frozen=True)
class SeedPlan:
    """Master seed plus an optional path of integers (r, replication, ...).

    ``stream(label)`` always returns a fresh generator in the same state for the
    same (seed, key, label), independent of any other label.
    """

    seed: int
    key: tuple = ()

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("master seed must be an unsigned 64-bit integer")

    def child(self, *key: int) -> "SeedPlan":
        return SeedPlan(self.seed, self.key + tuple(int(k) for k in key))

    def stream(self, label: str) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key + (_LABELS[label],))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class PrimitiveStreams:
    initial_jobs: np.ndarray
    arrival_times: np.ndarray
    service_sizes: np.ndarray
    horizon: float

    def __post_init__(self):
        init = np.array(self.initial_jobs, dtype=float).reshape(-1)
        at = np.array(self.arrival_times, dtype=float).reshape(-1)
        sz = np.array(self.service_sizes, dtype=float).reshape(-1)
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if at.shape != sz.shape:
            raise ValueError("need exactly one service size per arrival")
        if at.size and (at[0] <= 0 or np.any(np.diff(at) <= 0) or at[-1] > self.horizon):
            raise ValueError("arrival times must be strictly increasing in (0, horizon]")
        if (sz.size and sz.min() <= 0) or (init.size and init.min() <= 0):
            raise ValueError("service sizes must be strictly positive")
        for arr in (init, at, sz):
            arr.flags.writeable = False
        object.__setattr__(self, "initial_jobs", init)
        object.__setattr__(self, "arrival_times", at)
        object.__setattr__(self, "service_sizes", sz)

    @property
    def n_initial(self) -> int:
        return self.initial_jobs.size

    @property
    def n_jobs(self) -> int:
        return self.initial_jobs.size + self.arrival_times.size

    def to_csv(self) -> str:
        """``index,arrival_time,service_size``; initial jobs carry arrival time 0."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "arrival_time", "service_size"])
        for j, v in enumerate(self.initial_jobs, start=1):
            w.writerow([j, repr(0.0), repr(float(v))])
        for k, (t, v) in enumerate(zip(self.arrival_times, self.service_sizes)):
            w.writerow([self.n_initial + k + 1, repr(float(t)), repr(float(v))])
        return buf.getvalue()


def _arrival_times(arr, rng: np.random.Generator, horizon: float) -> np.ndarray:
    # draw in blocks sized from the mean so the stream is consumed the same way every run
    block = max(16, int(1.2 * horizon / arr.mean) + 16)
    times = np.empty(0)
    last = 0.0
    while last <= horizon:
        gaps = arr.sample(rng, block)
        chunk = last + np.cumsum(gaps)
        times = np.concatenate([times, chunk])
        last = chunk[-1]
    return times[times <= horizon]


def generate(arr, svc, initial, horizon: float, seeds: SeedPlan) -> PrimitiveStreams:
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    times = _arrival_times(arr, seeds.stream("arrivals"), horizon)
    sizes = svc.sample(seeds.stream("services"), times.size)
    return PrimitiveStreams(np.asarray(initial, dtype=float), times, sizes, float(horizon))


def _check_time(streams: PrimitiveStreams, t: float):
    if t < 0 or t > streams.horizon:
        raise ValueError(f"time {t} outside [0, {streams.horizon}]")


def count(streams: PrimitiveStreams, t: float) -> tuple[int, int]:
    """``(E(t), A(t))``: arrivals in ``(0, t]`` and that plus the initial jobs."""
    _check_time(streams, t)
    e = int(np.searchsorted(streams.arrival_times, t, side="right"))
    return e, streams.n_initial + e


@dataclass(frozen=True)
class Load:
    measure: FinitePointMeasure
    total: float
    truncated: dict


def load(streams: PrimitiveStreams, t: float, x_levels=()) -> Load:
    """Point measure of service sizes arrived in ``(0, t]`` with ``V(t)`` and ``V_x(t)``."""
    e, _ = count(streams, t)
    sizes = streams.service_sizes[:e]
    truncated = {x: float(sizes[sizes <= x].sum()) for x in x_levels}
    return Load(FinitePointMeasure.unit(sizes), float(sizes.sum()), truncated)
