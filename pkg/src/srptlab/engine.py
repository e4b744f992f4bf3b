"""Exact event-driven single-server queue.

Between events the job in service loses residual work at rate one and every
other job is frozen.  Events are arrivals and completions; the policy is
re-evaluated (preemptively) at each of them.  No time stepping is involved, so
binary-representable inputs give exact departure times.

Jobs are indexed from 1: initial jobs first, then arrivals in order.
"""
from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .distributions import is_unbounded
from .point_measures import FinitePointMeasure, truncated_stats
from .primitives import PrimitiveStreams

__all__ = [
    "Policy",
    "SRPT",
    "FIFO",
    "LCFS",
    "Trajectory",
    "srpt_select",
    "simulate",
    "coupled_run",
    "check_bounds",
    "BoundReport",
    "InvariantViolation",
]

ARRIVAL, DEPARTURE = 0, 1


class InvariantViolation(RuntimeError):
    pass


class Policy(Enum):
    SRPT = "srpt"
    FIFO = "fifo"
    LCFS = "lcfs"  # preemptive last-come first-served

    def key(self, residual: float, index: int) -> tuple:
        """Priority key; the smallest key is served."""
        if self is Policy.SRPT:
            return (residual, index)
        if self is Policy.FIFO:
            return (index,)
        return (-index,)


SRPT, FIFO, LCFS = Policy.SRPT, Policy.FIFO, Policy.LCFS


def srpt_select(residuals: dict) -> int:
    """Index of the job with least residual; ties go to the smallest index."""
    if not residuals:
        raise ValueError("no jobs to select from")
    return min(residuals, key=lambda j: (residuals[j], j))


@dataclass(frozen=True, eq=False)
class Trajectory:
    policy: Policy
    sample_times: np.ndarray
    snapshots: tuple  # residuals present at each sample time (unit weights)
    queue_length: np.ndarray
    workload: np.ndarray
    idle_time: np.ndarray
    event_time: np.ndarray
    event_kind: np.ndarray
    event_job: np.ndarray
    arrival_time: np.ndarray  # per job, index - 1
    size: np.ndarray
    departure_time: np.ndarray
    initial_workload: float

    def state(self, i: int) -> FinitePointMeasure:
        return FinitePointMeasure.unit(self.snapshots[i])

    def truncated(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        """Queue length and workload restricted to residuals in ``[0, x]`` at each sample time."""
        z = np.array([np.count_nonzero(s <= x) for s in self.snapshots], dtype=float)
        w = np.array([s[s <= x].sum() for s in self.snapshots])
        return z, w

    def number_in_system(self, t) -> np.ndarray:
        """``A(t) - #departures by t`` at arbitrary times, from the job records."""
        t = np.asarray(t, dtype=float)
        arrivals = np.sort(self.arrival_time)
        deps = np.sort(self.departure_time)
        return np.searchsorted(arrivals, t, side="right") - np.searchsorted(deps, t, side="right")

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "kind", "job_index"])
        names = ("arrival", "departure")
        for t, k, j in zip(self.event_time, self.event_kind, self.event_job):
            w.writerow([repr(float(t)), names[k], int(j)])
        return buf.getvalue()

    def to_csv(self, x_levels=(), header=True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(
                ["t", "policy", "Z", "W"]
                + [f"Z_below_{x:g}" for x in x_levels]
                + [f"W_below_{x:g}" for x in x_levels]
            )
        trunc = [self.truncated(x) for x in x_levels]
        for i, t in enumerate(self.sample_times):
            w.writerow(
                [repr(float(t)), self.policy.value, int(self.queue_length[i]), repr(float(self.workload[i]))]
                + [repr(float(z[i])) for z, _ in trunc]
                + [repr(float(wb[i])) for _, wb in trunc]
            )
        return buf.getvalue()


def simulate(policy: Policy, streams: PrimitiveStreams, sample_times=(), check: bool = True) -> Trajectory:
    """Run ``policy`` on ``streams`` and record the state at each sample time.

    Sample times are right-continuous: events at exactly a sample time are
    applied before the snapshot.  After the last arrival the queue is drained,
    so every job gets a departure time.  With ``check`` the SRPT minimality of
    the served job is asserted at every event.
    """
    samples = np.asarray(sample_times, dtype=float).reshape(-1)
    if samples.size and (samples.min() < 0 or samples.max() > streams.horizon):
        raise ValueError("sample times must lie in [0, horizon]")
    if samples.size and np.any(np.diff(samples) < 0):
        raise ValueError("sample times must be nondecreasing")
    arr_t = streams.arrival_times
    if arr_t.size and np.any(np.diff(arr_t) <= 0):
        raise ValueError("arrival times must be strictly increasing")

    n0 = streams.n_initial
    sizes = np.concatenate([streams.initial_jobs, streams.service_sizes])
    n = sizes.size
    arrival_time = np.concatenate([np.zeros(n0), arr_t])
    departure = np.full(n, math.nan)
    sizes_l = sizes.tolist()
    arr_l = arr_t.tolist()
    samp_l = samples.tolist()
    key = policy.key
    is_srpt = policy is Policy.SRPT

    ev_t, ev_k, ev_j = [], [], []
    heap = []  # (key, index) for waiting jobs; their residuals are frozen
    waiting = {}  # index -> residual
    for j in range(1, n0 + 1):
        ev_t.append(0.0)
        ev_k.append(ARRIVAL)
        ev_j.append(j)
        waiting[j] = sizes_l[j - 1]
        heap.append((key(sizes_l[j - 1], j), j))
    heapq.heapify(heap)

    served = 0  # 0 means idle
    res = 0.0  # residual of the served job as of time `last`
    last = 0.0
    idle = 0.0
    if heap:
        _, served = heapq.heappop(heap)
        res = waiting.pop(served)

    snaps, zs, ws, idles = [], [], [], []
    na, ns = 0, 0
    n_arr, n_samp = len(arr_l), len(samp_l)
    inf = math.inf

    while True:
        ta = arr_l[na] if na < n_arr else inf
        tc = last + res if served else inf
        ts = samp_l[ns] if ns < n_samp else inf
        te = ta if ta < tc else tc
        if te == inf and ts == inf:
            break
        if ts < te:
            if served:
                cur = res - (ts - last)
                snap = list(waiting.values())
                if cur > 0:
                    snap.append(cur)
            else:
                snap = list(waiting.values())
            arr_snap = np.array(snap)
            snaps.append(arr_snap)
            zs.append(arr_snap.size)
            ws.append(float(arr_snap.sum()))
            idles.append(idle if served else idle + (ts - last))
            ns += 1
            continue
        if tc <= ta:
            # completion first when it coincides with an arrival
            departure[served - 1] = tc
            ev_t.append(tc)
            ev_k.append(DEPARTURE)
            ev_j.append(served)
            last = tc
            if heap:
                _, served = heapq.heappop(heap)
                res = waiting.pop(served)
            else:
                served, res = 0, 0.0
        else:
            j = n0 + na + 1
            na += 1
            size = sizes_l[j - 1]
            ev_t.append(ta)
            ev_k.append(ARRIVAL)
            ev_j.append(j)
            if served:
                res -= ta - last
                # preempt only on a strictly smaller key; the incumbent has the smaller index
                if key(size, j) < key(res, served):
                    waiting[served] = res
                    heapq.heappush(heap, (key(res, served), served))
                    served, res = j, size
                else:
                    waiting[j] = size
                    heapq.heappush(heap, (key(size, j), j))
            else:
                idle += ta - last
                served, res = j, size
            last = ta
        if check and is_srpt and served and heap and heap[0][0][0] < res:
            raise InvariantViolation(f"SRPT served job {served} is not minimal at t={last}")

    return Trajectory(
        policy=policy,
        sample_times=samples,
        snapshots=tuple(snaps),
        queue_length=np.array(zs, dtype=np.int64),
        workload=np.array(ws),
        idle_time=np.array(idles),
        event_time=np.array(ev_t),
        event_kind=np.array(ev_k, dtype=np.int8),
        event_job=np.array(ev_j, dtype=np.int64),
        arrival_time=arrival_time,
        size=sizes,
        departure_time=departure,
        initial_workload=float(streams.initial_jobs.sum()),
    )


def coupled_run(policies, streams: PrimitiveStreams, sample_times=(), check: bool = True) -> list[Trajectory]:
    """Every policy on the same primitive streams and the same sample grid."""
    return [simulate(p, streams, sample_times, check=check) for p in policies]


@dataclass
class BoundReport:
    n_times: int
    max_static_violation: float  # max of W - x* Q over policies and times
    max_optimality_violation: int  # max of Z_SRPT - Q_pi
    max_workload_gap: float  # max |W_pi - W_SRPT|

    @property
    def ok(self) -> bool:
        return self.max_static_violation <= 1e-9 and self.max_optimality_violation <= 0


def check_bounds(trajs: list[Trajectory], x_star, tol: float = 1e-9) -> BoundReport:
    """Static bound W <= x* Q for every policy and Z_SRPT <= Q_pi at every sample time.

    With an unbounded x* the static lower bound W / x* is taken as zero.
    """
    srpt = [t for t in trajs if t.policy is Policy.SRPT]
    if not srpt:
        raise ValueError("need an SRPT trajectory among the coupled runs")
    base = srpt[0]
    static = -math.inf
    opt = -(2**62)
    gap = 0.0
    for tr in trajs:
        if tr.sample_times.shape != base.sample_times.shape or np.any(tr.sample_times != base.sample_times):
            raise ValueError("coupled trajectories must share sample times")
        if tr.sample_times.size == 0:
            continue
        if is_unbounded(x_star):
            static = max(static, float(np.max(-tr.queue_length.astype(float))))
        else:
            static = max(static, float(np.max(tr.workload - x_star * tr.queue_length)))
        opt = max(opt, int(np.max(base.queue_length - tr.queue_length)))
        gap = max(gap, float(np.max(np.abs(tr.workload - base.workload))))
    if base.sample_times.size == 0:
        static, opt = 0.0, 0
    return BoundReport(base.sample_times.size, static, opt, gap)


def snapshot_stats(traj: Trajectory, i: int, x: float):
    return truncated_stats(traj.state(i), x)
