"""Independent reference computations used by the tests."""
import itertools

import numpy as np


def bl_bruteforce(xi_atoms, zeta_atoms):
    """BL distance by maximizing over piecewise-linear test functions.

    An optimal g is a vertex of the feasible set, so each node value is
    +-1 plus a signed sum of consecutive gaps.  Enumerate those candidates per
    node and run an exact max-plus pass along the chain of sorted nodes.
    """
    net = {}
    for x, w in xi_atoms:
        net[x] = net.get(x, 0.0) + w
    for x, w in zeta_atoms:
        net[x] = net.get(x, 0.0) - w
    if not net:
        return 0.0
    nodes = sorted(net)
    c = [net[x] for x in nodes]
    gaps = [b - a for a, b in zip(nodes, nodes[1:])]
    n = len(nodes)
    cands = []
    for i in range(n):
        vals = set()
        for j in range(n):
            lo, hi = min(i, j), max(i, j)
            steps = gaps[lo:hi]
            for signs in itertools.product((-1, 1), repeat=len(steps)):
                for s in (-1.0, 1.0):
                    v = s + sum(e * d for e, d in zip(signs, steps))
                    if -1 - 1e-12 <= v <= 1 + 1e-12:
                        vals.add(min(1.0, max(-1.0, v)))
        cands.append(sorted(vals))
    best = {v: c[0] * v for v in cands[0]}
    for i in range(1, n):
        nxt = {}
        for v in cands[i]:
            feas = [val for u, val in best.items() if abs(u - v) <= gaps[i - 1] + 1e-12]
            if feas:
                nxt[v] = c[i] * v + max(feas)
        best = nxt
    return max(best.values())


def naive_simulate(policy, initial, arrivals, sizes, horizon_samples):
    """Re-select the served job from scratch at every event.

    ``policy`` maps (residuals dict, arrival order dict) to the served index.
    Returns departure times per job and queue lengths at the sample times.
    """
    jobs = {}
    order = {}
    for j, v in enumerate(initial, start=1):
        jobs[j] = float(v)
        order[j] = j
    n0 = len(initial)
    pending = [(float(t), n0 + k + 1, float(v)) for k, (t, v) in enumerate(zip(arrivals, sizes))]
    dep = {}
    t = 0.0
    samples = list(horizon_samples)
    qlen = []
    k = 0
    while jobs or k < len(pending) or samples:
        cur = policy(jobs, order) if jobs else None
        t_arr = pending[k][0] if k < len(pending) else np.inf
        t_done = t + jobs[cur] if cur is not None else np.inf
        t_next = min(t_arr, t_done)
        if samples and samples[0] < t_next:
            ts = samples.pop(0)
            qlen.append(len(jobs))
            if cur is not None:
                jobs[cur] -= ts - t
            t = ts
            continue
        if t_next == np.inf:
            break
        if cur is not None:
            jobs[cur] -= t_next - t
        t = t_next
        if t_done <= t_arr:
            dep[cur] = t
            del jobs[cur]
        else:
            _, j, v = pending[k]
            k += 1
            jobs[j] = v
            order[j] = j
    return dep, qlen


def srpt_rule(jobs, order):
    return min(jobs, key=lambda j: (jobs[j], j))


def fifo_rule(jobs, order):
    return min(jobs)


def lcfs_rule(jobs, order):
    return max(jobs)
