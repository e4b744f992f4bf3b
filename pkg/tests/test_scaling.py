import numpy as np
import pytest

from srptlab.distributions import (
    Deterministic,
    DeterministicInterarrival,
    ExponentialInterarrival,
    ScaledGamma,
    TwoPoint,
)
from srptlab.engine import SRPT, simulate
from srptlab.ht_sequence import HeavyTrafficSpec, build
from srptlab.point_measures import integrate
from srptlab.primitives import PrimitiveStreams, SeedPlan, generate
from srptlab.scaling import scale_load, scale_state, tail_variance, total_variance

TP = TwoPoint(1, 0.5, 2)


def test_scale_state_identity_and_arithmetic():
    s = PrimitiveStreams([2.0], [], [], horizon=200.0)
    grid = np.array([0.0, 0.5, 1.0])
    p1 = scale_state(simulate(SRPT, s, grid), 1.0, grid)
    assert p1.W.tolist() == [2.0, 1.5, 1.0]
    s = PrimitiveStreams([2.0, 2.0, 200.0], [], [], horizon=200.0)
    tr = simulate(SRPT, s, 100 * grid)
    p = scale_state(tr, 10.0, grid)
    # at time 100 the two size-2 jobs are gone and the big one has had 96 units of service
    assert p.state(2).sorted_atoms().tolist() == [[104.0, 0.1]]
    assert p.W[2] == pytest.approx(10.4)
    s = PrimitiveStreams([], [], [], horizon=100.0)
    p = scale_state(simulate(SRPT, s, 100 * grid), 10.0, grid)
    assert all(p.state(i).is_zero for i in range(3))
    with pytest.raises(ValueError):
        scale_state(tr, 20.0, grid)


def test_scaled_workload_matches_integral():
    (m,) = build(HeavyTrafficSpec(TP, ExponentialInterarrival(1.0), 1.0, (10,), w0=1.0))
    s = generate(m.interarrival, m.service, m.initial_jobs, 100.0, SeedPlan(3))
    grid = np.linspace(0, 1, 60)
    tr = simulate(SRPT, s, 100 * grid)
    p = scale_state(tr, 10, grid)
    for i in range(grid.size):
        assert integrate(lambda x: x, p.state(i)) == pytest.approx(tr.workload[i] / 10, abs=1e-9)
        assert p.state(i).total_mass == pytest.approx(p.Z[i], abs=1e-12)


def test_scale_load_examples():
    (m,) = build(HeavyTrafficSpec(Deterministic(1.0), DeterministicInterarrival(1.0), 1.0, (20,)))
    s = generate(m.interarrival, m.service, [], 400.0, SeedPlan(1))
    grid = np.linspace(0, 1, 301)
    ld = scale_load(s, m, grid, [0.5])
    assert np.abs(ld.E).max() <= 1 / 20 + 1e-12
    assert ld.E[0] == ld.V[0] == ld.V_below[0.5][0] == 0.0
    with pytest.raises(ValueError):
        scale_load(s, m, np.linspace(0, 2, 5))


def test_tail_identity_on_random_streams():
    (m,) = build(HeavyTrafficSpec(TP, ExponentialInterarrival(1.0), 1.0, (15,)))
    s = generate(m.interarrival, m.service, [], 225.0, SeedPlan(8))
    grid = np.linspace(0, 1, 40)
    x = 1.5
    ld = scale_load(s, m, grid, [x])
    tt = 225 * grid
    e = np.searchsorted(s.arrival_times, tt, side="right")
    tail_sum = np.array([s.service_sizes[:k][s.service_sizes[:k] > x].sum() for k in e])
    centering = m.alpha_r * tt * m.service.truncated_moments(x).mean_above
    assert np.abs(ld.V - ld.V_below[x] - (tail_sum - centering) / 15).max() <= 1e-9


def test_tail_variance_examples():
    assert tail_variance(TP, 2 / 3, 1.0, 2.5) == 0.0
    assert tail_variance(TP, 2 / 3, 1.0, 0.0) == pytest.approx((2 / 3) * (1 + 0.25), rel=1e-12)
    assert tail_variance(TP, 2 / 3, 1.0, 1.5) == pytest.approx(26 / 27, rel=1e-12)
    assert total_variance(TP, 2 / 3, 1.5) == pytest.approx((2 / 3) * (2.25 + 0.25), rel=1e-12)
    with pytest.raises(ValueError):
        tail_variance(TP, 2 / 3, 1.0, 1.0)


@pytest.mark.parametrize("x", [0.5, 1.5])
def test_tail_variance_monte_carlo(x):
    spec = HeavyTrafficSpec(TP, ScaledGamma(2.25, 1.5), 1.0, (30,))
    (m,) = build(spec)
    vals = []
    for rep in range(1500):
        s = generate(m.interarrival, m.service, [], 900.0, SeedPlan(77, (rep,)))
        vals.append(scale_load(s, m, [1.0], [x]).tail(x)[0])
    vals = np.array(vals)
    n = vals.size
    v = vals.var(ddof=1)
    se = np.sqrt((np.mean((vals - vals.mean()) ** 4) - v**2) / n)
    # at finite r the arrival part runs at alpha^r / alpha of its limit
    assert abs(v - tail_variance(TP, spec.alpha, spec.a, x)) <= 4 * se + 0.04
