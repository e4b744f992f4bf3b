import math

import pytest

from srptlab.distributions import DiscreteFinite, Exponential, ExponentialInterarrival, ScaledGamma, TwoPoint, Uniform
from srptlab.ht_sequence import HeavyTrafficSpec, ModelAtR, build, initial_condition, validate

TP = TwoPoint(1, 0.5, 2)


def test_build_example():
    (m,) = build(HeavyTrafficSpec(TP, ExponentialInterarrival(1.0), 1.0, (10,)))
    assert m.alpha_r == pytest.approx(0.6, abs=1e-15)
    assert m.rho == pytest.approx(0.9, abs=1e-15)
    assert 10 * (1 - m.rho) == pytest.approx(1.0, abs=1e-12)
    assert m.interarrival.mean == pytest.approx(1 / 0.6)


def test_critical_and_rejected():
    for m in build(HeavyTrafficSpec(TP, ExponentialInterarrival(1.0), 0.0, (1, 5, 50))):
        assert m.rho == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        build(HeavyTrafficSpec(TP, ExponentialInterarrival(1.0), 1.0, (1,)))


@pytest.mark.parametrize("gamma", [-2.0, 0.5, 1.0, 3.0])
def test_heavy_traffic_exact(gamma):
    spec = HeavyTrafficSpec(Uniform(0, 3), ScaledGamma(2.0, 1.0), gamma, (4, 8, 16, 100, 1000))
    for m in build(spec):
        assert m.r * (1 - m.rho) == pytest.approx(gamma, abs=1e-12 * m.r)
        assert m.a_r * m.alpha_r == pytest.approx(spec.a * spec.alpha, rel=1e-12)


def test_initial_condition_examples():
    assert initial_condition(10, 4, TwoPoint(1, 0.5, 2)) == [2.0] * 20
    assert initial_condition(7, 0, TP) == []
    assert initial_condition(7, 0, Exponential(1.0)) == []
    jobs = initial_condition(100, 3, Exponential(1.0))
    assert jobs == [30.0] * 10
    assert sum(jobs) / 100 == 3
    assert len(jobs) / 100 == 0.1


@pytest.mark.parametrize("r", [3, 5, 10, 17, 40, 99])
def test_initial_workload_error(r):
    w = sum(initial_condition(r, 1.3, TP)) / r
    assert abs(w - 1.3) <= 2 / r
    assert sum(initial_condition(r * r, 2.0, Exponential(1.0))) / (r * r) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("svc", [TP, Uniform(0.5, 2), DiscreteFinite(((1, 0.3), (3, 0.7))), Exponential(2.0)])
def test_validate_builtins_pass(svc):
    models = build(HeavyTrafficSpec(svc, ExponentialInterarrival(1.0), 1.0, (5, 10, 20)))
    rep = validate(models, svc, 1.0)
    assert rep.ok
    tails = [c for c in rep.checks if c.name == "no_work_above_x_star"]
    if isinstance(svc, Exponential):
        assert [c.status for c in tails] == ["n/a"]
    else:
        assert all(c.quantity == 0 for c in tails)


def test_validate_detects_tail_violation():
    x_star = 2.0
    models = []
    for r in (4, 16, 64, 256):
        p = 1 / math.sqrt(r)
        nu_r = DiscreteFinite(((1.0, (1 - p) / 2), (2.0, (1 - p) / 2), (x_star + 1, p)))
        models.append(ModelAtR(r=r, alpha_r=1.0, interarrival=ExponentialInterarrival(1.0), service=nu_r))
    rep = validate(models, TP)
    tail = [c for c in rep.checks if c.name == "no_work_above_x_star"]
    assert [c.status for c in tail] == ["fail"] * 4
    assert [c.quantity for c in tail] == pytest.approx([(x_star + 1) * math.sqrt(r) for r in (4, 16, 64, 256)])
    assert not rep.ok
