import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bl_bruteforce
from srptlab.point_measures import (
    ZERO,
    FinitePointMeasure,
    bl_distance,
    dirac,
    integrate,
    scale_mass,
    truncated_stats,
)

chi = lambda x: x


def test_integrate_examples():
    assert integrate(chi, dirac(2) + dirac(3)) == 5
    assert integrate(lambda x: 1.0, ZERO) == 0
    assert integrate(lambda x: x if x <= 2 else 0.0, dirac(1) + dirac(3)) == 1


def test_truncated_stats_examples():
    assert truncated_stats(dirac(1) + dirac(3), 2) == (1, 1, 1, 3)
    assert truncated_stats(dirac(2), 2) == (1, 2, 0, 0)
    assert truncated_stats(ZERO, 5) == (0, 0, 0, 0)


def test_scale_mass_examples():
    m = scale_mass(dirac(2), 0.5)
    assert m.sorted_atoms().tolist() == [[2.0, 0.5]]
    assert scale_mass(ZERO, 3.0).is_zero
    m = scale_mass(dirac(1, 2.0), 3)
    assert m.sorted_atoms().tolist() == [[1.0, 6.0]]
    assert integrate(chi, m) == 6


def test_invalid_atoms_rejected():
    with pytest.raises(ValueError):
        FinitePointMeasure.from_atoms([(-1.0, 1.0)])
    with pytest.raises(ValueError):
        FinitePointMeasure.from_atoms([(1.0, 0.0)])
    with pytest.raises(ValueError):
        scale_mass(dirac(1), 0)


def test_json_roundtrip_sorted():
    m = FinitePointMeasure.from_atoms([(3.0, 1.0), (1.0, 0.5)])
    assert json.loads(m.to_json()) == [[1.0, 0.5], [3.0, 1.0]]
    assert FinitePointMeasure.from_json(m.to_json()) == m


def test_bl_examples():
    assert bl_distance(dirac(1) + dirac(2), dirac(2) + dirac(1)) == 0
    assert bl_distance(dirac(0), ZERO) == pytest.approx(1.0, abs=1e-9)
    assert bl_distance(dirac(1), dirac(1.25)) == pytest.approx(0.25, abs=1e-9)
    assert bl_bruteforce([(1.0, 1.0)], [(1.25, 1.0)]) == pytest.approx(0.25, abs=1e-12)
    assert bl_bruteforce([(0.0, 1.0)], []) == pytest.approx(1.0, abs=1e-12)


atoms = st.lists(
    st.tuples(
        st.sampled_from([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0]) | st.floats(0, 6, allow_nan=False),
        st.floats(0.05, 3, allow_nan=False),
    ),
    max_size=3,
)


@settings(max_examples=150, deadline=None)
@given(atoms, atoms)
def test_bl_matches_bruteforce(a, b):
    got = bl_distance(FinitePointMeasure.from_atoms(a), FinitePointMeasure.from_atoms(b))
    assert got == pytest.approx(bl_bruteforce(a, b), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(atoms, atoms, atoms)
def test_bl_metric_axioms(a, b, c):
    x, y, z = (FinitePointMeasure.from_atoms(v) for v in (a, b, c))
    assert bl_distance(x, y) == pytest.approx(bl_distance(y, x), abs=1e-9)
    assert bl_distance(x, x) <= 1e-12
    assert bl_distance(x, z) <= bl_distance(x, y) + bl_distance(y, z) + 1e-9


@settings(max_examples=100, deadline=None)
@given(atoms, st.floats(0, 6))
def test_truncation_partitions_mass_and_work(a, x):
    m = FinitePointMeasure.from_atoms(a)
    mb, wb, ma, wa = truncated_stats(m, x)
    assert mb + ma == pytest.approx(m.total_mass, rel=1e-12, abs=1e-15)
    assert wb + wa == pytest.approx(integrate(chi, m), rel=1e-12, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(atoms, atoms, st.floats(-2, 2), st.floats(0.1, 3))
def test_integrate_linear(a, b, k, s):
    x, y = FinitePointMeasure.from_atoms(a), FinitePointMeasure.from_atoms(b)
    f = lambda u: np.sin(u)
    g = lambda u: u * u
    lhs = integrate(lambda u: k * f(u) + g(u), x)
    assert lhs == pytest.approx(k * integrate(f, x) + integrate(g, x), abs=1e-9)
    assert integrate(f, x + y) == pytest.approx(integrate(f, x) + integrate(f, y), abs=1e-9)
    assert integrate(g, scale_mass(x, s)) == pytest.approx(s * integrate(g, x), rel=1e-12, abs=1e-12)


def test_bl_convergence_implies_integral_convergence():
    rng = np.random.default_rng(3)
    target = FinitePointMeasure.from_atoms([(1.0, 0.7), (2.0, 1.3)])
    for n in (10, 100, 1000):
        approx = FinitePointMeasure.from_atoms([(1.0 + 1.0 / n, 0.7), (2.0 - 0.5 / n, 1.3 + 1.0 / n)])
        d = bl_distance(approx, target)
        for _ in range(5):
            a, b = rng.uniform(-1, 1, 2)
            g = lambda u: np.clip(a + b * np.sin(u), -1, 1)  # |g| <= 1, Lipschitz <= 1
            assert abs(integrate(g, approx) - integrate(g, target)) <= d + 1e-9
