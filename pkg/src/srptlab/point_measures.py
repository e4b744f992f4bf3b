"""Finite nonnegative point measures on the half line.

A measure is a set of atoms ``(location, weight)`` with ``location >= 0`` and
``weight > 0``.  Jobs carry unit weight; diffusion scaling multiplies every
weight by ``1/r``.  ``<g, xi>`` is :func:`integrate`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import linprog

__all__ = [
    "FinitePointMeasure",
    "ZERO",
    "dirac",
    "integrate",
    "truncated_stats",
    "scale_mass",
    "bl_distance",
]


@dataclass(frozen=True, eq=False)
class FinitePointMeasure:
    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        loc = np.array(self.locations, dtype=float).reshape(-1)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if loc.shape != w.shape:
            raise ValueError("locations and weights must have the same length")
        if loc.size and (not np.all(np.isfinite(loc)) or loc.min() < 0):
            raise ValueError("atom locations must be finite and nonnegative")
        if w.size and (not np.all(np.isfinite(w)) or w.min() <= 0):
            raise ValueError("atom weights must be finite and positive")
        loc.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]]) -> "FinitePointMeasure":
        atoms = list(atoms)
        if not atoms:
            return cls(np.empty(0), np.empty(0))
        loc, w = zip(*atoms)
        return cls(np.asarray(loc, dtype=float), np.asarray(w, dtype=float))

    @classmethod
    def unit(cls, locations) -> "FinitePointMeasure":
        """Unit mass at each location (one atom per job)."""
        loc = np.asarray(locations, dtype=float).reshape(-1)
        return cls(loc, np.ones_like(loc))

    def __len__(self) -> int:
        return self.locations.size

    def __add__(self, other: "FinitePointMeasure") -> "FinitePointMeasure":
        return FinitePointMeasure(
            np.concatenate([self.locations, other.locations]),
            np.concatenate([self.weights, other.weights]),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinitePointMeasure):
            return NotImplemented
        a, b = self.sorted_atoms(), other.sorted_atoms()
        return a.shape == b.shape and bool(np.all(a == b))

    def __repr__(self) -> str:
        return f"FinitePointMeasure({self.sorted_atoms().tolist()})"

    @property
    def is_zero(self) -> bool:
        return self.locations.size == 0

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def first_moment(self) -> float:
        return float(np.dot(self.weights, self.locations))

    def sorted_atoms(self) -> np.ndarray:
        """Atoms as an ``(n, 2)`` array sorted by location, equal locations merged."""
        if self.is_zero:
            return np.empty((0, 2))
        loc, inv = np.unique(self.locations, return_inverse=True)
        w = np.zeros_like(loc)
        np.add.at(w, inv, self.weights)
        return np.column_stack([loc, w])

    def to_json(self) -> str:
        return json.dumps(self.sorted_atoms().tolist())

    @classmethod
    def from_json(cls, text: str) -> "FinitePointMeasure":
        return cls.from_atoms((float(x), float(w)) for x, w in json.loads(text))


ZERO = FinitePointMeasure(np.empty(0), np.empty(0))


def dirac(x: float, weight: float = 1.0) -> FinitePointMeasure:
    return FinitePointMeasure(np.array([x]), np.array([weight]))


def _evaluate(g: Callable, x: np.ndarray) -> np.ndarray:
    try:
        vals = np.broadcast_to(np.asarray(g(x), dtype=float), x.shape)
    except (TypeError, ValueError):
        vals = np.array([g(float(v)) for v in x], dtype=float)
    return vals


def integrate(g: Callable, xi: FinitePointMeasure) -> float:
    """``<g, xi>``: weighted sum of ``g`` over the atoms of ``xi``.

    ``g`` may be vectorized over numpy arrays or a plain scalar function.
    """
    if xi.is_zero:
        return 0.0
    return float(np.dot(xi.weights, _evaluate(g, xi.locations)))


def truncated_stats(xi: FinitePointMeasure, x: float):
    """Mass and work on ``[0, x]`` and on ``(x, inf)``.

    Returns ``(mass_below, work_below, mass_above, work_above)``.
    """
    if x < 0:
        raise ValueError("truncation level must be nonnegative")
    below = xi.locations <= x
    w, loc = xi.weights, xi.locations
    mass_below = float(w[below].sum())
    work_below = float(np.dot(w[below], loc[below]))
    mass_above = float(w[~below].sum())
    work_above = float(np.dot(w[~below], loc[~below]))
    return mass_below, work_below, mass_above, work_above


def scale_mass(xi: FinitePointMeasure, c: float) -> FinitePointMeasure:
    if not c > 0:
        raise ValueError("scale factor must be positive")
    return FinitePointMeasure(xi.locations, xi.weights * c)


def bl_distance(xi: FinitePointMeasure, zeta: FinitePointMeasure) -> float:
    """Bounded-Lipschitz distance ``sup |<g, xi> - <g, zeta>|``.

    The sup runs over ``|g| <= 1`` with Lipschitz constant ``<= 1``.  On point
    measures it is attained by a function that is piecewise linear between the
    merged atom locations, so it reduces to a linear program over the node
    values with box constraints and adjacent-gap constraints.
    """
    loc = np.concatenate([xi.locations, zeta.locations])
    if loc.size == 0:
        return 0.0
    w = np.concatenate([xi.weights, -zeta.weights])
    nodes, inv = np.unique(loc, return_inverse=True)
    c = np.zeros_like(nodes)
    np.add.at(c, inv, w)
    n = nodes.size
    if n == 1:
        return float(abs(c[0]))
    gaps = np.diff(nodes)
    # g[i+1] - g[i] <= gap and g[i] - g[i+1] <= gap
    rows = np.zeros((2 * (n - 1), n))
    idx = np.arange(n - 1)
    rows[idx, idx + 1] = 1.0
    rows[idx, idx] = -1.0
    rows[n - 1 + idx, idx] = 1.0
    rows[n - 1 + idx, idx + 1] = -1.0
    res = linprog(
        -c,
        A_ub=rows,
        b_ub=np.concatenate([gaps, gaps]),
        bounds=[(-1.0, 1.0)] * n,
        method="highs",
    )
    if not res.success:  # pragma: no cover - the LP is always feasible and bounded
        raise RuntimeError(f"bl_distance LP failed: {res.message}")
    return float(max(-res.fun, 0.0))
