"""Service-time and interarrival laws with closed-form moments.

Every law is an immutable dataclass.  Sampling takes a ``numpy.random.Generator``
and returns an array; the same generator state always gives the same draws.
Truncated moments use the closed interval ``[0, x]`` for the lower part and
``(x, inf)`` for the tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import ClassVar, Union

import numpy as np

__all__ = [
    "UNBOUNDED",
    "Unbounded",
    "TwoPoint",
    "DiscreteFinite",
    "Uniform",
    "Deterministic",
    "Exponential",
    "BoundedPareto",
    "ExponentialInterarrival",
    "DeterministicInterarrival",
    "ScaledGamma",
    "ScaledUniform",
    "Moments",
    "TruncatedMoments",
    "sample",
    "moments",
    "truncated_moments",
    "is_continuity_point",
    "service_from_config",
    "interarrival_from_config",
    "to_config",
]


class Unbounded:
    """Marker for an infinite support supremum.

    Deliberately not a float: arithmetic with it raises, so code dividing by
    ``x_star`` has to branch on ``is_unbounded``.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __reduce__(self):
        return (Unbounded, ())


UNBOUNDED = Unbounded()


def is_unbounded(x) -> bool:
    """True for the UNBOUNDED marker and for float infinity."""
    return x is UNBOUNDED or (isinstance(x, (int, float)) and x == math.inf)


@dataclass(frozen=True)
class Moments:
    mean: float
    second_moment: float
    b: float
    x_star: Union[float, Unbounded]

    def __iter__(self):
        return iter((self.mean, self.second_moment, self.b, self.x_star))


@dataclass(frozen=True)
class TruncatedMoments:
    mean_below: float
    second_below: float
    mean_above: float
    second_above: float

    def __iter__(self):
        return iter((self.mean_below, self.second_below, self.mean_above, self.second_above))


class _Law:
    family: ClassVar[str]

    def to_config(self) -> dict:
        out = {"family": self.family}
        out.update({f.name: getattr(self, f.name) for f in fields(self)})
        return out


# --- service laws -----------------------------------------------------------


class _Discrete(_Law):
    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        x, p = self.atoms()
        if x.size == 1:
            return np.full(size, x[0])
        # inverse CDF on a uniform draw keeps the stream usage fixed at one per sample
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        return x[np.searchsorted(cdf, rng.random(size), side="right")]

    def moments(self) -> Moments:
        x, p = self.atoms()
        m1 = float(np.dot(p, x))
        m2 = float(np.dot(p, x * x))
        return Moments(m1, m2, math.sqrt(max(m2 - m1 * m1, 0.0)), float(x.max()))

    def truncated_moments(self, x: float) -> TruncatedMoments:
        xs, p = self.atoms()
        lo = xs <= x
        return TruncatedMoments(
            float(np.dot(p[lo], xs[lo])),
            float(np.dot(p[lo], xs[lo] ** 2)),
            float(np.dot(p[~lo], xs[~lo])),
            float(np.dot(p[~lo], xs[~lo] ** 2)),
        )

    def mass_at(self, x: float) -> float:
        xs, p = self.atoms()
        return float(p[xs == x].sum())


def _check_atoms(x, p):
    if len(x) != len(p) or not len(x):
        raise ValueError("need matching, nonempty atom and probability lists")
    if any(v <= 0 or not math.isfinite(v) for v in x):
        raise ValueError("service atoms must be finite and strictly positive")
    if any(q <= 0 for q in p):
        raise ValueError("atom probabilities must be positive")
    if abs(sum(p) - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {sum(p)}, not 1")
    if len(set(x)) != len(x):
        raise ValueError("atom locations must be distinct")


@dataclass(frozen=True)
class TwoPoint(_Discrete):
    """``x1`` with probability ``p1``, else ``x2``."""

    x1: float
    p1: float
    x2: float
    family: ClassVar[str] = "two_point"

    def __post_init__(self):
        if not 0 < self.p1 <= 1:
            raise ValueError("p1 must lie in (0, 1]")
        if self.p1 < 1:
            _check_atoms([self.x1, self.x2], [self.p1, 1 - self.p1])
        else:
            _check_atoms([self.x1], [1.0])

    def atoms(self):
        if self.p1 == 1:
            return np.array([self.x1]), np.array([1.0])
        return np.array([self.x1, self.x2]), np.array([self.p1, 1.0 - self.p1])


@dataclass(frozen=True)
class DiscreteFinite(_Discrete):
    points: tuple
    family: ClassVar[str] = "discrete"

    def __post_init__(self):
        pts = tuple((float(x), float(p)) for x, p in self.points)
        object.__setattr__(self, "points", pts)
        _check_atoms([x for x, _ in pts], [p for _, p in pts])

    def atoms(self):
        return (np.array([x for x, _ in self.points]), np.array([p for _, p in self.points]))

    def to_config(self) -> dict:
        return {"family": self.family, "points": [list(pt) for pt in self.points]}


@dataclass(frozen=True)
class Deterministic(_Discrete):
    x: float
    family: ClassVar[str] = "deterministic"

    def __post_init__(self):
        _check_atoms([self.x], [1.0])

    def atoms(self):
        return np.array([self.x]), np.array([1.0])


@dataclass(frozen=True)
class Uniform(_Law):
    lo: float
    hi: float
    family: ClassVar[str] = "uniform"

    def __post_init__(self):
        if not 0 <= self.lo < self.hi < math.inf:
            raise ValueError("uniform law needs 0 <= lo < hi < inf")

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)

    def _partial(self, a, b, k):
        # int_a^b u^k du / (hi - lo), restricted to the support
        a, b = max(a, self.lo), min(b, self.hi)
        if b <= a:
            return 0.0
        return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (self.hi - self.lo))

    def moments(self):
        m1 = self._partial(self.lo, self.hi, 1)
        m2 = self._partial(self.lo, self.hi, 2)
        return Moments(m1, m2, (self.hi - self.lo) / math.sqrt(12.0), float(self.hi))

    def truncated_moments(self, x):
        return TruncatedMoments(
            self._partial(0.0, x, 1),
            self._partial(0.0, x, 2),
            self._partial(x, self.hi, 1),
            self._partial(x, self.hi, 2),
        )

    def mass_at(self, x):
        return 0.0


@dataclass(frozen=True)
class Exponential(_Law):
    rate: float
    family: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not 0 < self.rate < math.inf:
            raise ValueError("rate must be positive and finite")

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)

    def moments(self):
        m = 1.0 / self.rate
        return Moments(m, 2 * m * m, m, UNBOUNDED)

    def truncated_moments(self, x):
        lam, m = self.rate, 1.0 / self.rate
        e = math.exp(-lam * x)
        # int_x^inf u^k lam e^{-lam u} du for k = 1, 2
        mean_above = e * (x + m)
        second_above = e * (x * x + 2 * x * m + 2 * m * m)
        return TruncatedMoments(m - mean_above, 2 * m * m - second_above, mean_above, second_above)

    def mass_at(self, x):
        return 0.0


@dataclass(frozen=True)
class BoundedPareto(_Law):
    """Pareto law with tail index ``shape`` truncated to ``[lo, hi]``."""

    shape: float
    lo: float
    hi: float
    family: ClassVar[str] = "bounded_pareto"

    def __post_init__(self):
        if not (self.shape > 0 and 0 < self.lo < self.hi < math.inf):
            raise ValueError("bounded Pareto needs shape > 0 and 0 < lo < hi < inf")

    @property
    def _norm(self):
        return self.shape * self.lo ** self.shape / (1.0 - (self.lo / self.hi) ** self.shape)

    def _partial(self, a, b, k):
        a, b = max(a, self.lo), min(b, self.hi)
        if b <= a:
            return 0.0
        e = k - self.shape
        if e == 0:
            return self._norm * math.log(b / a)
        return self._norm * (b ** e - a ** e) / e

    def sample(self, rng, size):
        u = rng.random(size)
        k, lo, hi = self.shape, self.lo, self.hi
        ratio = (lo / hi) ** k
        return lo * (1.0 - u * (1.0 - ratio)) ** (-1.0 / k)

    def moments(self):
        m1 = self._partial(self.lo, self.hi, 1)
        m2 = self._partial(self.lo, self.hi, 2)
        return Moments(m1, m2, math.sqrt(max(m2 - m1 * m1, 0.0)), float(self.hi))

    def truncated_moments(self, x):
        return TruncatedMoments(
            self._partial(0.0, x, 1),
            self._partial(0.0, x, 2),
            self._partial(x, self.hi, 1),
            self._partial(x, self.hi, 2),
        )

    def mass_at(self, x):
        return 0.0


ServiceDistribution = Union[TwoPoint, DiscreteFinite, Uniform, Deterministic, Exponential, BoundedPareto]

# --- interarrival laws ------------------------------------------------------
#
# Each law knows its mean and standard deviation ``a`` and can be rescaled to a
# new mean with the coefficient of variation held fixed, so a^r = a * (alpha / alpha^r).


@dataclass(frozen=True)
class ExponentialInterarrival(_Law):
    rate: float
    family: ClassVar[str] = "exponential"

    def __post_init__(self):
        if not 0 < self.rate < math.inf:
            raise ValueError("rate must be positive and finite")

    @property
    def mean(self):
        return 1.0 / self.rate

    @property
    def sd(self):
        return 1.0 / self.rate

    def rescaled(self, mean):
        return ExponentialInterarrival(1.0 / mean)

    def sample(self, rng, size):
        return rng.exponential(1.0 / self.rate, size)


@dataclass(frozen=True)
class DeterministicInterarrival(_Law):
    gap: float
    family: ClassVar[str] = "deterministic"

    def __post_init__(self):
        if not 0 < self.gap < math.inf:
            raise ValueError("gap must be positive and finite")

    @property
    def mean(self):
        return self.gap

    @property
    def sd(self):
        return 0.0

    def rescaled(self, mean):
        return DeterministicInterarrival(mean)

    def sample(self, rng, size):
        return np.full(size, float(self.gap))


@dataclass(frozen=True)
class ScaledGamma(_Law):
    shape: float
    mean: float
    family: ClassVar[str] = "scaled_gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.mean > 0):
            raise ValueError("shape and mean must be positive")

    @property
    def sd(self):
        return self.mean / math.sqrt(self.shape)

    def rescaled(self, mean):
        return replace(self, mean=mean)

    def sample(self, rng, size):
        return rng.gamma(self.shape, self.mean / self.shape, size)


@dataclass(frozen=True)
class ScaledUniform(_Law):
    mean: float
    halfwidth: float
    family: ClassVar[str] = "scaled_uniform"

    def __post_init__(self):
        if not 0 <= self.halfwidth < self.mean:
            raise ValueError("need 0 <= halfwidth < mean so gaps stay positive")

    @property
    def sd(self):
        return self.halfwidth / math.sqrt(3.0)

    def rescaled(self, mean):
        return ScaledUniform(mean, self.halfwidth * mean / self.mean)

    def sample(self, rng, size):
        return rng.uniform(self.mean - self.halfwidth, self.mean + self.halfwidth, size)


InterarrivalDistribution = Union[
    ExponentialInterarrival, DeterministicInterarrival, ScaledGamma, ScaledUniform
]

# --- functional surface -----------------------------------------------------


def sample(dist, rng: np.random.Generator, size: int | None = None):
    """Draw from ``dist``; a scalar when ``size`` is None."""
    if size is None:
        return float(dist.sample(rng, 1)[0])
    return dist.sample(rng, size)


def moments(dist) -> Moments:
    return dist.moments()


def truncated_moments(dist, x: float) -> TruncatedMoments:
    if x < 0:
        raise ValueError("truncation level must be nonnegative")
    return dist.truncated_moments(x)


def is_continuity_point(dist, x: float) -> bool:
    return dist.mass_at(x) == 0.0


_SERVICE = {c.family: c for c in (TwoPoint, DiscreteFinite, Uniform, Deterministic, Exponential, BoundedPareto)}
_INTERARRIVAL = {
    c.family: c
    for c in (ExponentialInterarrival, DeterministicInterarrival, ScaledGamma, ScaledUniform)
}


def _from_config(cfg: dict, table: dict, what: str):
    cfg = dict(cfg)
    try:
        cls = table[cfg.pop("family")]
    except KeyError as exc:
        raise ValueError(f"unknown or missing {what} family in {cfg!r}") from exc
    allowed = {f.name for f in fields(cls)}
    extra = set(cfg) - allowed
    if extra:
        raise ValueError(f"unknown keys for {cls.family}: {sorted(extra)}")
    missing = allowed - set(cfg)
    if missing:
        raise ValueError(f"missing keys for {cls.family}: {sorted(missing)}")
    return cls(**cfg)


def service_from_config(cfg: dict):
    """Build a service law from e.g. ``{"family": "two_point", "x1": 1, "p1": 0.5, "x2": 2}``."""
    return _from_config(cfg, _SERVICE, "service")


def interarrival_from_config(cfg: dict):
    return _from_config(cfg, _INTERARRIVAL, "interarrival")


def to_config(dist) -> dict:
    return dist.to_config()
