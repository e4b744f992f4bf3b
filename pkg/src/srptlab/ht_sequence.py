"""Heavy-traffic ladders of models indexed by r.

The service law is held fixed across r and heavy traffic is injected through the
arrival rate: alpha^r = beta (1 - gamma / r), so r (1 - rho^r) = gamma for every r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .distributions import is_unbounded

__all__ = ["HeavyTrafficSpec", "ModelAtR", "AssumptionCheck", "build", "validate", "initial_condition"]


@dataclass(frozen=True)
class HeavyTrafficSpec:
    service: object
    interarrival: object  # only its shape (coefficient of variation) is used
    gamma: float
    r_values: tuple
    w0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        if any(r < 1 for r in self.r_values):
            raise ValueError("r values must be >= 1")
        if any(b <= a for a, b in zip(self.r_values, self.r_values[1:])):
            raise ValueError("r values must be strictly increasing")
        if self.w0 < 0:
            raise ValueError("w0 must be nonnegative")

    @property
    def alpha(self) -> float:
        """Limiting arrival rate, 1 / <chi, nu>."""
        return 1.0 / self.service.moments().mean

    @property
    def base_interarrival(self):
        return self.interarrival.rescaled(1.0 / self.alpha)

    @property
    def a(self) -> float:
        return self.base_interarrival.sd


@dataclass(frozen=True)
class ModelAtR:
    r: float
    alpha_r: float
    interarrival: object
    service: object
    initial_jobs: tuple = ()
    alpha: float = math.nan  # limiting values, for the centerings and variances
    a: float = math.nan

    @property
    def rho(self) -> float:
        return self.alpha_r * self.service.moments().mean

    @property
    def a_r(self) -> float:
        return self.interarrival.sd


def build(spec: HeavyTrafficSpec) -> list[ModelAtR]:
    mean = spec.service.moments().mean
    beta = 1.0 / mean
    base = spec.base_interarrival
    models = []
    for r in spec.r_values:
        if spec.gamma / r >= 1:
            raise ValueError(f"gamma / r = {spec.gamma / r} >= 1 at r = {r}")
        alpha_r = beta * (1.0 - spec.gamma / r)
        models.append(
            ModelAtR(
                r=r,
                alpha_r=alpha_r,
                interarrival=base.rescaled(1.0 / alpha_r),
                service=spec.service,
                initial_jobs=tuple(initial_condition(r, spec.w0, spec.service)),
                alpha=beta,
                a=base.sd,
            )
        )
    return models


def initial_condition(r: float, w0: float, service) -> list[float]:
    """Deterministic initial job sizes with scaled workload near ``w0``.

    Bounded service: floor(r w0 / x*) jobs of size x*.  Unbounded: floor(sqrt r)
    jobs sharing the workload r w0, so the scaled mass floor(sqrt r)/r vanishes.
    """
    if w0 < 0:
        raise ValueError("w0 must be nonnegative")
    if w0 == 0:
        return []
    x_star = service.moments().x_star
    if is_unbounded(x_star):
        n = math.isqrt(int(r)) if float(r).is_integer() else int(math.floor(math.sqrt(r)))
        return [r * w0 / n] * n
    return [float(x_star)] * int(math.floor(r * w0 / x_star))


@dataclass
class AssumptionCheck:
    name: str
    r: float | None
    quantity: float | None
    status: str  # "pass", "fail", "n/a"
    note: str = ""


@dataclass
class AssumptionReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def rows(self) -> list[dict]:
        return [c.__dict__.copy() for c in self.checks]


def _vanishing(values, tol):
    """Nonincreasing along the ladder and (nearly) zero at its end."""
    return all(b <= a + tol for a, b in zip(values, values[1:])) and values[-1] <= tol


def validate(models: list[ModelAtR], limit_service=None, gamma: float | None = None, tol: float = 1e-9):
    """Analytic check of the heavy-traffic assumptions along a ladder.

    ``limit_service`` defaults to the service law of the last model.  Failures
    are report entries, never exceptions.
    """
    report = AssumptionReport()
    if not models:
        return report
    nu = limit_service if limit_service is not None else models[-1].service
    m = nu.moments()
    report.checks.append(
        AssumptionCheck("no_mass_at_zero", None, nu.mass_at(0.0), "pass" if nu.mass_at(0.0) == 0 else "fail")
    )
    ok2 = 0 < m.second_moment < math.inf
    report.checks.append(AssumptionCheck("finite_second_moment", None, m.second_moment, "pass" if ok2 else "fail"))

    diffs = []
    for mod in models:
        d = abs(mod.service.moments().second_moment - m.second_moment)
        diffs.append(d)
        report.checks.append(AssumptionCheck("second_moment_convergence", mod.r, d, "pass" if d <= tol else "pending"))
    _settle(report, "second_moment_convergence", _vanishing(diffs, tol))

    if gamma is not None:
        for mod in models:
            q = mod.r * (1.0 - mod.rho)
            ok = abs(q - gamma) <= 1e-12 * max(1.0, abs(gamma)) * mod.r
            report.checks.append(AssumptionCheck("heavy_traffic", mod.r, q, "pass" if ok else "fail"))

    if is_unbounded(m.x_star):
        report.checks.append(AssumptionCheck("no_work_above_x_star", None, None, "n/a", "x* is infinite"))
    else:
        # any level above x* will do; the tail mass of nu itself is zero there
        x = float(m.x_star) * (1 + 1e-6) + 1e-9
        tails = []
        for mod in models:
            q = mod.r * mod.service.truncated_moments(x).mean_above
            tails.append(q)
            report.checks.append(AssumptionCheck("no_work_above_x_star", mod.r, q, "pass" if q <= tol else "pending"))
        _settle(report, "no_work_above_x_star", _vanishing(tails, tol))
    report.checks.append(
        AssumptionCheck(
            "lindeberg_feller",
            None,
            None,
            "n/a",
            "implied by second-moment convergence; not checked separately",
        )
    )
    return report


def _settle(report, name, ok):
    for c in report.checks:
        if c.name == name and c.status == "pending":
            c.status = "pass" if ok else "fail"
