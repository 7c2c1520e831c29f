"""Effective metric of the static EPR model and the Hawking conformal wormhole.

Two independent routes to the metric component g11 are provided:

* :func:`metric_as_printed` evaluates the closed expression
  ``[-C1^2/(16 m^2) + 3 C1^2 sin^2/(16 m^2)] / [C1 sin / (2 m^2)]`` verbatim.
* :func:`metric_from_constraint` evaluates ``(eta11/m^2) G^2/R^4`` with G^2
  obtained from the nonlinear amplitude constraint.

:func:`audit_metric_consistency` compares them without preferring either.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import epr_model as em
from .epr_model import ModelParams
from .errors import PoleError, UnphysicalError
from .numerics import Bracket, bracket_roots, integrate_1d, refine_root

__all__ = [
    "Regime",
    "MetricSample",
    "Root",
    "SingularityReport",
    "AuditRow",
    "AuditReport",
    "WormholeParams",
    "DEFAULT_POLE_TOL",
    "DEFAULT_ROOT_TOL",
    "printed_numerator",
    "printed_denominator",
    "metric_as_printed",
    "metric_from_constraint",
    "conformal_factor",
    "sample_metric",
    "find_singularities",
    "audit_metric_consistency",
    "hawking_conformal_factor",
    "hawking_metric",
    "hawking_distance_antiderivative",
    "proper_distance",
]

DEFAULT_POLE_TOL = 1e-9
DEFAULT_ROOT_TOL = 1e-12
DEFAULT_ZERO_TOL = 1e-6


class Regime(str, enum.Enum):
    REGULAR = "regular"
    POLE = "pole"
    ZERO_CROSSING_NEIGHBORHOOD = "zero_crossing_neighborhood"
    OUTSIDE_DOMAIN = "outside_domain"
    UNPHYSICAL_G2 = "unphysical_G2"


def _sin(u, params: ModelParams):
    return np.sin(params.m * np.asarray(u, dtype=float) + params.C2)


def printed_numerator(u, params: ModelParams):
    s = _sin(u, params)
    k = params.C1**2 / (16.0 * params.m**2)
    out = -k + 3.0 * k * s * s
    return float(out) if np.ndim(out) == 0 else out


def printed_denominator(u, params: ModelParams):
    out = params.C1 / (2.0 * params.m**2) * _sin(u, params)
    return float(out) if np.ndim(out) == 0 else out


def metric_as_printed(u: float, params: ModelParams, pole_tol: float = DEFAULT_POLE_TOL) -> float:
    """g11 from the closed printed expression, including its implicit sign folding.

    Raises:
        PoleError: ``|sin(m u + C2)| < pole_tol``; ``side`` is the sign of sin.
    """
    s = float(_sin(u, params))
    if abs(s) < pole_tol:
        raise PoleError(u, 1 if s >= 0 else -1)
    return printed_numerator(u, params) / printed_denominator(u, params)


def metric_from_constraint(u: float, params: ModelParams, pole_tol: float = DEFAULT_POLE_TOL) -> float:
    """g11 = (eta11 / m^2) G^2 / R^4 with G^2 from the amplitude constraint.

    Raises:
        PoleError: at a root of sin(m u + C2).
        DomainError: outside the positivity strips.
        UnphysicalError: G^2 < 0.
    """
    s = float(_sin(u, params))
    if abs(s) < pole_tol:
        raise PoleError(u, 1 if s >= 0 else -1)
    g2 = em.solve_G_squared(u, params)
    if g2 < 0:
        raise UnphysicalError(u, g2)
    return params.eta11 / params.m**2 * g2 / em.amplitude_R4(u, params)


def conformal_factor(x1, x2, params: ModelParams, q=None):
    """1 - Q / (2 m^p hbar^2); ``q`` substitutes a stub quantum potential."""
    if q is None:
        q = em.quantum_potential(x1, x2, params)[2]
    out = em.conformal_denominator(q, params)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MetricSample:
    u: float
    g11_as_printed: float | None
    g11_from_constraint: float | None
    conformal_factor: float | None
    regime: Regime
    pole_side: int | None = None


def sample_metric(
    u: float,
    params: ModelParams,
    pole_tol: float = DEFAULT_POLE_TOL,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> MetricSample:
    """Evaluate both metric routes at ``u`` and classify the point.

    A value of ``None`` marks a component that is undefined at the point
    (pole, outside the domain, or G^2 < 0).
    """
    u = float(u)
    s = float(_sin(u, params))
    if abs(s) < pole_tol:
        return MetricSample(u, None, None, None, Regime.POLE, 1 if s >= 0 else -1)
    printed = metric_as_printed(u, params, pole_tol)
    if not em.in_domain(u, params):
        return MetricSample(u, printed, None, None, Regime.OUTSIDE_DOMAIN)
    cf = conformal_factor(u, 0.0, params)
    g2 = em.solve_G_squared(u, params)
    if g2 < 0:
        return MetricSample(u, printed, None, cf, Regime.UNPHYSICAL_G2)
    constraint = params.eta11 / params.m**2 * g2 / em.amplitude_R4(u, params)
    near_zero = abs(3.0 * s * s - 1.0) < zero_tol or abs(5.0 * s * s - 1.0) < zero_tol
    regime = Regime.ZERO_CROSSING_NEIGHBORHOOD if near_zero else Regime.REGULAR
    return MetricSample(u, printed, constraint, cf, regime)


@dataclass(frozen=True)
class Root:
    value: float
    bracket: Bracket
    tol: float

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "bracket": [self.bracket.lo, self.bracket.hi],
            "tol": self.tol,
        }


@dataclass(frozen=True)
class SingularityReport:
    u_range: tuple[float, float]
    poles: list[Root]
    zero_crossings_as_printed: list[Root]
    zero_crossings_from_constraint: list[Root]
    n_probe: int
    skipped: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "u_range": list(self.u_range),
            "n_probe": self.n_probe,
            "poles": [r.as_dict() for r in self.poles],
            "zero_crossings_as_printed": [r.as_dict() for r in self.zero_crossings_as_printed],
            "zero_crossings_from_constraint": [r.as_dict() for r in self.zero_crossings_from_constraint],
            "skipped_probes": list(self.skipped),
        }


def _roots(f, interval, n_probe, tol, skipped) -> list[Root]:
    return [Root(refine_root(f, b, tol), b, tol) for b in bracket_roots(f, interval, n_probe, skipped)]


def find_singularities(
    params: ModelParams,
    u_range: tuple[float, float],
    tol: float = DEFAULT_ROOT_TOL,
    probes_per_strip: int = 64,
) -> SingularityReport:
    """Locate poles and zero crossings of g11 in ``u_range``.

    Poles are roots of sin(m u + C2). Zero crossings are searched separately
    for the printed numerator (over the whole range) and for G^2 (inside each
    inset positivity strip, where it is defined).
    """
    lo, hi = map(float, u_range)
    if not hi > lo:
        raise ValueError("u_range must be nonempty")
    if not tol > 0:
        raise ValueError("tol must be positive")
    width = math.pi / params.m
    n_probe = max(probes_per_strip, int(math.ceil((hi - lo) / width * probes_per_strip)) + 1)
    skipped: list[float] = []
    poles = _roots(lambda u: float(_sin(u, params)), (lo, hi), n_probe, tol, skipped)
    printed = _roots(lambda u: printed_numerator(u, params), (lo, hi), n_probe, tol, skipped)
    constraint: list[Root] = []
    for s_lo, s_hi in em.domain_strips(params, (lo, hi)):
        k = max(probes_per_strip, int(math.ceil((s_hi - s_lo) / width * probes_per_strip)) + 1)
        constraint += _roots(lambda u: em.solve_G_squared(u, params), (s_lo, s_hi), k, tol, skipped)
    return SingularityReport((lo, hi), poles, printed, constraint, n_probe, skipped)


@dataclass(frozen=True)
class AuditRow:
    u: float
    status: str
    g11_as_printed: float | None = None
    g11_from_constraint: float | None = None
    abs_gap: float | None = None
    rel_gap: float | None = None
    G2_implied_by_printed: float | None = None
    G2_from_constraint: float | None = None
    agree: bool | None = None


@dataclass(frozen=True)
class AuditReport:
    """Side-by-side comparison of the two metric routes.

    ``agree_anywhere`` / ``agree_everywhere`` refer to the evaluable rows
    only; the report makes no claim about which route is correct.
    """

    rows: list[AuditRow]
    tol: float

    @property
    def evaluated(self) -> list[AuditRow]:
        return [r for r in self.rows if r.status == "evaluated"]

    @property
    def agree_anywhere(self) -> bool:
        return any(r.agree for r in self.evaluated)

    @property
    def agree_everywhere(self) -> bool:
        ev = self.evaluated
        return bool(ev) and all(r.agree for r in ev)

    def summary(self) -> dict:
        ev = self.evaluated
        gaps = [r.abs_gap for r in ev]
        counts: dict[str, int] = {}
        for r in self.rows:
            counts[r.status] = counts.get(r.status, 0) + 1
        return {
            "n_samples": len(self.rows),
            "n_evaluated": len(ev),
            "status_counts": dict(sorted(counts.items())),
            "tol": self.tol,
            "agree_anywhere": self.agree_anywhere,
            "agree_everywhere": self.agree_everywhere,
            "n_agree": sum(1 for r in ev if r.agree),
            "max_abs_gap": max(gaps) if gaps else None,
            "min_abs_gap": min(gaps) if gaps else None,
        }


def audit_metric_consistency(
    params: ModelParams,
    u_samples: Sequence[float],
    tol: float = 1e-10,
    pole_tol: float = DEFAULT_POLE_TOL,
) -> AuditReport:
    """Compare printed g11 with constraint-derived g11 at each sample.

    Also reports the G^2 the printed metric would imply,
    ``m^2 * g11_printed * R^4 / eta11``, next to the constraint's G^2.
    Samples that cannot be evaluated are kept with a status string.
    """
    rows = []
    for u in u_samples:
        u = float(u)
        if abs(float(_sin(u, params))) < pole_tol:
            rows.append(AuditRow(u, "pole"))
            continue
        if not em.in_domain(u, params):
            rows.append(AuditRow(u, "outside_domain", g11_as_printed=metric_as_printed(u, params, pole_tol)))
            continue
        printed = metric_as_printed(u, params, pole_tol)
        r4 = em.amplitude_R4(u, params)
        g2 = em.solve_G_squared(u, params)
        implied = params.m**2 * printed * r4 / params.eta11
        if g2 < 0:
            rows.append(
                AuditRow(u, "unphysical_G2", g11_as_printed=printed, G2_implied_by_printed=implied, G2_from_constraint=g2)
            )
            continue
        constraint = params.eta11 / params.m**2 * g2 / r4
        gap = abs(printed - constraint)
        scale = max(abs(printed), abs(constraint))
        rel = gap / scale if scale > 0 else 0.0
        rows.append(
            AuditRow(u, "evaluated", printed, constraint, gap, rel, implied, g2, gap < tol)
        )
    return AuditReport(rows, tol)


@dataclass(frozen=True)
class WormholeParams:
    b: float = 1.0
    x0: float = 0.0

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("throat scale b must be positive")


def hawking_conformal_factor(x, wp: WormholeParams):
    """Omega^2 = 1 + b^2 / (x - x0)^2.

    Raises:
        PoleError: at x = x0, where the conformal factor diverges.
    """
    d = np.asarray(x, dtype=float) - wp.x0
    if np.any(d == 0):
        raise PoleError(wp.x0, 1)
    r = wp.b / d
    out = 1.0 + r * r
    return float(out) if np.ndim(out) == 0 else out


def hawking_metric(wp: WormholeParams) -> Callable:
    return lambda x: hawking_conformal_factor(x, wp)


def hawking_distance_antiderivative(s, b: float):
    """Antiderivative of sqrt(1 + b^2/s^2) for s > 0.

    ``F(s) = sqrt(s^2 + b^2) - b ln((b + sqrt(s^2 + b^2)) / s)``.
    """
    s = np.asarray(s, dtype=float)
    r = np.hypot(s, b)
    out = r - b * np.log((b + r) / s)
    return float(out) if np.ndim(out) == 0 else out


def proper_distance(
    x_a: float,
    x_b: float,
    metric: Callable,
    poles: Sequence[float] = (),
    n_panels: int = 200,
) -> float:
    """Integral of sqrt(|g(x)|) from ``x_a`` to ``x_b``.

    ``metric`` must accept an array of abscissae. ``poles`` lists known
    divergences of the metric; none may lie in ``[x_a, x_b]``. Panels are
    graded toward the nearest pole when it is closer than the interval
    length.

    Raises:
        PoleError: a recorded pole lies inside the closed interval.
    """
    if not x_b > x_a:
        raise ValueError("proper_distance requires x_a < x_b")
    for p in poles:
        if x_a <= p <= x_b:
            raise PoleError(p, 1, f"pole at x={p!r} inside [{x_a!r}, {x_b!r}]; inset the interval")
    length = x_b - x_a
    singular = None
    if poles:
        nearest = min(poles, key=lambda p: min(abs(p - x_a), abs(p - x_b)))
        if min(abs(nearest - x_a), abs(nearest - x_b)) < length:
            singular = nearest
    return integrate_1d(lambda x: np.sqrt(np.abs(metric(x))), x_a, x_b, n_panels, singular_point=singular)
