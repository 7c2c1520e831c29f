"""Bohmian momentum fields under the EPR condition and flows along them.

The guidance law p_i = dS/dx_i together with R^2 dS/dx1 = G(u) and the EPR
condition fix the momenta as ``p1 = G/R^2``, ``p2 = -p1``. The phase S itself
is never available; :func:`integrability_diagnostic` measures how far the
momentum field is from being a gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import epr_model as em
from .epr_model import ModelParams
from .errors import DomainError, UnphysicalError
from .numerics import Grid1D, SampledField, central_diff, integrate_1d

__all__ = [
    "MomentumSample",
    "TrajectoryState",
    "momentum_fields",
    "momentum_ratio",
    "p2_dual_path",
    "epr_residual",
    "integrability_diagnostic",
    "integrate_trajectory",
    "phase_increment_along_path",
]


@dataclass(frozen=True)
class MomentumSample:
    x1: float
    x2: float
    p1: float | None
    p2: float | None
    physical: bool


@dataclass(frozen=True)
class TrajectoryState:
    lam: float
    x1: float
    x2: float
    p1: float
    p2: float
    halted: bool = False

    @property
    def u(self) -> float:
        return self.x1 + self.x2


def momentum_ratio(u, params: ModelParams):
    """G/R^2 on the configured branch; NaN where G^2 < 0."""
    return em._momentum_ratio(u, params, raise_unphysical=False)


def momentum_fields(x1: float, x2: float, params: ModelParams) -> MomentumSample:
    u = x1 + x2
    em.check_domain(u, params)
    p1 = float(momentum_ratio(u, params))
    if math.isnan(p1):
        return MomentumSample(x1, x2, None, None, False)
    return MomentumSample(x1, x2, p1, -p1, True)


def p2_dual_path(u, params: ModelParams):
    """-G/R^2 recomputed from the Hamilton-Jacobi relation instead of G^2.

    ``(G/R^2)^2 = hbar^2 (m^2 + R''/R)``, i.e. the momentum magnitude implied
    by the quantum potential in the convention where the amplitude
    constraint holds. NaN where the radicand is negative.
    """
    em.check_domain(u, params)
    radicand = params.hbar**2 * (params.m**2 + em._r_second_over_r(u, params))
    with np.errstate(invalid="ignore"):
        return -params.g_branch * np.sqrt(radicand)


def epr_residual(
    grid_x1: Grid1D,
    grid_x2: Grid1D,
    params: ModelParams,
    p2: Callable | None = None,
) -> SampledField:
    """Field of p1 + p2 over the physical points of a (x1, x2) grid.

    ``p2`` optionally replaces the momentum of particle 2 by a callable of
    u (e.g. :func:`p2_dual_path`, or a deliberately faulty version). Points
    that are out of the domain or unphysical are masked out.
    """
    x1, x2 = np.meshgrid(grid_x1.points(), grid_x2.points(), indexing="ij")
    u = x1 + x2
    ok = em.in_domain(u, params)
    p1 = np.full(u.shape, np.nan)
    uu = u[ok]
    p1[ok] = momentum_ratio(uu, params)
    ok &= np.isfinite(p1)
    if p2 is None:
        p2v = -p1
    else:
        p2v = np.full(u.shape, np.nan)
        p2v[ok] = p2(u[ok], params)
    res = p1 + p2v
    ok &= np.isfinite(res)
    return SampledField((grid_x1, grid_x2), np.where(ok, res, np.nan), ok)


def integrability_diagnostic(
    grid: Grid1D,
    params: ModelParams,
    ratio: Callable | None = None,
) -> SampledField:
    """Mixed-partial mismatch d(p1)/dx2 - d(p2)/dx1 = 2 d/du (G/R^2) on a u-grid.

    Computed by central differences of the sampled ratio. ``ratio``
    replaces G/R^2 by any callable of u (used for stubs). Zero everywhere
    iff the momentum field is a gradient.

    Raises:
        DomainError: a grid point is outside the positivity domain.
        UnphysicalError: G^2 < 0 at a grid point.
    """
    u = grid.points()
    if ratio is None:
        em.check_domain(u, params)
        q = em._momentum_ratio(u, params)
    else:
        q = np.broadcast_to(np.asarray(ratio(u), dtype=float), u.shape)
    d = central_diff(SampledField((grid,), q), 0, 1)
    return SampledField((grid,), 2.0 * d.values, d.mask, d.stencil)


def _rk4_step(f, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _physical(u: float, params: ModelParams) -> bool:
    return bool(em.in_domain(u, params)) and em.solve_G_squared(u, params) >= 0


def integrate_trajectory(
    start: tuple[float, float],
    lambda_span: tuple[float, float],
    step: float,
    params: ModelParams,
) -> list[TrajectoryState]:
    """Integrate dx_i/dlambda = p_i with fixed-step RK4.

    The right-hand side depends only on u, which the flow conserves, so
    trajectories are straight lines of slope (p1, -p1). Integration stops
    with ``halted=True`` on the last state if the next step would reach an
    out-of-domain or unphysical point.

    Raises:
        UnphysicalError: the start point has G^2 < 0.
        DomainError: the start point is outside the domain.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    lam0, lam1 = map(float, lambda_span)
    if not lam1 >= lam0:
        raise ValueError("lambda_span must be increasing")
    x1, x2 = map(float, start)
    u0 = x1 + x2
    em.check_domain(u0, params)
    g2 = em.solve_G_squared(u0, params)
    if g2 < 0:
        raise UnphysicalError(u0, g2)

    def rhs(y):
        p = float(momentum_ratio(y[0] + y[1], params))
        return np.array([p, -p])

    n_steps = int(round((lam1 - lam0) / step))
    y = np.array([x1, x2])
    p = rhs(y)
    states = [TrajectoryState(lam0, x1, x2, float(p[0]), float(p[1]))]
    for i in range(1, n_steps + 1):
        y_new = _rk4_step(rhs, y, step)
        if not _physical(y_new[0] + y_new[1], params):
            last = states[-1]
            states[-1] = TrajectoryState(last.lam, last.x1, last.x2, last.p1, last.p2, halted=True)
            break
        y = y_new
        p = rhs(y)
        states.append(TrajectoryState(lam0 + i * step, float(y[0]), float(y[1]), float(p[0]), float(p[1])))
    return states


def phase_increment_along_path(
    path: Sequence[tuple[float, float]],
    params: ModelParams,
    momentum: Callable | None = None,
    n_panels: int = 4,
) -> float:
    """Line integral of (p1, p2) . dx along a polyline.

    Each segment is integrated with composite Gauss-Legendre quadrature.
    The result depends on the path whenever the integrability diagnostic is
    nonzero; for a counter-clockwise closed loop it equals minus the area
    integral of that mismatch. ``momentum`` replaces the model field by a
    callable ``(x1, x2) -> (p1, p2)`` on arrays.

    Raises:
        DomainError: a path point leaves the domain, or consecutive points lie
            in different positivity strips.
    """
    pts = [tuple(map(float, p)) for p in path]
    if len(pts) < 2:
        return 0.0

    def field(x1, x2):
        if momentum is not None:
            return momentum(x1, x2)
        u = x1 + x2
        em.check_domain(u, params)
        p1 = em._momentum_ratio(u, params)
        return p1, -p1

    total = []
    for (a1, a2), (b1, b2) in zip(pts[:-1], pts[1:]):
        if momentum is None:
            ua, ub = a1 + a2, b1 + b2
            em.check_domain([ua, ub], params)
            if em.nearest_strip(ua, params) != em.nearest_strip(ub, params):
                raise DomainError(ub, em.nearest_strip(ua, params), "consecutive path points lie in different strips")
        d1, d2 = b1 - a1, b2 - a2
        if d1 == 0.0 and d2 == 0.0:
            continue

        def integrand(t, a1=a1, a2=a2, d1=d1, d2=d2):
            p1, p2 = field(a1 + t * d1, a2 + t * d2)
            return np.asarray(p1) * d1 + np.asarray(p2) * d2

        total.append(integrate_1d(integrand, 0.0, 1.0, n_panels))
    return math.fsum(total)
