"""Closed-form fields of the static two-particle EPR solution and their residuals.

The amplitude satisfies R^4 = C1 sin(m u + C2) / (2 m^2) with u = x1 + x2.
Every field depends on the two coordinates only through u, so each partial
derivative with respect to x1 or x2 equals d/du. Closed-form derivatives are
hard-coded below; the ``finite_difference`` oracle paths resample the
amplitude on small uniform stencils along each coordinate axis and
differentiate with :func:`bohm_epr.numerics.central_diff`.

Conventions (see :class:`ModelParams`): the static d'Alembertian of particle
i contributes ``sigma * hbar^2 * R''/R`` to Q_i with ``sigma = -eta11``, and
the mass exponent in ``1 - Q/(2 m^p hbar^2)`` is ``mass_power``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .errors import DomainError, UnphysicalError
from .numerics import Grid1D, SampledField, central_diff

__all__ = [
    "ModelParams",
    "StripDomain",
    "QuantumFields",
    "amplitude_R",
    "amplitude_R2",
    "amplitude_R4",
    "domain_strips",
    "in_domain",
    "nearest_strip",
    "check_domain",
    "quantum_potential",
    "quantum_mass_sq",
    "conformal_denominator",
    "constraint_terms",
    "solve_G_squared",
    "residual_eq11",
    "residual_static_hj",
    "residual_static_continuity",
    "residual_momentum_balance",
    "quantum_fields",
    "oracle_convergence",
]

Oracle = Literal["closed_form", "finite_difference"]


@dataclass(frozen=True)
class ModelParams:
    """Physical constants and convention switches.

    Attributes:
        m: Mass (natural units).
        hbar: Action scale.
        C1: Amplitude constant of the sinusoidal solution.
        C2: Phase offset of the sinusoidal solution (radians).
        mass_power: Exponent p in ``1 - Q/(2 m^p hbar^2)``; 2 is dimensionally
            consistent, 1 is the alternative printed form.
        eta11: Spatial metric component sign. Fixes ``sigma = -eta11``.
        g_branch: Sign of G = g_branch * sqrt(G^2), shared by both particles.
        inset_epsilon: Points closer than this (in u) to a strip boundary are
            rejected. Defaults to ``1e-6 * pi / m``.
    """

    m: float = 1.0
    hbar: float = 1.0
    C1: float = 2.0
    C2: float = 0.0
    mass_power: int = 2
    eta11: int = -1
    g_branch: int = 1
    inset_epsilon: float | None = None

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("m must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not self.C1 > 0:
            raise ValueError("C1 must be positive")
        if not math.isfinite(self.C2):
            raise ValueError("C2 must be finite")
        if self.mass_power not in (1, 2):
            raise ValueError("mass_power must be 1 or 2")
        if self.eta11 not in (1, -1):
            raise ValueError("eta11 must be +1 or -1")
        if self.g_branch not in (1, -1):
            raise ValueError("g_branch must be +1 or -1")
        if self.inset_epsilon is not None and not (0 < self.inset_epsilon < math.pi / (4 * self.m)):
            raise ValueError("inset_epsilon must lie in (0, pi/(4m))")

    @property
    def sigma(self) -> int:
        return -self.eta11

    @property
    def inset(self) -> float:
        if self.inset_epsilon is None:
            return 1e-6 * math.pi / self.m
        return self.inset_epsilon

    @property
    def amplitude_scale(self) -> float:
        """A = C1 / (2 m^2), so that R^4 = A sin(m u + C2)."""
        return self.C1 / (2.0 * self.m**2)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def _phase(u, params: ModelParams):
    return params.m * np.asarray(u, dtype=float) + params.C2


def nearest_strip(u: float, params: ModelParams) -> tuple[float, float]:
    """Positivity strip (uninset) whose centre is closest to ``u``."""
    k = round((params.m * u + params.C2 - math.pi / 2) / (2 * math.pi))
    lo = (2 * math.pi * k - params.C2) / params.m
    return lo, lo + math.pi / params.m


def in_domain(u, params: ModelParams):
    """True where ``u`` lies in a positivity strip at least ``inset`` from its ends."""
    phi = np.mod(_phase(u, params), 2 * math.pi)
    # rounding slack so the ends of an inset strip count as inside
    margin = params.m * params.inset - 8 * np.finfo(float).eps * (1.0 + abs(params.C2))
    return (phi >= margin) & (phi <= math.pi - margin)


def check_domain(u, params: ModelParams) -> None:
    ok = np.asarray(in_domain(u, params))
    if not ok.all():
        bad = float(np.asarray(u, dtype=float)[~ok].flat[0]) if ok.ndim else float(u)
        raise DomainError(bad, nearest_strip(bad, params))


@dataclass(frozen=True)
class StripDomain:
    """Inset positivity strips of R^4 within a u-range."""

    strips: tuple[tuple[float, float], ...]
    inset_epsilon: float

    def __len__(self) -> int:
        return len(self.strips)

    def __iter__(self):
        return iter(self.strips)

    def strip_index(self, u: float) -> int | None:
        for i, (lo, hi) in enumerate(self.strips):
            if lo < u < hi:
                return i
        return None

    def contains(self, u: float) -> bool:
        return self.strip_index(u) is not None


def domain_strips(params: ModelParams, u_range: tuple[float, float], inset_epsilon: float | None = None) -> StripDomain:
    """All maximal subintervals of ``u_range`` where sin(m u + C2) > 0, inset at both ends."""
    u_lo, u_hi = map(float, u_range)
    if not u_hi > u_lo:
        raise ValueError("u_range must be nonempty")
    eps = params.inset if inset_epsilon is None else float(inset_epsilon)
    if not 0 < eps < math.pi / (4 * params.m):
        raise ValueError("inset_epsilon must lie in (0, pi/(4m))")
    m, c2 = params.m, params.C2
    k0 = math.floor((m * u_lo + c2) / (2 * math.pi)) - 1
    k1 = math.ceil((m * u_hi + c2) / (2 * math.pi)) + 1
    strips = []
    for k in range(k0, k1 + 1):
        lo = (2 * k * math.pi - c2) / m
        hi = ((2 * k + 1) * math.pi - c2) / m
        lo, hi = max(lo, u_lo) + eps, min(hi, u_hi) - eps
        if hi > lo:
            strips.append((lo, hi))
    return StripDomain(tuple(strips), eps)


# Closed-form amplitude chain; s = sin(m u + C2), c = cos(m u + C2).


def _sc(u, params: ModelParams):
    theta = _phase(u, params)
    return np.sin(theta), np.cos(theta)


def amplitude_R4(u, params: ModelParams):
    """R^4 = C1 sin(m u + C2) / (2 m^2)."""
    check_domain(u, params)
    s, _ = _sc(u, params)
    return _scalar_or_array(params.amplitude_scale * s)


def amplitude_R2(u, params: ModelParams):
    check_domain(u, params)
    s, _ = _sc(u, params)
    return _scalar_or_array(math.sqrt(params.amplitude_scale) * np.sqrt(s))


def amplitude_R(u, params: ModelParams):
    check_domain(u, params)
    s, _ = _sc(u, params)
    return _scalar_or_array(params.amplitude_scale**0.25 * s**0.25)


def _r2_derivs(u, params: ModelParams):
    """(R^2, d R^2/du, d^2 R^2/du^2)."""
    s, c = _sc(u, params)
    m, ra = params.m, math.sqrt(params.amplitude_scale)
    rs = np.sqrt(s)
    r2 = ra * rs
    d1 = 0.5 * m * ra * c / rs
    d2 = ra * m * m * (-0.25 * c * c / (s * rs) - 0.5 * rs)
    return r2, d1, d2


def _r_second_over_r(u, params: ModelParams):
    """R''/R = -m^2 (3 cos^2 / (16 sin^2) + 1/4); independent of C1."""
    s, c = _sc(u, params)
    return -params.m**2 * (3.0 * c * c / (16.0 * s * s) + 0.25)


def _fd_axis(f_of_x1x2, x1: float, x2: float, h: float, order: int) -> tuple[float, float]:
    """Central-difference derivative of order ``order`` at (x1, x2) along each axis."""
    out = []
    for axis in (0, 1):
        grid = Grid1D.centered((x1, x2)[axis], h)
        if axis == 0:
            vals = f_of_x1x2(grid.points(), np.full(grid.n, x2))
        else:
            vals = f_of_x1x2(np.full(grid.n, x1), grid.points())
        d = central_diff(SampledField((grid,), vals), 0, order)
        out.append(float(d.values[grid.n // 2]))
    return out[0], out[1]


def _require_h(h):
    if h is None or not h > 0:
        raise ValueError("finite_difference oracle requires a positive spacing h")
    return float(h)


def quantum_potential(x1, x2, params: ModelParams, oracle: Oracle = "closed_form", h: float | None = None):
    """Per-particle and total quantum potential ``(Q1, Q2, Q)``.

    ``Q_i = sigma * hbar^2 * (d^2 R / d x_i^2) / R``. With the
    ``finite_difference`` oracle (scalar points only), R is resampled on a
    five-point stencil of spacing ``h`` along each axis.
    """
    u = np.asarray(x1, dtype=float) + np.asarray(x2, dtype=float)
    check_domain(u, params)
    k = params.sigma * params.hbar**2
    if oracle == "closed_form":
        q = k * _r_second_over_r(u, params)
        q1 = q2 = _scalar_or_array(q)
        return q1, q2, _scalar_or_array(q + q)
    if oracle != "finite_difference":
        raise ValueError(f"unknown oracle {oracle!r}")
    h = _require_h(h)
    check_domain([float(u) - 2 * h, float(u) + 2 * h], params)
    d1, d2 = _fd_axis(lambda a, b: amplitude_R(a + b, params), float(x1), float(x2), h, 2)
    r = amplitude_R(float(u), params)
    q1, q2 = k * d1 / r, k * d2 / r
    return q1, q2, q1 + q2


def conformal_denominator(q, params: ModelParams):
    """``1 - Q / (2 m^p hbar^2)`` for a given Q."""
    return 1.0 - np.asarray(q, dtype=float) / (2.0 * params.m**params.mass_power * params.hbar**2)


def quantum_mass_sq(x1, x2, params: ModelParams, q=None):
    """M^2 = m^2 hbar^2 (1 - Q / (2 m^p hbar^2)).

    ``q`` overrides the model's quantum potential, which lets the formula be
    probed at hypothetical values (e.g. Q = 0).
    """
    if q is None:
        q = quantum_potential(x1, x2, params)[2]
    val = params.m**2 * params.hbar**2 * conformal_denominator(q, params)
    return _scalar_or_array(val)


def constraint_terms(u, params: ModelParams, oracle: Oracle = "closed_form", h: float | None = None):
    """Per-axis terms ``((R^2)')^2 - 2 R^2 (R^2)''`` for x1 and x2."""
    check_domain(u, params)
    if oracle == "closed_form":
        r2, d1, d2 = _r2_derivs(u, params)
        t = d1 * d1 - 2.0 * r2 * d2
        return _scalar_or_array(t), _scalar_or_array(t)
    if oracle != "finite_difference":
        raise ValueError(f"unknown oracle {oracle!r}")
    h = _require_h(h)
    u = float(u)
    check_domain([u - 2 * h, u + 2 * h], params)
    x1 = x2 = 0.5 * u
    f = lambda a, b: amplitude_R2(a + b, params)  # noqa: E731
    g1 = _fd_axis(f, x1, x2, h, 1)
    g2 = _fd_axis(f, x1, x2, h, 2)
    r2 = amplitude_R2(u, params)
    return tuple(g1[i] * g1[i] - 2.0 * r2 * g2[i] for i in (0, 1))


def solve_G_squared(u, params: ModelParams, oracle: Oracle = "closed_form", h: float | None = None):
    """G^2(u) from the nonlinear amplitude constraint.

    ``8 G^2 = hbar^2 (8 m^2 R^4 - sum_i [((R^2)')^2 - 2 R^2 (R^2)''])``. At
    ``hbar = 1`` this is the constraint verbatim; for other ``hbar`` the
    ``hbar^2`` factor follows from re-deriving it out of the Hamilton-Jacobi
    relation in the convention under which it holds. The result may be
    negative; that marks an unphysical region.
    """
    t1, t2 = constraint_terms(u, params, oracle, h)
    r4 = params.amplitude_scale * _sc(u, params)[0]
    g2 = params.hbar**2 * (8.0 * params.m**2 * r4 - (np.asarray(t1) + np.asarray(t2))) / 8.0
    return _scalar_or_array(g2)


def residual_eq11(u, G_squared, params: ModelParams, oracle: Oracle = "closed_form", h: float | None = None):
    """Left side of the constraint, ``8 G^2 + hbar^2 (sum_i terms_i - 8 m^2 R^4)``."""
    t1, t2 = constraint_terms(u, params, oracle, h)
    r4 = params.amplitude_scale * _sc(u, params)[0]
    res = 8.0 * np.asarray(G_squared, dtype=float) + params.hbar**2 * (
        np.asarray(t1) + np.asarray(t2) - 8.0 * params.m**2 * r4
    )
    return _scalar_or_array(res)


def _momentum_ratio(u, params: ModelParams, raise_unphysical: bool = True):
    """p1 = G/R^2 (with the configured branch); NaN where G^2 < 0 unless raising."""
    g2 = np.asarray(solve_G_squared(u, params))
    if raise_unphysical and np.any(g2 < 0):
        bad = np.flatnonzero(np.atleast_1d(g2) < 0)[0]
        uu = np.atleast_1d(np.asarray(u, dtype=float))
        raise UnphysicalError(float(uu[bad] if uu.size > 1 else uu[0]), float(np.atleast_1d(g2)[bad]))
    with np.errstate(invalid="ignore"):
        g = params.g_branch * np.sqrt(g2)
    r2 = np.asarray(amplitude_R2(u, params))
    return g / r2


def residual_static_hj(x1, x2, params: ModelParams, mass_power: int | Literal["both"] | None = None):
    """Static Hamilton-Jacobi residual with momenta p1 = G/R^2, p2 = -G/R^2.

    ``eta11 (p1^2 + p2^2) - 2 m^2 hbar^2 (1 - Q / (2 m^p hbar^2))``. Pass
    ``mass_power="both"`` to get ``{1: r1, 2: r2}`` side by side; an integer
    overrides ``params.mass_power``.

    Raises:
        UnphysicalError: G^2 < 0 at the point.
    """
    if mass_power == "both":
        return {p: residual_static_hj(x1, x2, params, p) for p in (1, 2)}
    if mass_power is not None:
        params = params.with_(mass_power=mass_power)
    u = np.asarray(x1, dtype=float) + np.asarray(x2, dtype=float)
    check_domain(u, params)
    p1 = _momentum_ratio(u, params)
    p2 = -p1
    q = quantum_potential(x1, x2, params)[2]
    lhs = params.eta11 * p1 * p1 + params.eta11 * p2 * p2
    rhs = 2.0 * params.m**2 * params.hbar**2 * conformal_denominator(q, params)
    return _scalar_or_array(lhs - rhs)


def residual_momentum_balance(x1, x2, params: ModelParams, mass_power: int | Literal["both"] | None = None):
    """``2 m^2 hbar^2 (1 - Q / (2 m^p hbar^2)) - 2 (G/R^2)^2``.

    Raises:
        UnphysicalError: G^2 < 0 at the point.
    """
    if mass_power == "both":
        return {p: residual_momentum_balance(x1, x2, params, p) for p in (1, 2)}
    if mass_power is not None:
        params = params.with_(mass_power=mass_power)
    u = np.asarray(x1, dtype=float) + np.asarray(x2, dtype=float)
    check_domain(u, params)
    p1 = _momentum_ratio(u, params)
    q = quantum_potential(x1, x2, params)[2]
    lhs = 2.0 * params.m**2 * params.hbar**2 * conformal_denominator(q, params)
    return _scalar_or_array(lhs - 2.0 * p1 * p1)


def _dG_squared(u, params: ModelParams):
    """d(G^2)/du from G^2 = hbar^2 (3 C1 / 32)(5 sin - 1/sin)."""
    s, c = _sc(u, params)
    return params.hbar**2 * (3.0 * params.C1 / 32.0) * params.m * c * (5.0 + 1.0 / (s * s))


def residual_static_continuity(
    x1,
    x2,
    params: ModelParams,
    oracle: Oracle = "closed_form",
    h: float | None = None,
    p2_scale: float = -1.0,
):
    """Static continuity residual ``d/dx1 (R^2 p1) + d/dx2 (R^2 p2)``.

    Uses p1 = G/R^2 and p2 = p2_scale * G/R^2; the EPR condition is
    ``p2_scale = -1``, for which the residual vanishes identically. The
    closed-form chain applies the product rule to ``R^2 * p``.

    Raises:
        UnphysicalError: G^2 < 0 at the point.
    """
    u = np.asarray(x1, dtype=float) + np.asarray(x2, dtype=float)
    check_domain(u, params)
    if oracle == "closed_form":
        p1 = _momentum_ratio(u, params)
        r2, dr2, _ = _r2_derivs(u, params)
        g = p1 * r2
        dg = _dG_squared(u, params) / (2.0 * g)
        dp1 = (dg * r2 - g * dr2) / (r2 * r2)
        d_flux1 = dr2 * p1 + r2 * dp1
        p2 = p2_scale * p1
        dp2 = p2_scale * dp1
        d_flux2 = dr2 * p2 + r2 * dp2
        return _scalar_or_array(d_flux1 + d_flux2)
    if oracle != "finite_difference":
        raise ValueError(f"unknown oracle {oracle!r}")
    h = _require_h(h)
    uf = float(u)
    check_domain([uf - 2 * h, uf + 2 * h], params)
    _momentum_ratio(np.array([uf - 2 * h, uf + 2 * h]), params)

    def flux(scale):
        def f(a, b):
            uu = a + b
            return amplitude_R2(uu, params) * (scale * _momentum_ratio(uu, params))

        return f

    d_flux1 = _fd_axis(flux(1.0), float(x1), float(x2), h, 1)[0]
    d_flux2 = _fd_axis(flux(p2_scale), float(x1), float(x2), h, 1)[1]
    return d_flux1 + d_flux2


@dataclass(frozen=True)
class QuantumFields:
    """Sampled amplitude, quantum potential and quantum mass on a u-grid."""

    R: SampledField
    R2: SampledField
    R4: SampledField
    Q1: SampledField
    Q2: SampledField
    Q: SampledField
    M2: SampledField


def quantum_fields(grid: Grid1D, params: ModelParams) -> QuantumFields:
    """Closed-form fields sampled on ``grid`` (all points must be in the domain)."""
    u = grid.points()
    check_domain(u, params)
    q1, q2, q = quantum_potential(u, 0.0 * u, params)
    mk = lambda v: SampledField((grid,), v)  # noqa: E731
    return QuantumFields(
        R=mk(amplitude_R(u, params)),
        R2=mk(amplitude_R2(u, params)),
        R4=mk(amplitude_R4(u, params)),
        Q1=mk(q1),
        Q2=mk(q2),
        Q=mk(q),
        M2=mk(quantum_mass_sq(u, 0.0 * u, params, q=q)),
    )


def oracle_convergence(
    params: ModelParams,
    interval: tuple[float, float],
    ns: tuple[int, ...] = (201, 401, 801),
) -> dict[str, dict]:
    """Max interior error of finite-difference fields against closed forms.

    For each grid size the amplitude is sampled along x1 (x2 = 0) on
    ``interval`` and differentiated with second-order stencils. Returned per
    quantity: grid sizes, spacings, max interior errors and the fitted
    convergence order.
    """
    from .numerics import fit_convergence_order

    errors: dict[str, list[float]] = {k: [] for k in ("Q", "dR2", "d2R2", "constraint_term", "G2")}
    spacings = []
    k = params.sigma * params.hbar**2
    for n in ns:
        grid = Grid1D(interval[0], interval[1], n)
        u = grid.points()
        check_domain(u, params)
        fr = SampledField((grid,), amplitude_R(u, params))
        fr2 = SampledField((grid,), amplitude_R2(u, params))
        d2r = central_diff(fr, 0, 2).values
        d1r2 = central_diff(fr2, 0, 1).values
        d2r2 = central_diff(fr2, 0, 2).values
        r = fr.values
        r2, e_d1, e_d2 = _r2_derivs(u, params)
        q_fd = 2.0 * k * d2r / r
        q_cf = 2.0 * k * _r_second_over_r(u, params)
        t_fd = d1r2 * d1r2 - 2.0 * r2 * d2r2
        t_cf = e_d1 * e_d1 - 2.0 * r2 * e_d2
        g2_fd = params.hbar**2 * (8.0 * params.m**2 * r2 * r2 - 2.0 * t_fd) / 8.0
        g2_cf = solve_G_squared(u, params)
        inner = slice(1, n - 1)
        for key, fd, cf in (
            ("Q", q_fd, q_cf),
            ("dR2", d1r2, e_d1),
            ("d2R2", d2r2, e_d2),
            ("constraint_term", t_fd, t_cf),
            ("G2", g2_fd, g2_cf),
        ):
            errors[key].append(float(np.max(np.abs(fd[inner] - cf[inner]))))
        spacings.append(grid.spacing)
    return {
        key: {
            "n": list(ns),
            "h": spacings,
            "max_error": errs,
            "order": fit_convergence_order(spacings, errs),
        }
        for key, errs in errors.items()
    }
