"""Uniform grids, finite-difference oracles, bracketing root finding and quadrature.

Everything here is deliberately independent of the physics modules so it can
serve as the reference against which closed-form expressions are checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonFiniteIntegrandError, RootRefinementError

__all__ = [
    "Grid1D",
    "SampledField",
    "Bracket",
    "central_diff",
    "bracket_roots",
    "refine_root",
    "integrate_1d",
    "fit_convergence_order",
    "STENCIL_CENTRAL",
    "STENCIL_FORWARD",
    "STENCIL_BACKWARD",
]

STENCIL_CENTRAL = 0
STENCIL_FORWARD = 1
STENCIL_BACKWARD = 2

_MIN_POINTS = 5


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` points from ``start`` to ``stop`` inclusive."""

    start: float
    stop: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < _MIN_POINTS:
            raise ValueError(f"grid needs at least {_MIN_POINTS} points, got n={self.n}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("grid endpoints must be finite")
        if not self.stop > self.start:
            raise ValueError(f"grid requires stop > start, got [{self.start}, {self.stop}]")

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.n - 1)

    def point(self, i: int) -> float:
        if i == self.n - 1:
            return float(self.stop)
        return self.start + i * self.spacing

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n)

    @classmethod
    def centered(cls, center: float, h: float, n: int = _MIN_POINTS) -> "Grid1D":
        """Odd-sized grid with spacing ``h`` whose middle point is ``center``."""
        if n % 2 == 0:
            raise ValueError("centered grid needs an odd point count")
        half = (n - 1) // 2
        return cls(center - half * h, center + half * h, n)

    @classmethod
    def from_points(cls, x: Sequence[float], rtol: float = 1e-9) -> "Grid1D":
        """Recover a grid from explicit coordinates, rejecting non-uniform spacing."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < _MIN_POINTS:
            raise ValueError(f"grid needs at least {_MIN_POINTS} points")
        dx = np.diff(x)
        h = (x[-1] - x[0]) / (x.size - 1)
        if h <= 0 or np.max(np.abs(dx - h)) > rtol * abs(h):
            raise ValueError("non-uniform grid")
        return cls(float(x[0]), float(x[-1]), int(x.size))


@dataclass(frozen=True)
class SampledField:
    """A real field on a tensor-product uniform grid (1D or 2D).

    ``mask`` marks valid samples. Masked-out samples hold NaN; every valid
    sample must be finite. ``stencil`` is set on derivative outputs and
    records, per point, which stencil produced the value along the
    differentiated axis.
    """

    grids: tuple[Grid1D, ...]
    values: np.ndarray
    mask: np.ndarray | None = None
    stencil: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        grids = tuple(self.grids)
        if len(grids) not in (1, 2):
            raise ValueError("only 1D and 2D fields are supported")
        values = np.array(self.values, dtype=float)
        shape = tuple(g.n for g in grids)
        if values.shape != shape:
            raise ValueError(f"values shape {values.shape} does not match grid shape {shape}")
        if self.mask is None:
            mask = np.ones(shape, dtype=bool)
        else:
            mask = np.array(self.mask, dtype=bool)
            if mask.shape != shape:
                raise ValueError("mask shape does not match grid shape")
        if not np.all(np.isfinite(values[mask])):
            raise ValueError("field contains non-finite values at valid points")
        values[~mask] = np.nan
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def ndim(self) -> int:
        return len(self.grids)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Meshgrid coordinates (``indexing='ij'``)."""
        return tuple(np.meshgrid(*(g.points() for g in self.grids), indexing="ij"))

    @classmethod
    def sample(cls, f: Callable[..., np.ndarray], *grids: Grid1D) -> "SampledField":
        """Evaluate a vectorized ``f(*coords)``; non-finite results become masked."""
        coords = np.meshgrid(*(g.points() for g in grids), indexing="ij")
        with np.errstate(invalid="ignore", divide="ignore"):
            values = np.broadcast_to(np.asarray(f(*coords), dtype=float), coords[0].shape)
        mask = np.isfinite(values)
        return cls(grids, np.where(mask, values, np.nan), mask)

    def interior(self, width: int = 1) -> tuple[slice, ...]:
        return tuple(slice(width, g.n - width) for g in self.grids)


def central_diff(fld: SampledField, axis: int = 0, order: int = 1) -> SampledField:
    """Second-order finite-difference derivative of a sampled field.

    Interior points use central stencils; the two boundary points on each
    end use one-sided second-order stencils. A derivative is masked out
    wherever any sample its stencil touches is masked out.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if not 0 <= axis < fld.ndim:
        raise ValueError(f"axis {axis} out of range for a {fld.ndim}D field")
    g = fld.grids[axis]
    if g.n < _MIN_POINTS:
        raise ValueError("grid too small")
    h = g.spacing
    f = np.moveaxis(np.asarray(fld.values), axis, 0)
    out = np.empty_like(f)
    # difference form keeps constant fields exactly zero
    with np.errstate(invalid="ignore"):
        df = f[1:] - f[:-1]
        if order == 1:
            out[1:-1] = (df[1:] + df[:-1]) / (2.0 * h)
            out[0] = (3.0 * df[0] - df[1]) / (2.0 * h)
            out[-1] = (3.0 * df[-1] - df[-2]) / (2.0 * h)
        else:
            h2 = h * h
            out[1:-1] = (df[1:] - df[:-1]) / h2
            out[0] = (-2.0 * df[0] + 3.0 * df[1] - df[2]) / h2
            out[-1] = (2.0 * df[-1] - 3.0 * df[-2] + df[-3]) / h2
    stencil = np.full(f.shape, STENCIL_CENTRAL, dtype=np.int8)
    stencil[0] = STENCIL_FORWARD
    stencil[-1] = STENCIL_BACKWARD
    out = np.moveaxis(out, 0, axis)
    stencil = np.moveaxis(stencil, 0, axis)
    mask = np.isfinite(out)
    return SampledField(fld.grids, np.where(mask, out, np.nan), mask, stencil)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("bracket requires lo < hi")
        if not self.f_lo * self.f_hi < 0:
            raise ValueError("bracket endpoints must have strictly opposite signs")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def bracket_roots(
    f: Callable[[float], float],
    interval: tuple[float, float],
    n_probe: int,
    skipped: list[float] | None = None,
) -> list[Bracket]:
    """Find sign changes of ``f`` between consecutive uniform probe points.

    Probes where ``f`` is exactly zero or non-finite are stepped over, so a
    bracket always spans two probes with strictly opposite signs. Non-finite
    (or raising) probes are appended to ``skipped`` if given. Roots closer
    together than the probe spacing, and even-multiplicity roots, are missed.
    """
    if n_probe < 2:
        raise ValueError("n_probe must be at least 2")
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ValueError("interval must satisfy lo < hi")
    probes = np.linspace(a, b, n_probe)
    brackets: list[Bracket] = []
    prev_x = prev_f = None
    for x in probes:
        x = float(x)
        try:
            fx = float(f(x))
        except (ArithmeticError, ValueError):
            fx = math.nan
        if not math.isfinite(fx):
            if skipped is not None:
                skipped.append(x)
            continue
        if fx == 0.0:
            continue
        if prev_f is not None and (prev_f < 0) != (fx < 0):
            brackets.append(Bracket(prev_x, x, prev_f, fx))
        prev_x, prev_f = x, fx
    return brackets


def refine_root(
    f: Callable[[float], float],
    bracket: Bracket,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Bisect ``bracket`` until its width is at most ``tol``; return the midpoint.

    The returned value always lies inside the initial bracket. If ``tol`` is
    below the floating-point resolution at the root, bisection stops once the
    midpoint can no longer split the bracket.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi, f_lo = bracket.lo, bracket.hi, bracket.f_lo
    f_hi = bracket.f_hi
    for _ in range(max_iter):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        fm = float(f(mid))
        if fm == 0.0:
            return mid
        if (fm < 0) == (f_lo < 0):
            lo, f_lo = mid, fm
        else:
            hi, f_hi = mid, fm
    raise RootRefinementError(Bracket(lo, hi, f_lo, f_hi), max_iter)


def _panel_edges(a: float, b: float, n_panels: int, singular_point: float | None) -> np.ndarray:
    if singular_point is None:
        return np.linspace(a, b, n_panels + 1)
    c = float(singular_point)
    if a < c < b:
        raise ValueError("singular_point must lie outside the open integration interval")
    d_a, d_b = abs(a - c), abs(b - c)
    near, far = min(d_a, d_b), max(d_a, d_b)
    if near == 0.0:
        raise ValueError("singular_point coincides with an endpoint; inset the interval")
    dist = np.geomspace(near, far, n_panels + 1)
    edges = c + dist if c <= a else c - dist
    edges = np.sort(edges)
    edges[0], edges[-1] = a, b
    return edges


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    n_panels: int,
    *,
    singular_point: float | None = None,
    nodes: int = 8,
) -> float:
    """Composite Gauss-Legendre quadrature of ``f`` over ``[a, b]``.

    ``f`` is called once on an array of all abscissae. When
    ``singular_point`` is given the panels are geometrically graded in
    distance from that point, which resolves integrands like ``1/(x - c)``
    with a modest panel count. Summation is exactly rounded (``math.fsum``)
    and therefore independent of evaluation order.
    """
    if not b > a:
        raise ValueError("integrate_1d requires a < b")
    if n_panels < 1:
        raise ValueError("n_panels must be >= 1")
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    edges = _panel_edges(float(a), float(b), int(n_panels), singular_point)
    left, right = edges[:-1, None], edges[1:, None]
    half = 0.5 * (right - left)
    x = (0.5 * (left + right) + half * xi[None, :]).ravel()
    w = (half * wi[None, :]).ravel()
    with np.errstate(all="ignore"):
        fx = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    bad = ~np.isfinite(fx)
    if bad.any():
        i = int(np.argmax(bad))
        raise NonFiniteIntegrandError(x[i], float(fx[i]))
    return math.fsum((w * fx).tolist())


def fit_convergence_order(spacings: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(spacing)``."""
    h = np.log(np.asarray(spacings, dtype=float))
    e = np.log(np.asarray(errors, dtype=float))
    if h.size < 2:
        raise ValueError("need at least two resolutions")
    slope, _ = np.polyfit(h, e, 1)
    return float(slope)
