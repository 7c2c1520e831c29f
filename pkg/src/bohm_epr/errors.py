"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """A point lies outside the positivity domain of the amplitude.

    ``nearest_strip`` is the ``(u_lo, u_hi)`` positivity strip closest to the
    offending coordinate, before any inset is applied.
    """

    def __init__(self, u: float, nearest_strip: tuple[float, float], message: str | None = None):
        self.u = float(u)
        self.nearest_strip = nearest_strip
        if message is None:
            lo, hi = nearest_strip
            message = f"u={self.u!r} is outside the positivity domain (nearest strip ({lo!r}, {hi!r}))"
        super().__init__(message)


class PoleError(ArithmeticError):
    """Evaluation requested at (or within tolerance of) a pole.

    ``side`` is +1 or -1, the sign of the vanishing quantity at the
    requested point, i.e. the side from which the pole is approached.
    """

    def __init__(self, x: float, side: int, message: str | None = None):
        self.x = float(x)
        self.side = int(side)
        super().__init__(message or f"pole at or near x={self.x!r} (approached from side {self.side:+d})")


class UnphysicalError(ValueError):
    """G^2 < 0 at the point, so the momentum field is undefined there."""

    def __init__(self, u: float, g_squared: float):
        self.u = float(u)
        self.g_squared = float(g_squared)
        super().__init__(f"G^2={self.g_squared!r} < 0 at u={self.u!r}; momentum undefined")


class RootRefinementError(RuntimeError):
    """Bisection hit its iteration cap; ``bracket`` is the best bracket reached."""

    def __init__(self, bracket, iterations: int):
        self.bracket = bracket
        self.iterations = iterations
        super().__init__(
            f"root refinement did not converge in {iterations} iterations; "
            f"best bracket [{bracket.lo!r}, {bracket.hi!r}]"
        )


class NonFiniteIntegrandError(ValueError):
    """The integrand returned NaN or Inf at ``abscissa``."""

    def __init__(self, abscissa: float, value: float):
        self.abscissa = float(abscissa)
        self.value = value
        super().__init__(f"non-finite integrand value {value!r} at x={self.abscissa!r}")
