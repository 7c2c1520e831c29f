import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bohm_epr.errors import NonFiniteIntegrandError, RootRefinementError
from bohm_epr.numerics import (
    STENCIL_BACKWARD,
    STENCIL_CENTRAL,
    STENCIL_FORWARD,
    Bracket,
    Grid1D,
    SampledField,
    bracket_roots,
    central_diff,
    fit_convergence_order,
    integrate_1d,
    refine_root,
)


class TestGrid:
    def test_spacing_and_endpoint(self):
        g = Grid1D(0.0, 1.0, 11)
        assert g.spacing == pytest.approx(0.1)
        assert g.point(10) == 1.0
        assert abs(g.start + 10 * g.spacing - g.stop) < 4 * np.finfo(float).eps

    @pytest.mark.parametrize("args", [(0.0, 1.0, 4), (1.0, 0.0, 10), (0.0, 0.0, 10)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            Grid1D(*args)

    def test_from_points_rejects_nonuniform(self):
        with pytest.raises(ValueError, match="non-uniform"):
            Grid1D.from_points([0.0, 0.1, 0.2, 0.35, 0.4])
        assert Grid1D.from_points(np.linspace(0, 2, 9)) == Grid1D(0.0, 2.0, 9)

    def test_centered(self):
        g = Grid1D.centered(1.0, 0.25)
        assert g.points()[2] == 1.0
        assert g.spacing == pytest.approx(0.25)


class TestSampledField:
    def test_rejects_nonfinite(self):
        g = Grid1D(0, 1, 5)
        with pytest.raises(ValueError, match="non-finite"):
            SampledField((g,), [0, 1, np.inf, 2, 3])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            SampledField((Grid1D(0, 1, 5),), np.zeros(6))

    def test_sample_masks_nonfinite(self):
        g = Grid1D(-1, 1, 5)
        f = SampledField.sample(lambda x: np.sqrt(x), g)
        assert list(f.mask) == [False, False, True, True, True]


class TestCentralDiff:
    def test_sine_first_derivative(self):
        g = Grid1D(0.0, math.pi, 101)
        d = central_diff(SampledField.sample(np.sin, g), 0, 1)
        err = np.abs(d.values - np.cos(g.points()))
        assert err.max() < g.spacing**2

    def test_constant_second_derivative_is_zero(self):
        g = Grid1D(-3.0, 2.0, 17)
        d = central_diff(SampledField((g,), np.full(17, 4.2)), 0, 2)
        assert np.all(d.values == 0.0)

    def test_cubic_second_derivative(self):
        for n in (101, 201):
            g = Grid1D(0.0, 1.0, n)
            d = central_diff(SampledField.sample(lambda x: x**3, g), 0, 2)
            assert d.values[(n - 1) // 2] == pytest.approx(3.0, abs=1e-8)

    def test_quartic_error_ratio(self):
        # cubics are differentiated exactly, so the ratio is measured on x^4,
        # whose central-difference error at any point is exactly 2 h^2
        errs = []
        for n in (101, 201):
            g = Grid1D(0.0, 1.0, n)
            d = central_diff(SampledField.sample(lambda x: x**4, g), 0, 2)
            errs.append(abs(d.values[(n - 1) // 2] - 3.0))
        assert errs[0] == pytest.approx(2 * 0.01**2, rel=1e-6)
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=1e-3)

    def test_smooth_field_second_order(self):
        errs, hs = [], []
        for n in (101, 201, 401):
            g = Grid1D(0.0, 2.0, n)
            d = central_diff(SampledField.sample(np.exp, g), 0, 2)
            inner = slice(1, -1)
            errs.append(np.max(np.abs(d.values[inner] - np.exp(g.points()[inner]))))
            hs.append(g.spacing)
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)
        assert fit_convergence_order(hs, errs) == pytest.approx(2.0, abs=0.05)

    def test_boundary_stencils_second_order(self):
        errs = []
        for n in (101, 201):
            g = Grid1D(0.0, 1.0, n)
            d1 = central_diff(SampledField.sample(np.exp, g), 0, 1)
            errs.append(abs(d1.values[0] - 1.0))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)

    @pytest.mark.parametrize("order", [1, 2])
    def test_quadratics_exact_on_interior(self, order):
        g = Grid1D(-1.0, 3.0, 41)
        d = central_diff(SampledField.sample(lambda x: 2 * x * x - 3 * x + 1, g), 0, order)
        x = g.points()
        exact = 4 * x - 3 if order == 1 else np.full_like(x, 4.0)
        np.testing.assert_allclose(d.values[1:-1], exact[1:-1], atol=1e-11)

    def test_stencil_metadata(self):
        g = Grid1D(0, 1, 7)
        d = central_diff(SampledField.sample(np.sin, g), 0, 1)
        assert d.stencil[0] == STENCIL_FORWARD
        assert d.stencil[-1] == STENCIL_BACKWARD
        assert np.all(d.stencil[1:-1] == STENCIL_CENTRAL)

    def test_2d_axis(self):
        gx, gy = Grid1D(0, 1, 21), Grid1D(0, 2, 31)
        f = SampledField.sample(lambda x, y: x * x * y, gx, gy)
        dy = central_diff(f, axis=1, order=1)
        x, _ = f.coordinates()
        np.testing.assert_allclose(dy.values, x * x, atol=1e-12)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            central_diff(SampledField.sample(np.sin, Grid1D(0, 1, 5)), 0, 3)


class TestBrackets:
    def test_sine_root(self):
        b = bracket_roots(math.sin, (0.1, 6.2), 64)
        assert len(b) == 1 and b[0].contains(math.pi)

    def test_no_real_root(self):
        assert bracket_roots(lambda x: x * x + 1, (-2, 2), 64) == []

    def test_count_matches_direct_scan(self):
        f = lambda t: 3 * math.sin(t) ** 2 - 1  # noqa: E731
        probes = np.linspace(0.01, math.pi - 0.01, 128)
        signs = np.sign([f(t) for t in probes])
        expected = int(np.sum(signs[1:] != signs[:-1]))
        assert expected == 2
        assert len(bracket_roots(f, (0.01, math.pi - 0.01), 128)) == expected

    def test_exact_zero_probe_is_bracketed(self):
        b = bracket_roots(lambda x: x, (-1, 1), 5)
        assert len(b) == 1 and b[0].lo < 0 < b[0].hi

    def test_nonfinite_probes_skipped_and_recorded(self):
        skipped = []

        def f(x):
            return math.nan if abs(x - 0.5) < 0.05 else x - 0.25

        b = bracket_roots(f, (0.0, 1.0), 11, skipped)
        assert len(b) == 1
        assert skipped == pytest.approx([0.5])

    def test_bracket_invariant(self):
        with pytest.raises(ValueError):
            Bracket(0.0, 1.0, 1.0, 2.0)


class TestRefineRoot:
    def test_pi(self):
        (b,) = bracket_roots(math.sin, (0.1, 6.2), 64)
        assert abs(refine_root(math.sin, b, 1e-12) - math.pi) < 1e-12

    def test_magic_angle(self):
        f = lambda t: 3 * math.sin(t) ** 2 - 1  # noqa: E731
        b = bracket_roots(f, (0.01, math.pi / 2), 64)[0]
        assert refine_root(f, b, 1e-13) == pytest.approx(math.asin(3**-0.5), abs=1e-12)
        assert refine_root(f, b, 1e-13) == pytest.approx(0.6154797087, abs=1e-9)

    def test_identity(self):
        assert refine_root(lambda x: x, Bracket(-1, 1, -1, 1), 1e-12) == 0.0

    def test_iteration_cap(self):
        with pytest.raises(RootRefinementError) as exc:
            refine_root(lambda x: x - 0.3, Bracket(0, 1, -0.3, 0.7), 1e-15, max_iter=5)
        assert exc.value.bracket.contains(0.3)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-50, 50), st.floats(0.01, 20), st.floats(1e-14, 1e-3))
    def test_result_inside_bracket(self, root, width, tol):
        lo, hi = root - width * 0.3, root + width * 0.7
        f = lambda x: math.tanh(x - root)  # noqa: E731
        r = refine_root(f, Bracket(lo, hi, f(lo), f(hi)), tol)
        assert lo <= r <= hi
        assert abs(r - root) <= max(tol, 1e-12 * max(1.0, abs(root)))


class TestIntegrate:
    def test_constant(self):
        assert integrate_1d(lambda x: 1.0, 0.0, 1.0, 1) == pytest.approx(1.0, abs=1e-15)

    def test_sine(self):
        assert abs(integrate_1d(np.sin, 0.0, math.pi, 1000) - 2.0) < 1e-8

    def test_graded_reciprocal(self):
        eps = 1e-3
        val = integrate_1d(lambda x: 1.0 / x, eps, 1.0, 40, singular_point=0.0)
        assert abs(val - math.log(1 / eps)) < 1e-4
        assert val == pytest.approx(6.907755278982137, abs=1e-10)

    def test_second_order_or_better(self):
        e1 = abs(integrate_1d(np.exp, 0, 1, 1, nodes=1) - (math.e - 1))
        e2 = abs(integrate_1d(np.exp, 0, 1, 2, nodes=1) - (math.e - 1))
        assert e1 / e2 == pytest.approx(4.0, rel=0.05)

    def test_nonfinite_integrand(self):
        with pytest.raises(NonFiniteIntegrandError) as exc:
            integrate_1d(lambda x: 1.0 / (x - 0.5), 0.0, 1.0, 1, nodes=1)
        assert exc.value.abscissa == 0.5

    def test_singular_point_inside_rejected(self):
        with pytest.raises(ValueError):
            integrate_1d(np.sin, 0.0, 1.0, 4, singular_point=0.5)

    def test_deterministic(self):
        f = lambda x: np.sin(x) * np.exp(-x)  # noqa: E731
        assert integrate_1d(f, 0, 7, 33) == integrate_1d(f, 0, 7, 33)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5))
    def test_linearity(self, alpha, beta):
        f, g = np.cos, lambda x: x**3 - x
        lhs = integrate_1d(lambda x: alpha * f(x) + beta * g(x), -1.0, 2.0, 16)
        rhs = alpha * integrate_1d(f, -1.0, 2.0, 16) + beta * integrate_1d(g, -1.0, 2.0, 16)
        assert lhs == pytest.approx(rhs, abs=1e-12)
