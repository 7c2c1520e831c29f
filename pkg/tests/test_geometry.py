import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from bohm_epr import epr_model as em
from bohm_epr import geometry as geo
from bohm_epr.epr_model import ModelParams
from bohm_epr.errors import DomainError, PoleError, UnphysicalError
from bohm_epr.geometry import Regime, WormholeParams

DEFAULT = ModelParams()
MAGIC = math.asin(3**-0.5)


class TestPrintedMetric:
    def test_reference_value(self):
        assert geo.metric_as_printed(math.pi / 2, DEFAULT) == pytest.approx(0.5, abs=1e-15)

    def test_numerator_zero(self):
        assert abs(geo.metric_as_printed(MAGIC, DEFAULT)) < 1e-15

    def test_limit_at_pole(self):
        vals = [geo.metric_as_printed(eps, DEFAULT) for eps in (1e-2, 1e-4, 1e-6)]
        assert all(v < 0 for v in vals)
        assert vals[2] < -1e5

    def test_pole_flag(self):
        with pytest.raises(PoleError) as exc:
            geo.metric_as_printed(-1e-12, DEFAULT)
        assert exc.value.side == -1

    def test_sign_structure(self):
        u = np.linspace(0.01, math.pi - 0.01, 500)
        s2 = np.sin(u) ** 2
        g = np.array([geo.metric_as_printed(x, DEFAULT) for x in u])
        assert np.all(g[s2 < 1 / 3 - 1e-9] < 0)
        assert np.all(g[s2 > 1 / 3 + 1e-9] > 0)


class TestConstraintMetric:
    def test_reference_value(self):
        # G^2 = 0.75 was confirmed by the finite-difference oracle; R^4 = 1 here
        assert geo.metric_from_constraint(math.pi / 2, DEFAULT.with_(eta11=1)) == pytest.approx(0.75, abs=1e-14)

    def test_eta_flip(self):
        a = geo.metric_from_constraint(1.3, DEFAULT.with_(eta11=1))
        b = geo.metric_from_constraint(1.3, DEFAULT.with_(eta11=-1))
        assert a == -b

    def test_symmetry(self):
        p = ModelParams(m=1.5, C1=3.0, C2=0.3)
        u = (0.7 - p.C2) / p.m
        mirror = (math.pi - 0.7 - p.C2) / p.m
        assert geo.metric_from_constraint(u, p) == pytest.approx(geo.metric_from_constraint(mirror, p), rel=1e-12)

    def test_errors(self):
        with pytest.raises(UnphysicalError):
            geo.metric_from_constraint(0.1, DEFAULT)
        with pytest.raises(DomainError):
            geo.metric_from_constraint(4.0, DEFAULT)
        with pytest.raises(PoleError):
            geo.metric_from_constraint(math.pi, DEFAULT)


class TestConformalFactor:
    def test_minkowski(self):
        assert geo.conformal_factor(0.3, 0.4, DEFAULT, q=0.0) == 1.0

    @pytest.mark.parametrize("mass_power", [1, 2])
    def test_degenerate(self, mass_power):
        p = ModelParams(m=1.8, hbar=0.9, mass_power=mass_power)
        q = 2 * p.m**mass_power * p.hbar**2
        assert geo.conformal_factor(0.3, 0.4, p, q=q) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("mass_power", [1, 2])
    def test_matches_quantum_mass(self, mass_power):
        p = ModelParams(m=1.8, hbar=0.9, C2=0.2, mass_power=mass_power)
        x1, x2 = 0.3, 0.4
        cf = geo.conformal_factor(x1, x2, p)
        assert cf * p.m**2 * p.hbar**2 == pytest.approx(em.quantum_mass_sq(x1, x2, p), rel=1e-14)


class TestSampleMetric:
    def test_regimes(self):
        assert geo.sample_metric(0.0, DEFAULT).regime is Regime.POLE
        assert geo.sample_metric(4.0, DEFAULT).regime is Regime.OUTSIDE_DOMAIN
        assert geo.sample_metric(0.2, DEFAULT).regime is Regime.UNPHYSICAL_G2
        s = geo.sample_metric(1.0, DEFAULT)
        assert s.regime is Regime.REGULAR
        assert math.isfinite(s.g11_as_printed) and math.isfinite(s.g11_from_constraint)
        assert geo.sample_metric(MAGIC, DEFAULT).regime is Regime.ZERO_CROSSING_NEIGHBORHOOD


class TestSingularities:
    def test_default(self):
        rep = geo.find_singularities(DEFAULT, (-0.1, 3.3))
        assert [r.value for r in rep.poles] == pytest.approx([0.0, math.pi], abs=1e-12)
        printed = [r.value for r in rep.zero_crossings_as_printed]
        assert printed == pytest.approx([0.6154797086703873, 2.5261129449194059], abs=1e-10)
        constraint = [r.value for r in rep.zero_crossings_from_constraint]
        # 5 sin^2 = 1: roots of (5 s^2 - 1)/s inside the strip
        assert constraint == pytest.approx([math.asin(5**-0.5), math.pi - math.asin(5**-0.5)], abs=1e-10)
        for r in rep.poles + rep.zero_crossings_as_printed + rep.zero_crossings_from_constraint:
            assert r.bracket.contains(r.value)

    def test_constraint_crossing_confirmed_by_fd(self):
        rep = geo.find_singularities(DEFAULT, (-0.1, 3.3))
        u = rep.zero_crossings_from_constraint[0].value
        h = 1e-3
        left = em.solve_G_squared(u - 0.01, DEFAULT, "finite_difference", h)
        right = em.solve_G_squared(u + 0.01, DEFAULT, "finite_difference", h)
        assert left < 0 < right

    @pytest.mark.parametrize("m,c2", [(1.0, 0.0), (2.3, 0.7), (0.6, 4.0)])
    def test_pole_lattice(self, m, c2):
        p = ModelParams(m=m, C2=c2)
        rep = geo.find_singularities(p, (-3.0, 9.0))
        poles = np.array([r.value for r in rep.poles])
        k = np.round((m * poles + c2) / math.pi)
        np.testing.assert_allclose(poles, (k * math.pi - c2) / m, atol=1e-10)
        np.testing.assert_allclose(np.diff(poles), math.pi / m, atol=1e-10)
        assert np.all(np.diff(k) == 1)


class TestAudit:
    def test_reference_gap(self):
        rep = geo.audit_metric_consistency(DEFAULT, [math.pi / 2])
        (row,) = rep.rows
        assert row.status == "evaluated"
        assert row.abs_gap == pytest.approx(1.25, abs=1e-14)
        assert row.G2_implied_by_printed == pytest.approx(-0.5)
        assert row.G2_from_constraint == pytest.approx(0.75)
        assert not rep.agree_anywhere

    def test_mirror_invariance(self):
        a = geo.audit_metric_consistency(DEFAULT, [1.0])
        b = geo.audit_metric_consistency(DEFAULT, [math.pi - 1.0])
        assert a.rows[0].abs_gap == pytest.approx(b.rows[0].abs_gap, rel=1e-12)

    def test_statuses_recorded(self):
        rep = geo.audit_metric_consistency(DEFAULT, [0.0, 0.1, 1.0, 4.0])
        assert [r.status for r in rep.rows] == ["pole", "unphysical_G2", "evaluated", "outside_domain"]
        assert rep.summary()["n_samples"] == 4

    def test_agreement_definition(self):
        report = geo.AuditReport([geo.AuditRow(1.0, "evaluated", 0.3, 0.3, 0.0, 0.0, None, None, True)], 1e-10)
        assert report.agree_everywhere and report.agree_anywhere


class TestHawking:
    wp = WormholeParams(b=1.0, x0=0.0)

    def test_landmarks(self):
        # x0 +- b must be representable exactly for the landmark to be exactly 2
        wp = WormholeParams(b=0.75, x0=2.0)
        assert geo.hawking_conformal_factor(wp.x0 + wp.b, wp) == 2.0
        assert geo.hawking_conformal_factor(wp.x0 - wp.b, wp) == 2.0
        assert geo.hawking_conformal_factor(wp.x0 + 2 * wp.b, wp) == pytest.approx(1.25, abs=1e-15)
        for b in (0.3, 1.7, 2.9):
            assert geo.hawking_conformal_factor(b, WormholeParams(b, 0.0)) == 2.0
            assert geo.hawking_conformal_factor(-b, WormholeParams(b, 0.0)) == 2.0
        assert geo.hawking_conformal_factor(1e12, wp) == pytest.approx(1.0, abs=1e-20)

    def test_pole(self):
        with pytest.raises(PoleError):
            geo.hawking_conformal_factor(0.0, self.wp)

    def test_bad_params(self):
        with pytest.raises(ValueError):
            WormholeParams(b=0.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.1, 5), st.floats(-5, 5), st.floats(0.01, 50))
    def test_decay_product(self, b, x0, d):
        wp = WormholeParams(b, x0)
        x = x0 + d
        assert (geo.hawking_conformal_factor(x, wp) - 1) * (x - x0) ** 2 == pytest.approx(b * b, rel=1e-12)

    def test_antiderivative_symbolic(self):
        s, b = sympy.symbols("s b", positive=True)
        F = sympy.sqrt(s**2 + b**2) - b * sympy.log((b + sympy.sqrt(s**2 + b**2)) / s)
        assert sympy.simplify(sympy.diff(F, s) - sympy.sqrt(1 + b**2 / s**2)) == 0
        f = sympy.lambdify((s, b), F)
        for sv, bv in [(0.3, 1.0), (2.0, 0.5)]:
            assert geo.hawking_distance_antiderivative(sv, bv) == pytest.approx(f(sv, bv), rel=1e-14)

    @pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
    def test_distance_vs_independent_quadrature(self, eps):
        b = 1.3
        wp = WormholeParams(b, 0.5)
        ref, _ = sp_integrate.quad(lambda s: math.sqrt(1 + b * b / (s * s)), eps, 1.0, epsabs=1e-13, limit=200)
        got = geo.proper_distance(wp.x0 + eps, wp.x0 + 1.0, geo.hawking_metric(wp), poles=[wp.x0])
        assert got == pytest.approx(ref, abs=1e-9)

    def test_log_divergence(self):
        metric = geo.hawking_metric(self.wp)
        d = [geo.proper_distance(e, 1.0, metric, poles=[0.0]) for e in (1e-3, 1e-6)]
        # each factor 1e3 in epsilon adds ~ b ln(1e3)
        assert d[1] - d[0] == pytest.approx(math.log(1e3), rel=1e-5)

    def test_reflection_invariance(self):
        wp = WormholeParams(0.8, 1.5)
        metric = geo.hawking_metric(wp)
        a = geo.proper_distance(wp.x0 + 0.01, wp.x0 + 2.0, metric, poles=[wp.x0])
        b = geo.proper_distance(wp.x0 - 2.0, wp.x0 - 0.01, metric, poles=[wp.x0])
        assert a == pytest.approx(b, rel=1e-13)

    def test_flat_and_additive(self):
        flat = lambda x: np.ones_like(x)  # noqa: E731
        assert geo.proper_distance(0.0, 1.0, flat) == pytest.approx(1.0, abs=1e-15)
        metric = geo.hawking_metric(self.wp)
        whole = geo.proper_distance(0.1, 2.0, metric, poles=[0.0])
        parts = geo.proper_distance(0.1, 0.7, metric, poles=[0.0]) + geo.proper_distance(0.7, 2.0, metric, poles=[0.0])
        assert whole == pytest.approx(parts, rel=1e-12)

    def test_pole_inside_rejected(self):
        with pytest.raises(PoleError):
            geo.proper_distance(-1.0, 1.0, geo.hawking_metric(self.wp), poles=[0.0])
