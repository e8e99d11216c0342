import math

import numpy as np
import pytest

from conftest import make_model, norm_sq_bundle
from scripts.common.errors import EmptyRegionError, ModelConfigError, NonFiniteSampleError
from scripts.common.models.model import LyapunovBundle, constant_weight, lyapunov_lhs
from scripts.common.models.modulus import ModulusSpec
from scripts.common.models.registry import build_model
from scripts.common.verify.audits import (
    audit_coercivity, audit_integrability, audit_lyapunov, audit_monotonicity, audit_osgood, audit_ratio,
    integrability_report, lyapunov_margins, monotonicity_margins, osgood_integral, sample_pairs, sample_region,
)
from scripts.common.verify.report import Assumption, report_table


class TestSamplers:
    def test_region_samples_stay_in_ball_and_domain(self):
        model = build_model("sir")
        s, x = sample_region(model, 3.0, 512, seed=1)
        assert np.all(np.linalg.norm(x, axis=-1) <= 3.0 + 1e-12)
        assert np.all(x >= 0.0)
        assert np.all((s >= 0.0) & (s <= model.T))

    def test_pairs_respect_radius_and_width(self):
        model = build_model("duffing_vdp")
        _, x, y = sample_pairs(model, 2.0, 1024, seed=2, eps0=0.5)
        assert np.all(np.linalg.norm(x, axis=-1) <= 2.0 + 1e-12)
        assert np.all(np.linalg.norm(y, axis=-1) <= 2.0 + 1e-12)
        assert np.all(np.linalg.norm(x - y, axis=-1) <= 0.5 + 1e-12)

    def test_empty_region(self):
        with pytest.raises(EmptyRegionError):
            sample_region(build_model("ou"), 0.0, 8, seed=0)


class TestMonotonicity:
    def test_holder13_passes_at_zero_tolerance(self):
        report = audit_monotonicity(build_model("holder13"), 5.0, 4096, seed=0, tol=0.0)
        assert report.passed
        assert report.worst_margin <= 0.0

    def test_power_drift_without_noise(self):
        report = audit_monotonicity(build_model("power_drift", {"sigma": 0.0}), 3.0, 4096, seed=1, tol=0.0)
        assert report.passed

    def test_identical_pairs_have_zero_margin(self):
        model = build_model("holder13")
        x = np.linspace(-2.0, 2.0, 9)[:, None]
        assert np.all(monotonicity_margins(model, 5.0, 0.5, x, x) == 0.0)

    def test_worst_point_reproduces_margin(self):
        model = build_model("duffing_vdp")
        report = audit_monotonicity(model, 2.0, 2048, seed=3)
        p = report.worst_point
        margin = monotonicity_margins(model, 2.0, p[0], p[None, 1:3], p[None, 3:5])[0]
        assert margin == pytest.approx(report.worst_margin, abs=1e-12 * max(1.0, abs(margin)))

    def test_nested_samples_never_lower_the_supremum(self):
        model = build_model("lv3")
        small = audit_monotonicity(model, 2.0, 1024, seed=7)
        large = audit_monotonicity(model, 2.0, 2048, seed=7)
        again = audit_monotonicity(model, 2.0, 1024, seed=7)
        assert large.worst_margin >= small.worst_margin
        assert again.worst_margin == small.worst_margin

    def test_threads_do_not_change_the_result(self):
        model = build_model("sir")
        one = audit_monotonicity(model, 2.0, 40000, seed=5, threads=1)
        four = audit_monotonicity(model, 2.0, 40000, seed=5, threads=4)
        assert one.worst_margin == four.worst_margin
        np.testing.assert_array_equal(one.worst_point, four.worst_point)

    def test_missing_bundle(self):
        with pytest.raises(ModelConfigError):
            audit_monotonicity(make_model(), 1.0, 8, seed=0)


class TestLyapunov:
    @pytest.mark.parametrize("name", ["holder13", "duffing_vdp", "sir", "brownian", "ou"])
    def test_registered_models_pass(self, name):
        lyapunov, trace = audit_lyapunov(build_model(name), 10.0, 4096, seed=0)
        assert lyapunov.passed
        assert trace.passed
        assert lyapunov.assumption is Assumption.LYAPUNOV
        assert trace.assumption is Assumption.TRACE_NONNEG

    def test_sir_bound_on_orthant(self):
        model = build_model("sir")
        s, x = sample_region(model, 10.0, 100_000, seed=2)
        assert np.all(x >= 0.0)
        lhs, singular = lyapunov_lhs(model, s, x)
        assert np.all(lhs[~singular] <= model.params["gamma"] / 2 + 1e-9)

    def test_trace_margin_is_zero_without_noise(self):
        _, trace = audit_lyapunov(build_model("power_drift", {"sigma": 0.0}), 5.0, 512, seed=0)
        assert trace.worst_margin == 0.0

    def test_worst_point_reproduces_margin(self):
        model = build_model("duffing_vdp")
        report, _ = audit_lyapunov(model, 5.0, 2048, seed=4)
        p = report.worst_point
        margins, _ = lyapunov_margins(model, p[0], p[None, 1:])
        assert margins[0] == pytest.approx(report.worst_margin, abs=1e-12 * max(1.0, abs(margins[0])))

    def test_singular_points_are_excluded(self):
        bundle = norm_sq_bundle(1, V=lambda x: np.zeros(np.shape(x)[:-1]))
        model = make_model(diffusion=lambda t, x: np.ones(np.shape(x)[:-1] + (1, 1)), lyapunov=bundle)
        report, _ = audit_lyapunov(model, 1.0, 64, seed=0)
        assert report.excluded > 0
        assert report.samples == 64 - report.excluded

    def test_stronger_competition_breaks_the_bound(self):
        weak = build_model("lv3", {"correction_order": 2, "a_ii": 0.4})
        strong = build_model("lv3", {"correction_order": 2, "a_ii": 1.0})
        assert not audit_lyapunov(weak, 100.0, 8192, seed=0)[0].passed
        assert audit_lyapunov(strong, 100.0, 8192, seed=0)[0].passed


class TestRatio:
    def test_linear(self):
        report = audit_ratio(ModulusSpec.linear(1.0), 1e6)
        assert report.passed
        assert report.value == pytest.approx(1.0)

    def test_xlog1overx(self):
        report = audit_ratio(ModulusSpec.xlog1overx(1.0), 0.5, assumption=Assumption.RATIO_ETA)
        assert report.passed
        assert report.value == pytest.approx(1.0)
        assert report.assumption is Assumption.RATIO_ETA

    def test_xlogx_plus1_is_finite_and_stable(self):
        report = audit_ratio(ModulusSpec.xlogx_plus1(), 1e6)
        assert report.passed
        assert 6.9 < report.value < 7.1

    def test_worst_point_reproduces_value(self):
        spec = ModulusSpec.xlogx_plus1()
        report = audit_ratio(spec, 1e6)
        c, s = report.worst_point
        assert c * spec(s) / spec(c * s) == pytest.approx(report.value, rel=1e-12)

    def test_vanishing_modulus_fails(self):
        report = audit_ratio(ModulusSpec.linear(0.0), 1.0)
        assert not report.passed
        assert math.isinf(report.worst_margin)

    def test_empty_domain(self):
        with pytest.raises(EmptyRegionError):
            audit_ratio(ModulusSpec.linear(), 0.0)


class TestIntegrability:
    def test_zero_coefficients(self, zero_model):
        assert audit_integrability(zero_model, 1.0) == 0.0

    def test_brownian(self):
        assert audit_integrability(build_model("brownian"), 3.0) == pytest.approx(1.0)

    def test_holder13(self):
        assert audit_integrability(build_model("holder13"), 1.0) == pytest.approx(2.0, abs=1e-6)

    def test_non_finite_coefficient(self):
        model = make_model(drift=lambda t, x: np.where(np.asarray(x) > 0.5, np.inf, 0.0))
        with pytest.raises(NonFiniteSampleError) as info:
            audit_integrability(model, 1.0)
        assert info.value.x[0] > 0.5
        report = integrability_report(model, 1.0)
        assert not report.passed
        assert report.worst_point[1] > 0.5


class TestOsgood:
    def test_integral_of_linear_modulus(self):
        assert osgood_integral(ModulusSpec.linear(1.0), 0.1, 1.0) == pytest.approx(math.log(10.0), rel=1e-6)

    @pytest.mark.parametrize("spec", [ModulusSpec.linear(3.0), ModulusSpec.xlog1overx(2.0)])
    def test_divergent_eta(self, spec):
        assert audit_osgood(spec, Assumption.OSGOOD_ETA, 0.5).passed

    def test_convergent_eta(self):
        assert not audit_osgood(ModulusSpec.custom("sqrt(s)"), Assumption.OSGOOD_ETA, 0.5).passed

    @pytest.mark.parametrize("spec", [ModulusSpec.linear(1.0), ModulusSpec.xlogx_plus1()])
    def test_divergent_gamma(self, spec):
        assert audit_osgood(spec, Assumption.OSGOOD_GAMMA, 1.0).passed

    def test_convergent_gamma(self):
        assert not audit_osgood(ModulusSpec.custom("s**2"), Assumption.OSGOOD_GAMMA, 1.0).passed

    def test_wrong_assumption(self):
        with pytest.raises(ValueError):
            audit_osgood(ModulusSpec.linear(), Assumption.RATIO_ETA, 1.0)


class TestCoercivity:
    def test_duffing_is_coercive(self):
        assert audit_coercivity(build_model("duffing_vdp")).passed

    def test_flat_function_fails(self):
        bundle = LyapunovBundle(
            V=lambda x: np.ones(np.shape(x)[:-1]),
            V_x=lambda x: np.zeros(np.shape(x)),
            V_xx=lambda x: np.zeros(np.shape(x) + (np.shape(x)[-1],)),
            delta=1.0, eta=1.0, f_weight=constant_weight(1.0), gamma=ModulusSpec.linear(),
        )
        assert not audit_coercivity(make_model(d=2, m=2, lyapunov=bundle)).passed


class TestReportTable:
    def test_rows_are_padded(self):
        model = build_model("duffing_vdp")
        reports = [integrability_report(model, 1.0), audit_monotonicity(model, 1.0, 64, seed=0)]
        columns, rows = report_table(reports)
        assert columns[-1] == "p5"
        assert rows[0]["p5"] is None
        assert rows[1]["assumption"] == "monotonicity"
        assert rows[0]["passed"] is True
