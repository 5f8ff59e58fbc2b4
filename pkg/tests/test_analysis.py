import math

import numpy as np
import pandas as pd
import pytest

import sampsmooth.analysis as an
from sampsmooth.errors import DegenerateFitError, PreconditionError
from sampsmooth.funcspace import QuadratureSpec
from sampsmooth.kernels import bspline_kernel, sinc_kernel
from sampsmooth.operators import OperatorFamily, gaussian_interpolation_family
from sampsmooth.zoo import zoo

SIGMAS = np.array([8.0, 16.0, 32.0, 64.0])


class Test_RateFit:
    def test_power_law(self):
        table = an.rate_fit(SIGMAS, 3 * SIGMAS**-1.5, "err", "hat")
        assert table.fitted_alpha == pytest.approx(1.5, abs=1e-12)
        assert table.fit_residual < 1e-12
        assert table.function == "hat"

    def test_too_few_rungs(self):
        with pytest.raises(DegenerateFitError):
            an.rate_fit(SIGMAS[:3], SIGMAS[:3] ** -1.0)

    def test_vanishing_value(self):
        with pytest.raises(DegenerateFitError):
            an.rate_fit(SIGMAS, np.array([1.0, 0.5, 0.0, 0.1]))

    def test_above_floor(self):
        values = np.array([1e-3, 1e-5, 1e-12, 1e-13])
        assert an.fit_above_floor(SIGMAS, values, 1e-9) is None
        assert an.fit_above_floor(SIGMAS, values, 0.0) is not None

    def test_table_checks(self):
        with pytest.raises(ValueError):
            an.RateTable("err", np.array([8.0, 8.0]), np.array([1.0, 1.0]), 0.0, 0.0)
        with pytest.raises(ValueError):
            an.RateTable("err", np.array([8.0, 16.0]), np.array([1.0, -1.0]), 0.0, 0.0)


class Test_Compare:
    def test_upper(self):
        rhs = SIGMAS**-1.0
        report = an.compare("direct", "err", "semidiscrete", "hat", SIGMAS, 2 * rhs, rhs)
        assert report.verdict
        assert report.flag == "ok"
        assert report.ratio_min == pytest.approx(2.0)
        assert report.ratio_max == pytest.approx(2.0)
        assert report.spread == pytest.approx(1.0)
        failed = an.compare("direct", "err", "semidiscrete", "hat", SIGMAS, 2 * rhs, rhs, bound=1.0)
        assert not failed.verdict

    def test_two_sided_spread(self):
        rhs = SIGMAS**-1.0
        report = an.compare("eq", "err", "semidiscrete", "hat", SIGMAS, rhs * SIGMAS**2, rhs, "two-sided", bound=50.0)
        # the ratio grows from 64 to 4096
        assert not report.verdict

    def test_violation(self):
        lhs = np.array([1.0, 0.5, 0.25, 0.125])
        rhs = np.array([1.0, 0.5, 0.0, 0.0])
        report = an.compare("direct", "err", "semidiscrete", "step", SIGMAS, lhs, rhs)
        assert not report.verdict
        assert report.flag == "inequality-violation"

    def test_noise_floor(self):
        report = an.compare("direct", "err", "semidiscrete", "bump", SIGMAS, np.zeros(4), np.full(4, 1e-12))
        assert report.verdict
        assert report.flag == "noise-floor"

    def test_alpha_agreement(self):
        lhs, rhs = SIGMAS**-2.0, SIGMAS**-3.0
        report = an.compare("eq", "err", "semidiscrete", "bump", SIGMAS, lhs, rhs, "two-sided", 50.0, 0.0,
                            alpha_tolerance=0.1)
        assert not report.verdict
        assert report.alpha_lhs == pytest.approx(2.0)
        assert report.alpha_rhs == pytest.approx(3.0)

    def test_saturation(self):
        lhs, rhs = SIGMAS**-2.0, SIGMAS**-3.0
        report = an.compare("eq", "err", "semidiscrete", "bump", SIGMAS, lhs, rhs, "two-sided", 50.0, 0.0,
                            alpha_tolerance=0.1, saturation=2.0)
        assert report.verdict

    def test_report_checks(self):
        ratios = np.ones(4)
        with pytest.raises(ValueError):
            an.EquivalenceReport("x", "a", "b", "f", SIGMAS, ratios, 2.0, 1.0, True)
        with pytest.raises(ValueError):
            an.EquivalenceReport("x", "a", "b", "f", SIGMAS, ratios, 1.0, 1.0, True, flag="maybe")


class Test_Estimates:
    def rows(self, **columns):
        return pd.DataFrame({"function": "f", "sigma": SIGMAS, **columns})

    def test_dyadic_error_sum(self):
        errors = {1.0: 0.5, 2.0: 0.25, 4.0: 0.125}
        norm = 1.0
        assert an.dyadic_error_sum(errors, 4.0, 1, norm) == pytest.approx(0.125 + (1 + 0.5 + 2 * 0.25 + 0.125) / 4)
        assert an.dyadic_error_sum(errors, 4.0, 2, norm) == pytest.approx(
            0.125 + (1 + 2 * 0.5 + 7 * 0.25 + 5 * 0.125) / 16
        )

    def test_prefix_ladder(self):
        assert an.prefix_ladder([8.0, 16.0]) == [1.0, 2.0, 4.0, 8.0, 16.0]

    def test_inverse(self):
        errors = {float(2**j): 2.0**-j for j in range(7)}
        rows = self.rows(semidiscrete=SIGMAS**-1.0)
        report = an.inverse_estimate_check(rows, "f", errors, 1.0, 1)
        assert report.verdict
        assert report.name == "inverse"

    def test_direct_and_lower(self):
        rows = self.rows(err=SIGMAS**-1.0, disc=SIGMAS**-1.0, omega=SIGMAS**-1.0, semidiscrete=2 * SIGMAS**-1.0)
        assert an.direct_estimate_check(rows, "f").verdict
        assert an.lower_estimate_check(rows, "f").verdict

    def test_convergence(self):
        rows = self.rows(err=SIGMAS**-1.0, disc=SIGMAS**-0.5)
        assert an.convergence_criterion(rows, "f").verdict
        rows = self.rows(err=SIGMAS**-1.0, disc=np.ones(4))
        report = an.convergence_criterion(rows, "f")
        assert not report.verdict
        assert report.flag == "inequality-violation"

    def test_exact_order_not_applicable(self):
        rows = self.rows(err=SIGMAS**-1.0, disc=SIGMAS**-1.0, omega=SIGMAS**-1.1)
        report = an.exact_order_check(rows, "f")
        assert report.verdict
        assert report.flag == "not-applicable"

    def test_exact_order(self):
        rows = self.rows(err=SIGMAS**-1.0, disc=SIGMAS**-1.0, omega=SIGMAS**-2.0)
        report = an.exact_order_check(rows, "f")
        assert report.verdict
        assert report.flag == "ok"

    def test_smoothness_of_operator(self):
        rows = self.rows(semidiscrete=SIGMAS**-1.0, sobolev_scaled=SIGMAS**-1.0)
        family = OperatorFamily(kernel=sinc_kernel())
        assert an.smoothness_of_operator_check(rows, "f", family).verdict

    @pytest.mark.parametrize(
        "family", [OperatorFamily(kernel=bspline_kernel(3)), gaussian_interpolation_family(epsilon=0.1)]
    )
    def test_smoothness_of_operator_precondition(self, family):
        rows = self.rows(semidiscrete=SIGMAS**-1.0, sobolev_scaled=SIGMAS**-1.0)
        with pytest.raises(PreconditionError):
            an.smoothness_of_operator_check(rows, "f", family)


class Test_Corollaries:
    def test_unknown(self):
        with pytest.raises(ValueError):
            an.get_corollary("cor9")

    def test_ids(self):
        assert set(an.COROLLARIES) == {"cor3S", "cor3SR", "cor3Sr", "corGa", "corHa"}
        assert an.get_corollary("corHa").p_only == 2.0

    def test_quantities(self):
        assert an.quantities_for("corollary", an.get_corollary("cor3S")) == ("err", "disc", "omega", "omega_next",
                                                                             "sobolev_scaled")
        assert "tau" in an.quantities_for("direct", family=OperatorFamily(kernel=bspline_kernel(3)))
        with pytest.raises(ValueError):
            an.quantities_for("nothing")

    def test_p_only(self):
        with pytest.raises(ValueError):
            an.corollary_table("corHa", p=1.0, functions=[])

    def test_rung(self):
        f = zoo(names=["hat"])[0].f
        family = OperatorFamily(kernel=bspline_kernel(2))
        out = an.rung_quantities(f, family, 8.0, 1, 1, 2.0, QuadratureSpec(panels=16), ("err", "disc", "omega"),
                                 h_grid_size=4)
        assert out["err"] < 1e-12
        assert out["semidiscrete"] == pytest.approx(out["disc"] + out["omega"])
        assert "frac_sum" not in out

    def test_bspline_suite_on_step(self):
        step = zoo(names=["step"])[0].f
        reports = an.equivalence_suite("cor3Sr", 2.0, SIGMAS, [step], QuadratureSpec(panels=16))
        frame = an.reports_frame(reports)
        assert list(frame["name"]) == ["cor3Sr:(i)~(ii)", "convergence", "omega-ratio", "exact-order"]
        assert all(rep.verdict for rep in reports)
        # every quantity of the step is self-similar along the dyadic ladder
        assert reports[0].alpha_lhs == pytest.approx(0.5, abs=1e-6)
        assert reports[0].spread == pytest.approx(1.0, abs=1e-6)

    @staticmethod
    def named(reports, name):
        (report,) = [rep for rep in reports if rep.name == name]
        return report

    def test_sinc_suite_on_step(self):
        step = zoo(names=["step"])[0].f
        reports = an.equivalence_suite("cor3S", 2.0, SIGMAS, [step], QuadratureSpec(panels=16))
        for name in ("cor3S:(i)~(ii)", "cor3S:(i)~(iii)"):
            report = self.named(reports, name)
            assert report.alpha_lhs == pytest.approx(0.5, abs=0.1)
            assert report.alpha_rhs == pytest.approx(0.5, abs=0.1)
            assert report.spread <= 10
            assert report.verdict

    def test_gaussian_suite_on_step(self):
        step = zoo(names=["step"])[0].f
        reports = an.equivalence_suite("corGa", 2.0, SIGMAS, [step], QuadratureSpec(panels=16))
        report = self.named(reports, "corGa:(i)~(ii)")
        assert report.alpha_lhs == pytest.approx(0.5, abs=0.1)
        assert report.alpha_rhs == pytest.approx(0.5, abs=0.1)
        assert report.verdict

    def test_interpolation_suite_on_step(self):
        step = zoo(names=["step"])[0].f
        # the step window widens to [-2, 2], so sigma = 128 places about 512 perturbed nodes
        ladder = np.array([16.0, 32.0, 64.0, 128.0])
        reports = an.equivalence_suite("corHa", 2.0, ladder, [step], QuadratureSpec(panels=16))
        report = self.named(reports, "corHa:(i)~(ii)")
        assert abs(report.alpha_lhs - report.alpha_rhs) <= 0.1
        assert report.alpha_lhs == pytest.approx(0.5, abs=0.1)


class Test_Frames:
    def test_reports_frame_empty(self):
        frame = an.reports_frame([])
        assert list(frame.columns)[-1] == "verdict"
        assert len(frame) == 0

    def test_alpha_rows(self):
        table = pd.DataFrame({"function": "f", "sigma": SIGMAS, "err": SIGMAS**-1.0, "disc": np.zeros(4)})
        rows = an.alpha_rows(table, ["err", "disc", "omega"])
        assert rows.loc[0, "sigma"] == "alpha"
        assert rows.loc[0, "err"] == pytest.approx(1.0)
        assert math.isnan(rows.loc[0, "disc"])
        assert "omega" not in rows
