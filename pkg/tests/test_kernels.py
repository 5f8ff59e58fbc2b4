import math

import numpy as np
import pytest

import sampsmooth.kernels as kernels
from sampsmooth.errors import ToleranceError
from sampsmooth.operators import synthesis


class Test_Sinc:
    def test_values(self):
        assert kernels.sinc_eval(0.0) == 1.0
        np.testing.assert_array_equal(kernels.sinc_eval(np.array([-3.0, -1.0, 1.0, 2.0, 7.0])), 0.0)
        assert kernels.sinc_eval(0.5) == pytest.approx(2 / np.pi, rel=1e-14)

    def test_small_argument(self):
        x = np.array([1e-6, 1e-5, 5e-5])
        np.testing.assert_allclose(kernels.sinc_eval(x), np.sin(np.pi * x) / (np.pi * x), rtol=1e-14)

    def test_first_derivative(self):
        x = np.array([-2.7, -0.8, -0.3, 0.2, 0.6, 1.5, 4.25])
        ref = (np.pi * x * np.cos(np.pi * x) - np.sin(np.pi * x)) / (np.pi * x**2)
        np.testing.assert_allclose(kernels.sinc_derivative(x, 1), ref, rtol=1e-9, atol=1e-12)

    def test_second_derivative_at_zero(self):
        assert kernels.sinc_derivative(0.0, 2) == pytest.approx(-(np.pi**2) / 3, rel=1e-12)

    def test_kernel(self):
        k = kernels.sinc_kernel()
        assert k.interpolatory
        assert k.name == "sinc"
        assert math.isinf(k.truncation_radius(1e-10))


class Test_BSpline:
    @pytest.mark.parametrize("r", [2, 3, 4, 5])
    def test_partition_of_unity(self, r):
        u = np.linspace(0, 1, 11)
        total = sum(kernels.bspline_eval(r, u - k) for k in range(-4, 6))
        np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_values(self):
        assert kernels.bspline_eval(3, 0.0) == pytest.approx(0.75)
        assert kernels.bspline_eval(2, 0.5) == pytest.approx(0.5)
        assert kernels.bspline_eval(3, 1.6) == 0.0

    def test_wrong_order(self):
        with pytest.raises(ValueError):
            kernels.bspline_eval(1, 0.0)
        with pytest.raises(ValueError):
            kernels.bspline_kernel(2.5)

    def test_derivative(self):
        # B_3'(u) = -2u on |u| < 1/2
        u = np.array([-0.3, 0.1, 0.4])
        np.testing.assert_allclose(kernels.bspline_derivative(3, u, 1), -2 * u, atol=1e-14)

    def test_kernel(self):
        k = kernels.bspline_kernel(3)
        assert k.name == "bspline(3)"
        assert k.truncation_radius(1e-10) == 1.5
        assert not k.interpolatory
        assert kernels.bspline_kernel(2).interpolatory
        assert k(2.0) == 0.0


class Test_Gaussian:
    def test_derivative(self):
        x = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(kernels.gaussian_derivative(x, 1), -2 * np.pi * x * np.exp(-np.pi * x**2),
                                   atol=1e-14)

    def test_normalized_partition(self):
        u = np.linspace(0, 1, 13)
        total = sum(kernels.normalized_gaussian_eval(u - k) for k in range(-6, 7))
        np.testing.assert_allclose(total, 1.0, atol=1e-10)

    def test_truncation_radius(self):
        k = kernels.gaussian_kernel()
        assert k.truncation_radius(1e-10) == pytest.approx(np.sqrt(np.log(1e10) / np.pi) + 1)
        assert kernels.gaussian_kernel(normalized=True).name == "gaussian(normalized)"

    @pytest.mark.parametrize("u", [30.0, -30.0, 100.0, 1e4])
    def test_normalized_far_tail(self, u):
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            value = kernels.normalized_gaussian_eval(np.array([u]))
        assert np.isfinite(value).all()
        assert value[0] == pytest.approx(0.0, abs=1e-300)

    def test_normalized_partition_away_from_origin(self):
        u = np.array([0.37, 25.37, -40.5])
        total = sum(kernels.normalized_gaussian_eval(u - k) for k in range(-60, 61))
        np.testing.assert_allclose(total, 1.0, atol=1e-10)

    def test_normalized_synthesis(self):
        kernel = kernels.gaussian_kernel(normalized=True)
        nodes = np.arange(-32.0, 33.0)
        u = np.linspace(-200, 200, 401)
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            values = synthesis(kernel, nodes, np.ones(nodes.size), u, kernel.truncation_radius(1e-12))
        assert np.isfinite(values).all()
        np.testing.assert_allclose(values[np.abs(u) <= 20], 1.0, atol=1e-8)
        assert np.all(values[np.abs(u) > 60] == 0)


class Test_Riesz:
    def test_symbol(self):
        assert kernels.riesz_symbol(0.0, 2.0, 1.0) == 1.0
        assert kernels.riesz_symbol(0.75, 2.0, 1.0) == 0.0
        assert kernels.riesz_symbol(1.0, 2.0, 1.0) == 0.0

    def test_decay_order(self):
        assert kernels.riesz_decay_order(2, 1.0) == 2.0
        assert kernels.riesz_decay_order(1, 3.0) == 2.0

    def test_build(self):
        k = kernels.riesz_build(2, 1, radius=64, tol=1e-3)
        assert k.family == "riesz"
        assert k(0.0) == pytest.approx(1.0, abs=1e-3)
        # even kernel
        assert k(3.3) == pytest.approx(k(-3.3), abs=1e-12)
        assert k.params["residual"] <= 1e-3

    def test_not_converged(self):
        with pytest.raises(ToleranceError) as err:
            kernels.riesz_build(2, 1, radius=64, tol=1e-30, max_refinements=1)
        assert np.isfinite(err.value.residual)

    def test_wrong_parameters(self):
        with pytest.raises(ValueError):
            kernels.riesz_build(0, 1)
        with pytest.raises(ValueError):
            kernels.riesz_build(2, 0)


class Test_MakeKernel:
    def test_families(self):
        assert kernels.make_kernel("sinc").family == "sinc"
        assert kernels.make_kernel("bspline", order=4).params["order"] == 4
        assert kernels.make_kernel("gaussian").params["normalized"]

    def test_unknown(self):
        with pytest.raises(ValueError):
            kernels.make_kernel("unknown")
