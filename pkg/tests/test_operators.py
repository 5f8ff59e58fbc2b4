import numpy as np
import pytest

import sampsmooth.operators as ops
from sampsmooth.errors import CoverageError, IllConditionedError, ResolutionError
from sampsmooth.funcspace import GridSet, QuadratureSpec, RealFunction, make_uniform_grid
from sampsmooth.kernels import bspline_kernel, gaussian_derivative, sinc_kernel

QUAD = QuadratureSpec(panels=16)
# ||d/dx exp(-pi x^2)||_2
GAUSSIAN_SLOPE = np.sqrt(np.pi / np.sqrt(2))


def hat():
    return RealFunction(func=lambda x: 1 - np.abs(x), window=(-1, 1), label="hat", breakpoints=(-1, 0, 1))


def step():
    return RealFunction(func=lambda x: np.where(x < 0, -1.0, 1.0), window=(-1, 1), label="step",
                        breakpoints=(-1, 0, 1))


def gaussian(with_derivative=False):
    return RealFunction(
        func=lambda x: np.exp(-np.pi * x**2),
        window=(-6, 6),
        decay_class="exponential",
        label="gaussian",
        deriv=gaussian_derivative if with_derivative else None,
    )


class Test_Synthesis:
    def test_interpolatory_hat(self):
        nodes = np.arange(-3.0, 4.0)
        c = np.array([0.5, -1.0, 2.0, 3.0, 0.0, 1.0, -2.0])
        np.testing.assert_allclose(ops.synthesis(bspline_kernel(2), nodes, c, nodes), c, atol=1e-15)

    def test_midpoints(self):
        nodes = np.arange(-3.0, 4.0)
        c = np.arange(7.0)
        mid = nodes[:-1] + 0.5
        np.testing.assert_allclose(ops.synthesis(bspline_kernel(2), nodes, c, mid, radius=1.0), c[:-1] + 0.5)


class Test_SamplingOperator:
    def test_sinc_reproduces_samples(self):
        op = ops.make_sampling_operator(sinc_kernel(), 8, (-1, 1))
        f = hat()
        np.testing.assert_allclose(ops.sampling_apply(op, f, op.grid.points), f(op.grid.points), atol=1e-14)

    def test_coverage(self):
        op = ops.make_sampling_operator(bspline_kernel(3), 8, (-0.5, 0.5))
        ops.sampling_apply(op, hat(), np.array([0.0]))
        with pytest.raises(CoverageError):
            ops.sampling_apply(op, hat(), np.array([0.9]))

    def test_compact_tail(self):
        op = ops.make_sampling_operator(bspline_kernel(3), 8, (-1, 1))
        values, tail = ops.sampling_apply(op, hat(), np.array([0.0, 0.5]), with_tail=True)
        assert tail == 0.0
        assert values.shape == (2,)

    def test_sigma_mismatch(self):
        grid = make_uniform_grid(8, (-1, 1))
        with pytest.raises(ValueError):
            ops.SamplingOperator(kernel=sinc_kernel(), sigma=4.0, grid=grid, truncation_radius=10.0)

    def test_linear_interpolation_is_exact_on_hat(self):
        family = ops.OperatorFamily(kernel=bspline_kernel(2))
        assert family.error(hat(), 8, 2.0, QUAD) < 1e-12

    @pytest.mark.parametrize("sigma", [8, 16])
    def test_step_error(self, sigma):
        # a jump costs 4/(3 sigma) and each window end 1/(3 sigma) in squared L2 norm
        family = ops.OperatorFamily(kernel=bspline_kernel(2))
        assert family.error(step(), sigma, 2.0, QUAD) == pytest.approx(np.sqrt(2 / sigma), rel=1e-10)

    def test_smoothness_of_linear_interpolant(self):
        family = ops.OperatorFamily(kernel=bspline_kernel(2))
        assert family.smoothness(hat(), 8, 1, 2.0, QUAD) == pytest.approx(np.sqrt(2) / 8, rel=1e-10)


class Test_GaussianInterpolation:
    def test_matches_samples(self):
        grid = make_uniform_grid(4, (-2, 2))
        samples = hat()(grid.points)
        solution = ops.gaussian_interpolate(grid, samples)
        np.testing.assert_allclose(solution.evaluate(grid.points), samples, atol=1e-10)
        assert solution.residual < 1e-12
        assert solution.condition_estimate >= 1

    def test_wrong_samples(self):
        grid = make_uniform_grid(4, (-2, 2))
        with pytest.raises(ValueError):
            ops.gaussian_interpolate(grid, np.zeros(3))

    def test_ill_conditioned(self):
        grid = GridSet(points=np.arange(41) * 0.05, sigma=1.0, gamma=0.02)
        with pytest.raises(IllConditionedError):
            ops.gaussian_interpolate(grid, np.ones(41))

    def test_error_decreases(self):
        family = ops.gaussian_interpolation_family()
        assert family.interpolatory
        assert family.error(step(), 16, 2.0, QUAD) < family.error(step(), 8, 2.0, QUAD)

    def test_names(self):
        assert ops.gaussian_interpolation_family().name == "gaussian-interpolation"
        assert ops.gaussian_interpolation_family(0.1).name == "gaussian-interpolation(kadec 0.1)"
        family = ops.OperatorFamily(kernel=bspline_kernel(3))
        assert family.name == "bspline(3)"
        assert not family.interpolatory
        assert family.separation == 0.49


class Test_BandlimitedProjection:
    def test_smooth_function(self):
        g = ops.bandlimited_project(gaussian(), 4)
        assert g.spectrum is not None
        x = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(g(x), np.exp(-np.pi * x**2), atol=1e-6)

    def test_under_resolved(self):
        with pytest.raises(ResolutionError):
            ops.bandlimited_project(step(), 1, tol=1e-12)

    def test_wrong_sigma(self):
        with pytest.raises(ValueError):
            ops.bandlimited_project(gaussian(), 0)


class Test_Seminorms:
    def test_spectral(self):
        g = ops.bandlimited_project(gaussian(), 4)
        assert ops.sobolev_seminorm(g, 1) == pytest.approx(GAUSSIAN_SLOPE, rel=1e-6)

    def test_analytic(self):
        assert ops.sobolev_seminorm(gaussian(True), 1) == pytest.approx(GAUSSIAN_SLOPE, rel=1e-10)

    def test_finite_differences(self):
        assert ops.sobolev_seminorm(gaussian(), 1) == pytest.approx(GAUSSIAN_SLOPE, rel=1e-6)

    def test_wrong_order(self):
        with pytest.raises(ValueError):
            ops.sobolev_seminorm(gaussian(), 0)
        with pytest.raises(ValueError):
            ops.sobolev_seminorm(gaussian(), 1.5)

    def test_fractional(self):
        g = ops.bandlimited_project(gaussian(), 4)
        assert ops.fractional_seminorm(g, 1.0) == pytest.approx(ops.sobolev_seminorm(g, 1), rel=1e-3)

    def test_fractional_needs_spectrum(self):
        with pytest.raises(ValueError):
            ops.fractional_seminorm(gaussian(), 1.0)

    def test_bernstein(self):
        ratio = ops.bernstein_ratio(gaussian(), 4)
        assert 0 < ratio <= 2 * np.pi


class Test_Stability:
    def test_linear_bspline(self):
        # the Gram symbol of the hat basis lies in [1/3, 1]
        low, high = ops.stability_constants(bspline_kernel(2), 1.0, n_vectors=5, size=16,
                                            quad=QuadratureSpec(panels=8))
        assert 1 / np.sqrt(3) - 1e-9 <= low <= high <= 1 + 1e-9
