"""Sampling operators, Gaussian interpolation and band-limited projection.

A sampling operator reconstructs f from its values on a grid X_sigma,

    G_sigma f(x) = sum_k f(x_k) phi(sigma x - sigma x_k),

with the infinite sum truncated to |sigma x - sigma x_k| <= R. The band-limited projection
provides the near-best approximant g_sigma used by every K-functional realization.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from scipy.interpolate import CubicSpline

from sampsmooth.errors import (
    CoverageError,
    DerivativeResolutionError,
    IllConditionedError,
    ResolutionError,
)
from sampsmooth.funcspace import (
    DEFAULT_GAMMA,
    GridSet,
    QuadratureSpec,
    RealFunction,
    discrete_lp,
    evaluate,
    lp_norm,
    make_kadec_grid,
    make_uniform_grid,
    restrict,
)
from sampsmooth.kernels import Kernel, gaussian_derivative, gaussian_eval, gaussian_kernel
from sampsmooth.tools import row_blocks

logger = logging.getLogger(__name__)

# x-abscissae handled per dense block of synthesis
_X_CHUNK = 4096
CONDITION_LIMIT = 1e14


def synthesis(kernel, nodes, coefficients, u, radius=math.inf, order=0):
    """sum_k c_k phi^(order)(u - t_k), every abscissa already in kernel units

    Parameters
    ----------
    kernel : Kernel
    nodes : numpy.ndarray
        increasing kernel centers t_k
    coefficients : numpy.ndarray
        c_k, one per node
    u : array_like
        evaluation abscissae, any shape
    radius : float, optional
        terms with |u - t_k| > radius are dropped
    order : int, optional
        derivative order of the kernel
    """
    u = np.asarray(u, dtype=float)
    flat = u.ravel()
    perm = np.argsort(flat, kind="stable")
    ordered = flat[perm]
    out = np.zeros_like(ordered)
    finite = math.isfinite(radius)

    for start in range(0, ordered.size, _X_CHUNK):
        ub = ordered[start : start + _X_CHUNK]
        if finite:
            i0 = np.searchsorted(nodes, ub[0] - radius, side="left")
            i1 = np.searchsorted(nodes, ub[-1] + radius, side="right")
        else:
            i0, i1 = 0, nodes.size
        t, c = nodes[i0:i1], coefficients[i0:i1]
        if t.size == 0:
            continue
        res = np.empty(ub.size)
        for rows in row_blocks(ub.size, t.size):
            arg = ub[rows, None] - t
            if finite:
                inside = np.abs(arg) <= radius
                phi = np.zeros_like(arg)
                phi[inside] = kernel.derivative(arg[inside], order)
            else:
                phi = np.asarray(kernel.derivative(arg, order), dtype=float)
            res[rows] = phi @ c
        out[start : start + ub.size] = res

    result = np.empty_like(out)
    result[perm] = out
    return result.reshape(u.shape)


@dataclass(frozen=True, eq=False)
class SamplingOperator:
    """G_sigma = S_sigma^phi on a fixed grid

    ``truncation_radius`` is in kernel units; ``inf`` keeps every grid sample.
    """

    kernel: Kernel
    sigma: float
    grid: GridSet
    truncation_radius: float
    tail_budget: float = 1e-10

    def __post_init__(self):
        if self.grid.sigma != self.sigma:
            msg = f"grid density {self.grid.sigma} does not match operator sigma {self.sigma}"
            logger.error(msg)
            raise ValueError(msg)
        if not self.truncation_radius > 0:
            msg = f"truncation radius must be > 0, got {self.truncation_radius}"
            logger.error(msg)
            raise ValueError(msg)

    @property
    def nodes(self):
        return self.sigma * self.grid.points

    @property
    def margin(self):
        """half-width, in x units, around the data window where G_sigma f lives"""
        if self.kernel.decay == "compact":
            return self.kernel.support_radius / self.sigma
        return 1.0


def make_sampling_operator(kernel, sigma, window, tail_budget=1e-10, truncation_radius=None, gamma=DEFAULT_GAMMA):
    """sampling operator on the uniform grid covering ``window``"""
    radius = kernel.truncation_radius(tail_budget) if truncation_radius is None else truncation_radius
    grid = make_uniform_grid(sigma, window, gamma)
    logger.debug(f"{kernel.name} sigma={sigma:g}: {grid.size} nodes, truncation radius {radius:g}")
    return SamplingOperator(kernel=kernel, sigma=float(sigma), grid=grid, truncation_radius=radius,
                            tail_budget=tail_budget)


def _check_coverage(op, f, x):
    """raise when samples needed around ``x`` lie outside the grid where ``f`` matters"""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return
    reach = op.truncation_radius / op.sigma
    need = (float(np.min(x)) - reach, float(np.max(x)) + reach)
    have = op.grid.window
    missing = []
    if need[0] < have[0]:
        missing.append((need[0], have[0]))
    if need[1] > have[1]:
        missing.append((have[1], need[1]))
    for lo, hi in missing:
        if f.decay_class == "none" or (lo < f.window[1] and hi > f.window[0]):
            msg = (
                f"grid window [{have[0]:g}, {have[1]:g}] does not cover the stencil of '{f}': "
                f"samples missing on [{lo:g}, {hi:g}]"
            )
            logger.error(msg)
            raise CoverageError(msg)


def tail_bound(op, f, samples=None):
    """bound of the terms dropped by the truncation radius"""
    samples = evaluate(f, op.grid.points) if samples is None else samples
    peak = float(np.max(np.abs(samples), initial=0.0))
    return peak * op.kernel.tail_mass(op.truncation_radius)


def sampling_apply(op, f, x, with_tail=False):
    """G_sigma f(x)

    Parameters
    ----------
    op : SamplingOperator
    f : RealFunction
    x : array_like
    with_tail : bool, optional
        also return the bound of the truncated terms

    Returns
    -------
    numpy.ndarray or float, or a (values, tail) tuple
    """
    x = np.asarray(x, dtype=float)
    _check_coverage(op, f, x)
    samples = evaluate(f, op.grid.points)
    values = synthesis(op.kernel, op.nodes, samples, op.sigma * x, op.truncation_radius)
    values = values if values.ndim else float(values)
    if with_tail:
        return values, tail_bound(op, f, samples)
    return values


def sampling_function(op, f):
    """G_sigma f as a RealFunction, samples taken once"""
    a, b = f.window
    margin = op.margin
    _check_coverage(op, f, np.array([a - margin, b + margin]))
    samples = evaluate(f, op.grid.points)
    nodes, sigma, kernel, radius = op.nodes, op.sigma, op.kernel, op.truncation_radius

    def func(x):
        return synthesis(kernel, nodes, samples, sigma * np.asarray(x, dtype=float), radius)

    deriv = None
    if kernel.deriv is not None:

        def deriv(x, m):
            return sigma**m * synthesis(kernel, nodes, samples, sigma * np.asarray(x, dtype=float), radius, m)

    compact = kernel.decay == "compact" and f.decay_class == "compact_support"
    if compact:
        decay_class, decay_order = "compact_support", 0.0
    elif kernel.decay == "polynomial":
        decay_class, decay_order = "polynomial", kernel.decay_order
    else:
        decay_class = "exponential" if f.decay_class in ("compact_support", "exponential") else f.decay_class
        decay_order = f.decay_order
    return RealFunction(
        func=func,
        window=(a - margin, b + margin),
        decay_class=decay_class,
        decay_order=decay_order,
        label=f"G[{kernel.name},{sigma:g}]{f}",
        deriv=deriv,
    )


@dataclass(frozen=True, eq=False)
class InterpolantSolution:
    """coefficients of sum_j a_j psi(sigma x - sigma x_j) matching the samples at the nodes"""

    coefficients: np.ndarray
    residual: float
    condition_estimate: float
    nodes: np.ndarray
    sigma: float = 1.0
    radius: float = math.inf

    def evaluate(self, x, order=0):
        x = np.asarray(x, dtype=float)
        kernel = gaussian_kernel()
        values = self.sigma**order * synthesis(kernel, self.nodes, self.coefficients, self.sigma * x, self.radius,
                                               order)
        return values if values.ndim else float(values)


def gaussian_interpolate(grid, samples, reg=0.0, radius=None):
    """solve the Gaussian collocation system on ``grid``

    The system M a = samples with M_jk = psi(sigma x_j - sigma x_k) is solved directly.
    ``reg`` adds a Tikhonov term reg * I and is meant for diagnostics only.

    Raises
    ------
    IllConditionedError
        when the solve fails or the 1-norm condition number exceeds 1e14
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != grid.points.shape:
        msg = f"got {samples.size} samples for a grid of {grid.size} nodes"
        logger.error(msg)
        raise ValueError(msg)
    radius = gaussian_kernel().truncation_radius(1e-16) if radius is None else radius
    nodes = grid.sigma * grid.points
    diff = nodes[:, None] - nodes[None, :]
    matrix = np.where(np.abs(diff) <= radius, gaussian_eval(diff), 0.0)
    if reg:
        matrix = matrix + reg * np.eye(nodes.size)

    if nodes.size == 0:
        return InterpolantSolution(np.zeros(0), 0.0, 1.0, nodes, grid.sigma, radius)

    condition = float(np.linalg.cond(matrix, 1))
    if not condition <= CONDITION_LIMIT:
        msg = f"Gaussian collocation matrix of {nodes.size} nodes is ill-conditioned (estimate {condition:.3e})"
        logger.error(msg)
        raise IllConditionedError(msg)
    try:
        coefficients = scipy.linalg.solve(matrix, samples, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as err:
        msg = f"Gaussian collocation solve failed on {nodes.size} nodes: {err}"
        logger.error(msg)
        raise IllConditionedError(msg) from err

    residual = float(np.max(np.abs(matrix @ coefficients - samples)))
    logger.debug(f"Gaussian interpolation: {nodes.size} nodes, cond {condition:.3g}, residual {residual:.2e}")
    return InterpolantSolution(coefficients, residual, condition, nodes, grid.sigma, radius)


@dataclass(frozen=True, eq=False)
class InterpolationOperator:
    """I_sigma^X f(x) = I^X f^{1/sigma}(sigma x) on a fixed grid"""

    grid: GridSet
    sigma: float
    reg: float = 0.0

    def solve(self, f):
        return gaussian_interpolate(self.grid, evaluate(f, self.grid.points), self.reg)

    @property
    def inner(self):
        return self.grid.inner()


def interpolation_function(op, f):
    solution = op.solve(f)
    return RealFunction(
        func=solution.evaluate,
        window=op.grid.window,
        decay_class="exponential",
        label=f"I[{op.grid.kind},{op.sigma:g}]{f}",
        deriv=solution.evaluate,
    )


def approximant(op, f):
    """the operator output for ``f`` as a RealFunction"""
    if isinstance(op, InterpolationOperator):
        return interpolation_function(op, f)
    return sampling_function(op, f)


def operator_error(op, f, p=2.0, quad=None):
    """||f - G_sigma f||_p, on the inner window for interpolation operators"""
    quad = QuadratureSpec() if quad is None else quad
    diff = f - approximant(op, f)
    if isinstance(op, InterpolationOperator):
        diff = restrict(diff, op.inner)
    return lp_norm(diff, p, quad.refined(2 * op.sigma))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """band-limited representation on a periodic fine grid

    ``coefficients`` are the real-FFT coefficients of the fine samples, already cut at
    ``sigma``.
    """

    coefficients: np.ndarray
    frequencies: np.ndarray
    start: float
    step: float
    size: int
    sigma: float
    upsample: int = 4

    @property
    def window(self):
        return self.start, self.start + self.size * self.step

    def synthesize(self, multiplier=None, label="g"):
        """the inverse transform of multiplier(xi) * g_hat as a spline RealFunction"""
        coefficients = self.coefficients if multiplier is None else self.coefficients * multiplier(self.frequencies)
        n_fine = self.size * self.upsample
        values = np.fft.irfft(coefficients, n_fine) * self.upsample
        x = self.start + (self.step / self.upsample) * np.arange(n_fine)
        spline = CubicSpline(x, values)
        return RealFunction(func=spline, window=(x[0], x[-1]), decay_class="compact_support", label=label)


def bandlimited_project(f, sigma, res=32, p=2.0, tol=1e-3, upsample=4):
    """low-pass projection g_sigma of ``f`` onto frequencies |xi| <= sigma

    ``f`` is sampled on a periodised fine grid of step min(1/(res*sigma), 1/64) over its
    window padded on both sides, transformed, cut, and resampled ``upsample`` times finer
    so that the cubic spline through the values is band-limited to working accuracy.

    Raises
    ------
    ResolutionError
        when more than ``tol`` of the spectral energy sits in the top eighth of the band
    """
    if not sigma > 0:
        msg = f"sigma must be > 0, got {sigma}"
        logger.error(msg)
        raise ValueError(msg)
    a, b = f.window
    pad = max(1.0, 0.5 * (b - a))
    lo, hi = a - pad, b + pad
    n = 2 ** int(math.ceil(math.log2((hi - lo) / min(1.0 / (res * sigma), 1.0 / 64))))
    step = (hi - lo) / n
    x = lo + step * np.arange(n)
    coefficients = np.fft.rfft(evaluate(f, x))
    frequencies = np.fft.rfftfreq(n, d=step)

    energy = np.abs(coefficients) ** 2
    total = float(np.sum(energy))
    if total > 0:
        top = float(np.sum(energy[frequencies >= 0.875 * frequencies[-1]])) / total
        if top > tol:
            msg = (
                f"'{f}' is under-resolved at sigma={sigma:g}: {top:.2e} of its energy lies near the grid "
                f"Nyquist frequency (tolerance {tol:.1e})"
            )
            logger.error(msg)
            raise ResolutionError(msg)

    coefficients = np.where(frequencies <= sigma, coefficients, 0.0)
    spectrum = Spectrum(coefficients, frequencies, lo, step, n, float(sigma), upsample)
    g = spectrum.synthesize(label=f"P[{sigma:g}]{f}")
    return RealFunction(func=g.func, window=g.window, decay_class="compact_support", label=g.label, spectrum=spectrum)


def _central_difference(g, s, h):
    """s-th derivative of ``g`` by the s-th central difference"""
    weights = [(-1) ** nu * math.comb(s, nu) for nu in range(s + 1)]
    offsets = [(s / 2 - nu) * h for nu in range(s + 1)]

    def func(x):
        x = np.asarray(x, dtype=float)
        return sum(w * g(x + o) for w, o in zip(weights, offsets)) / h**s

    return func


def _richardson(g, s, h):
    coarse, fine = _central_difference(g, s, h), _central_difference(g, s, h / 2)

    def func(x):
        return (4 * fine(x) - coarse(x)) / 3

    return func


def _derivative_function(g, s, func):
    a, b = g.window
    return RealFunction(
        func=func,
        window=(a, b),
        decay_class=g.decay_class,
        decay_order=g.decay_order,
        label=f"D{s}{g}",
        breakpoints=g.breakpoints,
    )


def sobolev_seminorm(g, s, p=2.0, quad=None, fd_tolerance=1e-3):
    """|g|_{W_p^s} = ||g^(s)||_p

    Spectral for band-limited ``g``, from the analytic derivative when ``g`` has one, and by
    Richardson-extrapolated central differences otherwise.

    Raises
    ------
    DerivativeResolutionError
        when the finite-difference estimates at steps h and h/2 disagree by more than
        ``fd_tolerance`` (relative)
    """
    quad = QuadratureSpec() if quad is None else quad
    if int(s) != s or s < 1:
        msg = f"Sobolev order must be an integer >= 1, got s={s}"
        logger.error(msg)
        raise ValueError(msg)
    s = int(s)
    if g.spectrum is not None:
        spectrum = g.spectrum
        derivative = spectrum.synthesize(lambda xi: (2j * np.pi * xi) ** s, label=f"D{s}{g}")
        return lp_norm(derivative, p, quad.refined(2 * spectrum.sigma))
    if g.deriv is not None:
        return lp_norm(_derivative_function(g, s, lambda x: g.derivative(x, s)), p, quad)

    h = 1.0 / (8 * quad.panels)
    first = lp_norm(_derivative_function(g, s, _richardson(g, s, h)), p, quad)
    second = lp_norm(_derivative_function(g, s, _richardson(g, s, h / 2)), p, quad)
    scale = max(abs(second), np.finfo(float).tiny)
    if abs(first - second) / scale > fd_tolerance and abs(first - second) > quad.tail_tolerance:
        msg = (
            f"finite-difference derivative of order {s} of '{g}' is unstable: "
            f"{first:.6g} (h={h:g}) vs {second:.6g} (h={h / 2:g})"
        )
        logger.error(msg)
        raise DerivativeResolutionError(msg)
    return second


def fractional_seminorm(g, s, p=2.0, quad=None):
    """||(-Delta)^{s/2} g||_p, the multiplier (2 pi |xi|)^s applied to a band-limited ``g``"""
    quad = QuadratureSpec() if quad is None else quad
    if not s > 0:
        msg = f"fractional order must be > 0, got s={s}"
        logger.error(msg)
        raise ValueError(msg)
    if g.spectrum is None:
        msg = f"'{g}' has no spectral representation; project it with bandlimited_project first"
        logger.error(msg)
        raise ValueError(msg)
    spectrum = g.spectrum
    lifted = spectrum.synthesize(lambda xi: (2 * np.pi * np.abs(xi)) ** s, label=f"L{s:g}{g}")
    return lp_norm(lifted, p, quad.refined(2 * spectrum.sigma))


def bernstein_ratio(f, sigma, p=2.0, quad=None):
    """||g'||_p / (sigma ||g||_p) for g the band-limited projection of ``f``"""
    g = bandlimited_project(f, sigma, p=p)
    norm = lp_norm(g, p, quad)
    if norm == 0:
        return 0.0
    return sobolev_seminorm(g, 1, p, quad) / (sigma * norm)


def stability_constants(kernel, sigma, p=2.0, n_vectors=20, seed=0, size=64, quad=None):
    """empirical (c_2, c_1) of c_2 ||c||_{l_p} <= ||sum_k c_k phi(sigma . - k)||_p <= c_1 ||c||_{l_p}

    The same ``n_vectors`` random coefficient vectors of length ``size`` are drawn for
    every ``sigma``.
    """
    quad = QuadratureSpec() if quad is None else quad
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((n_vectors, size))
    k = np.arange(size) - size // 2
    window = (k[0] / sigma, k[-1] / sigma)
    margin = kernel.support_radius / sigma if kernel.decay == "compact" else 1.0
    decay_class = "compact_support" if kernel.decay == "compact" else "polynomial"
    if kernel.decay == "gaussian":
        decay_class = "exponential"
    nodes = k.astype(float)
    radius = kernel.truncation_radius(1e-12)

    ratios = []
    for c in vectors:
        s_c = RealFunction(
            func=lambda x, c=c: synthesis(kernel, nodes, c, sigma * np.asarray(x, dtype=float), radius),
            window=(window[0] - margin, window[1] + margin),
            decay_class=decay_class,
            decay_order=kernel.decay_order if decay_class == "polynomial" else 0.0,
            label=f"S[{kernel.name},{sigma:g}]c",
        )
        ratios.append(lp_norm(s_c, p, quad.refined(2 * sigma)) / discrete_lp(c, sigma, p))
    return float(np.min(ratios)), float(np.max(ratios))


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """a sigma-indexed family of operators: kernel sampling or Gaussian interpolation

    Parameters
    ----------
    kernel : Kernel, optional
        translation kernel; None selects Gaussian interpolation
    epsilon : float
        Kadec perturbation of the grid (0 for the uniform grid)
    seed : int
        seed of the Kadec perturbation
    gamma : float, optional
        separation constant (default 0.49*(1 - 2*epsilon))
    tail_budget : float
        truncation tolerance of the kernel sums
    truncation_radius : float, optional
        overrides the radius derived from ``tail_budget``
    margin : float, optional
        extension of the data window covered by the grid
    """

    kernel: Optional[Kernel] = None
    epsilon: float = 0.0
    seed: int = 0
    gamma: Optional[float] = None
    tail_budget: float = 1e-10
    truncation_radius: Optional[float] = None
    margin: Optional[float] = None

    @property
    def mode(self):
        return "interpolation" if self.kernel is None else "kernel"

    @property
    def name(self):
        if self.kernel is None:
            return "gaussian-interpolation" if self.epsilon == 0 else f"gaussian-interpolation(kadec {self.epsilon:g})"
        return self.kernel.name

    @property
    def interpolatory(self):
        return self.kernel is None or self.kernel.interpolatory

    @property
    def separation(self):
        if self.gamma is not None:
            return self.gamma
        return DEFAULT_GAMMA * (1 - 2 * self.epsilon)

    def grid_window(self, f):
        a, b = f.window
        if self.margin is not None:
            ext = self.margin
        elif self.kernel is None or f.decay_class != "compact_support":
            ext = max(1.0, 0.5 * (b - a))
        else:
            ext = 0.0
        return a - ext, b + ext

    def grid(self, sigma, window):
        return make_kadec_grid(sigma, window, self.epsilon, seed=self.seed, gamma=self.separation)

    def build(self, f, sigma):
        grid = self.grid(sigma, self.grid_window(f))
        if self.kernel is None:
            return InterpolationOperator(grid=grid, sigma=float(sigma))
        radius = self.truncation_radius
        if radius is None:
            radius = self.kernel.truncation_radius(self.tail_budget)
        return SamplingOperator(kernel=self.kernel, sigma=float(sigma), grid=grid, truncation_radius=radius,
                                tail_budget=self.tail_budget)

    def error(self, f, sigma, p=2.0, quad=None):
        """||f - G_sigma f||_p"""
        return operator_error(self.build(f, sigma), f, p, quad)

    def smoothness(self, f, sigma, s, p=2.0, quad=None):
        """sigma^-s |G_sigma f|_{W_p^s}"""
        quad = QuadratureSpec() if quad is None else quad
        op = self.build(f, sigma)
        g = approximant(op, f)
        if isinstance(op, InterpolationOperator):
            g = restrict(g, op.inner)
        return sigma ** (-s) * sobolev_seminorm(g, s, p, quad.refined(2 * sigma))


def gaussian_interpolation_family(epsilon=0.0, seed=0, gamma=None):
    return OperatorFamily(kernel=None, epsilon=epsilon, seed=seed, gamma=gamma)
