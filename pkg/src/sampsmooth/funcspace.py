"""Functions on the real line, L_p quadrature and sampling sets.

Integrals over the line are composite Gauss-Legendre sums on an explicit window. Panels are
split at the breakpoints of the integrand, and a decay-class tail model accounts for the
mass outside the window.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from sampsmooth.errors import EvaluationError, KadecBoundError, SeparationError
from sampsmooth.tools import row_blocks

logger = logging.getLogger(__name__)

DECAY_CLASSES = ("compact_support", "exponential", "polynomial", "none")
_DECAY_STRENGTH = {"none": 0, "polynomial": 1, "exponential": 2, "compact_support": 3}

GRID_KINDS = ("uniform", "kadec")
DEFAULT_GAMMA = 0.49


@lru_cache(maxsize=32)
def gauss_legendre(n):
    """nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]"""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureSpec:
    """composite Gauss-Legendre settings

    Parameters
    ----------
    panels : int
        number of panels per unit length
    nodes_per_panel : int
        Gauss-Legendre order inside each panel
    tail_tolerance : float
        absolute budget for the L_p norm of the part of the integrand outside the window
    max_doublings : int
        number of geometric window extensions tried before falling back on the decay model
    """

    panels: int = 64
    nodes_per_panel: int = 8
    tail_tolerance: float = 1e-10
    max_doublings: int = 3

    def __post_init__(self):
        if self.panels < 1:
            msg = f"panels must be >= 1, got {self.panels}"
            logger.error(msg)
            raise ValueError(msg)
        if self.nodes_per_panel < 2:
            msg = f"nodes_per_panel must be >= 2, got {self.nodes_per_panel}"
            logger.error(msg)
            raise ValueError(msg)
        if not self.tail_tolerance > 0:
            msg = f"tail_tolerance must be > 0, got {self.tail_tolerance}"
            logger.error(msg)
            raise ValueError(msg)
        if self.max_doublings < 0:
            msg = f"max_doublings must be >= 0, got {self.max_doublings}"
            logger.error(msg)
            raise ValueError(msg)

    def refined(self, min_panels):
        """same quadrature with at least ``min_panels`` panels per unit length"""
        return replace(self, panels=max(self.panels, int(math.ceil(min_panels))))


@dataclass(frozen=True, eq=False)
class RealFunction:
    """finite real-valued function on the line

    ``func`` is called with numpy arrays of any shape. Outside ``window`` the function is
    zero when ``decay_class`` is ``compact_support``; for the other classes the window only
    marks where the bulk of the mass lives.
    """

    func: Callable
    window: tuple
    decay_class: str = "compact_support"
    label: str = ""
    decay_order: float = 0.0
    breakpoints: tuple = ()
    deriv: Optional[Callable] = None
    spectrum: Optional[object] = None

    def __post_init__(self):
        a, b = (float(v) for v in self.window)
        if not a < b:
            msg = f"window of '{self.label}' must satisfy a < b, got {self.window}"
            logger.error(msg)
            raise ValueError(msg)
        if self.decay_class not in DECAY_CLASSES:
            msg = f"decay_class should be one of {DECAY_CLASSES}, not '{self.decay_class}'"
            logger.error(msg)
            raise ValueError(msg)
        if self.decay_class == "polynomial" and not self.decay_order > 0:
            msg = f"polynomial decay of '{self.label}' needs a positive order"
            logger.error(msg)
            raise ValueError(msg)
        object.__setattr__(self, "window", (a, b))
        object.__setattr__(self, "breakpoints", tuple(sorted({float(v) for v in self.breakpoints})))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = np.asarray(self.func(x), dtype=float)
        if y.shape != x.shape:
            y = np.broadcast_to(y, x.shape).copy()
        if self.decay_class == "compact_support":
            a, b = self.window
            y = np.where((x >= a) & (x <= b), y, 0.0)
        return y if y.ndim else float(y)

    def derivative(self, x, order):
        if self.deriv is None:
            msg = f"'{self.label}' has no analytic derivative"
            logger.error(msg)
            raise ValueError(msg)
        x = np.asarray(x, dtype=float)
        y = np.asarray(self.deriv(x, order), dtype=float)
        if self.decay_class == "compact_support":
            a, b = self.window
            y = np.where((x >= a) & (x <= b), y, 0.0)
        return y if y.ndim else float(y)

    def __add__(self, other):
        return combine(self, other, 1.0, 1.0)

    def __sub__(self, other):
        return combine(self, other, 1.0, -1.0)

    def scaled(self, c):
        """the function ``c * f``"""
        return combine(self, None, float(c), 0.0)

    def __str__(self):
        return self.label or "RealFunction"


def weakest_decay(*functions):
    """decay class and order of a linear combination"""
    weakest = min(functions, key=lambda f: _DECAY_STRENGTH[f.decay_class])
    orders = [f.decay_order for f in functions if f.decay_class == "polynomial"]
    return weakest.decay_class, (min(orders) if orders else 0.0)


def combine(f, g, a, b):
    """``a*f + b*g`` as a RealFunction (``g`` may be None)"""
    if g is None:

        def func(x):
            return a * f(x)

        deriv = None if f.deriv is None else (lambda x, m: a * f.derivative(x, m))
        return replace(f, func=func, label=f"{a:g}*{f}", deriv=deriv, spectrum=None)

    decay_class, decay_order = weakest_decay(f, g)
    window = (min(f.window[0], g.window[0]), max(f.window[1], g.window[1]))

    def func(x):
        return a * f(x) + b * g(x)

    deriv = None
    if f.deriv is not None and g.deriv is not None:

        def deriv(x, m):
            return a * f.derivative(x, m) + b * g.derivative(x, m)

    return RealFunction(
        func=func,
        window=window,
        decay_class=decay_class,
        decay_order=decay_order,
        label=f"{a:g}*{f}{b:+g}*{g}",
        breakpoints=f.breakpoints + g.breakpoints,
        deriv=deriv,
    )


def evaluate(f, x):
    """evaluate ``f`` and refuse non-finite values"""
    y = np.asarray(f(x), dtype=float)
    bad = ~np.isfinite(y)
    if np.any(bad):
        where = float(np.broadcast_to(np.asarray(x, dtype=float), y.shape)[bad].flat[0])
        msg = f"non-finite value of '{f}' at x={where!r}"
        logger.error(msg)
        raise EvaluationError(msg)
    return y


def _check_p(p):
    if not (np.isfinite(p) and p >= 1):
        msg = f"p must be a finite real >= 1, got {p}"
        logger.error(msg)
        raise ValueError(msg)


def _segment_nodes(lo, hi, cuts, quad):
    """Gauss nodes and weights of [lo, hi] split at ``cuts``"""
    edges = [lo] + [c for c in cuts if lo < c < hi] + [hi]
    t, w = gauss_legendre(quad.nodes_per_panel)
    xs, ws = [], []
    for left, right in zip(edges[:-1], edges[1:]):
        n = max(1, int(math.ceil((right - left) * quad.panels)))
        bounds = np.linspace(left, right, n + 1)
        half = 0.5 * np.diff(bounds)
        mid = 0.5 * (bounds[1:] + bounds[:-1])
        xs.append((mid[:, None] + half[:, None] * t).ravel())
        ws.append((half[:, None] * w).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def _power_integral(f, p, lo, hi, quad):
    x, w = _segment_nodes(lo, hi, f.breakpoints, quad)
    y = evaluate(f, x)
    return float(np.sum(w * np.abs(y) ** p))


def _tail_power(f, p, quad):
    a, b = f.window
    width = max(0.5 * (b - a), 1.0)
    lo, hi = a, b
    extra = slab = 0.0
    budget = quad.tail_tolerance**p
    for _ in range(quad.max_doublings):
        slab = _power_integral(f, p, lo - width, lo, quad) + _power_integral(f, p, hi, hi + width, quad)
        extra += slab
        lo, hi, width = lo - width, hi + width, 2 * width
        if slab <= budget:
            return extra

    if f.decay_class == "polynomial":
        ratio = 2.0 ** (1.0 - p * f.decay_order)
        if ratio < 1:
            extra += slab * ratio / (1.0 - ratio)
        else:
            logger.warning(f"tail of '{f}' is not p-integrable for p={p:g} (order {f.decay_order:g})")
    logger.debug(f"'{f}': tail extended to [{lo:g}, {hi:g}], last slab {slab ** (1 / p):.3e}")
    return extra


def lp_norm(f, p=2.0, quad=None):
    """L_p norm of ``f`` on the line

    Parameters
    ----------
    f : RealFunction
    p : float, optional
        exponent, 1 <= p < inf, by default 2
    quad : QuadratureSpec, optional

    Returns
    -------
    float
    """
    quad = QuadratureSpec() if quad is None else quad
    _check_p(p)
    a, b = f.window
    mass = _power_integral(f, p, a, b, quad)
    if f.decay_class in ("exponential", "polynomial"):
        mass += _tail_power(f, p, quad)
    return float(mass ** (1.0 / p))


def integrate_rows(func, lo, hi, cuts=(), nodes=8, panels=1, row_args=None):
    """integrate ``func`` over [lo_i, hi_i] for every row i

    ``cuts`` are abscissae where the integrand may be non-smooth, either shared by all rows
    (1-D) or given per row (2-D). Each piece between cuts gets ``panels`` Gauss panels.
    With ``row_args`` the integrand is called as ``func(x, row_args[rows])``, the leading
    axis of ``x`` running over ``rows``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    lo, hi = np.broadcast_arrays(lo, hi)
    cuts = np.asarray(cuts, dtype=float)
    if cuts.ndim == 1:
        cuts = np.broadcast_to(cuts, (lo.size, cuts.size))
    t, w = gauss_legendre(nodes)
    frac = np.arange(panels) / panels

    out = np.empty(lo.size)
    for rows in row_blocks(lo.size, (cuts.shape[1] + 1) * panels * nodes):
        low, high = lo[rows, None], hi[rows, None]
        inner = np.clip(cuts[rows], low, high)
        edges = np.sort(np.concatenate([low, inner, high], axis=1), axis=1)
        left, span = edges[:, :-1], np.diff(edges, axis=1)
        width = span / panels
        starts = left[..., None] + span[..., None] * frac
        x = starts[..., None] + width[..., None, None] * (t + 1) / 2
        vals = func(x) if row_args is None else func(x, row_args[rows])
        vals = np.asarray(vals, dtype=float)
        out[rows] = np.sum(vals * w * (width[..., None, None] / 2), axis=(1, 2, 3))
    return out


def interval_mean(f, x, radius, quad=None):
    """mean of ``f`` over (x - radius, x + radius), vectorised over ``x``"""
    quad = QuadratureSpec() if quad is None else quad
    x = np.asarray(x, dtype=float)
    if radius <= 0:
        return np.asarray(f(x), dtype=float)
    panels = max(2, int(math.ceil(2 * radius * quad.panels)))
    total = integrate_rows(lambda y: evaluate(f, y), x.ravel() - radius, x.ravel() + radius, f.breakpoints,
                           quad.nodes_per_panel, panels)
    return (total / (2 * radius)).reshape(x.shape)


@dataclass(frozen=True, eq=False)
class GridSet:
    """finite sampling set X_sigma

    Parameters
    ----------
    points : numpy.ndarray
        increasing sampling points
    sigma : float
        density parameter
    gamma : float
        separation constant; distinct points are more than 2*gamma/sigma apart
    kind : str
        "uniform" or "kadec"
    epsilon : float
        perturbation bound of a Kadec grid (0 for uniform grids)
    indices : numpy.ndarray
        integer label k (or j) of each point
    window : tuple
        enumeration window the grid was built on
    """

    points: np.ndarray
    sigma: float
    gamma: float
    kind: str = "uniform"
    epsilon: float = 0.0
    indices: Optional[np.ndarray] = None
    window: tuple = (0.0, 0.0)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        if self.indices is None:
            object.__setattr__(self, "indices", np.arange(points.size))
        if self.kind not in GRID_KINDS:
            msg = f"grid kind should be one of {GRID_KINDS}, not '{self.kind}'"
            logger.error(msg)
            raise ValueError(msg)
        if not self.sigma > 0:
            msg = f"sigma must be > 0, got {self.sigma}"
            logger.error(msg)
            raise ValueError(msg)
        if points.size > 1:
            gap = self.min_gap
            if not gap > 2 * self.gamma / self.sigma:
                msg = (
                    f"grid separation violated: min gap {gap:.6g} <= 2*gamma/sigma = "
                    f"{2 * self.gamma / self.sigma:.6g} (gamma={self.gamma}, sigma={self.sigma})"
                )
                logger.error(msg)
                raise SeparationError(msg)

    @property
    def size(self):
        return int(self.points.size)

    @property
    def min_gap(self):
        if self.points.size < 2:
            return float("inf")
        return float(np.min(np.diff(self.points)))

    def inner(self, fraction=0.6):
        """sub-window covering the central ``fraction`` of the enumeration window"""
        a, b = self.window
        half = 0.5 * fraction * (b - a)
        mid = 0.5 * (a + b)
        return mid - half, mid + half


def _check_sigma_window(sigma, window):
    if not sigma > 0:
        msg = f"sigma must be > 0, got {sigma}"
        logger.error(msg)
        raise ValueError(msg)
    a, b = (float(v) for v in window)
    if not a <= b:
        msg = f"window must satisfy a <= b, got {window}"
        logger.error(msg)
        raise ValueError(msg)
    return a, b


def _integer_labels(sigma, a, b):
    # the tolerance keeps endpoints such as sigma*a = -8.000000000000002 in the grid
    k0 = int(math.ceil(a * sigma - 1e-9))
    k1 = int(math.floor(b * sigma + 1e-9))
    return np.arange(k0, k1 + 1)


def make_uniform_grid(sigma, window, gamma=DEFAULT_GAMMA):
    """the points k/sigma lying in ``window``"""
    a, b = _check_sigma_window(sigma, window)
    if gamma >= 0.5:
        msg = f"uniform grids need gamma < 1/2 for strict separation, got gamma={gamma}"
        logger.error(msg)
        raise SeparationError(msg)
    if not gamma > 0:
        msg = f"gamma must be > 0, got {gamma}"
        logger.error(msg)
        raise ValueError(msg)
    k = _integer_labels(sigma, a, b)
    return GridSet(points=k / sigma, sigma=float(sigma), gamma=float(gamma), kind="uniform", indices=k, window=(a, b))


def make_kadec_grid(sigma, window, epsilon, seed=0, gamma=None):
    """perturbed grid (j + u_j)/sigma with |u_j| <= epsilon < 1/4

    With ``epsilon == 0`` the result is the uniform grid. The default separation constant
    0.49*(1 - 2*epsilon) stays below half the worst-case gap (1 - 2*epsilon)/sigma.
    """
    a, b = _check_sigma_window(sigma, window)
    if epsilon < 0:
        msg = f"epsilon must be >= 0, got {epsilon}"
        logger.error(msg)
        raise ValueError(msg)
    if epsilon >= 0.25:
        msg = f"Kadec perturbation must satisfy epsilon < 1/4, got epsilon={epsilon}"
        logger.error(msg)
        raise KadecBoundError(msg)
    if gamma is None:
        gamma = DEFAULT_GAMMA * (1 - 2 * epsilon)
    if epsilon == 0:
        return make_uniform_grid(sigma, window, gamma)

    j = _integer_labels(sigma, a, b)
    shift = np.random.default_rng(seed).uniform(-epsilon, epsilon, size=j.size)
    return GridSet(
        points=(j + shift) / sigma,
        sigma=float(sigma),
        gamma=float(gamma),
        kind="kadec",
        epsilon=float(epsilon),
        indices=j,
        window=(a, b),
    )


def discrete_lp(values, sigma, p):
    """(sigma^-1 sum |v|^p)^(1/p)"""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    return float((np.sum(np.abs(values) ** p) / sigma) ** (1.0 / p))


def discrete_seminorm(f, grid, p=2.0):
    """the l_p(X_sigma) seminorm of ``f`` on ``grid``"""
    _check_p(p)
    if grid.size == 0:
        logger.warning(f"empty grid (sigma={grid.sigma:g}): discrete seminorm of '{f}' set to 0")
        return 0.0
    return discrete_lp(evaluate(f, grid.points), grid.sigma, p)


def restrict(f, window):
    """``f`` on ``window`` and zero elsewhere"""
    a, b = window
    return RealFunction(
        func=f,
        window=(a, b),
        decay_class="compact_support",
        label=f"{f}|[{a:g},{b:g}]",
        breakpoints=[v for v in f.breakpoints if a < v < b],
        deriv=None if f.deriv is None else f.derivative,
    )
