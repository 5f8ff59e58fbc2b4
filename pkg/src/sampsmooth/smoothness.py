"""Measures of smoothness.

Moduli of smoothness, the averaged (tau) modulus, the averaged operator f_{delta,r}, the
discrete averaged deviation ||f_{gamma/sigma,r} - f||_{l_p(X_sigma)}, and realizations of
K-functionals through the band-limited projection.

Every supremum over steps h is taken on a finite grid of steps; all values are therefore
lower approximations of the exact quantities. Comparisons between moduli are only exact
when both sides use the same steps, which is why most functions accept ``h_values``.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from sampsmooth.funcspace import (
    QuadratureSpec,
    RealFunction,
    discrete_lp,
    evaluate,
    integrate_rows,
    interval_mean,
    lp_norm,
)
from sampsmooth.operators import bandlimited_project, fractional_seminorm, sobolev_seminorm
from sampsmooth.tools import row_blocks

logger = logging.getLogger(__name__)

H_GRID_SIZE = 64
# the smallest step of the default h-grid, relative to delta
H_GRID_RANGE = 2.0**-10
LOCAL_GRID = (16, 16)


@dataclass(frozen=True)
class SmoothnessParams:
    """parameters of one smoothness evaluation

    ``s <= 2r`` is only enforced when the parameters feed an equivalence check.
    """

    r: int = 1
    s: float = 2
    p: float = 2.0
    delta: float = 1 / 64
    h_grid_size: int = H_GRID_SIZE

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            msg = f"r must be an integer >= 1, got {self.r}"
            logger.error(msg)
            raise ValueError(msg)
        if not self.s > 0:
            msg = f"s must be > 0, got {self.s}"
            logger.error(msg)
            raise ValueError(msg)
        if not (math.isfinite(self.p) and self.p >= 1):
            msg = f"p must be a finite real >= 1, got {self.p}"
            logger.error(msg)
            raise ValueError(msg)
        if not self.delta >= 0:
            msg = f"delta must be >= 0, got {self.delta}"
            logger.error(msg)
            raise ValueError(msg)
        if self.h_grid_size < 1:
            msg = f"h_grid_size must be >= 1, got {self.h_grid_size}"
            logger.error(msg)
            raise ValueError(msg)

    def check_equivalence(self):
        if self.s > 2 * self.r:
            msg = f"equivalences need s <= 2r, got s={self.s}, r={self.r}"
            logger.error(msg)
            raise ValueError(msg)
        return self


@dataclass(frozen=True)
class SmoothnessReport:
    omega_s: float
    discrete_avg_dev: float
    k_realization: float
    semidiscrete_k: float
    tau_s: Optional[float] = None
    frac_k: Optional[float] = None

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value is not None and not value >= 0:
                msg = f"smoothness report entry {name} must be >= 0, got {value}"
                logger.error(msg)
                raise ValueError(msg)


def _check_int_order(name, r):
    if int(r) != r or r < 1:
        msg = f"{name} must be an integer >= 1, got {r}"
        logger.error(msg)
        raise ValueError(msg)
    return int(r)


def finite_difference(f, r, h, x):
    """Delta_h^r f(x) = sum_nu C(r, nu) (-1)^nu f(x + (r - nu) h)"""
    r = _check_int_order("r", r)
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape)
    for nu in range(r + 1):
        total = total + math.comb(r, nu) * (-1) ** nu * evaluate(f, x + (r - nu) * h)
    return total if total.ndim else float(total)


def difference_function(f, r, h):
    """x -> Delta_h^r f(x) as a RealFunction"""
    r = _check_int_order("r", r)
    a, b = f.window
    reach = r * abs(h)
    return RealFunction(
        func=lambda x: finite_difference(f, r, h, x),
        window=(a - reach, b + reach),
        decay_class=f.decay_class,
        decay_order=f.decay_order,
        label=f"D^{r}_{h:.4g}{f}",
        breakpoints=[bp - j * h for bp in f.breakpoints for j in range(r + 1)],
    )


def modulus_steps(delta, h_grid_size=H_GRID_SIZE):
    """log-spaced steps in (0, delta], delta included"""
    if h_grid_size == 1:
        return np.array([float(delta)])
    return float(delta) * np.geomspace(H_GRID_RANGE, 1.0, h_grid_size)


def difference_norms(f, r, h_values, p=2.0, quad=None):
    """||Delta_h^r f||_p for every step in ``h_values``"""
    return np.array([lp_norm(difference_function(f, r, h), p, quad) for h in h_values])


def modulus_curve(f, r, h_values, p=2.0, quad=None):
    """omega_r(f, h)_p at each of the increasing steps ``h_values``, sup taken over the
    steps themselves"""
    h_values = np.sort(np.asarray(h_values, dtype=float))
    return h_values, np.maximum.accumulate(difference_norms(f, r, h_values, p, quad))


def modulus(f, r, delta, p=2.0, quad=None, h_grid_size=H_GRID_SIZE, h_values=None):
    """omega_r(f, delta)_p

    The sup over 0 < h <= delta runs over ``h_grid_size`` log-spaced steps including delta,
    or over the members of ``h_values`` not exceeding delta when given.
    """
    r = _check_int_order("r", r)
    if delta == 0:
        return 0.0
    if h_values is None:
        steps = modulus_steps(delta, h_grid_size)
    else:
        steps = [h for h in h_values if 0 < h <= delta * (1 + 1e-12)]
        if len(steps) == 0:
            return 0.0
    return float(np.max(difference_norms(f, r, steps, p, quad)))


def averaged_coefficients(r):
    """weights w_j of f_{delta,r} = sum_j w_j f_{delta j / r}, j = 1..r"""
    r = _check_int_order("r", r)
    central = math.comb(2 * r, r)
    return np.array([-(2 / central) * (-1) ** j * math.comb(2 * r, r - j) for j in range(1, r + 1)])


def averaged_op(f, delta, r, x, quad=None):
    """the averaged operator f_{delta,r}(x), built from interval means of radius delta*j/r"""
    x = np.asarray(x, dtype=float)
    if delta == 0:
        return evaluate(f, x)
    total = np.zeros(x.shape)
    for j, w in enumerate(averaged_coefficients(r), start=1):
        total = total + w * interval_mean(f, x, delta * j / r, quad)
    return total if total.ndim else float(total)


def averaged_function(f, delta, r, quad=None):
    a, b = f.window
    return RealFunction(
        func=lambda x: averaged_op(f, delta, r, x, quad),
        window=(a - delta, b + delta),
        decay_class=f.decay_class,
        decay_order=f.decay_order,
        label=f"A[{delta:.4g},{r}]{f}",
        breakpoints=[bp + sign * delta * j / r for bp in f.breakpoints for j in range(1, r + 1) for sign in (-1, 1)],
    )


def averaged_identity_check(f, delta, r, x, quad=None):
    """residual of f - f_{delta,r} = -(1 / (2 c_r)) int_{-1}^{1} Dc^{2r}_{delta y / r} f(x) dy

    ``Dc^{2r}_h f(x) = sum_nu C(2r, nu) (-1)^nu f(x + (r - nu) h)`` is the centered difference
    and c_r = (-1)^(r+1) C(2r, r). Both sides come from independent quadratures.
    """
    quad = QuadratureSpec() if quad is None else quad
    r = _check_int_order("r", r)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lhs = evaluate(f, x) - np.asarray(averaged_op(f, delta, r, x, quad))
    if delta == 0:
        return np.abs(lhs)

    c_r = (-1) ** (r + 1) * math.comb(2 * r, r)
    weights = [math.comb(2 * r, nu) * (-1) ** nu for nu in range(2 * r + 1)]
    shifts = [(r - nu) * delta / r for nu in range(2 * r + 1)]
    cuts = [(bp - x) / shift for bp in f.breakpoints for shift in shifts if shift != 0]
    cuts = np.stack(cuts, axis=1) if cuts else np.zeros((x.size, 0))

    def integrand(y, centers):
        xs = centers.reshape((-1,) + (1,) * (y.ndim - 1))
        return sum(w * evaluate(f, xs + shift * y) for w, shift in zip(weights, shifts))

    panels = max(4, int(math.ceil(2 * delta * quad.panels)))
    integral = integrate_rows(integrand, -np.ones(x.size), np.ones(x.size), cuts, quad.nodes_per_panel, panels,
                              row_args=x)
    return np.abs(lhs + integral / (2 * c_r))


def _check_delta(delta, grid):
    limit = max(grid.gamma / grid.sigma, 0.5 / grid.sigma)
    if delta > limit * (1 + 1e-12):
        msg = f"delta={delta:g} exceeds max(gamma/sigma, 1/(2 sigma)) = {limit:g} for sigma={grid.sigma:g}"
        logger.error(msg)
        raise ValueError(msg)


def discrete_avg_deviation(f, grid, delta, r, p=2.0, quad=None):
    """||f_{delta,r} - f||_{l_p(X_sigma)}

    delta may reach 1/(2 sigma), the nominal value for uniform grids, even though strict
    separation needs gamma < 1/2.
    """
    _check_delta(delta, grid)
    if delta == 0 or grid.size == 0:
        return 0.0
    x = grid.points
    return discrete_lp(np.asarray(averaged_op(f, delta, r, x, quad)) - evaluate(f, x), grid.sigma, p)


def local_modulus(f, r, delta, x, local_grid=LOCAL_GRID, h_values=None):
    """omega_r(f, x, delta): sup of |Delta_h^r f(t)| over t, t + r h in [x - r delta/2, x + r delta/2]

    The sup runs over ``local_grid = (n_h, n_t)`` steps and start points; the centered start
    x - r h/2 is always included.
    """
    r = _check_int_order("r", r)
    x = np.asarray(x, dtype=float)
    n_h, n_t = local_grid
    steps = delta * np.arange(1, n_h + 1) / n_h if h_values is None else np.asarray(h_values, dtype=float)
    steps = steps[(steps > 0) & (steps <= delta * (1 + 1e-12))]
    if steps.size == 0:
        return np.zeros(x.shape)
    frac = np.linspace(0.0, 1.0, n_t)
    half = r * delta / 2
    # starts[i, j] relative to x: from -half to half - r h_i, plus the centered start
    starts = np.concatenate([-half + frac[None, :] * (2 * half - r * steps[:, None]), -r * steps[:, None] / 2], axis=1)
    coef = [math.comb(r, nu) * (-1) ** nu for nu in range(r + 1)]

    flat = x.ravel()
    out = np.empty(flat.size)
    for rows in row_blocks(flat.size, starts.size * (r + 1)):
        t = flat[rows, None, None] + starts
        diff = sum(c * evaluate(f, t + (r - nu) * steps[:, None]) for nu, c in enumerate(coef))
        out[rows] = np.max(np.abs(diff), axis=(1, 2))
    return out.reshape(x.shape)


def tau_modulus(f, r, delta, p=2.0, quad=None, local_grid=LOCAL_GRID, h_values=None):
    """tau_r(f, delta)_p = ||omega_r(f, ., delta)||_p"""
    r = _check_int_order("r", r)
    if delta == 0:
        return 0.0
    a, b = f.window
    half = r * delta / 2
    local = RealFunction(
        func=lambda x: local_modulus(f, r, delta, x, local_grid, h_values),
        window=(a - half, b + half),
        decay_class=f.decay_class,
        decay_order=f.decay_order,
        label=f"w{r}[{delta:.4g}]{f}",
        breakpoints=[bp + sign * half for bp in f.breakpoints for sign in (-1, 1)],
    )
    return lp_norm(local, p, quad)


def tau_integral_bound(f, r, delta, p=2.0, sigma=1.0, quad=None, n=16):
    """sigma^{-1/p} int_0^delta omega_{2r}(f, t)_p t^{-1/p} dt/t as a log-grid Riemann sum

    The integral below delta * 2^-10 is dropped, so the value is an approximation.
    """
    if delta == 0:
        return 0.0
    t = modulus_steps(delta, n)
    _, omega = modulus_curve(f, 2 * r, t, p, quad)
    dlog = np.log(t[1] / t[0]) if n > 1 else 1.0
    return float(sigma ** (-1 / p) * np.sum(omega * t ** (-1 / p)) * dlog)


def _projection_error(f, g, sigma, p, quad):
    quad = QuadratureSpec() if quad is None else quad
    return lp_norm(f - g, p, quad.refined(2 * sigma))


def k_realization(f, s, p=2.0, sigma=1.0, quad=None):
    """||f - g_sigma||_p + sigma^-s |g_sigma|_{W_p^s} with g_sigma the band-limited projection"""
    s = _check_int_order("s", s)
    g = bandlimited_project(f, sigma, p=p)
    return _projection_error(f, g, sigma, p, quad) + sigma ** (-s) * sobolev_seminorm(g, s, p, quad)


def frac_k(f, s, p=2.0, sigma=1.0, quad=None):
    """||f - g_sigma||_p + sigma^-s ||(-Delta)^{s/2} g_sigma||_p"""
    if not s > 0:
        msg = f"s must be > 0, got {s}"
        logger.error(msg)
        raise ValueError(msg)
    g = bandlimited_project(f, sigma, p=p)
    return _projection_error(f, g, sigma, p, quad) + sigma ** (-s) * fractional_seminorm(g, s, p, quad)


def semidiscrete_k(f, grid, r, s, p=2.0, sigma=None, quad=None, h_grid_size=H_GRID_SIZE):
    """||f_{gamma/sigma,r} - f||_{l_p(X_sigma)} + omega_s(f, 1/sigma)_p"""
    sigma = grid.sigma if sigma is None else sigma
    if s > 2 * r:
        msg = f"semi-discrete K-functional needs s <= 2r, got s={s}, r={r}"
        logger.error(msg)
        raise ValueError(msg)
    discrete = discrete_avg_deviation(f, grid, grid.gamma / sigma, r, p, quad)
    return discrete + modulus(f, s, 1 / sigma, p, quad, h_grid_size)


def smoothness_report(f, grid, params, quad=None, with_tau=False, with_frac=False):
    """every smoothness quantity of (f, sigma, r, s, p) at delta = gamma/sigma"""
    sigma = grid.sigma
    s, r, p = params.s, params.r, params.p
    omega = modulus(f, int(s), 1 / sigma, p, quad, params.h_grid_size)
    discrete = discrete_avg_deviation(f, grid, grid.gamma / sigma, r, p, quad)
    return SmoothnessReport(
        omega_s=omega,
        discrete_avg_dev=discrete,
        k_realization=k_realization(f, int(s), p, sigma, quad),
        semidiscrete_k=discrete + omega,
        tau_s=tau_modulus(f, int(s), 1 / sigma, p, quad) if with_tau else None,
        frac_k=frac_k(f, s, p, sigma, quad) if with_frac else None,
    )
