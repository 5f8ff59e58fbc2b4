"""Kernel families of the sampling operators: sinc, B-splines, Gaussians and Riesz kernels.

Fourier transforms use the convention phi_hat(xi) = int phi(y) exp(-2 pi i xi y) dy.
"""

import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from sampsmooth.errors import ToleranceError
from sampsmooth.funcspace import QuadratureSpec, gauss_legendre
from sampsmooth.tools import Timing, row_blocks

logger = logging.getLogger(__name__)

FAMILIES = ("sinc", "bspline", "gaussian", "riesz")
KERNEL_DECAYS = ("compact", "gaussian", "polynomial")

# half-width of the periodisation used by the normalised Gaussian
_THETA_TERMS = 8


def _scalar(y):
    return y if y.ndim else float(y)


def sinc_eval(x):
    """sin(pi x) / (pi x), exactly 1 at 0 and exactly 0 at the other integers"""
    x = np.asarray(x, dtype=float)
    px = np.pi * x
    small = np.abs(x) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        y = np.where(small, 1.0 - px**2 / 6 + px**4 / 120, np.sin(px) / np.where(small, 1.0, px))
    y = np.where((x == np.round(x)) & (x != 0), 0.0, y)
    return _scalar(y)


def _sinc_series_derivative(x, order, terms=30):
    out = np.zeros_like(x)
    for n in range(terms):
        k = 2 * n
        if k < order:
            continue
        coef = (-1) ** n * np.pi**k / (k + 1) / math.factorial(k - order)
        out += coef * x ** (k - order)
    return out


def sinc_derivative(x, order):
    """``order``-th derivative of sinc

    Uses the Taylor series for |x| < 1 and the recurrence of x*sinc(x) = sin(pi x)/pi
    elsewhere.
    """
    x = np.asarray(x, dtype=float)
    if order == 0:
        return sinc_eval(x)
    flat = x.ravel()
    out = np.empty_like(flat)
    near = np.abs(flat) < 1.0
    out[near] = _sinc_series_derivative(flat[near], order)
    far = flat[~near]
    g = np.asarray(sinc_eval(far), dtype=float)
    for m in range(1, order + 1):
        g = (np.pi ** (m - 1) * np.sin(np.pi * far + m * np.pi / 2) - m * g) / far
    out[~near] = g
    return _scalar(out.reshape(x.shape))


def _check_order(r):
    if int(r) != r or r < 2:
        msg = f"B-spline order must be an integer >= 2, got r={r}"
        logger.error(msg)
        raise ValueError(msg)
    return int(r)


def _bspline(r, u):
    u = np.asarray(u, dtype=float)
    if r == 1:
        return ((u >= -0.5) & (u < 0.5)).astype(float)
    y = np.zeros_like(u)
    for j in range(r + 1):
        y += (-1) ** j * math.comb(r, j) * np.maximum(r / 2 + u - j, 0.0) ** (r - 1)
    y /= math.factorial(r - 1)
    return np.where(np.abs(u) <= r / 2, y, 0.0)


def bspline_eval(r, u):
    """centered B-spline B_r(u) as an alternating sum of truncated powers"""
    r = _check_order(r)
    return _scalar(_bspline(r, u))


def bspline_derivative(r, u, order):
    """``order``-th derivative of B_r, from B_r' = B_{r-1}(. + 1/2) - B_{r-1}(. - 1/2)"""
    r = _check_order(r)
    return _scalar(_bspline_derivative(r, np.asarray(u, dtype=float), order))


def _bspline_derivative(r, u, order):
    if order == 0:
        return _bspline(r, u)
    if r == 1:
        return np.zeros_like(u)
    return _bspline_derivative(r - 1, u + 0.5, order - 1) - _bspline_derivative(r - 1, u - 0.5, order - 1)


def gaussian_eval(x):
    """exp(-pi x^2), its own Fourier transform"""
    x = np.asarray(x, dtype=float)
    return _scalar(np.exp(-np.pi * x**2))


def gaussian_derivative(x, order):
    """(-sqrt(pi))^m H_m(sqrt(pi) x) exp(-pi x^2) with physicists' Hermite polynomials"""
    x = np.asarray(x, dtype=float)
    coef = np.zeros(order + 1)
    coef[order] = 1.0
    scale = np.sqrt(np.pi)
    y = (-scale) ** order * np.polynomial.hermite.hermval(scale * x, coef) * np.exp(-np.pi * x**2)
    return _scalar(y)


def _theta(u):
    """sum_k psi(u - k), 1-periodic, evaluated at the reduced argument u - round(u)"""
    shifts = np.arange(-_THETA_TERMS, _THETA_TERMS + 1)
    u = np.asarray(u, dtype=float)
    reduced = u - np.round(u)
    return np.sum(np.exp(-np.pi * (reduced[..., None] - shifts) ** 2), axis=-1)


def normalized_gaussian_eval(u):
    """psi(u) / sum_k psi(u - k), a Gaussian that reproduces constants"""
    u = np.asarray(u, dtype=float)
    return _scalar(np.exp(-np.pi * u**2) / _theta(u))


def riesz_symbol(xi, s, delta):
    """(1 - |4 xi / 3|^s)_+^delta"""
    xi = np.asarray(xi, dtype=float)
    base = np.maximum(1.0 - np.abs(4.0 * xi / 3.0) ** s, 0.0)
    return _scalar(base**delta)


@dataclass(frozen=True, eq=False)
class Kernel:
    """translation kernel of a sampling operator

    Parameters
    ----------
    func : callable
        vectorised evaluation
    family : str
        one of FAMILIES
    support_radius : float
        phi vanishes for |u| > support_radius (``inf`` when unbounded)
    decay : str
        "compact", "gaussian" or "polynomial"
    decay_order : float
        q in |phi(u)| <= C / (1 + |u|^q) for polynomial decay
    fourier : callable, optional
        closed-form Fourier transform
    deriv : callable, optional
        ``deriv(u, m)`` returns the m-th derivative
    params : dict
        family parameters (order, s, delta, envelope constant ...)
    interpolatory : bool
        phi(k) = delta_{k,0} on the integers
    """

    func: Callable
    family: str
    support_radius: float = math.inf
    decay: str = "polynomial"
    decay_order: float = 1.0
    fourier: Optional[Callable] = None
    deriv: Optional[Callable] = None
    params: dict = None
    interpolatory: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            msg = f"kernel family should be one of {FAMILIES}, not '{self.family}'"
            logger.error(msg)
            raise ValueError(msg)
        if self.decay not in KERNEL_DECAYS:
            msg = f"kernel decay should be one of {KERNEL_DECAYS}, not '{self.decay}'"
            logger.error(msg)
            raise ValueError(msg)
        object.__setattr__(self, "params", dict(self.params or {}))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        y = np.asarray(self.func(u), dtype=float)
        if self.decay == "compact":
            y = np.where(np.abs(u) <= self.support_radius, y, 0.0)
        return _scalar(y)

    def derivative(self, u, order):
        if order == 0:
            return self(u)
        if self.deriv is None:
            msg = f"kernel {self.name} has no derivative"
            logger.error(msg)
            raise ValueError(msg)
        return self.deriv(np.asarray(u, dtype=float), order)

    @property
    def name(self):
        if self.family == "bspline":
            return f"bspline({self.params['order']})"
        if self.family == "riesz":
            return f"riesz(s={self.params['s']:g},delta={self.params['delta']:g})"
        if self.family == "gaussian" and self.params.get("normalized"):
            return "gaussian(normalized)"
        return self.family

    @property
    def envelope(self):
        return self.params.get("envelope", 1.0)

    def truncation_radius(self, tol):
        """radius R in kernel units beyond which the dropped terms are below ``tol``

        ``inf`` means every available sample has to be used (sinc).
        """
        if self.decay == "compact":
            return float(self.support_radius)
        if self.decay == "gaussian":
            return float(np.sqrt(np.log(1.0 / tol) / np.pi) + 1.0)
        q = self.decay_order
        if q <= 1:
            return math.inf
        radius = (2 * self.envelope / ((q - 1) * tol)) ** (1.0 / (q - 1))
        return float(min(radius, self.params.get("cache_radius", math.inf)))

    def tail_mass(self, radius):
        """bound of sum_{|u - k| > R} |phi(u - k)| for bounded sample values"""
        if math.isinf(radius) or radius >= self.support_radius:
            return 0.0
        if self.decay == "gaussian":
            return float(2 * np.exp(-np.pi * radius**2) / (1 - np.exp(-np.pi)))
        q = self.decay_order
        if q <= 1:
            # alternating sinc tails: sum of 1/(pi |u - k|) over paired terms
            return float(2 / (np.pi * radius))
        return float(2 * self.envelope * radius ** (1 - q) / (q - 1))


def sinc_kernel():
    return Kernel(
        func=sinc_eval,
        family="sinc",
        decay="polynomial",
        decay_order=1.0,
        fourier=lambda xi: np.where(np.abs(np.asarray(xi, dtype=float)) <= 0.5, 1.0, 0.0),
        deriv=sinc_derivative,
        interpolatory=True,
    )


def bspline_kernel(r):
    r = _check_order(r)
    return Kernel(
        func=partial(_bspline, r),
        family="bspline",
        support_radius=r / 2,
        decay="compact",
        decay_order=math.inf,
        fourier=lambda xi: np.asarray(sinc_eval(xi), dtype=float) ** r,
        deriv=partial(_bspline_derivative, r),
        params={"order": r},
        interpolatory=r == 2,
    )


def gaussian_kernel(normalized=False):
    """the Gaussian psi, or psi normalised to a partition of unity"""
    if normalized:
        return Kernel(
            func=normalized_gaussian_eval,
            family="gaussian",
            decay="gaussian",
            decay_order=math.inf,
            params={"normalized": True},
        )
    return Kernel(
        func=gaussian_eval,
        family="gaussian",
        decay="gaussian",
        decay_order=math.inf,
        fourier=gaussian_eval,
        deriv=gaussian_derivative,
        params={"normalized": False},
    )


def _riesz_trapezoid(symbol, n, spacing):
    """rho(m * spacing), m = 0 .. n/2 - 1, by an n-point discrete inverse transform"""
    xi = np.fft.fftfreq(n, d=spacing)
    return np.fft.ifft(symbol(xi)).real[: n // 2] / spacing


def _riesz_direct(x, symbol, nodes=8):
    """2 int_0^{3/4} m(xi) cos(2 pi xi x) dxi by composite Gauss-Legendre"""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    panels = int(math.ceil(3 * np.max(flat, initial=0.0))) + 16
    t, w = gauss_legendre(nodes)
    bounds = np.linspace(0.0, 0.75, panels + 1)
    half = 0.5 * np.diff(bounds)
    xi = ((bounds[:-1] + bounds[1:])[:, None] / 2 + half[:, None] * t).ravel()
    weights = (half[:, None] * w).ravel() * symbol(xi)
    out = np.empty_like(flat)
    for rows in row_blocks(flat.size, xi.size):
        out[rows] = 2 * np.cos(2 * np.pi * np.outer(flat[rows], xi)) @ weights
    return out.reshape(x.shape)


def riesz_decay_order(s, delta):
    if float(s) % 2 == 0:
        return 1.0 + delta
    return 1.0 + min(delta, s)


def riesz_build(s, delta, quad=None, radius=4096.0, spacing=1 / 64, tol=1e-6, max_refinements=3):
    """Riesz kernel rho_{s,delta}, the inverse transform of (1 - |4 xi/3|^s)_+^delta

    Values on [0, radius] are computed once by a discrete inverse transform and kept in a
    cubic spline; the transform is refined by doubling its length until two successive
    refinements agree within ``tol``. Beyond ``radius`` the cosine integral is evaluated
    directly.

    Parameters
    ----------
    s, delta : float
        exponents of the symbol, both > 0
    quad : QuadratureSpec, optional
        ``nodes_per_panel`` is used for the direct evaluation beyond the cache
    radius : float, optional
        extent of the cache, by default 4096
    spacing : float, optional
        cache step, by default 1/64
    tol : float, optional
        absolute agreement required between refinements, by default 1e-6

    Returns
    -------
    Kernel

    Raises
    ------
    ToleranceError
        when the refinements do not agree; ``residual`` holds the last difference
    """
    if not s > 0:
        msg = f"Riesz kernel needs s > 0, got s={s}"
        logger.error(msg)
        raise ValueError(msg)
    if not delta > 0:
        msg = f"Riesz kernel needs delta > 0, got delta={delta}"
        logger.error(msg)
        raise ValueError(msg)
    quad = QuadratureSpec() if quad is None else quad
    symbol = partial(riesz_symbol, s=s, delta=delta)

    with Timing() as timer:
        n = 2 ** int(math.ceil(math.log2(4 * radius / spacing)))
        m = int(round(radius / spacing)) + 1
        values = _riesz_trapezoid(symbol, n, spacing)[:m]
        residual = math.inf
        for _ in range(max_refinements):
            n *= 2
            finer = _riesz_trapezoid(symbol, n, spacing)[:m]
            residual = float(np.max(np.abs(finer - values)))
            values = finer
            if residual <= tol:
                break
        else:
            msg = f"Riesz kernel (s={s}, delta={delta}) did not converge: residual {residual:.3e} > {tol:.1e}"
            logger.error(msg)
            raise ToleranceError(msg, residual=residual)

    grid = np.arange(m) * spacing
    spline = CubicSpline(grid, values, bc_type=((1, 0.0), "not-a-knot"))
    q = riesz_decay_order(s, delta)
    far = grid >= 1.0
    envelope = float(np.max(np.abs(values[far]) * (1 + grid[far] ** q)))
    logger.debug(
        f"Riesz cache s={s:g} delta={delta:g}: {m} nodes, n={n}, residual {residual:.2e}, "
        f"envelope {envelope:.3g}, built in {timer}"
    )

    def func(u):
        au = np.abs(np.asarray(u, dtype=float))
        inside = au <= radius
        out = np.empty_like(au)
        out[inside] = spline(au[inside])
        if not np.all(inside):
            out[~inside] = _riesz_direct(au[~inside], symbol, quad.nodes_per_panel)
        return out

    return Kernel(
        func=func,
        family="riesz",
        decay="polynomial",
        decay_order=q,
        fourier=symbol,
        params={"s": float(s), "delta": float(delta), "envelope": envelope, "cache_radius": float(radius),
                "residual": residual},
    )


def decay_envelope(kernel, u):
    """fitted C of |phi(u)| <= C / (1 + |u|^q) on the abscissae ``u``"""
    u = np.abs(np.asarray(u, dtype=float))
    return float(np.max(np.abs(kernel(u)) * (1 + u**kernel.decay_order)))


def make_kernel(family, order=3, s=2.0, delta=1.0, normalized=True, quad=None):
    """kernel of ``family`` built from configuration parameters"""
    if family == "sinc":
        return sinc_kernel()
    if family == "bspline":
        return bspline_kernel(order)
    if family == "gaussian":
        return gaussian_kernel(normalized=normalized)
    if family == "riesz":
        return riesz_build(s, delta, quad=quad)
    msg = f"kernel family should be one of {FAMILIES}, not '{family}'"
    logger.error(msg)
    raise ValueError(msg)
