"""Rate fitting and equivalence reports along dyadic sigma ladders.

Every quantity of a (function, sigma) rung is computed once by :func:`rung_quantities`; the
checks below only combine the resulting columns. They take a pandas DataFrame with one row
per rung and the columns ``function``, ``sigma`` and the quantity names.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from sampsmooth.errors import DegenerateFitError, PreconditionError
from sampsmooth.funcspace import QuadratureSpec, lp_norm
from sampsmooth.kernels import make_kernel
from sampsmooth.operators import OperatorFamily
from sampsmooth.smoothness import (
    H_GRID_SIZE,
    discrete_avg_deviation,
    frac_k,
    k_realization,
    modulus,
    tau_modulus,
)
from sampsmooth.tools import dyadic_ladder
from sampsmooth.zoo import zoo

logger = logging.getLogger(__name__)

DEFAULT_LADDER = (8.0, 16.0, 32.0, 64.0, 128.0, 256.0)
MIN_RUNGS = 4
QUANTITIES = ("err", "disc", "omega", "omega_next", "sobolev_scaled", "frac", "kreal", "tau")
FLAGS = ("ok", "noise-floor", "inequality-violation", "not-applicable")


@dataclass(frozen=True)
class Thresholds:
    """pass/fail settings of the reports"""

    ratio_spread: float = 50.0
    alpha_tolerance: float = 0.1
    noise_floor: float = 1e-9
    exact_order_gap: float = 0.3

    def floor(self, norm=1.0):
        return self.noise_floor * max(1.0, norm)


@dataclass(frozen=True)
class Corollary:
    """operator family and exponents of one sampling corollary"""

    name: str
    family: Optional[str]
    s: float
    r: int = 1
    kernel_params: dict = field(default_factory=dict)
    epsilon: float = 0.0
    gamma: Optional[float] = None
    smoothness: str = "semidiscrete"
    with_sobolev: bool = False
    p_only: Optional[float] = None
    description: str = ""

    def operator_family(self, seed=0, quad=None, epsilon=None, gamma=None, kernel=None):
        epsilon = self.epsilon if epsilon is None else epsilon
        gamma = self.gamma if gamma is None else gamma
        if self.family is None:
            return OperatorFamily(kernel=None, epsilon=epsilon, seed=seed, gamma=gamma)
        params = dict(self.kernel_params if kernel is None else kernel)
        return OperatorFamily(kernel=make_kernel(self.family, quad=quad, **params), gamma=gamma)


COROLLARIES = {
    "cor3S": Corollary("cor3S", "sinc", s=2, r=1, with_sobolev=True, description="sinc sampling, (i)-(iii)"),
    "cor3SR": Corollary(
        "cor3SR", "riesz", s=2.0, r=1, kernel_params={"s": 2.0, "delta": 1.0}, smoothness="frac",
        description="Riesz kernel sampling with the fractional K-functional",
    ),
    "cor3Sr": Corollary("cor3Sr", "bspline", s=1, r=1, kernel_params={"order": 3}, description="B-spline sampling"),
    "corGa": Corollary("corGa", "gaussian", s=1, r=1, kernel_params={"normalized": True},
                       description="Gaussian sampling"),
    "corHa": Corollary("corHa", None, s=2, r=1, epsilon=0.2, gamma=0.29, p_only=2.0,
                       description="Gaussian interpolation on a Kadec grid, p=2"),
}


@dataclass(frozen=True, eq=False)
class RateTable:
    """values of a quantity along a dyadic ladder and the fitted exponent alpha"""

    name: str
    sigma_ladder: np.ndarray
    values: np.ndarray
    fitted_alpha: float
    fit_residual: float
    function: str = ""

    def __post_init__(self):
        sigmas = np.asarray(self.sigma_ladder, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(sigmas) <= 0):
            msg = f"rate table '{self.name}': sigma ladder must be strictly increasing"
            logger.error(msg)
            raise ValueError(msg)
        if np.any(values < 0):
            msg = f"rate table '{self.name}': values must be >= 0"
            logger.error(msg)
            raise ValueError(msg)
        object.__setattr__(self, "sigma_ladder", sigmas)
        object.__setattr__(self, "values", values)


def rate_fit(sigmas, values, name="", function=""):
    """least-squares fit of log(value) against log(sigma); alpha is minus the slope

    Raises
    ------
    DegenerateFitError
        on fewer than four rungs or on a value <= 0
    """
    sigmas = np.asarray(sigmas, dtype=float)
    values = np.asarray(values, dtype=float)
    if sigmas.size < MIN_RUNGS:
        msg = f"rate fit of '{name}' ({function}) needs at least {MIN_RUNGS} rungs, got {sigmas.size}"
        logger.error(msg)
        raise DegenerateFitError(msg)
    if np.any(~(values > 0)):
        msg = f"rate fit of '{name}' ({function}): the quantity vanished or is negative on the ladder"
        logger.error(msg)
        raise DegenerateFitError(msg)
    slope, intercept = np.polyfit(np.log(sigmas), np.log(values), 1)
    fitted = np.exp(intercept + slope * np.log(sigmas))
    residual = float(np.max(np.abs(values / fitted - 1.0)))
    return RateTable(name, sigmas, values, float(-slope), residual, function)


def fit_above_floor(sigmas, values, floor, name="", function=""):
    """rate fit on the rungs above the noise floor, None when fewer than four remain"""
    sigmas = np.asarray(sigmas, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > floor
    if np.count_nonzero(keep) < MIN_RUNGS:
        logger.debug(f"'{name}' of {function}: {np.count_nonzero(keep)} rungs above the noise floor, no fit")
        return None
    return rate_fit(sigmas[keep], values[keep], name, function)


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    """comparison of two quantities along a ladder

    ``mode`` is "upper" (lhs <= C rhs, pass when ratio_max <= bound) or "two-sided" (pass
    when ratio_max / ratio_min <= bound, or when both exponents saturate).
    """

    name: str
    lhs_name: str
    rhs_name: str
    function: str
    sigmas: np.ndarray
    ratios: np.ndarray
    ratio_min: float
    ratio_max: float
    verdict: bool
    mode: str = "upper"
    bound: float = 50.0
    flag: str = "ok"
    alpha_lhs: float = math.nan
    alpha_rhs: float = math.nan

    def __post_init__(self):
        if self.ratio_min > self.ratio_max:
            msg = f"report '{self.name}': ratio_min {self.ratio_min} > ratio_max {self.ratio_max}"
            logger.error(msg)
            raise ValueError(msg)
        if self.flag not in FLAGS:
            msg = f"report flag should be one of {FLAGS}, not '{self.flag}'"
            logger.error(msg)
            raise ValueError(msg)

    @property
    def spread(self):
        if self.ratio_min > 0:
            return self.ratio_max / self.ratio_min
        return math.inf if self.ratio_max > 0 else 1.0


def compare(name, lhs_name, rhs_name, function, sigmas, lhs, rhs, mode="upper", bound=50.0, floor=1e-9,
            alpha_tolerance=None, saturation=None):
    """build the EquivalenceReport of ``lhs`` against ``rhs``

    With ``alpha_tolerance`` the fitted exponents of both sides must also agree, unless both
    reach ``saturation`` (the order of the operator) within the tolerance.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    live = (lhs > floor) & (rhs > floor)
    violation = (lhs > floor) & ~(rhs > floor)
    ratios = np.where(live, lhs / np.where(live, rhs, 1.0), np.nan)

    def report(verdict, flag, rmin=0.0, rmax=0.0, alpha_lhs=math.nan, alpha_rhs=math.nan):
        return EquivalenceReport(name, lhs_name, rhs_name, function, sigmas, ratios, rmin, rmax, bool(verdict), mode,
                                 bound, flag, alpha_lhs, alpha_rhs)

    if np.any(violation):
        where = sigmas[violation].tolist()
        logger.warning(f"{name} ({function}): {rhs_name} vanishes while {lhs_name} does not at sigma={where}")
        return report(False, "inequality-violation")
    if not np.any(live):
        logger.info(f"{name} ({function}): both sides at the noise floor, vacuous pass")
        return report(True, "noise-floor")

    rmin, rmax = float(np.nanmin(ratios)), float(np.nanmax(ratios))
    alpha_lhs = alpha_rhs = math.nan
    saturated = False
    agree = True
    if alpha_tolerance is not None:
        fit_l = fit_above_floor(sigmas, lhs, floor, lhs_name, function)
        fit_r = fit_above_floor(sigmas, rhs, floor, rhs_name, function)
        if fit_l is not None and fit_r is not None:
            alpha_lhs, alpha_rhs = fit_l.fitted_alpha, fit_r.fitted_alpha
            if saturation is not None:
                saturated = min(alpha_lhs, alpha_rhs) >= saturation - alpha_tolerance
            agree = saturated or abs(alpha_lhs - alpha_rhs) <= alpha_tolerance

    if mode == "upper":
        verdict = rmax <= bound
    else:
        verdict = (rmax / rmin <= bound) or (saturated and rmax <= bound)
    return report(verdict and agree, "ok", rmin, rmax, alpha_lhs, alpha_rhs)


def quantities_for(suite, corollary=None, family=None):
    """rung quantities a suite needs"""
    if suite == "corollary":
        needed = ["err", "disc", "omega", "omega_next"]
        if corollary.with_sobolev:
            needed.append("sobolev_scaled")
        if corollary.smoothness == "frac":
            needed.append("frac")
        return tuple(needed)
    if suite == "direct":
        needed = ["err", "disc", "omega"]
        if family is not None and family.kernel is not None and family.kernel.family == "bspline":
            needed.append("tau")
        return tuple(needed)
    if suite == "inverse":
        return ("err", "disc", "omega")
    if suite == "smoothness_of_operator":
        return ("disc", "omega", "sobolev_scaled")
    msg = f"no ladder quantities for suite '{suite}'"
    logger.error(msg)
    raise ValueError(msg)


def rung_quantities(f, family, sigma, r, s, p=2.0, quad=None, quantities=QUANTITIES, h_grid_size=H_GRID_SIZE):
    """every requested quantity of ``f`` at density ``sigma``

    ``omega`` and ``omega_next`` are the moduli of orders ceil(s) and ceil(s) + 1 at 1/sigma;
    ``disc`` uses delta = gamma / sigma on the operator grid.
    """
    quad = QuadratureSpec() if quad is None else quad
    order = int(math.ceil(s))
    out = {"function": f.label, "sigma": float(sigma)}
    if "err" in quantities:
        out["err"] = family.error(f, sigma, p, quad)
    if "disc" in quantities:
        grid = family.grid(sigma, family.grid_window(f))
        out["disc"] = discrete_avg_deviation(f, grid, grid.gamma / sigma, r, p, quad)
    if "omega" in quantities:
        out["omega"] = modulus(f, order, 1 / sigma, p, quad, h_grid_size)
    if "omega_next" in quantities:
        out["omega_next"] = modulus(f, order + 1, 1 / sigma, p, quad, h_grid_size)
    if "sobolev_scaled" in quantities:
        out["sobolev_scaled"] = family.smoothness(f, sigma, order, p, quad)
    if "frac" in quantities:
        out["frac"] = frac_k(f, s, p, sigma, quad)
    if "kreal" in quantities:
        out["kreal"] = k_realization(f, order, p, sigma, quad)
    if "tau" in quantities:
        out["tau"] = tau_modulus(f, 1, 1 / sigma, p, quad)
    if "disc" in out and "omega" in out:
        out["semidiscrete"] = out["disc"] + out["omega"]
    if "disc" in out and "frac" in out:
        out["frac_sum"] = out["disc"] + out["frac"]
    return out


def evaluate_ladder(functions, family, sigmas, r, s, p=2.0, quad=None, quantities=QUANTITIES,
                    h_grid_size=H_GRID_SIZE):
    """rung quantities of every function on every sigma, inline, as a DataFrame"""
    rows = [
        rung_quantities(f, family, sigma, r, s, p, quad, quantities, h_grid_size) for f in functions for sigma in sigmas
    ]
    return pd.DataFrame(rows)


def function_rows(table, name):
    return table[table["function"] == name].sort_values("sigma")


def direct_estimate_check(rows, function, thresholds=Thresholds(), floor=None):
    """||f - G_sigma f||_p <= C (||f_{gamma/sigma,r} - f||_{l_p} + omega_s(f, 1/sigma)_p)"""
    floor = thresholds.noise_floor if floor is None else floor
    return compare("direct", "err", "semidiscrete", function, rows["sigma"], rows["err"], rows["semidiscrete"],
                   "upper", thresholds.ratio_spread, floor)


def lower_estimate_check(rows, function, thresholds=Thresholds(), floor=None):
    """||f_{gamma/sigma,r} - f||_{l_p} <= C (||f - G_sigma f||_p + omega_s(f, 1/sigma)_p)"""
    floor = thresholds.noise_floor if floor is None else floor
    rhs = rows["err"].to_numpy() + rows["omega"].to_numpy()
    return compare("lower", "disc", "err+omega", function, rows["sigma"], rows["disc"], rhs, "upper",
                   thresholds.ratio_spread, floor)


def tau_direct_check(rows, function, thresholds=Thresholds(), floor=None):
    """||f - S_sigma f||_p <= C tau_1(f, 1/sigma)_p for compactly supported kernels"""
    floor = thresholds.noise_floor if floor is None else floor
    return compare("tau-direct", "err", "tau", function, rows["sigma"], rows["err"], rows["tau"], "upper",
                   thresholds.ratio_spread, floor)


def dyadic_error_sum(errors, sigma, s, norm):
    """sigma^-s sum_{nu=0}^{[sigma]} (nu + 1)^{s-1} E_nu from errors on dyadic densities

    ``errors`` maps each sigma' in 1, 2, 4, ..., sigma to ||f - G_sigma' f||_p; the block
    2^j <= nu < 2^{j+1} uses E at 2^j and E_0 = ||f||_p.
    """
    total = norm
    j = 0
    while 2**j <= sigma:
        block = np.arange(2**j, min(2 ** (j + 1) - 1, int(sigma)) + 1)
        total += float(np.sum((block + 1.0) ** (s - 1))) * errors[float(2**j)]
        j += 1
    return errors[float(sigma)] + sigma ** (-s) * total


def inverse_estimate_check(rows, function, errors, norm, s, thresholds=Thresholds(), floor=None):
    """smoothness <= C (error + sigma^-s sum (nu + 1)^{s-1} E_nu)

    ``errors`` holds the operator errors on the dyadic densities 1 .. max(sigma).
    """
    floor = thresholds.noise_floor if floor is None else floor
    sigmas = rows["sigma"].to_numpy()
    rhs = [dyadic_error_sum(errors, sigma, s, norm) for sigma in sigmas]
    return compare("inverse", "semidiscrete", "error-sum", function, sigmas, rows["semidiscrete"], rhs, "upper",
                   thresholds.ratio_spread, floor)


def smoothness_of_operator_check(rows, function, family, thresholds=Thresholds(), floor=None):
    """smoothness <= C sum_k (2^k sigma)^-s |G_{2^k sigma} f|_{W_p^s}

    The dyadic sum runs over the ladder above sigma and is closed by a geometric tail
    extrapolated from its last two terms.

    Raises
    ------
    PreconditionError
        unless the family interpolates on nested grids
    """
    if not family.interpolatory or family.epsilon != 0:
        msg = f"operator family {family.name} does not interpolate on nested grids"
        logger.error(msg)
        raise PreconditionError(msg)
    floor = thresholds.noise_floor if floor is None else floor
    sigmas = rows["sigma"].to_numpy()
    terms = rows["sobolev_scaled"].to_numpy()
    tail = 0.0
    if terms.size >= 2 and terms[-2] > 0:
        ratio = min(terms[-1] / terms[-2], 0.95)
        tail = terms[-1] * ratio / (1 - ratio)
    rhs = np.array([np.sum(terms[i:]) + tail for i in range(terms.size)])
    return compare("smoothness-of-operator", "semidiscrete", "dyadic-sobolev-sum", function, sigmas,
                   rows["semidiscrete"], rhs, "upper", thresholds.ratio_spread, floor)


def _decays(values, floor):
    values = np.asarray(values, dtype=float)
    return bool(values[-1] <= floor or values[-1] <= 0.5 * values[0])


def convergence_criterion(rows, function, thresholds=Thresholds(), floor=None):
    """G_sigma f -> f exactly when the discrete averaged deviation -> 0"""
    floor = thresholds.noise_floor if floor is None else floor
    err_decays = _decays(rows["err"], floor)
    disc_decays = _decays(rows["disc"], floor)
    sigmas = rows["sigma"].to_numpy()
    verdict = err_decays == disc_decays
    if not verdict:
        logger.warning(f"convergence ({function}): err decays={err_decays}, disc decays={disc_decays}")
    ratios = np.full(sigmas.size, np.nan)
    return EquivalenceReport("convergence", "err", "disc", function, sigmas, ratios, 0.0, 0.0, verdict, "upper",
                             thresholds.ratio_spread, "ok" if verdict else "inequality-violation")


def omega_ratio_precheck(rows, function, thresholds=Thresholds(), floor=None):
    """K = max omega_s / omega_{s+1} along the ladder; the pre-check passes when K is bounded"""
    floor = thresholds.noise_floor if floor is None else floor
    return compare("omega-ratio", "omega", "omega_next", function, rows["sigma"], rows["omega"], rows["omega_next"],
                   "upper", thresholds.ratio_spread, floor)


def exact_order_check(rows, function, thresholds=Thresholds(), floor=None):
    """when alpha(omega_s) exceeds alpha(disc) by the gap, alpha(err) equals alpha(disc)"""
    floor = thresholds.noise_floor if floor is None else floor
    sigmas = rows["sigma"].to_numpy()
    fits = {name: fit_above_floor(sigmas, rows[name], floor, name, function) for name in ("err", "disc", "omega")}
    ratios = rows["err"].to_numpy() / np.where(rows["disc"].to_numpy() > floor, rows["disc"].to_numpy(), np.nan)
    finite = ratios[np.isfinite(ratios)]
    rmin, rmax = (float(np.min(finite)), float(np.max(finite))) if finite.size else (0.0, 0.0)

    def report(verdict, flag, alpha_lhs=math.nan, alpha_rhs=math.nan):
        return EquivalenceReport("exact-order", "err", "disc", function, sigmas, ratios, rmin, rmax, verdict,
                                 "two-sided", thresholds.ratio_spread, flag, alpha_lhs, alpha_rhs)

    if any(fit is None for fit in fits.values()):
        return report(True, "noise-floor")
    gap = fits["omega"].fitted_alpha - fits["disc"].fitted_alpha
    if gap < thresholds.exact_order_gap:
        return report(True, "not-applicable", fits["err"].fitted_alpha, fits["disc"].fitted_alpha)
    verdict = abs(fits["err"].fitted_alpha - fits["disc"].fitted_alpha) <= thresholds.alpha_tolerance
    return report(verdict, "ok", fits["err"].fitted_alpha, fits["disc"].fitted_alpha)


def corollary_reports(rows, function, corollary, s, thresholds=Thresholds(), floor=None):
    """(i) ~ (ii), and (i) ~ (iii) when available, for one function"""
    floor = thresholds.noise_floor if floor is None else floor
    second = "frac_sum" if corollary.smoothness == "frac" else "semidiscrete"
    reports = [
        compare(f"{corollary.name}:(i)~(ii)", "err", second, function, rows["sigma"], rows["err"], rows[second],
                "two-sided", thresholds.ratio_spread, floor, thresholds.alpha_tolerance, saturation=s),
    ]
    if corollary.with_sobolev:
        reports.append(
            compare(f"{corollary.name}:(i)~(iii)", "err", "sobolev_scaled", function, rows["sigma"], rows["err"],
                    rows["sobolev_scaled"], "two-sided", thresholds.ratio_spread, floor, thresholds.alpha_tolerance,
                    saturation=s)
        )
    return reports


def corollary_table(corollary_id, p=2.0, ladder=DEFAULT_LADDER, functions=None, quad=None, seed=0, evaluate=None):
    """ladder DataFrame of one sampling corollary

    ``evaluate(functions, family, sigmas, r, s, p, quad, quantities)`` returns the ladder
    DataFrame; it defaults to :func:`evaluate_ladder` (inline).
    """
    corollary = get_corollary(corollary_id)
    if corollary.p_only is not None and p != corollary.p_only:
        msg = f"{corollary_id} is only available for p={corollary.p_only:g}, got p={p:g}"
        logger.error(msg)
        raise ValueError(msg)
    functions = [z.f for z in zoo(p, seed)] if functions is None else functions
    family = corollary.operator_family(seed=seed, quad=quad)
    evaluate = evaluate_ladder if evaluate is None else evaluate
    return evaluate(functions, family, list(ladder), corollary.r, corollary.s, p, quad,
                    quantities_for("corollary", corollary))


def corollary_suite_reports(table, functions, corollary, p=2.0, quad=None, thresholds=Thresholds()):
    """reports of a corollary ladder: equivalences, convergence, and exact order when the
    omega-ratio pre-check passes"""
    reports = []
    for f in functions:
        rows = function_rows(table, f.label)
        floor = thresholds.floor(lp_norm(f, p, quad))
        reports.extend(corollary_reports(rows, f.label, corollary, corollary.s, thresholds, floor))
        reports.append(convergence_criterion(rows, f.label, thresholds, floor))
        precheck = omega_ratio_precheck(rows, f.label, thresholds, floor)
        reports.append(precheck)
        if precheck.verdict:
            reports.append(exact_order_check(rows, f.label, thresholds, floor))
    return reports


def equivalence_suite(corollary_id, p=2.0, ladder=DEFAULT_LADDER, functions=None, quad=None,
                      thresholds=Thresholds(), seed=0, evaluate=None):
    """reports of one sampling corollary over the zoo (or over ``functions``)"""
    functions = [z.f for z in zoo(p, seed)] if functions is None else functions
    table = corollary_table(corollary_id, p, ladder, functions, quad, seed, evaluate)
    return corollary_suite_reports(table, functions, get_corollary(corollary_id), p, quad, thresholds)


def get_corollary(corollary_id):
    if corollary_id not in COROLLARIES:
        msg = f"unknown corollary '{corollary_id}', choose among {list(COROLLARIES)}"
        logger.error(msg)
        raise ValueError(msg)
    return COROLLARIES[corollary_id]


def prefix_ladder(ladder):
    """dyadic densities 1, 2, ..., max(ladder) used by the inverse estimate"""
    return dyadic_ladder(1, max(ladder))


def reports_frame(reports):
    """one row per report"""
    return pd.DataFrame(
        [
            {
                "name": rep.name,
                "function": rep.function,
                "lhs": rep.lhs_name,
                "rhs": rep.rhs_name,
                "mode": rep.mode,
                "ratio_min": rep.ratio_min,
                "ratio_max": rep.ratio_max,
                "alpha_lhs": rep.alpha_lhs,
                "alpha_rhs": rep.alpha_rhs,
                "flag": rep.flag,
                "verdict": "pass" if rep.verdict else "fail",
            }
            for rep in reports
        ],
        columns=["name", "function", "lhs", "rhs", "mode", "ratio_min", "ratio_max", "alpha_lhs", "alpha_rhs",
                 "flag", "verdict"],
    )


def alpha_rows(table, quantities):
    """fitted alpha of every quantity column and function, NaN when no fit is possible"""
    rows = []
    for name in pd.unique(table["function"]):
        sub = function_rows(table, name)
        row = {"function": name, "sigma": "alpha"}
        for quantity in quantities:
            if quantity not in sub:
                continue
            values = sub[quantity].to_numpy(dtype=float)
            fit = fit_above_floor(sub["sigma"].to_numpy(), values, 0.0, quantity, name)
            row[quantity] = math.nan if fit is None else fit.fitted_alpha
        rows.append(row)
    return pd.DataFrame(rows)
