"""The ``properties`` suite: structural facts about moduli, averaged operators and kernels.

Each group returns EquivalenceReports in "upper" mode: ``lhs <= bound * rhs`` on every
scale, ``scales`` holding the deltas or sigmas the check ran on.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from sampsmooth.analysis import EquivalenceReport, rate_fit
from sampsmooth.funcspace import (
    QuadratureSpec,
    RealFunction,
    discrete_seminorm,
    lp_norm,
    make_uniform_grid,
)
from sampsmooth.kernels import bspline_eval, gaussian_kernel, make_kernel, sinc_eval
from sampsmooth.operators import (
    SamplingOperator,
    bernstein_ratio,
    operator_error,
    sobolev_seminorm,
    stability_constants,
)
from sampsmooth.smoothness import (
    averaged_function,
    averaged_identity_check,
    averaged_op,
    difference_norms,
    discrete_avg_deviation,
    k_realization,
    modulus,
    modulus_steps,
    tau_integral_bound,
    tau_modulus,
)
from sampsmooth.tools import Timing
from sampsmooth.zoo import ZOO_NAMES, zoo

logger = logging.getLogger(__name__)

PROPERTY_GROUPS = (
    "moduli",
    "tau",
    "st1",
    "prop21",
    "identity",
    "partition",
    "sinc",
    "plancherel",
    "reproduction",
    "stability",
    "bernstein",
    "hat_slope",
    "kfunctional",
)
PER_MEMBER_GROUPS = ("st1", "prop21", "bernstein", "kfunctional")
PROPERTY_GRIDS = ("default", "full")
SMOOTH = ("bump", "bandlimited", "gaussian")
COMPACT = ("bump", "hat", "step", "cusp03", "cusp07")


@dataclass(frozen=True)
class PropertySettings:
    """scales, orders and bounds of the properties suite

    The defaults keep the suite interactive; :meth:`full` is the finer grid.
    ``st1_bounds[2]`` is 1000 because f_{delta,2} - f ~ -delta^4 f'''' / 480 against
    omega_4 ~ delta^4 |f''''| for smooth f.
    """

    rs: tuple = (1, 2, 3)
    ps: tuple = (1.0, 2.0, 3.0)
    deltas: tuple = tuple(2.0**-k for k in range(4, 8))
    sigmas: tuple = (8.0, 16.0, 32.0, 64.0)
    h_grid_size: int = 8
    local_grid: tuple = (8, 8)
    st1_bounds: dict = field(default_factory=lambda: {1: 20.0, 2: 1000.0})
    prop21_bound: float = 50.0
    kfunctional_bound: float = 20.0
    tau_slack: float = 0.05
    exact_slack: float = 1e-9
    n_random: int = 8
    seed: int = 0
    gamma: float = 0.49

    @classmethod
    def full(cls, **values):
        """six deltas, 16-point step and local grids, 20 random vectors"""
        grid = {"deltas": tuple(2.0**-k for k in range(4, 10)), "h_grid_size": 16, "local_grid": (16, 16),
                "n_random": 20}
        return cls(**{**grid, **values})


def _inequality(name, function, scales, lhs, rhs, bound=1.0, slack=0.0, lhs_name="lhs", rhs_name="rhs"):
    """report of lhs <= bound * rhs * (1 + slack) on every scale"""
    scales = np.asarray(scales, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    ok = lhs <= bound * rhs * (1 + slack) + 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.nan)
    finite = ratios[np.isfinite(ratios)]
    rmin, rmax = (float(np.min(finite)), float(np.max(finite))) if finite.size else (0.0, 0.0)
    verdict = bool(np.all(ok))
    if not verdict:
        bad = scales[~ok].tolist()
        logger.warning(f"{name} ({function}) fails at scales {bad}: ratio max {rmax:.4g} > {bound:g}")
    return EquivalenceReport(name, lhs_name, rhs_name, function, scales, ratios, rmin, rmax, verdict, "upper", bound,
                             "ok" if verdict else "inequality-violation")


def _within(name, function, scales, lhs, rhs, bound, lhs_name="lhs", rhs_name="rhs"):
    """report of 1/bound <= lhs / rhs <= bound on every scale"""
    report = _inequality(name, function, scales, lhs, rhs, bound, 0.0, lhs_name, rhs_name)
    verdict = report.verdict and report.ratio_min >= 1.0 / bound
    return EquivalenceReport(name, lhs_name, rhs_name, function, report.sigmas, report.ratios, report.ratio_min,
                             report.ratio_max, verdict, "two-sided", bound,
                             "ok" if verdict else "inequality-violation")


def _members(functions, names):
    return [f for f in functions if f.label in names]


def _shared_steps(deltas, n):
    return np.unique(np.concatenate([modulus_steps(d, n) for d in deltas]))


def _moduli_from_norms(steps, norms, deltas):
    return np.array([np.max(norms[steps <= d * (1 + 1e-12)], initial=0.0) for d in deltas])


def check_moduli(functions, settings, quad):
    """properties (a) to (e) of the moduli of smoothness on a shared step grid"""
    reports = []
    deltas = np.sort(np.asarray(settings.deltas, dtype=float))
    steps = _shared_steps(deltas, settings.h_grid_size)
    for p in settings.ps:
        for r in settings.rs:
            norms = {f.label: difference_norms(f, r, steps, p, quad) for f in functions}
            for f in functions:
                tag = f"{f.label},r={r},p={p:g}"
                omega = _moduli_from_norms(steps, norms[f.label], deltas)
                reports.append(_inequality("moduli(a)", tag, deltas[:-1], omega[:-1], omega[1:], 1.0,
                                           settings.exact_slack, "omega(delta)", "omega(next delta)"))

                next_norms = difference_norms(f, r + 1, steps, p, quad)
                omega_next = _moduli_from_norms(steps, next_norms, deltas)
                reports.append(_inequality("moduli(c)", tag, deltas, omega_next, omega, 2.0, settings.exact_slack,
                                           "omega_r+1", "omega_r"))

                wide = [modulus(f, r, 2 * d, p, quad, settings.h_grid_size) for d in deltas]
                narrow = [modulus(f, r, d, p, quad, settings.h_grid_size) for d in deltas]
                reports.append(_inequality("moduli(d)", tag, deltas, wide, narrow, 3.0**r, settings.exact_slack,
                                           "omega(2 delta)", "omega(delta)"))

                if f.label in SMOOTH:
                    seminorm = sobolev_seminorm(f, r, p, quad)
                    reports.append(_inequality("moduli(e)", tag, deltas, omega, deltas**r * seminorm, 1.0, 1e-6,
                                               "omega", "delta^r |f|_W"))

            for f, g in zip(functions[:-1], functions[1:]):
                tag = f"{f.label}+{g.label},r={r},p={p:g}"
                total = _moduli_from_norms(steps, difference_norms(f + g, r, steps, p, quad), deltas)
                parts = _moduli_from_norms(steps, norms[f.label], deltas) + _moduli_from_norms(
                    steps, norms[g.label], deltas)
                reports.append(_inequality("moduli(b)", tag, deltas, total, parts, 1.0, settings.exact_slack,
                                           "omega(f+g)", "omega(f)+omega(g)"))
    return reports


def check_tau(functions, settings, quad):
    """properties (a') to (d') of the averaged modulus, and tau_r >= omega_r"""
    reports = []
    slack = settings.tau_slack
    deltas = np.sort(np.asarray(settings.deltas, dtype=float))
    members = list(functions)
    n_h = settings.local_grid[0]

    def tau(f, r, d, p):
        return tau_modulus(f, r, d, p, quad, settings.local_grid)

    for p in settings.ps:
        for r in settings.rs:
            values = {f.label: np.array([tau(f, r, d, p) for d in deltas]) for f in members}
            for f in members:
                tag = f"{f.label},r={r},p={p:g}"
                t = values[f.label]
                reports.append(_inequality("tau(a')", tag, deltas[:-1], t[:-1], t[1:], 1.0, slack,
                                           "tau(delta)", "tau(next delta)"))
                higher = [tau(f, r + 1, d, p) for d in deltas]
                stretched = [tau(f, r, (r + 1) * d / r, p) for d in deltas]
                reports.append(_inequality("tau(c')", tag, deltas, higher, stretched, 2.0, slack,
                                           "tau_r+1(delta)", "tau_r((r+1)delta/r)"))
                doubled = [tau(f, r, 2 * d, p) for d in deltas]
                reports.append(_inequality("tau(d')", tag, deltas, doubled, t, 3.0 ** (r + 1), slack,
                                           "tau(2 delta)", "tau(delta)"))
                matched = [modulus(f, r, d, p, quad, h_values=d * np.arange(1, n_h + 1) / n_h) for d in deltas]
                reports.append(_inequality("tau>=omega", tag, deltas, matched, t, 1.0, 1e-6, "omega", "tau"))

            for f, g in zip(members[:-1], members[1:]):
                tag = f"{f.label}+{g.label},r={r},p={p:g}"
                total = [tau(f + g, r, d, p) for d in deltas]
                reports.append(_inequality("tau(b')", tag, deltas, total, values[f.label] + values[g.label], 1.0,
                                           slack, "tau(f+g)", "tau(f)+tau(g)"))
    return reports


def check_st1(functions, settings, quad):
    """C_2 omega_2r(f, delta) <= ||f_{delta,r} - f||_p <= C_1 omega_2r(f, delta)"""
    reports = []
    deltas = np.asarray(settings.deltas, dtype=float)
    for p in (1.0, 2.0):
        for r in (1, 2):
            for f in functions:
                tag = f"{f.label},r={r},p={p:g}"
                deviation = [lp_norm(averaged_function(f, d, r, quad) - f, p, quad) for d in deltas]
                omega = [modulus(f, 2 * r, d, p, quad, settings.h_grid_size) for d in deltas]
                reports.append(_inequality("st1-upper", tag, deltas, deviation, omega, 1.0, settings.exact_slack,
                                           "||f_delta,r - f||", "omega_2r"))
                reports.append(_within("st1", tag, deltas, deviation, omega, settings.st1_bounds[r],
                                       "||f_delta,r - f||", "omega_2r"))
    return reports


def check_prop21(functions, settings, quad, p=2.0, r=1):
    """discrete deviation <= C (delta sigma)^{-1/p} tau_2r(f, delta) at delta sigma = gamma"""
    reports = []
    deltas = np.asarray(settings.deltas, dtype=float)[:5]
    for f in _members(functions, COMPACT):
        lhs, rhs, integral = [], [], []
        for d in deltas:
            sigma = settings.gamma / d
            grid = make_uniform_grid(sigma, f.window, settings.gamma)
            lhs.append(discrete_avg_deviation(f, grid, d, r, p, quad))
            rhs.append((d * sigma) ** (-1 / p) * tau_modulus(f, 2 * r, d, p, quad, settings.local_grid))
            if f.label != "step":
                integral.append(tau_integral_bound(f, r, d, p, sigma, quad))
        reports.append(_inequality("prop21", f.label, deltas, lhs, rhs, settings.prop21_bound, 0.0,
                                   "discrete deviation", "(delta sigma)^-1/p tau_2r"))
        if integral:
            reports.append(_inequality("prop21-integral", f.label, deltas, lhs, integral, settings.prop21_bound, 0.0,
                                       "discrete deviation", "omega integral"))
    return reports


def check_identity(functions, settings, quad, delta=0.1, tol=1e-8):
    """averaged-operator identity on the smooth zoo and reproduction of polynomials"""
    reports = []
    for f in _members(functions, SMOOTH):
        a, b = f.window
        x = np.linspace(max(a, -1.0) * 0.9, min(b, 1.0) * 0.9, 9)
        for r in (1, 2):
            residual = averaged_identity_check(f, delta, r, x, quad)
            reports.append(_inequality("identity", f"{f.label},r={r}", x, residual, np.full(x.size, tol), 1.0, 0.0,
                                       "residual", "tolerance"))
    polynomials = {1: lambda x: 1.0 + 2.0 * x, 2: lambda x: x**3 - x + 0.5}
    for r, poly in polynomials.items():
        f = RealFunction(func=poly, window=(-1.0, 1.0), decay_class="none", label=f"poly{2 * r - 1}")
        x = np.linspace(-0.5, 0.5, 11)
        gap = np.abs(np.asarray(averaged_op(f, delta, r, x, quad)) - poly(x))
        reports.append(_inequality("polynomial-reproduction", f"{f.label},r={r}", x, gap, np.full(x.size, 1e-10),
                                   1.0, 0.0, "|f_delta,r - f|", "tolerance"))
    return reports


def check_partition(settings, tol=1e-12):
    rng = np.random.default_rng(settings.seed)
    x = rng.uniform(-10.0, 10.0, size=100)
    reports = []
    for r in (2, 3, 4):
        k = np.arange(-20, 21)
        total = np.sum(bspline_eval(r, x[:, None] - k[None, :]), axis=1)
        reports.append(_inequality("partition-of-unity", f"bspline({r})", x, np.abs(total - 1.0),
                                   np.full(x.size, tol), 1.0, 0.0, "|sum B_r - 1|", "tolerance"))
    return reports


def check_sinc(settings):
    j = np.arange(-20, 21)
    values = sinc_eval(j[:, None] - j[None, :])
    gap = np.abs(values - np.eye(j.size)).max(axis=1)
    return [_inequality("sinc-orthonormality", "sinc", j, gap, np.zeros(j.size), 1.0, 0.0, "|sinc(j-k) - delta_jk|",
                        "0")]


def moment_free_coefficients(rng, shifts, moments=2):
    """random coefficients with sum_k (-1)^k k^m c_k = 0 for m < ``moments``

    Sums of sinc(x - k) with such coefficients decay like |x|^-(1 + moments).
    """
    c = rng.standard_normal(shifts.size)
    basis = np.array([(-1.0) ** shifts * shifts.astype(float) ** m for m in range(moments)])
    q, _ = np.linalg.qr(basis.T)
    return c - q @ (q.T @ c)


def sinc_series(coefficients, shifts, dilation=1.0, window=(-64.0, 64.0), moments=2, label="g"):
    """x -> sum_k c_k sinc(dilation x - k)"""

    def func(x):
        u = dilation * np.asarray(x, dtype=float)
        return np.asarray(sinc_eval(u[..., None] - shifts), dtype=float) @ coefficients

    return RealFunction(func=func, window=window, decay_class="polynomial", decay_order=1.0 + moments, label=label)


def check_plancherel(settings, sigma=1.0, tol=1e-8):
    """||g||_2 = ||g||_{l_2(X_sigma)} for g = sum_k c_k sinc(sigma x - k)"""
    rng = np.random.default_rng(settings.seed)
    shifts = np.arange(-8, 9)
    quad = QuadratureSpec(panels=8)
    grid = make_uniform_grid(sigma, (-64.0 / sigma, 64.0 / sigma))
    gaps, norms = [], []
    for i in range(settings.n_random):
        c = moment_free_coefficients(rng, shifts)
        g = sinc_series(c, shifts, sigma, (-64.0 / sigma, 64.0 / sigma), label=f"g{i}")
        norm = lp_norm(g, 2.0, quad.refined(2 * sigma))
        norms.append(norm)
        gaps.append(abs(norm - discrete_seminorm(g, grid, 2.0)))
    scales = np.arange(settings.n_random)
    return [_inequality("plancherel-polya", f"sigma={sigma:g}", scales, gaps, tol * np.asarray(norms), 1.0, 0.0,
                        "| ||g||_2 - ||g||_l2 |", "tol ||g||_2")]


def check_reproduction(settings, sigma=1.0, radius=1e4, tol=1e-6):
    """S_sigma g = g for g band-limited to sigma/4, truncation radius 1e4"""
    rng = np.random.default_rng(settings.seed + 1)
    shifts = np.arange(-8, 9)
    quad = QuadratureSpec(panels=8)
    window = (-256.0 / sigma, 256.0 / sigma)
    op = SamplingOperator(kernel=make_kernel("sinc"), sigma=sigma, grid=make_uniform_grid(sigma, window),
                          truncation_radius=radius)
    errors, norms = [], []
    for i in range(min(settings.n_random, 5)):
        c = moment_free_coefficients(rng, shifts, moments=3)
        g = sinc_series(c, shifts, sigma / 2, window, moments=3, label=f"g{i}")
        errors.append(operator_error(op, g, 2.0, quad))
        norms.append(lp_norm(g, 2.0, quad.refined(2 * sigma)))
    scales = np.arange(len(errors))
    return [_inequality("reproduction", f"sigma={sigma:g}", scales, errors, tol * np.asarray(norms), 1.0, 0.0,
                        "||g - S g||_2", "tol ||g||_2")]


def check_stability(settings, quad, families=("sinc", "bspline", "gaussian"), tol=1e-2):
    """c_2, c_1 of the sampling operators: positive, finite and independent of sigma"""
    reports = []
    for family in families:
        kernel = make_kernel(family) if family != "gaussian" else gaussian_kernel(normalized=True)
        for p in settings.ps:
            if family == "sinc" and p != 2:
                continue
            lows, highs = [], []
            for sigma in settings.sigmas:
                low, high = stability_constants(kernel, sigma, p, settings.n_random, settings.seed, quad=quad)
                lows.append(low)
                highs.append(high)
            lows, highs = np.asarray(lows), np.asarray(highs)
            variation = np.maximum(np.abs(lows / lows[0] - 1), np.abs(highs / highs[0] - 1))
            tag = f"{kernel.name},p={p:g}"
            report = _inequality("stability", tag, settings.sigmas, variation, np.full(variation.size, tol), 1.0, 0.0,
                                 "relative variation", "tolerance")
            if not (np.all(lows > 0) and np.all(np.isfinite(highs))):
                logger.warning(f"stability ({tag}): degenerate constants c2={lows.tolist()} c1={highs.tolist()}")
                report = EquivalenceReport(report.name, report.lhs_name, report.rhs_name, tag, report.sigmas,
                                           report.ratios, report.ratio_min, report.ratio_max, False, "upper", 1.0,
                                           "inequality-violation")
            logger.info(f"stability {tag}: c2 in [{lows.min():.4g}, {lows.max():.4g}], "
                        f"c1 in [{highs.min():.4g}, {highs.max():.4g}]")
            reports.append(report)
    return reports


def check_bernstein(functions, settings, quad, p=2.0):
    """||g'||_p <= 2 pi sigma ||g||_p for the band-limited projections"""
    reports = []
    bound = 2 * np.pi * 1.01
    for f in _members(functions, ("bump", "step", "gaussian")):
        ratios = [bernstein_ratio(f, sigma, p, quad) for sigma in settings.sigmas]
        reports.append(_inequality("bernstein", f.label, settings.sigmas, ratios, np.ones(len(ratios)), bound, 0.0,
                                   "||g'|| / (sigma ||g||)", "1"))
    return reports


def check_hat_slope(settings, quad, p=2.0, target=1.5, tol=0.1):
    """fitted delta-slope of omega_2(hat, delta)_2"""
    hat = zoo(p, names=["hat"])[0].f
    deltas = np.asarray(settings.deltas, dtype=float)
    omega = [modulus(hat, 2, d, p, quad, settings.h_grid_size) for d in deltas]
    order = np.argsort(deltas)[::-1]
    table = rate_fit(1 / deltas[order], np.asarray(omega)[order], "omega_2", "hat")
    slope = table.fitted_alpha
    ok = abs(slope - target) <= tol
    logger.info(f"hat modulus slope {slope:.4f} (target {target} +- {tol})")
    return [EquivalenceReport("hat-slope", "alpha(omega_2)", "1.5", "hat", deltas, np.array([slope / target]),
                              slope / target, slope / target, ok, "two-sided", 1 + tol / target,
                              "ok" if ok else "inequality-violation", slope, target)]


def check_kfunctional(functions, settings, quad, p=2.0):
    """K-functional realization ~ omega_s for s = 1, 2"""
    reports = []
    sigmas = np.asarray(settings.sigmas, dtype=float)
    for s in (1, 2):
        for f in functions:
            realization = [k_realization(f, s, p, sigma, quad) for sigma in sigmas]
            omega = [modulus(f, s, 1 / sigma, p, quad, settings.h_grid_size) for sigma in sigmas]
            reports.append(_within("kfunctional", f"{f.label},s={s}", sigmas, realization, omega,
                                   settings.kfunctional_bound, "K realization", "omega_s"))
    return reports


def run_properties(groups=PROPERTY_GROUPS, settings=PropertySettings(), quad=None, names=None):
    """run the selected property groups over the zoo

    Returns
    -------
    list of EquivalenceReport
    """
    quad = QuadratureSpec() if quad is None else quad
    unknown = [g for g in groups if g not in PROPERTY_GROUPS]
    if unknown:
        msg = f"unknown property groups {unknown}, choose among {PROPERTY_GROUPS}"
        logger.error(msg)
        raise ValueError(msg)
    functions = [z.f for z in zoo(2.0, settings.seed, names)]
    checks = {
        "moduli": lambda: check_moduli(functions, settings, quad),
        "tau": lambda: check_tau(functions, settings, quad),
        "st1": lambda: check_st1(functions, settings, quad),
        "prop21": lambda: check_prop21(functions, settings, quad),
        "identity": lambda: check_identity(functions, settings, quad),
        "partition": lambda: check_partition(settings),
        "sinc": lambda: check_sinc(settings),
        "plancherel": lambda: check_plancherel(settings),
        "reproduction": lambda: check_reproduction(settings),
        "stability": lambda: check_stability(settings, quad),
        "bernstein": lambda: check_bernstein(functions, settings, quad),
        "hat_slope": lambda: check_hat_slope(settings, quad),
        "kfunctional": lambda: check_kfunctional(functions, settings, quad),
    }
    reports = []
    for group in PROPERTY_GROUPS:
        if group not in groups:
            continue
        with Timing("s") as timer:
            found = checks[group]()
        failed = sum(not rep.verdict for rep in found)
        logger.info(f"properties '{group}': {len(found)} checks, {failed} failed, {timer}")
        reports.extend(found)
    return reports


def group_runner(group, settings, quad, names=None):
    """one property group, as submitted to a worker"""
    return run_properties((group,), settings, quad, names)


def property_settings(grid="default", **values):
    """PropertySettings of a named grid"""
    if grid not in PROPERTY_GRIDS:
        msg = f"unknown property grid {grid!r}, choose among {PROPERTY_GRIDS}"
        logger.error(msg)
        raise ValueError(msg)
    return PropertySettings.full(**values) if grid == "full" else PropertySettings(**values)


def property_tasks(groups, names=None):
    """(group, members) units of work, one per zoo member for the per-member groups

    Reports of a task list concatenated in order do not depend on how the tasks are scheduled.
    """
    names = [name for name in ZOO_NAMES if names is None or name in names]
    tasks = []
    for group in PROPERTY_GROUPS:
        if group not in groups:
            continue
        if group in PER_MEMBER_GROUPS:
            tasks.extend((group, (name,)) for name in names)
        else:
            tasks.append((group, tuple(names)))
    return tasks
