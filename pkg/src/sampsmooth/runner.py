"""Suite execution.

Ladder rungs (function x sigma) are independent: with ``jobs > 1`` every rung is submitted to a
dask ``LocalCluster`` and gathered with ``as_completed``; results are always reduced in the
(function, sigma) order of the request, so the outputs do not depend on completion order.
"""

import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas
from dask.distributed import Client, LocalCluster, as_completed

import sampsmooth
from sampsmooth.analysis import (
    QUANTITIES,
    corollary_suite_reports,
    corollary_table,
    convergence_criterion,
    direct_estimate_check,
    fit_above_floor,
    function_rows,
    get_corollary,
    inverse_estimate_check,
    lower_estimate_check,
    prefix_ladder,
    quantities_for,
    rung_quantities,
    smoothness_of_operator_check,
    tau_direct_check,
)
from sampsmooth.data import ReportStorage, RungRecord, provenance, summary, write_ladder, write_reports
from sampsmooth.errors import EXIT_OK, EXIT_VERDICT
from sampsmooth.funcspace import lp_norm
from sampsmooth.plot import save_rate_plot
from sampsmooth.properties import group_runner, property_settings, property_tasks
from sampsmooth.smoothness import H_GRID_SIZE
from sampsmooth.tools import Timing
from sampsmooth.zoo import zoo

logger = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    """everything a suite produced

    ``tables`` maps a file tag to ``(DataFrame, quantities, ratio)`` as taken by
    :func:`sampsmooth.data.write_ladder`.
    """

    tag: str
    reports: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    rate_tables: list = field(default_factory=list)

    @property
    def passed(self):
        return all(rep.verdict for rep in self.reports)


def timed_rung(f, family, sigma, r, s, p, quad, quantities, h_grid_size=H_GRID_SIZE):
    """rung_quantities with its wall time"""
    with Timing() as timer:
        out = rung_quantities(f, family, sigma, r, s, p, quad, quantities, h_grid_size)
    return out, RungRecord(function=f.label, sigma=float(sigma), seconds=timer.dt, worker=f"pid {os.getpid()}")


def get_client(jobs):
    logger.info(f"building dask local client with {jobs} workers..")
    cluster = LocalCluster(processes=True, n_workers=jobs, threads_per_worker=1)
    client = Client(cluster)
    dask_info = client.scheduler_info()
    logger.info(f"dask client built. nbr workers : {len(dask_info['workers'])}")
    return client


def close_client(client):
    time.sleep(0.5)
    client.close()
    client.cluster.close()


def _gather(client, futures, labels):
    """results of ``futures`` keyed by their label, raising the first worker exception"""
    results = {}
    _tot = len(futures)
    for i_future, future in enumerate(as_completed(futures)):
        label = labels[future]
        if future.status == "error":
            exc = future.exception()
            logger.error(f"Future [{i_future+1:03d}/{_tot}] {label}: NOK ({type(exc).__name__}: {exc})")
            for other in futures:
                other.cancel()
            raise exc
        results[label] = future.result()
        logger.debug(f"Future [{i_future+1:03d}/{_tot}] {label}: done")
    return results


class LadderEvaluator:
    """the ``evaluate`` hook of the ladder suites: inline, or one dask future per rung

    Parameters
    ----------
    client : distributed.Client, optional
        None evaluates the rungs inline
    storage : ReportStorage, optional
        receives one RungRecord per rung
    h_grid_size : int
        step-grid size of the moduli
    """

    def __init__(self, client=None, storage=None, h_grid_size=H_GRID_SIZE):
        self.client = client
        self.storage = ReportStorage() if storage is None else storage
        self.h_grid_size = h_grid_size

    def __call__(self, functions, family, sigmas, r, s, p=2.0, quad=None, quantities=QUANTITIES):
        keys = [(f.label, float(sigma)) for f in functions for sigma in sigmas]
        logger.info(f"{len(keys)} rungs to compute ({family.name}, {', '.join(quantities)})")
        with Timing("s") as dt:
            if self.client is None:
                results = {
                    (f.label, float(sigma)): timed_rung(f, family, sigma, r, s, p, quad, quantities, self.h_grid_size)
                    for f in functions
                    for sigma in sigmas
                }
            else:
                futures, labels = [], {}
                for f in functions:
                    for sigma in sigmas:
                        future = self.client.submit(timed_rung, f, family, sigma, r, s, p, quad, quantities,
                                                    self.h_grid_size, pure=False)
                        futures.append(future)
                        labels[future] = (f.label, float(sigma))
                results = _gather(self.client, futures, labels)
        rows = []
        for key in keys:
            out, record = results[key]
            self.storage(record)
            logger.debug(f"rung {record}")
            rows.append(out)
        logger.info(f"{len(keys)} rungs computed ({dt})")
        return pandas.DataFrame(rows)


def _functions(config):
    return [z.f for z in zoo(config.p, config.seed, config.zoo)]


def _floor(config, f):
    return config.thresholds.floor(lp_norm(f, config.p, config.quadrature))


def run_corollary(config, evaluate):
    corollary = get_corollary(config.corollary_id)
    functions = _functions(config)
    table = corollary_table(config.corollary_id, config.p, config.ladder, functions, config.quadrature, config.seed,
                            evaluate)
    reports = corollary_suite_reports(table, functions, corollary, config.p, config.quadrature, config.thresholds)
    second = "frac_sum" if corollary.smoothness == "frac" else "semidiscrete"
    quantities = ["err", second] + (["sobolev_scaled"] if corollary.with_sobolev else [])
    quantities += ["disc", "omega", "omega_next"] + (["frac"] if corollary.smoothness == "frac" else [])
    result = SuiteResult(config.tag, reports)
    result.tables[config.tag] = (table, quantities, ("err", second))
    return result


def run_direct(config, evaluate):
    family = config.operator_family()
    functions = _functions(config)
    table = evaluate(functions, family, list(config.ladder), config.r, config.s, config.p, config.quadrature,
                     quantities_for("direct", family=family))
    reports = []
    for f in functions:
        rows = function_rows(table, f.label)
        floor = _floor(config, f)
        reports.append(direct_estimate_check(rows, f.label, config.thresholds, floor))
        reports.append(lower_estimate_check(rows, f.label, config.thresholds, floor))
        if "tau" in rows:
            reports.append(tau_direct_check(rows, f.label, config.thresholds, floor))
        reports.append(convergence_criterion(rows, f.label, config.thresholds, floor))
    result = SuiteResult(config.tag, reports)
    result.tables[config.tag] = (table, ["err", "semidiscrete", "disc", "omega", "tau"], ("err", "semidiscrete"))
    return result


def run_inverse(config, evaluate):
    """the error sums need E_nu on every dyadic density below the ladder"""
    family = config.operator_family()
    functions = _functions(config)
    sigmas = prefix_ladder(config.ladder)
    table = evaluate(functions, family, sigmas, config.r, config.s, config.p, config.quadrature,
                     quantities_for("inverse"))
    on_ladder = table[table["sigma"].isin(config.ladder)]
    reports = []
    for f in functions:
        everything = function_rows(table, f.label)
        errors = dict(zip(everything["sigma"].astype(float), everything["err"].astype(float)))
        norm = lp_norm(f, config.p, config.quadrature)
        reports.append(inverse_estimate_check(function_rows(on_ladder, f.label), f.label, errors, norm, config.s,
                                              config.thresholds, config.thresholds.floor(norm)))
    result = SuiteResult(config.tag, reports)
    result.tables[config.tag] = (on_ladder, ["semidiscrete", "err", "disc", "omega"], ("semidiscrete", "err"))
    result.tables[f"{config.tag}_prefix"] = (table, ["err"], None)
    return result


def run_smoothness_of_operator(config, evaluate):
    family = config.operator_family()
    functions = _functions(config)
    table = evaluate(functions, family, list(config.ladder), config.r, config.s, config.p, config.quadrature,
                     quantities_for("smoothness_of_operator"))
    reports = [
        smoothness_of_operator_check(function_rows(table, f.label), f.label, family, config.thresholds,
                                     _floor(config, f))
        for f in functions
    ]
    result = SuiteResult(config.tag, reports)
    result.tables[config.tag] = (table, ["semidiscrete", "sobolev_scaled", "disc", "omega"], None)
    return result


def run_properties(config, client=None):
    settings = property_settings(config.property_grid, seed=config.seed,
                                 gamma=config.gamma if config.gamma is not None else 0.49)
    tasks = property_tasks(config.properties, config.zoo)
    if client is None:
        found = {task: group_runner(task[0], settings, config.quadrature, task[1]) for task in tasks}
    else:
        futures, labels = [], {}
        for task in tasks:
            future = client.submit(group_runner, task[0], settings, config.quadrature, task[1], pure=False)
            futures.append(future)
            labels[future] = task
        found = _gather(client, futures, labels)
    reports = [rep for task in tasks for rep in found[task]]
    return SuiteResult(config.tag, reports)


SUITE_RUNNERS = {
    "corollary": run_corollary,
    "direct": run_direct,
    "inverse": run_inverse,
    "smoothness_of_operator": run_smoothness_of_operator,
}


def rate_tables(table, quantities, floor):
    """RateTable of every quantity column and function with enough rungs above ``floor``"""
    found = []
    for name in pandas.unique(table["function"]):
        rows = function_rows(table, name)
        for quantity in quantities:
            if quantity not in rows:
                continue
            fit = fit_above_floor(rows["sigma"].to_numpy(), rows[quantity].to_numpy(dtype=float), floor, quantity,
                                  name)
            if fit is not None:
                found.append(fit)
    return found


def run_suite(config, client=None, storage=None):
    """compute the suite of ``config``; no file is written"""
    logger.info(f"suite '{config.tag}' (config {config.hash})")
    if config.suite == "properties":
        return run_properties(config, client)
    evaluate = LadderEvaluator(client, storage)
    result = SUITE_RUNNERS[config.suite](config, evaluate)
    for table, quantities, _ in result.tables.values():
        result.rate_tables.extend(rate_tables(table, quantities, config.thresholds.noise_floor))
    if evaluate.storage.size:
        logger.info(f"rung timings (s):\n{evaluate.storage.describe()}")
    return result


def write_outputs(result, config, out=None):
    """CSV tables, report CSV and one SVG per rate table, serialized in a fixed order"""
    out = Path(config.out if out is None else out)
    footer = provenance(config.hash, sampsmooth.__version__, config.tag)
    written = []
    for tag, (table, quantities, ratio) in result.tables.items():
        written.append(write_ladder(table, quantities, out / f"{tag}.csv", footer, ratio))
    reports_name = f"{result.tag}.csv" if config.suite == "properties" else f"{result.tag}_reports.csv"
    written.append(write_reports(result.reports, out / reports_name, footer))
    for table in result.rate_tables:
        written.append(save_rate_plot(table, out / f"{result.tag}_{table.function}_{table.name}.svg"))
    return written


def run(config):
    """run ``config`` end to end and return the exit status

    Returns
    -------
    int
        0 when every verdict passes, 1 otherwise; exceptions propagate to the caller
    """
    client = get_client(config.jobs) if config.jobs > 1 else None
    try:
        with Timing("s") as dt:
            result = run_suite(config, client)
    finally:
        if client is not None:
            close_client(client)
    write_outputs(result, config)
    table = summary(result.reports)
    failed = int(np.count_nonzero(table["verdict"] == "fail"))
    print(table.to_string(index=False))
    logger.info(f"suite '{result.tag}': {len(table)} reports, {failed} failed ({dt})")
    return EXIT_OK if result.passed else EXIT_VERDICT
