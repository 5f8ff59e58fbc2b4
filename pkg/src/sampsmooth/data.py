"""Report tables: rung timings, ladder CSVs and report CSVs.

Every CSV is written with floats at 12 significant digits and ends with a provenance line
``# config_hash=<hash> version=<version> suite=<suite>``.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas

from sampsmooth.analysis import alpha_rows, reports_frame

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"

# output column names of the ladder quantities
COLUMN_NAMES = {
    "semidiscrete": "semidiscrete_k",
    "frac_sum": "frac_k",
}


@dataclass
class RungRecord:
    function: str = None
    sigma: float = np.nan
    seconds: float = np.nan  # filled in `runner.timed_rung`
    worker: str = ""

    def to_dict(self):
        return dict(self.__dict__)

    def __str__(self):
        where = f" on {self.worker}" if self.worker else ""
        return f"{self.function} sigma={self.sigma:g}: {self.seconds*1e3:.2f}ms{where}"


class ReportStorage:
    """collects the rung records of a run"""

    def __init__(self):
        self.data = dict()

    def __call__(self, record: RungRecord):
        key = (record.function, record.sigma)
        if key in self.data:
            logger.debug(f"rung {key} recorded twice, keeping the last timing")
        self.data[key] = record

    def __getitem__(self, key):
        return self.data[key]

    def build_dataframe(self):
        df = pandas.DataFrame([x.to_dict() for x in self.data.values()],
                              columns=["function", "sigma", "seconds", "worker"])
        return df.sort_values(["function", "sigma"]).reset_index(drop=True)

    def describe(self):
        """per-function timing summary"""
        df = self.build_dataframe()
        if df.empty:
            return df
        return df.groupby("function")["seconds"].agg(["count", "sum", "max"])

    @property
    def size(self):
        return len(self.data)


def provenance(config_hash, version, suite):
    return f"# config_hash={config_hash} version={version} suite={suite}"


def _format(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return FLOAT_FORMAT % value
    return value


def write_csv(df, path, footer):
    """write ``df`` with a header row and the provenance footer"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = df.astype(object).apply(lambda col: col.map(_format)).to_csv(index=False, lineterminator="\n")
    path.write_text(text + footer + "\n")
    logger.info(f"wrote {path} ({len(df)} rows)")
    return path


def ladder_frame(table, quantities, ratio=None):
    """ladder table in output form: renamed columns, optional ratio column, fitted-alpha rows

    Parameters
    ----------
    table : pandas.DataFrame
        one row per (function, sigma)
    quantities : list of str
        quantity columns to keep, in order
    ratio : tuple of str, optional
        ``(lhs, rhs)`` columns whose quotient fills the ``ratio`` column
    """
    table = table.sort_values(["function", "sigma"], kind="mergesort").reset_index(drop=True)
    keep = [q for q in quantities if q in table]
    out = table[["function", "sigma"] + keep].copy()
    if ratio is not None:
        lhs, rhs = (table[c].to_numpy(dtype=float) for c in ratio)
        with np.errstate(divide="ignore", invalid="ignore"):
            out["ratio"] = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.nan)
    alphas = alpha_rows(table, keep)
    out = pandas.concat([out.astype({"sigma": object}), alphas], ignore_index=True)
    return out.rename(columns=COLUMN_NAMES)


def write_ladder(table, quantities, path, footer, ratio=None):
    return write_csv(ladder_frame(table, quantities, ratio), path, footer)


def write_reports(reports, path, footer):
    """one row per EquivalenceReport"""
    return write_csv(reports_frame(reports), path, footer)


def summary(reports):
    """(function, report, verdict) table printed at the end of a run"""
    df = reports_frame(reports)[["function", "name", "flag", "verdict"]]
    return df.rename(columns={"name": "report"})
