"""log-log SVG plots of the rate tables

Figures are built with the object API on an Agg canvas; the SVG hash salt is fixed and the
date metadata dropped so that identical tables give byte-identical files.
"""

import logging
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

logger = logging.getLogger(__name__)

SVG_RC = {"svg.hashsalt": "sampsmooth", "svg.fonttype": "path", "path.simplify": False}


def rate_figure(table):
    """log-log figure of a RateTable with its fitted line"""
    fig = Figure(figsize=(5, 4))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    sigmas, values = table.sigma_ladder, table.values
    ax.loglog(sigmas, values, "o-", label=table.name)
    # fitted line through the geometric mean of the data
    anchor = np.exp(np.mean(np.log(values)) + table.fitted_alpha * np.mean(np.log(sigmas)))
    ax.loglog(sigmas, anchor * sigmas ** (-table.fitted_alpha), "--",
              label=f"alpha = {table.fitted_alpha:.3f} (residual {table.fit_residual:.2g})")
    ax.set_xlabel("sigma")
    ax.set_ylabel(table.name)
    ax.set_title(f"{table.function}: {table.name}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best")
    return fig


def save_rate_plot(table, path):
    """write the SVG of ``table`` to ``path``"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(SVG_RC):
        fig = rate_figure(table)
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.debug(f"wrote {path}")
    return path
