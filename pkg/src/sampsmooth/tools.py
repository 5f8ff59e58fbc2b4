import hashlib
import json
import logging
import time

import numpy as np

logger = logging.getLogger(__name__)

# number of float64 entries a dense evaluation block may hold
BLOCK_ENTRIES = 2**22


class Timing:
    """compute time execution

    example :

    with Timing() as dt:
        myfunction()

    print(f"time for myfunction : {dt}")
    """

    scale = {"s": 1, "ms": 1e3}

    def __init__(self, unit: str = "ms"):
        self.unit = unit
        self.dt = float("nan")

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.tN = time.perf_counter()
        self.dt = self.tN - self.t0

    def __str__(self):
        return f"{self.dt*self.scale[self.unit]:.2f}{self.unit}"


def dyadic_ladder(low, high):
    """powers of two between ``low`` and ``high`` (both included)

    Parameters
    ----------
    low, high : float
        first and last rung; both must be powers of two

    Returns
    -------
    list of float
    """
    low, high = float(low), float(high)
    for name, value in (("low", low), ("high", high)):
        if value <= 0 or not float(np.log2(value)).is_integer():
            msg = f"ladder {name} end must be a positive power of two, got {value}"
            logger.error(msg)
            raise ValueError(msg)
    if high < low:
        msg = f"ladder is empty: {low} > {high}"
        logger.error(msg)
        raise ValueError(msg)
    k0, k1 = int(np.log2(low)), int(np.log2(high))
    return [float(2.0**k) for k in range(k0, k1 + 1)]


def parse_ladder(text):
    """parse the ``low:high`` form of the command line into a dyadic ladder"""
    try:
        low, high = text.split(":")
        return dyadic_ladder(float(low), float(high))
    except ValueError as err:
        msg = f"cannot parse ladder '{text}', expected 'low:high' with powers of two ({err})"
        logger.error(msg)
        raise ValueError(msg) from err


def row_blocks(n_rows, n_cols):
    """yield slices of rows so that each dense block holds at most BLOCK_ENTRIES values"""
    step = max(1, BLOCK_ENTRIES // max(1, n_cols))
    for start in range(0, n_rows, step):
        yield slice(start, min(n_rows, start + step))


def config_hash(document):
    """first 16 hex digits of the SHA-256 of the sorted-key JSON of ``document``"""
    text = json.dumps(document, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
