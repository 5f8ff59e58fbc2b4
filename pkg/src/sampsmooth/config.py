"""Experiment configuration: JSON document -> validated, frozen :class:`ExperimentConfig`.

Every validation failure raises :class:`~sampsmooth.errors.ConfigError` whose message starts
with the offending field, e.g. ``"s: s <= 2r is required (s=3, r=1)"``.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from sampsmooth.analysis import COROLLARIES, DEFAULT_LADDER, MIN_RUNGS, Thresholds
from sampsmooth.errors import ConfigError
from sampsmooth.funcspace import QuadratureSpec
from sampsmooth.kernels import FAMILIES, make_kernel
from sampsmooth.operators import OperatorFamily
from sampsmooth.properties import PROPERTY_GRIDS, PROPERTY_GROUPS
from sampsmooth.tools import config_hash
from sampsmooth.zoo import ZOO_NAMES

logger = logging.getLogger(__name__)

SUITES = ("corollary", "direct", "inverse", "smoothness_of_operator", "properties")
# "interpolation" selects Gaussian interpolation instead of a translation kernel
OPERATOR_KINDS = FAMILIES + ("interpolation",)
DEFAULT_KERNELS = {
    "direct": {"family": "bspline", "order": 3},
    "inverse": {"family": "sinc"},
    "smoothness_of_operator": {"family": "interpolation"},
    "properties": {"family": "sinc"},
}
KERNEL_KEYS = ("family", "order", "s", "delta", "normalized")

SUITE_HELP = {
    "corollary": "two-sided equivalences (i)~(ii)[~(iii)] of one sampling corollary along the sigma ladder; "
    "kernel, s and r are fixed by corollary_id",
    "direct": "||f - G_sigma f|| <= C (discrete deviation + omega_s), its lower counterpart, the tau bound "
    "for B-splines and the convergence criterion",
    "inverse": "discrete deviation + omega_s <= C (error + sigma^-s sum (nu+1)^{s-1} E_nu)",
    "smoothness_of_operator": "discrete deviation + omega_s <= C sum_k (2^k sigma)^-s |G f|_W, interpolatory "
    "families on uniform grids only",
    "properties": "moduli and averaged-moduli properties, averaged-operator identity, kernel facts, stability "
    "constants, Bernstein ratio, hat slope and K-functional equivalence",
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "sampsmooth experiment",
    "type": "object",
    "required": ["suite"],
    "additionalProperties": False,
    "properties": {
        "suite": {"enum": list(SUITES)},
        "corollary_id": {"enum": list(COROLLARIES), "default": "cor3S"},
        "kernel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {"enum": list(OPERATOR_KINDS)},
                "order": {"type": "integer", "minimum": 2, "default": 3},
                "s": {"type": "number", "exclusiveMinimum": 0, "default": 2.0},
                "delta": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
                "normalized": {"type": "boolean", "default": True},
            },
        },
        "p": {"type": "number", "minimum": 1, "default": 2.0},
        "r": {"type": "integer", "minimum": 1, "default": 1},
        "s": {"type": "number", "exclusiveMinimum": 0, "default": 2.0},
        "gamma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5, "default": 0.49},
        "epsilon": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.25, "default": 0.0},
        "ladder": {"type": "array", "items": {"type": "number"}, "minItems": MIN_RUNGS,
                   "default": list(DEFAULT_LADDER)},
        "zoo": {"oneOf": [{"const": "all"}, {"type": "array", "items": {"enum": list(ZOO_NAMES)}}],
                "default": "all"},
        "quadrature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "panels": {"type": "integer", "minimum": 1, "default": 64},
                "nodes_per_panel": {"type": "integer", "minimum": 2, "default": 8},
                "tail_tolerance": {"type": "number", "exclusiveMinimum": 0, "default": 1e-10},
                "max_doublings": {"type": "integer", "minimum": 0, "default": 3},
            },
        },
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ratio_spread": {"type": "number", "exclusiveMinimum": 1, "default": 50.0},
                "alpha_tolerance": {"type": "number", "exclusiveMinimum": 0, "default": 0.1},
                "noise_floor": {"type": "number", "minimum": 0, "default": 1e-9},
                "exact_order_gap": {"type": "number", "minimum": 0, "default": 0.3},
            },
        },
        "properties": {"type": "array", "items": {"enum": list(PROPERTY_GROUPS)}, "default": list(PROPERTY_GROUPS)},
        "property_grid": {"enum": list(PROPERTY_GRIDS), "default": "default"},
        "out": {"type": "string", "default": "results"},
        "seed": {"type": "integer", "minimum": 0, "default": 0},
        "jobs": {"type": "integer", "minimum": 1, "default": 1},
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """a validated experiment

    ``kernel``, ``s``, ``r`` and ``epsilon`` are resolved against the suite (and the
    corollary) by :func:`config_from_dict`; ``out`` and ``jobs`` do not enter the hash.
    """

    suite: str
    corollary_id: Optional[str] = None
    kernel: dict = field(default_factory=dict)
    p: float = 2.0
    r: int = 1
    s: float = 2.0
    gamma: Optional[float] = None
    epsilon: float = 0.0
    ladder: tuple = DEFAULT_LADDER
    zoo: tuple = ZOO_NAMES
    quadrature: QuadratureSpec = QuadratureSpec()
    thresholds: Thresholds = Thresholds()
    properties: tuple = PROPERTY_GROUPS
    property_grid: str = "default"
    out: str = "results"
    seed: int = 0
    jobs: int = 1

    @property
    def tag(self):
        """prefix of the output files"""
        return self.corollary_id if self.suite == "corollary" else self.suite

    def to_dict(self):
        document = asdict(self)
        document["ladder"] = list(self.ladder)
        document["zoo"] = list(self.zoo)
        document["properties"] = list(self.properties)
        return document

    @property
    def hash(self):
        document = self.to_dict()
        del document["out"], document["jobs"]
        return config_hash(document)

    def operator_family(self):
        """OperatorFamily of the direct, inverse and smoothness_of_operator suites"""
        family = self.kernel["family"]
        if family == "interpolation":
            return OperatorFamily(kernel=None, epsilon=self.epsilon, seed=self.seed, gamma=self.gamma)
        params = {k: v for k, v in self.kernel.items() if k != "family"}
        kernel = make_kernel(family, quad=self.quadrature, **params)
        return OperatorFamily(kernel=kernel, epsilon=self.epsilon, seed=self.seed, gamma=self.gamma)


def _fail(msg):
    logger.error(msg)
    raise ConfigError(msg)


def _number(document, key, default, kind=float):
    value = document.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{key}: expected a number, got {value!r}")
    if kind is int and float(value) != int(value):
        _fail(f"{key}: expected an integer, got {value!r}")
    return kind(value)


def _sub_dataclass(cls, document, key):
    sub = document.get(key, {})
    if not isinstance(sub, dict):
        _fail(f"{key}: expected an object, got {sub!r}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(sub) - known)
    if unknown:
        _fail(f"{key}: unknown fields {unknown}, choose among {sorted(known)}")
    try:
        return cls(**sub)
    except (TypeError, ValueError) as err:
        _fail(f"{key}: {err}")


def _kernel(document, suite, corollary):
    if suite == "corollary":
        if "kernel" in document:
            _fail(f"kernel: fixed by corollary {corollary.name} ({corollary.family or 'interpolation'})")
        params = dict(corollary.kernel_params)
        return {"family": corollary.family or "interpolation", **params}
    kernel = document.get("kernel", DEFAULT_KERNELS[suite])
    if not isinstance(kernel, dict):
        _fail(f"kernel: expected an object, got {kernel!r}")
    unknown = sorted(set(kernel) - set(KERNEL_KEYS))
    if unknown:
        _fail(f"kernel: unknown fields {unknown}, choose among {list(KERNEL_KEYS)}")
    family = kernel.get("family", DEFAULT_KERNELS[suite]["family"])
    if family not in OPERATOR_KINDS:
        _fail(f"kernel.family: unknown family '{family}', choose among {list(OPERATOR_KINDS)}")
    resolved = {"family": family}
    if family == "bspline":
        order = kernel.get("order", 3)
        if isinstance(order, bool) or not isinstance(order, int) or order < 2:
            _fail(f"kernel.order: B-spline order must be an integer >= 2, got {order!r}")
        resolved["order"] = order
    elif family == "gaussian":
        resolved["normalized"] = bool(kernel.get("normalized", True))
    elif family == "riesz":
        for key, default in (("s", 2.0), ("delta", 1.0)):
            value = _number(kernel, key, default)
            if not value > 0:
                _fail(f"kernel.{key}: must be > 0, got {value}")
            resolved[key] = value
    return resolved


def _ladder(document):
    ladder = document.get("ladder", list(DEFAULT_LADDER))
    if not isinstance(ladder, (list, tuple)) or any(isinstance(v, bool) or not isinstance(v, (int, float))
                                                    for v in ladder):
        _fail(f"ladder: expected a list of numbers, got {ladder!r}")
    ladder = tuple(float(v) for v in ladder)
    if len(ladder) < MIN_RUNGS:
        _fail(f"ladder: at least {MIN_RUNGS} rungs are needed to fit a rate, got {len(ladder)}")
    if any(b != 2 * a for a, b in zip(ladder[:-1], ladder[1:])):
        _fail(f"ladder: rungs must be dyadic and increasing (sigma_k+1 = 2 sigma_k), got {list(ladder)}")
    if ladder[0] < 1 or not math.log2(ladder[0]).is_integer():
        _fail(f"ladder: the first rung must be a power of two >= 1, got {ladder[0]:g}")
    return ladder


def _names(document, key, choices, default):
    value = document.get(key, default)
    if value == "all":
        return tuple(choices)
    if not isinstance(value, (list, tuple)) or not value:
        _fail(f"{key}: expected \"all\" or a non-empty list, got {value!r}")
    unknown = [v for v in value if v not in choices]
    if unknown:
        _fail(f"{key}: unknown entries {unknown}, choose among {list(choices)}")
    return tuple(v for v in choices if v in value)


def config_from_dict(document):
    """validate a decoded JSON document into an ExperimentConfig

    Raises
    ------
    ConfigError
        with the name of the offending field
    """
    if not isinstance(document, dict):
        _fail(f"config: expected a JSON object, got {type(document).__name__}")
    unknown = sorted(set(document) - set(CONFIG_SCHEMA["properties"]))
    if unknown:
        _fail(f"config: unknown fields {unknown}, choose among {sorted(CONFIG_SCHEMA['properties'])}")

    suite = document.get("suite")
    if suite not in SUITES:
        _fail(f"suite: unknown suite {suite!r}, choose among {list(SUITES)}")

    corollary = None
    corollary_id = None
    if suite == "corollary":
        corollary_id = document.get("corollary_id", "cor3S")
        if corollary_id not in COROLLARIES:
            _fail(f"corollary_id: unknown corollary {corollary_id!r}, choose among {list(COROLLARIES)}")
        corollary = COROLLARIES[corollary_id]
    elif "corollary_id" in document:
        _fail(f"corollary_id: only used by the corollary suite, not by '{suite}'")

    p = _number(document, "p", 2.0)
    if not p >= 1:
        _fail(f"p: p >= 1 is required, got {p}")
    if corollary is not None and corollary.p_only is not None and p != corollary.p_only:
        _fail(f"p: {corollary_id} is only available for p={corollary.p_only:g}, got p={p:g}")

    if corollary is not None:
        for key in ("s", "r"):
            given = document.get(key)
            fixed = getattr(corollary, key)
            if given is not None and float(given) != float(fixed):
                _fail(f"{key}: fixed to {fixed:g} by corollary {corollary_id}, got {given}")
        r, s = corollary.r, float(corollary.s)
    else:
        r = _number(document, "r", 1, int)
        s = _number(document, "s", 2.0)
    if r < 1:
        _fail(f"r: r >= 1 is required, got {r}")
    if not s > 0:
        _fail(f"s: s > 0 is required, got {s}")
    if s > 2 * r:
        _fail(f"s: s <= 2r is required (s={s:g}, r={r})")
    if suite != "properties" and not s > 1 / p:
        _fail(f"s: s > 1/p is required for the smoothness equivalences (s={s:g}, p={p:g})")

    gamma = _number(document, "gamma", None if corollary is None else corollary.gamma)
    if gamma is not None and not 0 < gamma < 0.5:
        _fail(f"gamma: 0 < gamma < 1/2 is required, got {gamma}")
    epsilon = _number(document, "epsilon", 0.0 if corollary is None else corollary.epsilon)
    if not 0 <= epsilon < 0.25:
        _fail(f"epsilon: 0 <= epsilon < 1/4 is required, got {epsilon}")

    kernel = _kernel(document, suite, corollary)
    if epsilon > 0 and kernel["family"] != "interpolation":
        _fail("epsilon: irregular grids are only used by Gaussian interpolation (kernel.family=interpolation)")
    if suite == "smoothness_of_operator":
        interpolatory = kernel["family"] in ("sinc", "interpolation") or (
            kernel["family"] == "bspline" and kernel["order"] == 2)
        if not interpolatory:
            _fail(f"kernel.family: smoothness_of_operator needs an interpolatory family "
                  f"(sinc, bspline order 2, interpolation), got {kernel}")
        if epsilon != 0:
            _fail(f"epsilon: smoothness_of_operator needs nested uniform grids, got epsilon={epsilon}")

    property_grid = document.get("property_grid", "default")
    if property_grid not in PROPERTY_GRIDS:
        _fail(f"property_grid: unknown grid {property_grid!r}, choose among {list(PROPERTY_GRIDS)}")

    out = document.get("out", "results")
    if not isinstance(out, str) or not out:
        _fail(f"out: expected a directory name, got {out!r}")
    seed = _number(document, "seed", 0, int)
    if seed < 0:
        _fail(f"seed: must be >= 0, got {seed}")
    jobs = _number(document, "jobs", 1, int)
    if jobs < 1:
        _fail(f"jobs: must be >= 1, got {jobs}")

    config = ExperimentConfig(
        suite=suite,
        corollary_id=corollary_id,
        kernel=kernel,
        p=p,
        r=r,
        s=s,
        gamma=gamma,
        epsilon=epsilon,
        ladder=_ladder(document),
        zoo=_names(document, "zoo", ZOO_NAMES, "all"),
        quadrature=_sub_dataclass(QuadratureSpec, document, "quadrature"),
        thresholds=_sub_dataclass(Thresholds, document, "thresholds"),
        properties=_names(document, "properties", PROPERTY_GROUPS, "all"),
        property_grid=property_grid,
        out=out,
        seed=seed,
        jobs=jobs,
    )
    logger.debug(f"config {config.hash}: {config}")
    return config


def load_config(path, **overrides):
    """read and validate a JSON configuration

    Parameters
    ----------
    path : str or Path
    **overrides
        command-line values (``out``, ``seed``, ``ladder``, ``jobs``); None entries are ignored

    Raises
    ------
    ConfigError
        when the file is missing, is not JSON, or does not validate
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except FileNotFoundError:
        _fail(f"config: no such file '{path}'")
    except json.JSONDecodeError as err:
        _fail(f"config: '{path}' is not valid JSON ({err})")
    if isinstance(document, dict):
        document.update({k: v for k, v in overrides.items() if v is not None})
    logger.info(f"loading config {path}")
    return config_from_dict(document)


def with_overrides(config, **overrides):
    """re-validate ``config`` with command-line overrides"""
    document = {k: v for k, v in config.to_dict().items() if v is not None}
    if config.suite == "corollary":
        for key in ("kernel", "s", "r"):
            document.pop(key, None)
    document.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(document)


def default_config(suite, **values):
    """the configuration of ``suite`` with its defaults"""
    return config_from_dict({"suite": suite, **values})
