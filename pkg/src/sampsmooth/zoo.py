"""Test functions with known smoothness.

``expected_alpha`` maps (p, measure) to the decay exponent alpha of the measure along a
sigma ladder, O(sigma^-alpha). ``math.inf`` marks members whose decay beats every algebraic
rate; measures of those members saturate at the kernel order instead.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from sampsmooth.funcspace import RealFunction
from sampsmooth.kernels import gaussian_derivative, gaussian_eval, sinc_derivative, sinc_eval

logger = logging.getLogger(__name__)

ZOO_NAMES = ("bump", "hat", "step", "cusp03", "cusp07", "bandlimited", "gaussian")
MEASURES = ("error", "omega", "semidiscrete", "sobolev")


@dataclass(frozen=True, eq=False)
class ZooFunction:
    """a member of the zoo

    Parameters
    ----------
    f : RealFunction
    expected_alpha : dict
        ``{(p, measure): alpha}``; a missing p falls back on the ``(None, measure)`` entry
    description : str
    smooth : bool
        True for C-infinity members
    """

    f: RealFunction
    expected_alpha: dict = field(default_factory=dict)
    description: str = ""
    smooth: bool = False

    @property
    def name(self):
        return self.f.label

    def alpha(self, p, measure="error"):
        """expected exponent of ``measure`` at ``p``, None when unknown"""
        if (p, measure) in self.expected_alpha:
            return self.expected_alpha[(p, measure)]
        return self.expected_alpha.get((None, measure))


def _bump(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    safe = np.where(inside, x, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe**2)), 0.0)


def _step(x):
    x = np.asarray(x, dtype=float)
    return ((x >= -1) & (x <= 1)).astype(float)


def _hat(x):
    return np.maximum(1.0 - np.abs(np.asarray(x, dtype=float)), 0.0)


def _cusp(beta):
    def func(x):
        x = np.asarray(x, dtype=float)
        return np.abs(x) ** beta * _bump(x)

    return func


def _jump_alpha(p):
    return {(None, m): 1.0 / p for m in MEASURES}


def bump():
    return ZooFunction(
        f=RealFunction(func=_bump, window=(-1.0, 1.0), label="bump"),
        expected_alpha={(None, m): math.inf for m in MEASURES},
        description="exp(-1/(1-x^2)) on (-1, 1), C-infinity with compact support",
        smooth=True,
    )


def hat(p=2.0):
    # a kink in L_p: omega_2(f, delta)_p ~ delta^{1 + 1/p}
    alpha = 1.0 + 1.0 / p
    return ZooFunction(
        f=RealFunction(func=_hat, window=(-1.0, 1.0), label="hat", breakpoints=(-1.0, 0.0, 1.0)),
        expected_alpha={(None, m): alpha for m in MEASURES},
        description="(1 - |x|)_+, Lipschitz with three kinks",
    )


def step(p=2.0):
    return ZooFunction(
        f=RealFunction(func=_step, window=(-1.0, 1.0), label="step", breakpoints=(-1.0, 1.0)),
        expected_alpha=_jump_alpha(p),
        description="indicator of [-1, 1], value 1 at both endpoints",
    )


def cusp(beta, p=2.0):
    # |x|^beta at the origin: alpha = beta + 1/p
    alpha = beta + 1.0 / p
    return ZooFunction(
        f=RealFunction(func=_cusp(beta), window=(-1.0, 1.0), label=f"cusp{int(round(10 * beta)):02d}",
                       breakpoints=(0.0,)),
        expected_alpha={(None, m): alpha for m in MEASURES},
        description=f"|x|^{beta:g} times the bump",
    )


def bandlimited(seed=0, n_terms=5):
    """sum_k c_k sinc^2(x - k), k = -2..2, band-limited to |xi| <= 1"""
    rng = np.random.default_rng(seed)
    shifts = np.arange(n_terms) - n_terms // 2
    coefs = rng.uniform(-1.0, 1.0, size=n_terms)

    def func(x):
        x = np.asarray(x, dtype=float)
        return sum(c * np.asarray(sinc_eval(x - k)) ** 2 for c, k in zip(coefs, shifts))

    def deriv(x, m):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape)
        for c, k in zip(coefs, shifts):
            u = x - k
            # Leibniz rule for sinc * sinc
            total = total + c * sum(
                math.comb(m, j) * np.asarray(sinc_derivative(u, j)) * np.asarray(sinc_derivative(u, m - j))
                for j in range(m + 1)
            )
        return total

    return ZooFunction(
        f=RealFunction(func=func, window=(-32.0, 32.0), decay_class="polynomial", decay_order=2.0,
                       label="bandlimited", deriv=deriv),
        expected_alpha={(None, m): math.inf for m in MEASURES},
        description=f"random combination of {n_terms} shifted sinc^2 atoms (seed {seed}), band 1",
        smooth=True,
    )


def gaussian():
    return ZooFunction(
        f=RealFunction(func=gaussian_eval, window=(-6.0, 6.0), decay_class="exponential", label="gaussian",
                       deriv=gaussian_derivative),
        expected_alpha={(None, m): math.inf for m in MEASURES},
        description="exp(-pi x^2)",
        smooth=True,
    )


def zoo(p=2.0, seed=0, names=None):
    """the zoo, in the fixed order of ZOO_NAMES

    Parameters
    ----------
    p : float, optional
        exponent the expected alphas refer to, by default 2
    seed : int, optional
        seed of the band-limited member
    names : list of str, optional
        subset of ZOO_NAMES, by default all
    """
    names = ZOO_NAMES if names is None else names
    unknown = [name for name in names if name not in ZOO_NAMES]
    if unknown:
        msg = f"unknown zoo members {unknown}, choose among {ZOO_NAMES}"
        logger.error(msg)
        raise ValueError(msg)
    builders = {
        "bump": bump,
        "hat": lambda: hat(p),
        "step": lambda: step(p),
        "cusp03": lambda: cusp(0.3, p),
        "cusp07": lambda: cusp(0.7, p),
        "bandlimited": lambda: bandlimited(seed),
        "gaussian": gaussian,
    }
    return [builders[name]() for name in ZOO_NAMES if name in names]
