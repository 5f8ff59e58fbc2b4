"""Top-level package for sampsmooth: sampling-operator errors and smoothness."""

from importlib import metadata

from sampsmooth import log  # noqa: F401
from sampsmooth.funcspace import QuadratureSpec, RealFunction, lp_norm  # noqa: F401
from sampsmooth.zoo import zoo  # noqa: F401

__version__ = metadata.version(__package__)
__author__ = """LudwigVonKoopa"""
__email__ = "49512274+ludwigVonKoopa@users.noreply.github.com"

del metadata
