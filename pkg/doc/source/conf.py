#!/usr/bin/env python
#
# sampsmooth documentation build configuration file.

import sampsmooth
import sampsmooth.log

logger = sampsmooth.log.create_logger(level="INFO")

# -- General configuration ---------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.autosummary",
    "sphinx.ext.doctest",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx_design",
]
templates_path = ["_templates"]
source_suffix = [".rst"]

project = "sampsmooth"
copyright = "2024, LudwigVonKoopa"
author = "LudwigVonKoopa"

version = sampsmooth.__version__
release = sampsmooth.__version__

language = "en"
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
pygments_style = "sphinx"

intersphinx_mapping = {
    "numpy": ("https://numpy.org/doc/stable/", None),
    "pandas": ("https://pandas.pydata.org/pandas-docs/stable/", None),
    "distributed": ("https://distributed.dask.org/en/stable/", None),
}

autosummary_generate = True
# numpy-style docstrings
napoleon_google_docstring = False
napoleon_use_rtype = False

# -- Options for HTML output -------------------------------------------

html_theme = "pydata_sphinx_theme"

html_sidebars = {
    "readme": [],
    "installation": [],
    "usage": [],
    "changelog": [],
}
html_static_path = ["_static"]

html_theme_options = {
    "logo": {
        "text": f"sampsmooth {version}",
    },
}

htmlhelp_basename = "sampsmoothdoc"
