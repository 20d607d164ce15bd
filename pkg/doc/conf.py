#
# django-polytopes documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

# -- General configuration -----------------------------------------------------

extensions = ["sphinx.ext.autodoc", "sphinx.ext.viewcode", "sphinx.ext.mathjax"]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "django-polytopes"
copyright = "Public Domain"

version = "0.1"
release = "0.1.0"

exclude_patterns = ["_build"]
pygments_style = "sphinx"


# -- Options for HTML output ---------------------------------------------------

html_theme = "default"
html_static_path = ["_static"]
html_show_copyright = False
htmlhelp_basename = "django_polytopesdoc"

# -- Options for LaTeX output --------------------------------------------------

latex_documents = [("index", "django-polytopes.tex", "django\\-polytopes Documentation", "Author", "manual")]

# -- Options for manual page output --------------------------------------------

man_pages = [("index", "django-polytopes", "django-polytopes Documentation", ["Author"], 1)]
