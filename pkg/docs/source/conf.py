#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# matchlearn documentation build configuration file

import os
import sys

here = os.path.dirname(__file__)
repo = os.path.join(here, '..', '..')
sys.path.insert(0, repo)

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'matchlearn'
copyright = '2026, The matchlearn developers'
author = 'The matchlearn developers'

# get version from python package:
_version_py = os.path.join(repo, 'matchlearn', '_version.py')
version_ns = {}
with open(_version_py) as f:
    exec(f.read(), version_ns)

version = version_ns['__version__']
release = version_ns['__version__']

language = "en"
exclude_patterns = []
pygments_style = 'sphinx'

autodoc_mock_imports = ['numpy', 'scipy', 'xarray', 'bottleneck', 'psutil']

htmlhelp_basename = 'matchlearndoc'

latex_documents = [
    (master_doc, 'matchlearn.tex', 'matchlearn Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'matchlearn', 'matchlearn Documentation', [author], 1)
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
}

on_rtd = os.environ.get('READTHEDOCS', None) == 'True'

if not on_rtd:  # only import and set the theme if we're building docs locally
    import sphinx_rtd_theme
    html_theme = 'sphinx_rtd_theme'
    html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
