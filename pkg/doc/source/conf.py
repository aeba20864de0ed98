#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Sphinx configuration for the garchecf API documentation.
"""

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

from garchecf import __version__  # noqa: E402  pylint: disable=wrong-import-position

# pylint: disable=invalid-name, redefined-builtin

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
]
autodoc_member_order = 'bysource'

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'garchecf'
copyright = '2026, garchecf developers'
author = 'garchecf developers'
version = '.'.join(__version__.split('.')[:2])
release = __version__

exclude_patterns = []
pygments_style = 'sphinx'

html_theme = 'classic'
html_static_path = ['_static']
htmlhelp_basename = 'garchecfdoc'

latex_documents = [
    (master_doc, 'garchecf.tex', 'garchecf Documentation', author, 'manual'),
]
man_pages = [
    (master_doc, 'garchecf', 'garchecf Documentation', [author], 1)
]
