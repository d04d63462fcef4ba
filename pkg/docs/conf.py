# -*- coding: utf-8 -*-
#
# Sphinx configuration for the hovertools documentation.

import os
import sys

__location__ = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.abspath(os.path.join(__location__, os.path.pardir)))

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.intersphinx', 'sphinx.ext.todo',
              'sphinx.ext.viewcode', 'sphinx.ext.doctest']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'hovertools'
copyright = u'2026, hovertools developers'

version = ''
release = ''
try:
    from hovertools import __version__ as version
except ImportError:
    pass
else:
    release = version

exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'alabaster'
htmlhelp_basename = 'hovertools-doc'

python_version = '.'.join(map(str, sys.version_info[0:2]))
intersphinx_mapping = {
    'python': ('https://docs.python.org/' + python_version, None),
    'numpy': ('https://numpy.org/doc/stable/', None),
}


def _autodoc_skip_member(app, what, name, obj, skip, options):
    if name == '__init__':
        return False
    return skip


def setup(app):
    app.connect('autodoc-skip-member', _autodoc_skip_member)
