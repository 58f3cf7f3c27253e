# Configuration file for the epx-standby documentation

# -- Path setup --------------------------------------------------------------

# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here. If the directory is relative to the
# documentation root, use os.path.abspath to make it absolute, like shown here.
import os
import sys
sys.path.insert(0, os.path.abspath('.'))
sys.path.insert(0, os.path.abspath('..'))

# -- Project information -----------------------------------------------------

project = 'epx-standby'
with open(os.path.join(os.path.abspath('..'), 'epxstandby', 'VERSION')) as f:
    release = f.read().strip()
version = release

# -- General configuration ---------------------------------------------------

extensions = [
    'numpydoc',
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.imgmath',
    'sphinx.ext.intersphinx',
    'sphinx_autodoc_typehints',
    'sphinx.ext.autosummary'
]
html_theme = "pydata_sphinx_theme"
html_theme_options = {}
autodoc_member_order = 'bysource'

autodoc_default_options = {
    'ignore-module-all': True,
}

exclude_patterns = ['_build', 'README.md']
