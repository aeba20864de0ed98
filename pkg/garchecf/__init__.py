"""
GARCH estimation by the empirical characteristic function, with a maximum
likelihood baseline, moment stability diagnostics and Monte Carlo studies.
"""

from ._version import __version__
from .errors import *
from .noise import *
from .garch_core import *
from .stability import *
from .ecf import *
from .mle import *
from .config import *
from .harness import *
