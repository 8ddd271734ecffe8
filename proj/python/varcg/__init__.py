"""Variability-aware call-graph analysis for C code under preprocessor variability."""

from ._varcg import *  # noqa: F401,F403
from ._varcg import __doc__  # noqa: F401
