"""Convex hull pricing and market power analysis for equal-capacity pools.

Thin re-export of the compiled core; every operation lives in ``chp._core``.
"""

from chp._core import *  # noqa: F401,F403
from chp._core import TOLERANCE  # noqa: F401

__version__ = "0.1.0"
