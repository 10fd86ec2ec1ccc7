"""Weyl sums, complete rational sums, maximal operators and level sets."""

from ._weylsum import *  # noqa: F401,F403
from ._weylsum import __doc__  # noqa: F401

__version__ = "0.1.0"
