"""Robust minimum-variance hedging under variance-forecast uncertainty."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
